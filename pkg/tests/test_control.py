import numpy as np
import pytest

from ceeinterp.control import (
    Constraint,
    Plant,
    SensitivitySpec,
    build_disc_problem,
    constraint_residual,
    half_plane_map,
    hinf_norm,
    recover_controller,
    reflect_spectral_zeros,
    s_ideal,
    sensitivity_constraints,
    sensitivity_response,
    step_metrics,
)
from ceeinterp.errors import DegeneratePlantError, GammaError, InvalidInputError, UnstableLoopError
from ceeinterp.mobius import INF, is_inf
from ceeinterp.poly import Polynomial, RationalFunction

from conftest import DESIGN_GAMMA


def _as_set(constraints):
    out = set()
    for c in constraints:
        node = "inf" if is_inf(c.node) else round(complex(c.node).real, 4) + 1j * round(complex(c.node).imag, 4)
        out.add((node, c.order, complex(c.value)))
    return out


class TestPlant:
    def test_proper(self):
        with pytest.raises(InvalidInputError):
            Plant([1, 0, 0], [1, 1])

    def test_example_roots(self, example_plant):
        assert example_plant.relative_degree == 2
        assert [(round(abs(p), 8), m) for p, m in example_plant.unstable_poles()] == [(0.0, 1)]
        (z, m), = example_plant.unstable_zeros()
        assert z.real == pytest.approx(10.2008, abs=1e-4) and m == 1


class TestConstraints:
    def test_example(self, example_plant):
        got = _as_set(sensitivity_constraints(example_plant))
        want = {(0j, 0, 0j), ("inf", 0, 1 + 0j), ("inf", 1, 0j), ("inf", 2, 0j), (10.2008 + 0j, 0, 1 + 0j)}
        assert got == want

    def test_stable_relative_degree_one(self):
        got = _as_set(sensitivity_constraints(Plant([1.0], [1.0, 1.0])))
        assert got == {("inf", 0, 1 + 0j), ("inf", 1, 0j)}

    def test_double_unstable_pole(self):
        got = _as_set(sensitivity_constraints(Plant([1.0], [1.0, -2.0, 1.0])))
        assert (1 + 0j, 0, 0j) in got and (1 + 0j, 1, 0j) in got

    def test_pole_zero_coincidence(self):
        with pytest.raises(DegeneratePlantError):
            sensitivity_constraints(Plant([1.0, -1.0], [1.0, 1.0, -2.0]))


class TestMaps:
    def test_half_plane_map(self):
        m = half_plane_map(10 / 9)
        assert m(0) == pytest.approx(10 / 9)
        assert m(INF) == pytest.approx(-10 / 9)
        assert abs(m(2j)) == pytest.approx(10 / 9)  # imaginary axis -> circle of radius k
        assert abs(m(1.0)) > 1e10 or is_inf(m(1.0))

    def test_reflection(self):
        z = reflect_spectral_zeros([0.9j, -0.9j, 5.0, INF], half_plane_map(10 / 9))
        assert np.allclose(np.abs(z[:2]), 0.9) and np.allclose(np.angle(z[:2]), [1.4656, -1.4656], atol=1e-4)
        assert z[2] == pytest.approx(-0.6) and z[3] == pytest.approx(-0.9)


class TestDiscProblem:
    def test_example_values(self, example_spec):
        prob = build_disc_problem(example_spec)
        data = {round(z.real, 4): v for z, v in zip(prob.nodes, prob.values)}
        assert np.allclose(data[round(10 / 9, 4)], [1.0])
        assert np.allclose(data[-1.3526], [3.5])
        assert np.allclose(data[round(-10 / 9, 4)], [3.5, 0, 0])

    @pytest.mark.parametrize("gamma", [1.0, 0.5])
    def test_gamma_too_small(self, example_spec, gamma):
        spec = SensitivitySpec(gamma, example_spec.constraints, example_spec.spectral_zeros)
        with pytest.raises(GammaError):
            build_disc_problem(spec)

    def test_constraint_above_gamma(self):
        spec = SensitivitySpec(1.5, (Constraint(0.0, 0, 2.0),))
        with pytest.raises(GammaError):
            build_disc_problem(spec)

    def test_zero_sensitivity_gives_one(self):
        prob = build_disc_problem(SensitivitySpec(3.0, (Constraint(0.5, 0, 0.0),)))
        assert np.allclose(prob.values[0], [1.0])


class TestRecovery:
    def test_open_loop(self, example_plant, example_spec):
        g = DESIGN_GAMMA
        f = RationalFunction(Polynomial([(g + 1) / (g - 1)]), Polynomial([1.0]))
        d = recover_controller(f, example_spec, example_plant)
        assert d.controller.numerator.is_zero

    def test_example_design(self, example_design, example_plant, example_spec):
        d = example_design
        assert d.is_stable
        assert d.relative_degree >= 1
        assert constraint_residual(d.sensitivity, example_spec.constraints) <= 1e-8
        assert hinf_norm(example_plant, d.controller) < DESIGN_GAMMA

    def test_sensitivity_consistent(self, example_design, example_plant):
        omega = np.logspace(-2, 2, 50)
        direct = sensitivity_response(example_plant, example_design.controller, omega)
        assert np.allclose(direct, example_design.sensitivity(1j * omega), atol=1e-8)


class TestStepMetrics:
    def test_example(self, example_design, example_plant):
        m = step_metrics(example_plant, example_design.controller)
        assert m.settled
        assert m.settling_time == pytest.approx(6.55, abs=0.15)
        assert m.overshoot_percent == pytest.approx(8.86, abs=0.3)
        assert m.max_control == pytest.approx(0.13, abs=0.01)

    def test_no_controller(self, example_plant):
        zero = RationalFunction(Polynomial([0.0]), Polynomial([1.0]))
        m = step_metrics(example_plant, zero, horizon=5.0, dt=1e-2)
        assert not m.settled and m.settling_time == float("inf")
        assert np.allclose(m.output, 0)

    def test_unstable_loop(self):
        plant = Plant([1.0], [1.0, -1.0])
        C = RationalFunction(Polynomial([0.5]), Polynomial([1.0]))
        with pytest.raises(UnstableLoopError):
            step_metrics(plant, C, horizon=1.0)

    def test_first_order_settling(self):
        # P = 1/s, C = 1 -> y = 1 - exp(-t); 5% band reached at t = ln 20
        m = step_metrics(Plant([1.0], [1.0, 0.0]), RationalFunction(Polynomial([1.0]), Polynomial([1.0])),
                         horizon=10.0, dt=1e-3)
        assert m.settling_time == pytest.approx(np.log(20), abs=2e-3)
        assert m.overshoot <= 1e-12


class TestIdealSensitivity:
    def test_values(self):
        assert s_ideal(0.0) == 0
        assert abs(s_ideal(1e6) - 1) < 1e-5
