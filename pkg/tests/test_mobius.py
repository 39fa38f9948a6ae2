import numpy as np
import pytest

from ceeinterp.errors import InvalidInputError
from ceeinterp.mobius import INF, Mobius, is_inf
from ceeinterp.poly import Polynomial, RationalFunction, eval_with_derivatives


def _f():
    return RationalFunction(Polynomial([1, 0.3, -0.2]), Polynomial([1, -0.1, 0.05]), 0.5)


class TestMobius:
    def test_identity_and_reciprocal(self):
        assert Mobius.identity()(2 + 1j) == 2 + 1j
        assert is_inf(Mobius.reciprocal()(0))
        assert Mobius.reciprocal()(INF) == 0

    def test_automorphism_sends_pivot_to_infinity(self):
        m = Mobius.disc_exterior_automorphism(-1.3526)
        assert is_inf(m(-1.3526))

    @pytest.mark.parametrize("pivot", [2.0, -1.5, 1.2 + 0.9j])
    def test_automorphism_preserves_circle(self, pivot):
        m = Mobius.disc_exterior_automorphism(pivot)
        theta = np.linspace(0, 2 * np.pi, 17)
        assert np.allclose([abs(m(np.exp(1j * t))) for t in theta], 1.0)
        assert abs(m(3.0 * np.exp(0.4j))) > 1

    def test_pivot_inside_rejected(self):
        with pytest.raises(InvalidInputError):
            Mobius.disc_exterior_automorphism(0.5)

    def test_inverse_and_composition(self):
        m = Mobius([[1, 2], [3, 5]])
        assert abs((m.inverse() @ m)(0.7 + 0.1j) - (0.7 + 0.1j)) < 1e-14


class TestPushTaylor:
    @pytest.mark.parametrize("z0", [2.0, -1.7 + 0.3j, INF])
    def test_transport_matches_direct_expansion(self, z0):
        # data of F at z0 pushed through M equal data of F o M^-1 at M(z0)
        f = _f()
        m = Mobius.disc_exterior_automorphism(1.5 + 0.5j)
        coeffs = eval_with_derivatives(f, z0, 3)
        y0, got = m.push_taylor(coeffs, z0)
        inv = m.inverse()
        # F o M^-1 as a rational function of y
        num, _ = inv.pull_polynomial(f.numerator.coeffs, 2)
        den, _ = inv.pull_polynomial(f.denominator.coeffs, 2)
        g = RationalFunction(Polynomial(num), Polynomial(den), f.scale)
        assert np.allclose(got, eval_with_derivatives(g, y0, 3), atol=1e-10)

    def test_pull_polynomial_denominator(self):
        m = Mobius([[2, 1], [1, 3]])
        num, den = m.pull_polynomial([1.0, -0.5, 0.25])
        z = 0.4 + 0.2j
        y = m(z)
        assert abs(np.polyval(num, z) / np.polyval(den, z) - np.polyval([1.0, -0.5, 0.25], y)) < 1e-12
