import numpy as np
import pytest

from ceeinterp.poly import poly_from_roots
from ceeinterp.problem import InterpolationProblem

# Golden example data: eight interpolation pairs and seven spectral zeros.
GOLDEN_NODES = [complex("inf"), 0.8709 - 0.8967j, 0.8709 + 0.8967j, 0.3344 - 1.2044j, 0.3344 + 1.2044j,
                1.1, -0.6474 + 0.8893j, -0.6474 - 0.8893j]
GOLDEN_VALUES = [0.5, 0.7973 + 0.2568j, 0.7973 - 0.2568j, 0.5451 + 0.3645j, 0.5451 - 0.3645j, 0.7693,
                 0.7693 + 0.7693j, 0.7693 - 0.7693j]
GOLDEN_ZEROS = [0.95 * np.exp(1.22j), 0.95 * np.exp(-1.22j), 0.95 * np.exp(2.3j), 0.95 * np.exp(-2.3j),
                0.99j, -0.99j, -0.99]
GOLDEN_A = [1, -1.771, 1.815, -1.205, 1.28, -1.814, 1.773, -0.8775]
GOLDEN_B = [1, -1.364, 1.112, -0.3812, -0.4479, 1.119, -1.412, 0.8781]

# Spectral-estimation model: zeros and poles of sigma / a.
SPEC_ZEROS = [r * np.exp(s * 1j * t) for r, t in ((0.92, 1.5), (0.49, 1.4), (0.95, 2.5)) for s in (1, -1)]
SPEC_POLES = [r * np.exp(s * 1j * t) for r, t in ((0.8, 2.1), (0.83, 1.34), (0.76, 0.8)) for s in (1, -1)]


@pytest.fixture(scope="session")
def golden_problem():
    return InterpolationProblem(tuple(GOLDEN_NODES), tuple([v] for v in GOLDEN_VALUES))


@pytest.fixture(scope="session")
def golden_result(golden_problem):
    from ceeinterp.solver import solve_interpolation

    return solve_interpolation(golden_problem, GOLDEN_ZEROS)


@pytest.fixture(scope="session")
def spec_model():
    return poly_from_roots(SPEC_ZEROS, realify=True), poly_from_roots(SPEC_POLES, realify=True)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


# Control example: plant, gamma and s-plane spectral zeros.
PLANT_NUM = [-8.0, 62.0, 200.0]
PLANT_DEN = [10.0, 8.0, 7.0, 0.5, 0.0]
DESIGN_GAMMA = 1.8
DESIGN_ZEROS = [0.9j, -0.9j, 5.0, complex("inf")]
REFERENCE_C_NUM = [6.986, 5.589, 4.89, 0.3493]
REFERENCE_C_DEN = [1, 21.43, 144.9, 336.2, 233]


@pytest.fixture(scope="session")
def example_plant():
    from ceeinterp.control import Plant

    return Plant(PLANT_NUM, PLANT_DEN)


@pytest.fixture(scope="session")
def example_spec(example_plant):
    from ceeinterp.control import SensitivitySpec, sensitivity_constraints

    return SensitivitySpec(DESIGN_GAMMA, tuple(sensitivity_constraints(example_plant)), tuple(DESIGN_ZEROS))


@pytest.fixture(scope="session")
def example_design(example_plant, example_spec):
    from ceeinterp.control import design_controller

    return design_controller(example_plant, example_spec)
