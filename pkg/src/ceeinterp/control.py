"""Sensitivity shaping by analytic interpolation.

For a continuous-time plant ``P = nP / dP`` in unity feedback, internal
stability and controller properness force interpolation conditions on the
sensitivity ``S = 1 / (1 + P C)`` at the closed right half-plane poles and
zeros of ``P`` (and at infinity).  A fractional-linear map sends the right
half-plane to the exterior of the unit disc and ``f = (gamma + S) / (gamma - S)``
turns ``|S| < gamma`` into positive realness, so the covariance extension
solver produces an ``S`` of bounded degree with ``||S||_inf < gamma``; the
controller follows from ``C = (1 - S) / (S P)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import (
    CancellationError,
    DegeneratePlantError,
    GammaError,
    InvalidInputError,
    UnstableLoopError,
)
from .homotopy import HomotopyOptions
from .mobius import INF, Mobius, is_inf
from .poly import Polynomial, RationalFunction, eval_with_derivatives, series_divide
from .problem import InterpolationProblem
from .solver import InterpolationResult, solve_interpolation

__all__ = [
    "Plant",
    "Constraint",
    "SensitivitySpec",
    "ControllerDesign",
    "StepMetrics",
    "UNSTABLE_BOUNDARY",
    "sensitivity_constraints",
    "half_plane_map",
    "reflect_spectral_zeros",
    "build_disc_problem",
    "sensitivity_from_interpolant",
    "recover_controller",
    "design_controller",
    "step_metrics",
    "sensitivity_response",
    "hinf_norm",
    "s_ideal",
]

UNSTABLE_BOUNDARY = -1e-9
ROOT_MATCH_TOL = 1e-4
TRIM_TOL = 1e-8


def _group_roots(roots, tol=1e-6):
    """Cluster numerically repeated roots: list of (representative, multiplicity)."""
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) <= tol * max(1.0, abs(r)):
                g[1].append(r)
                break
        else:
            groups.append([r, [r]])
    return [(complex(np.mean(members)), len(members)) for _, members in groups]


@dataclass(frozen=True, eq=False)
class Plant:
    numerator: Polynomial
    denominator: Polynomial

    def __post_init__(self):
        num = self.numerator if isinstance(self.numerator, Polynomial) else Polynomial(self.numerator)
        den = self.denominator if isinstance(self.denominator, Polynomial) else Polynomial(self.denominator)
        if den.is_zero or num.is_zero:
            raise InvalidInputError("plant numerator and denominator must be nonzero")
        if num.degree > den.degree:
            raise InvalidInputError("plant must be proper")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def relative_degree(self) -> int:
        return self.denominator.degree - self.numerator.degree

    def __call__(self, s):
        return self.numerator(s) / self.denominator(s)

    def unstable_poles(self):
        roots = self.denominator.roots()
        return _group_roots([r for r in roots if r.real >= UNSTABLE_BOUNDARY])

    def unstable_zeros(self):
        roots = self.numerator.roots()
        return _group_roots([r for r in roots if r.real >= UNSTABLE_BOUNDARY])


@dataclass(frozen=True)
class Constraint:
    """``S^(order)(node) / order! = value``; at ``inf`` the local coordinate is ``1/s``."""

    node: complex
    order: int
    value: complex


def sensitivity_constraints(plant: Plant, controller_relative_degree: int = 1) -> list:
    """Interpolation conditions on ``S`` implied by internal stability and properness.

    * ``S`` vanishes to the pole multiplicity at each closed right half-plane pole;
    * ``S - 1`` vanishes to the zero multiplicity at each closed right half-plane zero;
    * ``S - 1`` vanishes to order ``relP + relC`` at infinity.
    """
    if controller_relative_degree < 0:
        raise InvalidInputError("controller relative degree must be non-negative")
    poles = plant.unstable_poles()
    zeros = plant.unstable_zeros()
    for p, _ in poles:
        for z, _ in zeros:
            if abs(p - z) <= 1e-6 * max(1.0, abs(p)):
                raise DegeneratePlantError(f"unstable pole and zero coincide near {p}")
    out = []
    for p, m in poles:
        out += [Constraint(_clean(p), k, 0.0) for k in range(m)]
    for z, m in zeros:
        out += [Constraint(_clean(z), k, 1.0 if k == 0 else 0.0) for k in range(m)]
    r = plant.relative_degree + controller_relative_degree
    out += [Constraint(INF, k, 1.0 if k == 0 else 0.0) for k in range(r)]
    return out


def _clean(z, tol=1e-12):
    z = complex(z)
    re = 0.0 if abs(z.real) <= tol else z.real
    im = 0.0 if abs(z.imag) <= tol * max(1.0, abs(z)) else z.imag
    return complex(re, im)


def half_plane_map(k: float = 10.0 / 9.0) -> Mobius:
    """``z = k (1 + s) / (1 - s)``: the closed right half-plane onto ``|z| >= k``."""
    if k <= 1:
        raise InvalidInputError("the half-plane map needs k > 1 to clear the unit circle")
    return Mobius([[k, k], [-1, 1]])


def reflect_spectral_zeros(s_zeros, mob: Mobius) -> list:
    """Disc-frame spectral zeros ``1 / conj(mob(s))`` of points given in the s-plane.

    Points on the imaginary axis map onto the circle ``|z| = 1/k`` and the
    point at infinity onto ``-1/k``.
    """
    out = []
    for s in s_zeros:
        z = mob(INF if is_inf(s) else complex(s))
        if z == 0 or is_inf(z):
            raise InvalidInputError(f"spectral zero {s} has no reflection")
        out.append(1.0 / np.conj(z))
    return out


@dataclass(frozen=True, eq=False)
class SensitivitySpec:
    gamma: float
    constraints: tuple
    spectral_zeros: tuple = ()
    zeros_domain: str = "s"
    mobius_k: float = 10.0 / 9.0
    controller_relative_degree: int = 1
    pivot: int | None = None

    @property
    def mobius(self) -> Mobius:
        return half_plane_map(self.mobius_k)

    def disc_spectral_zeros(self) -> list:
        if self.zeros_domain == "s":
            return reflect_spectral_zeros(self.spectral_zeros, self.mobius)
        if self.zeros_domain == "z":
            return [complex(z) for z in self.spectral_zeros]
        raise InvalidInputError(f"unknown spectral-zero domain {self.zeros_domain!r}")


def _grouped_constraints(constraints):
    nodes, values = [], []
    for c in constraints:
        key = next((j for j, z in enumerate(nodes)
                    if (is_inf(z) and is_inf(c.node)) or
                    (not is_inf(z) and not is_inf(c.node) and abs(z - c.node) <= 1e-12 * max(1, abs(z)))), None)
        if key is None:
            nodes.append(c.node)
            values.append({})
            key = len(nodes) - 1
        if c.order in values[key]:
            raise InvalidInputError(f"duplicate constraint of order {c.order} at {c.node}")
        values[key][c.order] = complex(c.value)
    seqs = []
    for z, vals in zip(nodes, values):
        orders = sorted(vals)
        if orders != list(range(len(orders))):
            raise InvalidInputError(f"constraint orders at {z} must be 0..m-1, got {orders}")
        seqs.append(np.array([vals[k] for k in orders]))
    return nodes, seqs


def build_disc_problem(spec: SensitivitySpec) -> InterpolationProblem:
    """Positive-real interpolation data for ``f = (gamma + S)/(gamma - S)`` in the disc-exterior frame."""
    gamma = float(spec.gamma)
    if not gamma > 1:
        raise GammaError(f"gamma = {gamma:g} must exceed 1")
    mob = spec.mobius
    nodes, seqs = _grouped_constraints(spec.constraints)
    out_nodes, out_vals = [], []
    for s, S in zip(nodes, seqs):
        if abs(S[0]) >= gamma:
            raise GammaError(f"|S({s})| = {abs(S[0]):g} is not below gamma = {gamma:g}")
        num = S.copy()
        num[0] += gamma
        den = -S.copy()
        den[0] += gamma
        f = series_divide(num, den, S.size - 1)
        z, fz = mob.push_taylor(f, INF if is_inf(s) else s)
        out_nodes.append(z)
        out_vals.append(_tidy(fz))
    return InterpolationProblem(tuple(out_nodes), tuple(out_vals))


def _tidy(c, tol=1e-14):
    c = np.array(c, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(c))))
    c.real[np.abs(c.real) <= tol * scale] = 0.0
    c.imag[np.abs(c.imag) <= tol * scale] = 0.0
    return c


def _trim(c, tol=TRIM_TOL):
    c = np.real_if_close(np.asarray(c, dtype=complex), tol=1e6)
    c = np.where(np.abs(c) <= tol * np.max(np.abs(c)), 0.0, c)
    nz = np.flatnonzero(c)
    return c[nz[0]:] if nz.size else np.zeros(1)


def sensitivity_from_interpolant(f: RationalFunction, spec: SensitivitySpec) -> RationalFunction:
    """``S(s) = gamma (f - 1)/(f + 1)`` with ``f`` evaluated at ``z = mob(s)``."""
    d = max(f.numerator.degree, f.denominator.degree)
    nf, _ = spec.mobius.pull_polynomial(f.numerator.coeffs, d)
    df, _ = spec.mobius.pull_polynomial(f.denominator.coeffs, d)
    nf = f.scale * nf
    num = _trim(spec.gamma * np.polysub(nf, df))
    den = _trim(np.polyadd(nf, df))
    lead = den[0]
    return RationalFunction(Polynomial(np.real_if_close(num / lead)), Polynomial(np.real_if_close(den / lead)))


def _cancel(num, den, required, tol=ROOT_MATCH_TOL):
    """Remove ``required`` roots from both ``num`` and ``den``; error when one is missing."""
    nr = list(np.roots(num)) if len(num) > 1 else []
    dr = list(np.roots(den)) if len(den) > 1 else []
    missing = []
    for r in required:
        jn = int(np.argmin([abs(x - r) for x in nr])) if nr else -1
        jd = int(np.argmin([abs(x - r) for x in dr])) if dr else -1
        ok_n = jn >= 0 and abs(nr[jn] - r) <= tol * (1 + abs(r))
        ok_d = jd >= 0 and abs(dr[jd] - r) <= tol * (1 + abs(r))
        if not (ok_n and ok_d):
            missing.append(complex(r))
            continue
        nr.pop(jn)
        dr.pop(jd)
    if missing:
        raise CancellationError(f"expected common factors not found at {missing}", residual_roots=missing)
    k = num[0] / den[0]
    return k * np.poly(nr) if nr else np.array([k]), np.poly(dr) if dr else np.ones(1)


@dataclass(frozen=True, eq=False)
class ControllerDesign:
    controller: RationalFunction
    sensitivity: RationalFunction
    closed_loop_poles: np.ndarray
    result: InterpolationResult | None = None
    problem: InterpolationProblem | None = None

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.closed_loop_poles.real < 0))

    @property
    def relative_degree(self) -> int:
        c = self.controller
        return c.denominator.degree - c.numerator.degree if not c.numerator.is_zero else np.inf


def recover_controller(f: RationalFunction, spec: SensitivitySpec, plant: Plant) -> ControllerDesign:
    """``C = (1 - S) / (S P)`` with the plant's unstable poles and zeros cancelled."""
    S = sensitivity_from_interpolant(f, spec)
    nS, dS = S.numerator.coeffs, S.denominator.coeffs
    one_minus = _trim(np.polysub(dS, nS)) if not np.allclose(dS, nS) else np.zeros(1)
    if not np.any(one_minus):
        zero = RationalFunction(Polynomial([0.0]), Polynomial([1.0]))
        return ControllerDesign(zero, S, plant.denominator.roots())
    num = np.polymul(one_minus, plant.denominator.coeffs)
    den = np.polymul(nS, plant.numerator.coeffs)
    required = [p for p, m in plant.unstable_poles() for _ in range(m)]
    required += [z for z, m in plant.unstable_zeros() for _ in range(m)]
    num, den = _cancel(_trim(num), _trim(den), required)
    lead = den[0]
    num, den = np.real_if_close(num / lead, tol=1e6), np.real_if_close(den / lead, tol=1e6)
    C = RationalFunction(Polynomial(num), Polynomial(den))
    char = np.polyadd(np.polymul(plant.denominator.coeffs, den), np.polymul(plant.numerator.coeffs, num))
    return ControllerDesign(C, S, np.roots(_trim(char)))


def design_controller(plant: Plant, spec: SensitivitySpec,
                      options: HomotopyOptions | None = None) -> ControllerDesign:
    problem = build_disc_problem(spec)
    result = solve_interpolation(problem, spec.disc_spectral_zeros(), pivot=spec.pivot, options=options)
    d = recover_controller(result.f, spec, plant)
    return ControllerDesign(d.controller, d.sensitivity, d.closed_loop_poles, result, problem)


@dataclass(frozen=True)
class StepMetrics:
    settling_time: float
    overshoot: float
    max_control: float
    settled: bool
    band: float = 0.05
    time: np.ndarray = field(default=None, repr=False, compare=False)
    output: np.ndarray = field(default=None, repr=False, compare=False)
    control: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def overshoot_percent(self) -> float:
        return 100.0 * self.overshoot


def _closed_loop_step(num, den, t, dt):
    A, B, Cm, D = signal.tf2ss(num, den)
    sysd = signal.cont2discrete((A, B, Cm, D), dt, method="zoh")
    _, y, _ = signal.dlsim(sysd[:4] + (dt,), np.ones_like(t), t=t)
    return np.ravel(y)


def step_metrics(plant: Plant, controller: RationalFunction, horizon: float = 20.0, dt: float = 1e-3,
                 band: float = 0.05) -> StepMetrics:
    """Unit-step reference response of the unity-feedback loop.

    The closed loop is discretized exactly (zero-order hold on the step
    input) at ``dt``.  ``settling_time`` is the first time after which
    ``|y - 1| <= band`` for the rest of the horizon (``inf`` if never).
    """
    nP, dP = plant.numerator.coeffs, plant.denominator.coeffs
    nC, dC = controller.numerator.coeffs * controller.scale, controller.denominator.coeffs
    t = np.arange(0.0, horizon + dt / 2, dt)
    if not np.any(nC):
        y = np.zeros_like(t)
        u = np.zeros_like(t)
    else:
        char = np.polyadd(np.polymul(dP, dC), np.polymul(nP, nC))
        poles = np.roots(char)
        if np.any(poles.real >= 0):
            raise UnstableLoopError(f"closed loop has poles {poles[poles.real >= 0]} in the right half-plane")
        y = _closed_loop_step(np.polymul(nP, nC), char, t, dt)
        u = _closed_loop_step(np.polymul(dP, nC), char, t, dt)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > 1e6:
            raise UnstableLoopError("step response diverges")
    outside = np.flatnonzero(np.abs(y - 1.0) > band)
    if outside.size == 0:
        settled, ts = True, 0.0
    elif outside[-1] == t.size - 1:
        settled, ts = False, float("inf")
    else:
        settled, ts = True, float(t[outside[-1] + 1])
    return StepMetrics(ts, float(np.max(y) - 1.0), float(np.max(np.abs(u))), settled, band, t, y, u)


def sensitivity_response(plant: Plant, controller: RationalFunction, omega) -> np.ndarray:
    """``S(i omega) = 1 / (1 + P C)`` evaluated from the loop directly."""
    s = 1j * np.asarray(omega, dtype=float)
    L = plant(s) * controller(s)
    return 1.0 / (1.0 + L)


def hinf_norm(plant: Plant, controller: RationalFunction, points: int = 10_000,
              omega_range=(1e-3, 1e3)) -> float:
    """``max |S(i omega)|`` over ``omega = 0`` and a log-spaced grid."""
    omega = np.concatenate([[0.0], np.logspace(np.log10(omega_range[0]), np.log10(omega_range[1]), points - 1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.abs(sensitivity_response(plant, controller, omega))
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return float(np.max(vals))


def s_ideal(s):
    """Reference sensitivity ``s (s + 0.9) / (s^2 + 0.9 s + 0.75^2)``."""
    s = np.asarray(s)
    return s * (s + 0.9) / (s**2 + 0.9 * s + 0.75**2)


def constraint_residual(S: RationalFunction, constraints) -> float:
    """Max mismatch of ``S`` against a constraint list."""
    nodes, seqs = _grouped_constraints(constraints)
    err = 0.0
    for s, v in zip(nodes, seqs):
        got = eval_with_derivatives(S, s, v.size - 1)
        err = max(err, float(np.max(np.abs(got - v))))
    return err
