"""Predictor-corrector continuation for the reduced covariance extension equation.

The data are deformed by ``u -> lam * u`` (and ``U -> lam * U``).  At
``lam = 0`` the solution is ``p = 0``; the path ``p(lam)`` is smooth with no
turning points, so it is followed in ``lam`` directly with an Euler
predictor and a Newton corrector.

Reduced unknowns are ``p = P h`` (the first column of ``P``).  With
``x = Gamma p + sigma``::

    a(p, lam) = x - lam (U x + u),   b(p, lam) = x + lam (U x + u)
    H(p, lam) = [I_n 0] S(a) [1; b] - 2 (1 - p_1) s

where ``S(a)`` is the Hankel-plus-Toeplitz matrix of the coefficient vector
``(1, a_1, ..., a_n)`` and ``s_k = sum_j sigma_j sigma_(j+k)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cee import CEEParameters, assemble_solution
from .errors import InvalidInputError, PathTrackingError, SingularJacobianError

__all__ = [
    "HomotopyOptions",
    "HomotopyTrace",
    "TraceRecord",
    "ReducedSystem",
    "S_matrix",
    "reduced_residual",
    "jacobians",
    "continue_path",
    "pole_trajectories",
    "trace_to_csv",
    "solve_homotopy",
]

JACOBIAN_COND_LIMIT = 1e14


@dataclass(frozen=True)
class HomotopyOptions:
    step: float = 0.05
    min_step: float = 1e-6
    tol: float = 1e-10
    max_corrector: int = 10
    schur_margin: float = 1e-9

    def __post_init__(self):
        if not (0 < self.min_step <= self.step <= 1):
            raise InvalidInputError("need 0 < min_step <= step <= 1")
        if self.tol <= 0 or self.max_corrector < 1:
            raise InvalidInputError("tol must be positive and max_corrector >= 1")


def S_matrix(a) -> np.ndarray:
    """Hankel-plus-Toeplitz matrix of ``a = (a_0, ..., a_n)``.

    ``S[i, j] = a_(i+j)`` (zero beyond ``n``) plus ``a_(j-i)`` for ``j >= i``.
    """
    a = np.asarray(a, dtype=float)
    n1 = a.size
    i, j = np.indices((n1, n1))
    hankel = np.where(i + j < n1, a[np.minimum(i + j, n1 - 1)], 0.0)
    toeplitz = np.where(j >= i, a[np.maximum(j - i, 0)], 0.0)
    return hankel + toeplitz


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    params: CEEParameters
    s: np.ndarray = field(init=False)
    Gamma: np.ndarray = field(init=False)

    def __post_init__(self):
        sf = self.params.sigma.coeffs.real
        n = self.params.n
        object.__setattr__(self, "s", np.array([sf[k:] @ sf[: n + 1 - k] for k in range(n)]))
        object.__setattr__(self, "Gamma", self.params.Gamma)

    @property
    def n(self) -> int:
        return self.params.n

    def ab(self, p, lam: float):
        """Coefficient tails of ``a(p, lam)`` and ``b(p, lam)``."""
        x = self.Gamma @ np.asarray(p, dtype=float) + self.params.s
        shift = lam * (self.params.U @ x + self.params.u)
        return x - shift, x + shift

    def is_trivial(self) -> bool:
        return not (np.any(self.params.u) or np.any(self.params.U))


def reduced_residual(p, lam: float, sys: ReducedSystem) -> np.ndarray:
    a, b = sys.ab(p, lam)
    full = S_matrix(np.r_[1.0, a]) @ np.r_[1.0, b]
    return full[:-1] - 2.0 * (1.0 - p[0]) * sys.s


def jacobians(p, lam: float, sys: ReducedSystem):
    """``(dH/dp, dH/dlam)`` in closed form."""
    p = np.asarray(p, dtype=float)
    a, b = sys.ab(p, lam)
    Sa = S_matrix(np.r_[1.0, a])[:-1, 1:]
    Sb = S_matrix(np.r_[1.0, b])[:-1, 1:]
    G = sys.Gamma
    U = sys.params.U
    g = sys.params.g(p)
    Hp = (Sa + Sb) @ G + lam * (Sa - Sb) @ U @ G
    Hp[:, 0] += 2.0 * sys.s
    Hl = (Sa - Sb) @ g
    return Hp, Hl


@dataclass(frozen=True, eq=False)
class TraceRecord:
    lam: float
    p: np.ndarray
    residual: float
    step: float
    poles: np.ndarray
    iterations: int = 0
    cond: float = 1.0


@dataclass(eq=False)
class HomotopyTrace:
    records: list = field(default_factory=list)
    rejected: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    @property
    def min_step(self) -> float:
        steps = [r.step for r in self.records[1:]]
        return min(steps) if steps else 1.0


def _roots_of_tail(tail) -> np.ndarray:
    return np.roots(np.r_[1.0, tail]) if len(tail) else np.zeros(0, dtype=complex)


def _solve(Hp, rhs, lam, p):
    try:
        cond = np.linalg.cond(Hp)
        if not np.isfinite(cond) or cond > JACOBIAN_COND_LIMIT:
            raise np.linalg.LinAlgError(f"condition {cond:.3g}")
        return np.linalg.solve(Hp, rhs), cond
    except np.linalg.LinAlgError as exc:
        raise SingularJacobianError(f"dH/dp singular at lambda = {lam:.6g}: {exc}") from exc


def continue_path(sys: ReducedSystem, opts: HomotopyOptions | None = None):
    """Trace ``p(lam)`` from ``(0, 0)`` to ``lam = 1``.

    Returns ``(p_final, trace)``.  Steps are halved whenever the corrector
    fails, ``p_1`` leaves ``(-inf, 1)`` or ``a``/``b`` lose the Schur
    property, and doubled (up to ``opts.step``) after two consecutive
    accepted steps whose corrector needed at most one Newton iteration.
    """
    opts = opts or HomotopyOptions()
    n = sys.n
    p = np.zeros(n)
    lam = 0.0
    a0, _ = sys.ab(p, 0.0)
    trace = HomotopyTrace([TraceRecord(0.0, p.copy(), float(np.linalg.norm(reduced_residual(p, 0.0, sys))),
                                       0.0, _roots_of_tail(a0))])
    if n == 0:
        trace.records.append(TraceRecord(1.0, p.copy(), 0.0, 1.0, np.zeros(0, dtype=complex)))
        return p, trace
    if sys.is_trivial():
        trace.records.append(TraceRecord(1.0, p.copy(), 0.0, 1.0, _roots_of_tail(a0)))
        return p, trace

    h = opts.step
    easy = 0
    radius = 1.0 - opts.schur_margin
    while lam < 1.0:
        h = min(h, 1.0 - lam)
        Hp, Hl = jacobians(p, lam, sys)
        tangent, _ = _solve(Hp, -Hl, lam, p)
        new_lam = 1.0 if lam + h >= 1.0 - 1e-15 else lam + h
        q = p + (new_lam - lam) * tangent
        ok = False
        iters = 0
        cond = 1.0
        for iters in range(opts.max_corrector + 1):
            r = reduced_residual(q, new_lam, sys)
            res = float(np.linalg.norm(r))
            if res <= opts.tol:
                ok = True
                break
            if iters == opts.max_corrector or not np.isfinite(res):
                break
            Jq, _ = jacobians(q, new_lam, sys)
            dq, cond = _solve(Jq, -r, new_lam, q)
            q = q + dq
        if ok and q[0] < 1.0:
            a, b = sys.ab(q, new_lam)
            poles = _roots_of_tail(a)
            ok = (np.all(np.abs(poles) < radius)
                  and np.all(np.abs(_roots_of_tail(b)) < radius))
        if ok:
            trace.records.append(TraceRecord(new_lam, q.copy(), res, new_lam - lam, poles, iters, cond))
            p, lam = q, new_lam
            easy = easy + 1 if iters <= 1 else 0
            if easy >= 2:
                h = min(2.0 * h, opts.step)
                easy = 0
        else:
            trace.rejected += 1
            easy = 0
            h *= 0.5
            if h < opts.min_step:
                raise PathTrackingError(
                    f"corrector failed at lambda = {lam:.6g} with step below {opts.min_step:g}",
                    lam=lam, p=p.copy())
    return p, trace


def pole_trajectories(trace: HomotopyTrace) -> np.ndarray:
    """Roots of ``a(p(lam), lam)`` per record, columns matched into continuous curves."""
    if not trace.records:
        return np.zeros((0, 0), dtype=complex)
    out = [np.asarray(trace.records[0].poles, dtype=complex)]
    for rec in trace.records[1:]:
        prev = out[-1]
        cur = np.asarray(rec.poles, dtype=complex)
        cost = np.abs(prev[:, None] - cur[None, :])
        rows, cols = linear_sum_assignment(cost)
        matched = np.empty_like(prev)
        matched[rows] = cur[cols]
        out.append(matched)
    return np.array(out)


def trace_to_csv(trace: HomotopyTrace, match_poles: bool = True) -> str:
    """CSV text: lambda, p_1..p_n, residual, step, then pole_re/pole_im pairs."""
    n = trace.records[0].p.size if trace.records else 0
    poles = pole_trajectories(trace) if match_poles else np.array([r.poles for r in trace.records])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["lambda"] + [f"p_{k + 1}" for k in range(n)] + ["residual", "step"]
    for k in range(n):
        header += [f"pole_re_{k + 1}", f"pole_im_{k + 1}"]
    w.writerow(header)
    for rec, pl in zip(trace.records, poles):
        row = [rec.lam, *rec.p, rec.residual, rec.step]
        for z in pl:
            row += [z.real, z.imag]
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def solve_homotopy(params: CEEParameters, opts: HomotopyOptions | None = None):
    """Run the continuation and assemble the full solution; returns ``(solution, trace)``."""
    sys_ = ReducedSystem(params)
    p, trace = continue_path(sys_, opts)
    return assemble_solution(p, params), trace
