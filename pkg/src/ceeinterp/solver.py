"""End-to-end solve: raw interpolation data and spectral zeros to an interpolant.

The steps are normalize -> Caratheodory form -> Pick structure -> Pick test
-> ``(u, U)`` -> continuation -> ``P`` -> interpolant mapped back to the
caller's frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cee import CEEParameters, CEESolution
from .errors import InfeasibleError, InvalidInputError
from .homotopy import HomotopyOptions, HomotopyTrace, solve_homotopy
from .mobius import is_inf
from .poly import Polynomial, RationalFunction, poly_from_roots
from .problem import (
    CaratheodoryProblem,
    InterpolationProblem,
    PickStructure,
    TransformRecord,
    UParameters,
    build_structure,
    normalize,
    pick_solvable,
    to_caratheodory,
    w_to_u,
)

__all__ = ["InterpolationResult", "solve_interpolation", "sigma_in_normalized_frame"]


def sigma_in_normalized_frame(zeros, n: int, record: TransformRecord) -> Polynomial:
    """Monic real ``sigma`` whose roots are the given spectral zeros mapped by the node map.

    ``zeros`` may be ``None`` (maximum-entropy choice ``sigma = z^n``), a
    sequence of roots inside the unit disc, or a :class:`Polynomial`.
    Zeros at infinity are not allowed (use 0 instead).
    """
    if zeros is None:
        roots = np.zeros(n, dtype=complex)
    elif isinstance(zeros, Polynomial):
        roots = zeros.roots()
    else:
        roots = np.asarray(list(zeros), dtype=complex)
    if roots.size != n:
        raise InvalidInputError(f"need {n} spectral zeros, got {roots.size}")
    if np.any(np.abs(roots) >= 1):
        raise InvalidInputError("spectral zeros must lie inside the open unit disc")
    mapped = [record.node_map(r) for r in roots]
    return poly_from_roots(mapped, realify=True)


@dataclass(frozen=True, eq=False)
class InterpolationResult:
    problem: InterpolationProblem
    normalized: InterpolationProblem
    record: TransformRecord
    caratheodory: CaratheodoryProblem
    structure: PickStructure
    uparams: UParameters
    params: CEEParameters
    solution: CEESolution
    trace: HomotopyTrace
    pick_min_eigenvalue: float

    @property
    def f_normalized(self) -> RationalFunction:
        return self.solution.f

    @property
    def f(self) -> RationalFunction:
        """Interpolant in the caller's frame: ``f(z) = f_norm(M(z)) / scale + i shift``."""
        rec = self.record
        n = self.solution.n
        num_b, _ = rec.node_map.pull_polynomial(self.solution.b.coeffs, n)
        num_a, _ = rec.node_map.pull_polynomial(self.solution.a.coeffs, n)
        num = np.polyadd(num_b, 2j * rec.shift * rec.scale * num_a)
        num, den = _realify(num), _realify(num_a)
        lead = den[np.flatnonzero(np.abs(den) > 0)[0]] if np.any(den) else 1.0
        return RationalFunction(Polynomial(num / lead), Polynomial(den / lead), 0.5 / rec.scale)

    def interpolation_error(self) -> float:
        """Max over all data of ``|f^(k)(z_j)/k! - v_jk|``."""
        from .poly import eval_with_derivatives

        f = self.f
        err = 0.0
        for z, v in zip(self.problem.nodes, self.problem.values):
            got = eval_with_derivatives(f, z, v.size - 1)
            err = max(err, float(np.max(np.abs(got - v))))
        return err

    def normalized_interpolation_error(self) -> float:
        from .poly import eval_with_derivatives

        f = self.solution.f
        err = 0.0
        for z, v in zip(self.normalized.nodes, self.normalized.values):
            got = eval_with_derivatives(f, z, v.size - 1)
            err = max(err, float(np.max(np.abs(got - v))))
        return err


def _realify(c, tol=1e-10):
    c = np.asarray(c, dtype=complex)
    if np.max(np.abs(c.imag), initial=0.0) <= tol * max(1.0, np.max(np.abs(c))):
        return c.real
    return c


def solve_interpolation(problem: InterpolationProblem, spectral_zeros=None, pivot: int | None = None,
                        options: HomotopyOptions | None = None) -> InterpolationResult:
    """Solve the interpolation problem with the prescribed spectral zeros.

    ``spectral_zeros`` are given in the caller's frame; they are moved by the
    same disc automorphism that sends the pivot node to infinity.
    """
    if pivot is None and any(is_inf(z) for z in problem.nodes):
        pivot = next(j for j, z in enumerate(problem.nodes) if is_inf(z))
    normalized, record = normalize(problem, pivot)
    cp = to_caratheodory(normalized)
    ps = build_structure(cp)
    ok, lam_min = pick_solvable(ps)
    if not ok:
        raise InfeasibleError(f"Pick matrix is not positive definite (smallest eigenvalue {lam_min:.6g})",
                              min_eigenvalue=lam_min)
    up = w_to_u(ps)
    sigma = sigma_in_normalized_frame(spectral_zeros, ps.n, record)
    params = CEEParameters(sigma, up.u, up.U)
    solution, trace = solve_homotopy(params, options)
    return InterpolationResult(problem, normalized, record, cp, ps, up, params, solution, trace, lam_min)
