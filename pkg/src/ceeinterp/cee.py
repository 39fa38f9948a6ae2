"""The covariance extension equation (CEE).

For a monic Schur polynomial ``sigma`` of degree ``n`` and a data pair
``(u, U)`` the equation reads::

    P = Gamma (P - P h h' P) Gamma' + g(P) g(P)',   g(P) = u + U sigma + U Gamma P h

with ``Gamma = J - sigma h'``.  Its unique solution with ``P >= 0`` and
``h' P h < 1`` determines the interpolant ``f = b / (2 a)``.  Everything here
works in the normalized frame (``z_0 = inf``, ``f(inf) = 1/2``); vectors
``a, b, sigma`` are the coefficient tails of the monic polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractivityError, InvalidInputError, NoConvergenceError
from .poly import Polynomial, RationalFunction, schur_test, series_divide
from .problem import stein

__all__ = [
    "CEEParameters",
    "CEESolution",
    "covariance_uU",
    "gamma_matrix",
    "cee_residual",
    "recover_ab",
    "lyapunov_P_from_p",
    "assemble_solution",
    "positive_degree",
    "solve_direct",
    "ab2P_residual",
    "g_identity_residual",
]


def gamma_matrix(sigma_tail) -> np.ndarray:
    sigma_tail = np.asarray(sigma_tail, dtype=float)
    n = sigma_tail.size
    gamma = np.eye(n, k=1)
    gamma[:, 0] -= sigma_tail
    return gamma


@dataclass(frozen=True, eq=False)
class CEEParameters:
    sigma: Polynomial
    u: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        sigma = self.sigma if isinstance(self.sigma, Polynomial) else Polynomial(self.sigma)
        if not sigma.is_monic or not sigma.is_real:
            raise InvalidInputError("sigma must be a real monic polynomial")
        n = sigma.degree
        u = np.asarray(self.u, dtype=float).reshape(n)
        U = np.asarray(self.U, dtype=float).reshape(n, n)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "U", U)

    @property
    def n(self) -> int:
        return self.sigma.degree

    @property
    def s(self) -> np.ndarray:
        return self.sigma.tail

    @property
    def Gamma(self) -> np.ndarray:
        return gamma_matrix(self.s)

    @property
    def h(self) -> np.ndarray:
        h = np.zeros(self.n)
        h[0] = 1.0
        return h

    def g(self, p, lam: float = 1.0) -> np.ndarray:
        """``lam * (u + U sigma + U Gamma p)``."""
        return lam * (self.u + self.U @ (self.s + self.Gamma @ np.asarray(p)))

    def is_schur(self) -> bool:
        return self.n == 0 or schur_test(self.sigma)


@dataclass(frozen=True, eq=False)
class CEESolution:
    P: np.ndarray
    p: np.ndarray
    a: Polynomial
    b: Polynomial
    rho: float
    sigma: Polynomial

    @property
    def f(self) -> RationalFunction:
        """Normalized interpolant ``b / (2 a)``."""
        return RationalFunction(self.b, self.a, 0.5)

    @property
    def n(self) -> int:
        return self.sigma.degree

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.P, compute_uv=False) if self.n else np.zeros(0)

    def to_dict(self) -> dict:
        return {
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "sigma": self.sigma.to_json(),
            "rho": float(self.rho),
            "P": [[float(x) for x in row] for row in self.P],
            "p": [float(x) for x in self.p],
            "singular_values": [float(x) for x in self.singular_values()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CEESolution":
        try:
            a = Polynomial.from_json(data["a"])
            b = Polynomial.from_json(data["b"])
            sigma = Polynomial.from_json(data["sigma"])
            n = sigma.degree
            P = np.asarray(data.get("P", np.zeros((n, n))), dtype=float).reshape(n, n)
            p = np.asarray(data.get("p", P[:, 0] if n else []), dtype=float).reshape(n)
            return cls(P, p, a, b, float(data["rho"]), sigma)
        except KeyError as exc:
            raise InvalidInputError(f"solution is missing field {exc}") from exc


def covariance_uU(c) -> tuple[np.ndarray, np.ndarray]:
    """``(u, U)`` from the expansion ``z^n / (z^n + c_1 z^(n-1) + ... + c_n)``.

    ``u_k`` are minus the expansion coefficients of ``z^-k``; ``U`` is the
    strictly lower triangular Toeplitz matrix with first column
    ``(0, u_1, ..., u_{n-1})``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    q = series_divide([1.0], np.concatenate([[1.0], c]), n).real
    u = -q[1:]
    U = np.zeros((n, n))
    for k in range(1, n):
        U += np.diag(np.full(n - k, u[k - 1]), -k)
    return u, U


def cee_residual(P, params: CEEParameters) -> float:
    P = np.asarray(P, dtype=float)
    G = params.Gamma
    h = params.h
    Ph = P @ h
    g = params.g(Ph)
    R = P - G @ (P - np.outer(Ph, Ph)) @ G.T - np.outer(g, g)
    return float(np.linalg.norm(R))


def _ab_tails(p, params: CEEParameters, lam: float = 1.0):
    x = params.Gamma @ np.asarray(p, dtype=float) + params.s
    shift = lam * (params.U @ x + params.u)
    return x - shift, x + shift


def recover_ab(p, params: CEEParameters):
    p = np.asarray(p, dtype=float)
    if params.n and p[0] >= 1.0:
        raise ContractivityError(f"h'p = {p[0]:g} >= 1")
    a, b = _ab_tails(p, params)
    rho = float(np.sqrt(1.0 - p[0])) if params.n else 1.0
    return Polynomial.monic_from_tail(a), Polynomial.monic_from_tail(b), rho


def lyapunov_P_from_p(p, params: CEEParameters) -> np.ndarray:
    """``P - Gamma P Gamma' = -Gamma p p' Gamma' + g g'``."""
    if params.n == 0:
        return np.zeros((0, 0))
    p = np.asarray(p, dtype=float)
    G = params.Gamma
    Gp = G @ p
    g = params.g(p)
    P = stein(G, np.outer(g, g) - np.outer(Gp, Gp)).real
    return 0.5 * (P + P.T)


def assemble_solution(p, params: CEEParameters) -> CEESolution:
    a, b, rho = recover_ab(p, params)
    P = lyapunov_P_from_p(p, params)
    return CEESolution(P, np.asarray(p, dtype=float).copy(), a, b, rho, params.sigma)


def positive_degree(P, tol: float = 1e-2, relative: bool = False):
    """Numerical rank of ``P`` and its singular values.

    By default a singular value counts when it is at least ``tol``; ``P`` is
    dimensionless in the normalized frame (``P_11 < 1``), so an absolute
    threshold is meaningful.  ``relative=True`` compares against
    ``tol * largest`` instead.
    """
    P = np.asarray(P, dtype=float)
    if P.size == 0:
        return 0, np.zeros(0)
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[0] == 0:
        return 0, sv
    threshold = tol * sv[0] if relative else tol
    return int(np.sum(sv >= threshold)), sv


def ab2P_residual(sol: CEESolution) -> float:
    """Residual of ``P - J P J' + (a b' + b a')/2 - rho^2 sigma sigma'``."""
    n = sol.n
    if n == 0:
        return 0.0
    J = np.eye(n, k=1)
    a, b, s = sol.a.tail.real, sol.b.tail.real, sol.sigma.tail.real
    R = sol.P - J @ sol.P @ J.T + 0.5 * (np.outer(a, b) + np.outer(b, a)) - sol.rho**2 * np.outer(s, s)
    return float(np.max(np.abs(R)))


def g_identity_residual(sol: CEESolution, params: CEEParameters) -> float:
    """``u + U sigma + U Gamma P h`` against ``(b - a)/2``."""
    if sol.n == 0:
        return 0.0
    g = params.g(sol.P[:, 0])
    return float(np.max(np.abs(g - 0.5 * (sol.b.tail - sol.a.tail).real)))


def solve_direct(params: CEEParameters, p0=None, tol: float = 1e-10, max_iter: int = 50,
                 damping_floor: float = 2.0**-20) -> CEESolution:
    """Damped Newton on the reduced equations at full deformation.

    Used as an independent check of the continuation solver; it may fail to
    converge from a poor starting point on hard problems.
    """
    from .homotopy import ReducedSystem, jacobians, reduced_residual

    sys_ = ReducedSystem(params)
    n = params.n
    p = np.zeros(n) if p0 is None else np.array(p0, dtype=float)
    r = reduced_residual(p, 1.0, sys_)
    for _ in range(max_iter):
        norm = np.linalg.norm(r)
        if norm <= tol:
            return assemble_solution(p, params)
        Hp, _ = jacobians(p, 1.0, sys_)
        try:
            step = np.linalg.solve(Hp, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergenceError(f"singular Jacobian: {exc}") from exc
        t = 1.0
        while t >= damping_floor:
            q = p + t * step
            if q[0] < 1.0:
                rq = reduced_residual(q, 1.0, sys_)
                if np.linalg.norm(rq) < norm:
                    break
            t *= 0.5
        else:
            raise NoConvergenceError(f"damping fell below {damping_floor:g} at |H| = {norm:.3g}")
        p, r = q, rq
    if np.linalg.norm(r) <= tol:
        return assemble_solution(p, params)
    raise NoConvergenceError(f"no convergence in {max_iter} iterations (|H| = {np.linalg.norm(r):.3g})")
