"""Spectral estimation from a scalar time series.

A bank of first-order filters driven by the data produces a state vector
whose covariance ``Sigma`` determines the interpolation data through
``W E + E W* = Sigma``.  Solving the resulting interpolation problem with
chosen spectral zeros gives a rational spectral density
``Phi = rho^2 |sigma|^2 / |a|^2``.  Small singular values of ``P`` point to a
lower-degree model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .cee import CEESolution, positive_degree
from .errors import IllConditionedError, InsufficientDataError, InvalidInputError
from .homotopy import HomotopyOptions
from .poly import Polynomial
from .problem import CaratheodoryProblem, PickStructure, build_structure, node_matrices, stein
from .solver import InterpolationResult, solve_interpolation

__all__ = [
    "FilterBank",
    "CovarianceEstimate",
    "run_filter_bank",
    "analytic_state_covariance",
    "estimate_W",
    "normalized_data",
    "estimate_spectrum",
    "identify",
    "model_reduce",
    "ReductionReport",
    "simulate",
    "DEFAULT_BURN_IN",
    "DEFAULT_WINDOW",
]

DEFAULT_BURN_IN = 1000
DEFAULT_WINDOW = 10_000


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Filters ``z (zI - Z_j)^-1 e`` for each node ``t_j`` inside the disc."""

    nodes: tuple
    multiplicities: tuple

    def __post_init__(self):
        nodes = tuple(complex(z) for z in self.nodes)
        mult = tuple(int(m) for m in self.multiplicities)
        if len(nodes) != len(mult) or not nodes or min(mult) < 1:
            raise InvalidInputError("one positive multiplicity per node required")
        if any(abs(z) >= 1 for z in nodes):
            raise InvalidInputError("filter-bank nodes must lie inside the unit disc")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def covariance_lags(cls, n: int) -> "FilterBank":
        """Single node at 0 of multiplicity ``n + 1``: the state is ``(y_t, ..., y_(t-n))``."""
        return cls((0.0,), (n + 1,))

    @classmethod
    def from_structure(cls, ps: PickStructure) -> "FilterBank":
        return cls(ps.nodes, ps.multiplicities)

    @property
    def n(self) -> int:
        return sum(self.multiplicities) - 1

    @property
    def is_real(self) -> bool:
        return all(abs(z.imag) == 0 for z in self.nodes)

    def matrices(self):
        Z, e, _ = node_matrices(self.nodes, self.multiplicities)
        return Z, e

    def structure(self, values=None) -> PickStructure:
        """Pick structure with ``W = I/2`` (or the given block data)."""
        if values is None:
            values = [np.r_[0.5, np.zeros(m - 1)] for m in self.multiplicities]
        return build_structure(CaratheodoryProblem(self.nodes, tuple(values), check_symmetry=False))


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    Sigma: np.ndarray
    N: int


def _states(y, bank: FilterBank) -> np.ndarray:
    """State sequence ``x(t) = Z x(t-1) + e y(t)`` as an array of shape (T, n+1)."""
    y = np.asarray(y, dtype=float)
    cols = []
    for z, m in zip(bank.nodes, bank.multiplicities):
        den = [1.0, -z] if z != 0 else [1.0]
        x = signal.lfilter([1.0], den, y) if z != 0 else y.astype(complex)
        cols.append(x)
        for _ in range(m - 1):
            x = signal.lfilter([0.0, 1.0], [1.0, -z], x)
            cols.append(x)
    return np.column_stack(cols).astype(complex)


def run_filter_bank(y, bank: FilterBank, burn_in: int = DEFAULT_BURN_IN,
                    window: int = DEFAULT_WINDOW) -> CovarianceEstimate:
    """Time average of ``x(t) x(t)*`` over all samples after ``burn_in``."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < burn_in + window:
        raise InsufficientDataError(
            f"need at least {burn_in + window} samples (burn-in {burn_in} + window {window}), got {y.size}")
    X = _states(y, bank)[burn_in:]
    S = X.T @ X.conj() / X.shape[0]
    S = 0.5 * (S + S.conj().T)
    return CovarianceEstimate(S, X.shape[0])


def analytic_state_covariance(numerator, denominator, bank: FilterBank, noise_variance: float = 1.0) -> np.ndarray:
    """Exact stationary state covariance when ``y`` is white noise filtered by ``num/den``.

    ``num`` and ``den`` are polynomials in ``z`` of equal degree (den Schur).
    The generating filter and the bank are stacked into one state-space
    model and its covariance taken from the Stein equation.
    """
    num = numerator.coeffs if isinstance(numerator, Polynomial) else np.asarray(numerator, dtype=float)
    den = denominator.coeffs if isinstance(denominator, Polynomial) else np.asarray(denominator, dtype=float)
    A, B, C, D = signal.tf2ss(num, den)
    Z, e = bank.matrices()
    k, m = A.shape[0], Z.shape[0]
    F = np.zeros((k + m, k + m), dtype=complex)
    F[:k, :k] = A
    F[k:, :k] = np.outer(e, C.ravel())
    F[k:, k:] = Z
    G = np.concatenate([B.ravel(), e * D.item()]).astype(complex)
    X = stein(F, noise_variance * np.outer(G, G.conj()))
    S = X[k:, k:]
    return 0.5 * (S + S.conj().T)


def estimate_W(cov, structure: PickStructure) -> np.ndarray:
    """Structured least-squares solution of ``W E + E W* = Sigma``.

    The unknowns are the (complex) first columns of the lower-triangular
    Toeplitz blocks of ``W``; the fit is real-linear in their real and
    imaginary parts.  ``W = i c I`` maps to zero, so the imaginary part of
    the leading entry is fixed at 0.
    """
    Sigma = cov.Sigma if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    E = structure.E
    size = E.shape[0]
    basis = []
    for j, blk in enumerate(structure.blocks):
        m = blk.stop - blk.start
        for k in range(m):
            for unit in ((1.0,) if j == 0 and k == 0 else (1.0, 1j)):
                B = np.zeros((size, size), dtype=complex)
                idx = np.arange(blk.start + k, blk.stop)
                B[idx, idx - k] = unit
                basis.append(B)
    cols = []
    for B in basis:
        R = B @ E + E @ B.conj().T
        cols.append(np.concatenate([R.real.ravel(), R.imag.ravel()]))
    A = np.column_stack(cols)
    rhs = np.concatenate([Sigma.real.ravel(), Sigma.imag.ravel()])
    coef, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < A.shape[1]:
        raise IllConditionedError(f"least-squares system for W is rank deficient ({rank} < {A.shape[1]})")
    W = np.zeros((size, size), dtype=complex)
    for c, B in zip(coef, basis):
        W += c * B
    return W


def normalized_data(W, structure: PickStructure) -> CaratheodoryProblem:
    """Interpolation data from an estimated ``W``, scaled so that ``w_00 = 1/2``.

    The first node must be 0 (the covariance-type block).
    """
    if structure.nodes[0] != 0:
        raise InvalidInputError("the first filter-bank node must be 0")
    w00 = W[0, 0].real
    if not w00 > 0:
        raise InsufficientDataError("degenerate covariance: estimated variance is not positive")
    values = tuple(np.array(W[b, b.start]) / (2.0 * w00) for b in structure.blocks)
    values = _conjugate_average(structure.nodes, values)
    return CaratheodoryProblem(structure.nodes, values)


def _conjugate_average(nodes, values):
    """Project the data onto the conjugate-symmetric subspace."""
    out = list(values)
    for j, z in enumerate(nodes):
        partner = int(np.argmin([abs(y - np.conj(z)) for y in nodes]))
        if abs(nodes[partner] - np.conj(z)) <= 1e-12 and len(values[partner]) == len(values[j]):
            out[j] = 0.5 * (values[j] + np.conj(values[partner]))
    return tuple(out)


def estimate_spectrum(solution: CEESolution, grid: int = 1024, scale: float = 1.0):
    """``(theta, Phi)`` with ``Phi = scale * rho^2 |sigma|^2 / |a|^2`` on ``theta_k = 2 pi k / grid``."""
    if grid < 1:
        raise InvalidInputError("grid must be positive")
    theta = 2.0 * np.pi * np.arange(grid) / grid
    z = np.exp(1j * theta)
    phi = scale * solution.rho**2 * np.abs(solution.sigma(z)) ** 2 / np.abs(solution.a(z)) ** 2
    return theta, phi


def identify(cov, bank: FilterBank, spectral_zeros=None,
             options: HomotopyOptions | None = None) -> tuple[np.ndarray, InterpolationResult]:
    """Estimate ``W`` from a state covariance and solve the interpolation problem.

    Returns ``(W, result)``.  ``spectral_zeros`` default to the
    maximum-entropy choice (all at the origin).
    """
    ps = bank.structure()
    W = estimate_W(cov, ps)
    cp = normalized_data(W, ps)
    result = solve_interpolation(cp.to_exterior(), spectral_zeros, options=options)
    return W, result


@dataclass(frozen=True, eq=False)
class ReductionReport:
    full: InterpolationResult
    reduced: InterpolationResult
    full_singular_values: np.ndarray
    reduced_singular_values: np.ndarray
    spectrum_gap: float


def model_reduce(cp: CaratheodoryProblem, full_zeros, kept_zeros, grid: int = 1024,
                 options: HomotopyOptions | None = None) -> ReductionReport:
    """Re-solve with a conjugate-closed subset of spectral zeros.

    The reduced problem keeps the leading ``n' + 1`` entries of the first
    (covariance-type) data block, ``n'`` being the number of kept zeros.
    """
    kept = np.asarray(list(kept_zeros), dtype=complex)
    n_red = kept.size
    lead = cp.values[0]
    if lead.size < n_red + 1:
        raise InvalidInputError("the leading data block is too short for the requested order")
    full = solve_interpolation(cp.to_exterior(), full_zeros, options=options)
    reduced_cp = CaratheodoryProblem((cp.nodes[0],), (lead[: n_red + 1],))
    reduced = solve_interpolation(reduced_cp.to_exterior(), kept, options=options)
    _, phi_full = estimate_spectrum(full.solution, grid)
    _, phi_red = estimate_spectrum(reduced.solution, grid)
    return ReductionReport(full, reduced,
                           positive_degree(full.solution.P)[1],
                           positive_degree(reduced.solution.P)[1],
                           float(np.max(np.abs(phi_full - phi_red))))


def simulate(numerator, denominator, n_samples: int, seed: int | None = 0, warmup: int = 1000) -> np.ndarray:
    """``n_samples`` of unit-variance white noise filtered by ``num/den``.

    The first ``warmup`` filter outputs are generated and discarded so the
    returned series is close to stationary.
    """
    num = numerator.coeffs.real if isinstance(numerator, Polynomial) else np.asarray(numerator, dtype=float)
    den = denominator.coeffs.real if isinstance(denominator, Polynomial) else np.asarray(denominator, dtype=float)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n_samples + warmup)
    return signal.lfilter(num, den, noise)[warmup:]
