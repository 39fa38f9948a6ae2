"""Polynomial and rational-function primitives.

Coefficients are stored highest power first, the same convention as
``numpy.polyval`` and ``numpy.roots``.  Values are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, PoleError, SymmetryError

__all__ = [
    "Polynomial",
    "RationalFunction",
    "schur_test",
    "poly_from_roots",
    "reversed_poly",
    "taylor_shift",
    "series_divide",
    "eval_with_derivatives",
    "positivity_identity_residual",
    "laurent_product",
    "COPRIME_TOL",
]

COPRIME_TOL = 1e-7


def _as_coeffs(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs))
    if c.ndim != 1:
        raise InvalidInputError("polynomial coefficients must be one-dimensional")
    if c.size == 0:
        c = np.zeros(1)
    if np.iscomplexobj(c):
        if np.all(c.imag == 0):
            c = c.real
        c = c.astype(complex) if np.iscomplexobj(c) else c.astype(float)
    else:
        c = c.astype(float)
    nz = np.flatnonzero(c)
    c = c[nz[0]:] if nz.size else c[-1:] * 0
    c = c.copy()
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Univariate polynomial, coefficients highest power first."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @classmethod
    def monic_from_tail(cls, tail) -> "Polynomial":
        """``z^n + t_1 z^(n-1) + ... + t_n`` from the vector ``(t_1..t_n)``."""
        return cls(np.concatenate([[1.0], np.asarray(tail)]))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    @property
    def is_monic(self) -> bool:
        return self.coeffs[0] == 1

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs)

    @property
    def tail(self) -> np.ndarray:
        """Coefficients after the leading one (the n-vector of a monic polynomial)."""
        return np.array(self.coeffs[1:])

    def padded(self, n: int) -> np.ndarray:
        """Coefficients left-padded with zeros to length ``n + 1``."""
        if self.degree > n:
            raise InvalidInputError(f"degree {self.degree} exceeds {n}")
        return np.concatenate([np.zeros(n - self.degree, dtype=self.coeffs.dtype), self.coeffs])

    def roots(self) -> np.ndarray:
        if self.is_zero:
            raise InvalidInputError("the zero polynomial has no finite root set")
        # numpy.roots builds the companion matrix and takes its eigenvalues
        return np.roots(self.coeffs) if self.degree > 0 else np.zeros(0, dtype=complex)

    def __call__(self, z):
        return np.polyval(self.coeffs, z)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * other)

    __rmul__ = __mul__

    def __add__(self, other):
        return Polynomial(np.polyadd(self.coeffs, _coeffs_of(other)))

    def __sub__(self, other):
        return Polynomial(np.polysub(self.coeffs, _coeffs_of(other)))

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"

    def allclose(self, other, atol=1e-12) -> bool:
        a, b = self.coeffs, _coeffs_of(other)
        n = max(a.size, b.size)
        a = np.concatenate([np.zeros(n - a.size), a])
        b = np.concatenate([np.zeros(n - b.size), b])
        return bool(np.allclose(a, b, rtol=0, atol=atol))

    def to_json(self) -> list:
        return [[float(np.real(c)), float(np.imag(c))] for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "Polynomial":
        try:
            c = [complex(re, im) for re, im in data]
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"expected a list of [re, im] pairs: {exc}") from exc
        return cls(np.array(c))


def _coeffs_of(p) -> np.ndarray:
    return p.coeffs if isinstance(p, Polynomial) else np.atleast_1d(np.asarray(p))


def schur_test(p: Polynomial, margin: float = 0.0) -> bool:
    """True iff every root of ``p`` lies in the disc ``|z| < 1 - margin``."""
    if margin < 0:
        raise InvalidInputError("margin must be non-negative")
    if p.is_zero:
        raise InvalidInputError("schur_test of the zero polynomial")
    r = p.roots()
    return bool(np.all(np.abs(r) < 1.0 - margin))


def poly_from_roots(roots, realify: bool = False, tol: float = 1e-9) -> Polynomial:
    """Monic polynomial with the given roots.

    With ``realify`` the root set must be closed under conjugation (to within
    ``tol``) and the result has real coefficients.
    """
    r = np.asarray(list(roots), dtype=complex)
    c = np.poly(r) if r.size else np.ones(1)
    if realify:
        unmatched = list(r)
        while unmatched:
            x = unmatched.pop()
            if abs(x.imag) <= tol * max(1.0, abs(x)):
                continue
            j = int(np.argmin([abs(y - np.conj(x)) for y in unmatched])) if unmatched else -1
            if j < 0 or abs(unmatched[j] - np.conj(x)) > tol * max(1.0, abs(x)):
                raise SymmetryError(f"root {x} has no conjugate partner")
            unmatched.pop(j)
        c = np.real(c)
    return Polynomial(c)


def reversed_poly(p: Polynomial, n: int | None = None, conjugate: bool = False) -> Polynomial:
    """``z^n p(1/z)``: coefficient reversal relative to the declared degree ``n``."""
    n = p.degree if n is None else n
    c = p.padded(n)[::-1]
    return Polynomial(np.conj(c) if conjugate else c)


def taylor_shift(coeffs, z0, k_max: int) -> np.ndarray:
    """Taylor coefficients ``p^(k)(z0)/k!`` for ``k = 0..k_max`` (repeated synthetic division)."""
    c = np.array(coeffs, dtype=complex)
    out = np.zeros(k_max + 1, dtype=complex)
    for k in range(k_max + 1):
        if c.size == 0:
            break
        acc = np.zeros_like(c)
        s = 0
        for i, ci in enumerate(c):
            s = s * z0 + ci
            acc[i] = s
        out[k] = acc[-1]
        c = acc[:-1]
    return out


def series_divide(num, den, k_max: int) -> np.ndarray:
    """Power-series quotient of two ascending coefficient sequences, truncated."""
    num = np.concatenate([np.asarray(num, dtype=complex), np.zeros(k_max + 1)])[: k_max + 1]
    den = np.concatenate([np.asarray(den, dtype=complex), np.zeros(k_max + 1)])[: k_max + 1]
    q = np.zeros(k_max + 1, dtype=complex)
    for k in range(k_max + 1):
        q[k] = (num[k] - np.dot(q[:k], den[k:0:-1])) / den[0]
    return q


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """``scale * numerator / denominator``."""

    numerator: Polynomial
    denominator: Polynomial
    scale: float = 1.0

    def __post_init__(self):
        if self.denominator.is_zero:
            raise InvalidInputError("denominator is identically zero")

    def __call__(self, z):
        if np.isscalar(z) and np.isinf(z):
            return eval_with_derivatives(self, z, 0)[0]
        return self.scale * self.numerator(z) / self.denominator(z)

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    def poles(self) -> np.ndarray:
        return self.denominator.roots()

    def zeros(self) -> np.ndarray:
        return self.numerator.roots()

    def reduce(self, tol: float = COPRIME_TOL) -> "RationalFunction":
        """Cancel numerator/denominator root pairs closer than ``tol`` (relative)."""
        nr = list(self.numerator.roots()) if self.numerator.degree > 0 else []
        dr = list(self.denominator.roots()) if self.denominator.degree > 0 else []
        kept = []
        for r in nr:
            j = int(np.argmin([abs(d - r) for d in dr])) if dr else -1
            if j >= 0 and abs(dr[j] - r) <= tol * max(1.0, abs(r)):
                dr.pop(j)
            else:
                kept.append(r)
        lead = self.numerator.coeffs[0] / self.denominator.coeffs[0]
        num = np.poly(kept) * lead if kept else np.array([lead])
        den = np.poly(dr) if dr else np.ones(1)
        if self.numerator.is_real and self.denominator.is_real:
            num, den = np.real(num), np.real(den)
        return RationalFunction(Polynomial(num), Polynomial(den), self.scale)


def eval_with_derivatives(r: RationalFunction, z, k_max: int, tol: float = 1e-12) -> np.ndarray:
    """Taylor coefficients ``r^(k)(z)/k!`` for ``k = 0..k_max``.

    At ``z = inf`` the coefficients are those of ``r(1/t)`` around ``t = 0``,
    i.e. of the expansion in powers of ``1/z``.
    """
    num, den = r.numerator, r.denominator
    if np.isinf(z):
        d = max(num.degree, den.degree)
        # t^d num(1/t) in ascending powers of t is num's coefficient list itself
        ncoef = num.padded(d)
        dcoef = den.padded(d)
        if abs(dcoef[0]) <= tol * np.max(np.abs(dcoef)):
            raise PoleError("pole at infinity", root=complex("inf"))
        return r.scale * series_divide(ncoef, dcoef, k_max)
    nt = taylor_shift(num.coeffs, z, k_max)
    dt = taylor_shift(den.coeffs, z, k_max)
    if abs(dt[0]) <= tol * np.max(np.abs(den.coeffs)) * max(1.0, abs(z)) ** den.degree:
        roots = den.roots()
        raise PoleError(f"evaluation at a pole near {z}", root=roots[np.argmin(np.abs(roots - z))])
    return r.scale * series_divide(nt, dt, k_max)


def laurent_product(p, q) -> np.ndarray:
    """Coefficients of ``p(z) q(1/z)`` for ``z^n .. z^-n`` (both of length n+1)."""
    return np.convolve(np.asarray(p), np.asarray(q)[::-1])


def positivity_identity_residual(a: Polynomial, b: Polynomial, sigma: Polynomial, rho: float) -> float:
    """Max coefficient mismatch in ``a b* + b a* = 2 rho^2 sigma sigma*``."""
    n = sigma.degree
    if a.degree != n or b.degree != n:
        raise InvalidInputError(
            f"degree mismatch: a={a.degree}, b={b.degree}, sigma={n}")
    lhs = laurent_product(a.coeffs, b.coeffs) + laurent_product(b.coeffs, a.coeffs)
    rhs = 2.0 * rho**2 * laurent_product(sigma.coeffs, sigma.coeffs)
    return float(np.max(np.abs(lhs - rhs)))


def is_close_to_real(x, tol=1e-8) -> bool:
    x = np.asarray(x)
    return bool(np.max(np.abs(np.imag(x)), initial=0.0) <= tol * max(1.0, np.max(np.abs(x), initial=0.0)))
