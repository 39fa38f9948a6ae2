"""Fractional-linear maps on the Riemann sphere and Taylor-data transport.

A map ``z -> (a z + b) / (c z + d)`` is held as its 2x2 coefficient matrix.
The point at infinity is ``complex('inf')`` on input and output; local
coordinates are ``z - z0`` at finite points and ``1/z`` at infinity, which
is the convention used for derivative data throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

INF = complex("inf")


def is_inf(z) -> bool:
    return bool(np.isinf(z)) if np.isscalar(z) or np.ndim(z) == 0 else False


def _local_chart(z) -> np.ndarray:
    if is_inf(z):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    return np.array([[1, -z], [0, 1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class Mobius:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).reshape(2, 2).copy()
        if abs(np.linalg.det(m)) < 1e-300:
            raise InvalidInputError("degenerate Mobius map (zero determinant)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(np.eye(2))

    @classmethod
    def reciprocal(cls) -> "Mobius":
        """``z -> 1/z``."""
        return cls([[0, 1], [1, 0]])

    @classmethod
    def disc_exterior_automorphism(cls, pivot) -> "Mobius":
        """Automorphism of ``|z| > 1`` sending ``pivot`` to infinity.

        Written in the reciprocal variable it is the Blaschke factor
        ``t -> (t - t_p)/(1 - conj(t_p) t)`` with ``t = 1/z``; it maps the
        unit circle, the disc and its exterior onto themselves.
        """
        if is_inf(pivot):
            return cls.identity()
        tp = 1.0 / complex(pivot)
        if abs(tp) >= 1:
            raise InvalidInputError(f"pivot {pivot} is not outside the closed unit disc")
        return cls([[1, -np.conj(tp)], [-tp, 1]])

    def __call__(self, z):
        (a, b), (c, d) = self.matrix
        if is_inf(z):
            return a / c if c != 0 else INF
        den = c * z + d
        if abs(den) <= 1e-14 * (abs(c * z) + abs(d)):
            return INF
        return (a * z + b) / den

    def inverse(self) -> "Mobius":
        return Mobius(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "Mobius") -> "Mobius":
        """Composition: ``(self @ other)(z) = self(other(z))``."""
        return Mobius(self.matrix @ other.matrix)

    def is_real(self, tol=1e-14) -> bool:
        m = self.matrix / self.matrix[np.unravel_index(np.argmax(np.abs(self.matrix)), (2, 2))]
        return bool(np.max(np.abs(m.imag)) <= tol)

    def push_taylor(self, coeffs, z0):
        """Transport Taylor data of ``F`` at ``z0`` to data of ``F o self^-1`` at ``self(z0)``.

        ``coeffs[k]`` is the k-th Taylor coefficient of ``F`` in the local
        coordinate at ``z0``.  Returns ``(self(z0), new_coeffs)``.
        """
        y0 = self(z0)
        t = _local_chart(z0) @ np.linalg.inv(self.matrix) @ np.linalg.inv(_local_chart(y0))
        (a, b), (c, d) = t
        scale = max(abs(a), abs(d))
        if abs(b) > 1e-12 * scale:
            raise InvalidInputError("local chart map does not fix the origin")
        coeffs = np.asarray(coeffs, dtype=complex)
        k = coeffs.size
        # t(s) = a s / (c s + d) = (a/d) s sum_j (-c/d)^j s^j
        ser = np.zeros(k, dtype=complex)
        if k > 1:
            ser[1:] = (a / d) * (-c / d) ** np.arange(k - 1)
        out = np.zeros(k, dtype=complex)
        power = np.zeros(k, dtype=complex)
        power[0] = 1.0
        for j in range(k):
            out += coeffs[j] * power
            power = np.convolve(power, ser)[:k]
        return y0, out

    def pull_polynomial(self, coeffs, degree: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Substitute ``y = self(z)`` into a polynomial ``q(y)`` of declared degree.

        Returns ``(num, den)`` with ``q(self(z)) = num(z)/den(z)`` and
        ``den = (c z + d)^degree`` so that ratios of equal-degree polynomials
        share the denominator and it cancels.
        """
        q = np.asarray(coeffs)
        n = q.size - 1 if degree is None else degree
        q = np.concatenate([np.zeros(n - (q.size - 1), dtype=q.dtype), q])
        (a, b), (c, d) = self.matrix
        lin_num = np.array([a, b])
        lin_den = np.array([c, d])
        num = np.zeros(1, dtype=complex)
        for k, qk in enumerate(q):
            term = qk * np.ones(1, dtype=complex)
            for _ in range(n - k):
                term = np.convolve(term, lin_num)
            for _ in range(k):
                term = np.convolve(term, lin_den)
            num = np.polyadd(num, term)
        den = np.ones(1, dtype=complex)
        for _ in range(n):
            den = np.convolve(den, lin_den)
        return num, den
