"""Interpolation data, normalization and the generalized Pick structure.

Two views of the same data are kept:

* :class:`InterpolationProblem` -- values ``f^(k)(z_j)/k!`` of a positive real
  function at nodes outside the closed unit disc (``inf`` allowed, where the
  data are coefficients of the expansion in ``1/z``).
* :class:`CaratheodoryProblem` -- values of ``phi(t) = f(1/t)`` at the
  reciprocal nodes inside the disc.

From the Caratheodory data the block matrices ``W, Z, e, E, V`` and the Pick
matrix ``Sigma = W E + E W*`` are assembled, and the data vector ``w`` is
mapped to the pair ``(u, U)`` that parameterizes the covariance extension
equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.linalg

from .errors import (
    IllConditionedError,
    InvalidInputError,
    NotPositiveRealError,
    ParseError,
    SingularBlockError,
    SymmetryError,
)
from .mobius import INF, Mobius, is_inf

__all__ = [
    "InterpolationProblem",
    "CaratheodoryProblem",
    "TransformRecord",
    "PickStructure",
    "UParameters",
    "stein",
    "normalize",
    "denormalize_values",
    "to_caratheodory",
    "closed_form_caratheodory_values",
    "build_structure",
    "pick_solvable",
    "w_to_u",
    "u_to_w",
    "u_matrix",
    "deformed_pick",
    "default_pivot",
    "problem_from_dict",
    "problem_to_dict",
]

SYMMETRY_TOL = 1e-8
V_COND_BOUND = 1e12


def _freeze(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _match_conjugates(nodes, values, tol):
    """True iff the data set is closed under conjugation."""
    for z, v in zip(nodes, values):
        zc = np.conj(z)
        partner = None
        for y, w in zip(nodes, values):
            if (is_inf(z) and is_inf(y)) or (not is_inf(z) and not is_inf(y) and abs(y - zc) <= tol * max(1, abs(z))):
                partner = w
                break
        if partner is None or len(partner) != len(v):
            return False
        if np.max(np.abs(np.conj(v) - partner)) > tol * max(1.0, np.max(np.abs(v))):
            return False
    return True


@dataclass(frozen=True, eq=False)
class InterpolationProblem:
    """``f^(k)(z_j)/k! = v_jk`` with ``|z_j| > 1`` (``inf`` allowed)."""

    nodes: tuple
    values: tuple
    check_symmetry: bool = field(default=True, repr=False)

    def __post_init__(self):
        nodes = tuple(INF if is_inf(z) else complex(z) for z in self.nodes)
        values = tuple(_freeze(np.atleast_1d(v)) for v in self.values)
        if len(nodes) != len(values) or not nodes:
            raise InvalidInputError("need one value sequence per node")
        for z, v in zip(nodes, values):
            if v.size < 1:
                raise InvalidInputError(f"node {z} has no values")
            if not is_inf(z) and abs(z) <= 1:
                raise InvalidInputError(f"node {z} is not outside the closed unit disc")
        finite = [z for z in nodes if not is_inf(z)]
        if sum(is_inf(z) for z in nodes) > 1 or len(set(finite)) != len(finite):
            raise InvalidInputError("nodes must be pairwise distinct")
        if self.check_symmetry and not _match_conjugates(nodes, values, SYMMETRY_TOL):
            raise SymmetryError("interpolation data are not closed under conjugation")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def multiplicities(self) -> tuple:
        return tuple(v.size for v in self.values)

    @property
    def n(self) -> int:
        return sum(self.multiplicities) - 1

    @property
    def is_normalized(self) -> bool:
        return is_inf(self.nodes[0]) and abs(self.values[0][0] - 0.5) < 1e-14

    @property
    def is_real(self) -> bool:
        return _match_conjugates(self.nodes, self.values, SYMMETRY_TOL)


@dataclass(frozen=True, eq=False)
class CaratheodoryProblem:
    """``phi^(k)(t_j)/k! = w_jk`` with ``|t_j| < 1``."""

    nodes: tuple
    values: tuple
    check_symmetry: bool = field(default=True, repr=False)

    def __post_init__(self):
        nodes = tuple(complex(z) for z in self.nodes)
        values = tuple(_freeze(np.atleast_1d(v)) for v in self.values)
        if len(nodes) != len(values) or not nodes:
            raise InvalidInputError("need one value sequence per node")
        for z in nodes:
            if abs(z) >= 1:
                raise InvalidInputError(f"node {z} is not inside the unit disc")
        if len(set(nodes)) != len(nodes):
            raise InvalidInputError("nodes must be pairwise distinct")
        if self.check_symmetry and not _match_conjugates(nodes, values, SYMMETRY_TOL):
            raise SymmetryError("interpolation data are not closed under conjugation")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def multiplicities(self) -> tuple:
        return tuple(v.size for v in self.values)

    @property
    def n(self) -> int:
        return sum(self.multiplicities) - 1

    @property
    def is_normalized(self) -> bool:
        return self.nodes[0] == 0 and abs(self.values[0][0] - 0.5) < 1e-12

    def w_vector(self) -> np.ndarray:
        """Stacked data with the fixed leading ``w_00 = 1/2`` removed."""
        return np.concatenate(self.values)[1:]

    def to_exterior(self) -> InterpolationProblem:
        r = Mobius.reciprocal()
        nodes, values = [], []
        for t, w in zip(self.nodes, self.values):
            z, v = r.push_taylor(w, t)
            nodes.append(z)
            values.append(v)
        return InterpolationProblem(tuple(nodes), tuple(values), self.check_symmetry)


@dataclass(frozen=True, eq=False)
class TransformRecord:
    """``f_norm(node_map(z)) = scale * (f(z) - 1j*shift)``."""

    node_map: Mobius
    scale: float
    shift: float = 0.0
    pivot: int = 0

    @property
    def is_identity(self) -> bool:
        return (np.allclose(self.node_map.matrix / self.node_map.matrix[1, 1], np.eye(2))
                and self.scale == 1.0 and self.shift == 0.0)


def default_pivot(problem: InterpolationProblem) -> int:
    """Node at infinity if present, else the real node of largest modulus.

    The largest-modulus node gives the mildest Blaschke distortion, which
    keeps the mapped spectral zeros away from the unit circle.
    """
    for j, z in enumerate(problem.nodes):
        if is_inf(z):
            return j
    real = [j for j, z in enumerate(problem.nodes)
            if abs(z.imag) <= 1e-12 * abs(z) and abs(problem.values[j][0].imag) <= 1e-12]
    candidates = real or list(range(len(problem.nodes)))
    return max(candidates, key=lambda j: abs(problem.nodes[j]))


def normalize(problem: InterpolationProblem, pivot: int | None = None):
    """Move ``nodes[pivot]`` to infinity and scale so that ``f(inf) = 1/2``.

    Returns the normalized problem, pivot first, and the record needed to
    undo the change.
    """
    if pivot is None:
        pivot = default_pivot(problem)
    for j, v in enumerate(problem.values):
        if v[0].real <= 0:
            raise NotPositiveRealError(
                f"Re f(z_{j}) = {v[0].real:g} <= 0 admits no positive real interpolant")
    vp = problem.values[pivot][0]
    node_map = Mobius.disc_exterior_automorphism(problem.nodes[pivot])
    scale = 0.5 / vp.real
    shift = vp.imag
    order = [pivot] + [j for j in range(len(problem.nodes)) if j != pivot]
    nodes, values = [], []
    for j in order:
        y, c = node_map.push_taylor(problem.values[j], problem.nodes[j])
        c = scale * c
        c[0] -= 1j * scale * shift
        nodes.append(y)
        values.append(c)
    values[0] = values[0].copy()
    values[0][0] = 0.5
    out = InterpolationProblem(tuple(nodes), tuple(values), check_symmetry=problem.check_symmetry)
    return out, TransformRecord(node_map, scale, shift, pivot)


def denormalize_values(problem: InterpolationProblem, record: TransformRecord) -> InterpolationProblem:
    """Inverse of :func:`normalize`, restoring the original node order."""
    inv = record.node_map.inverse()
    nodes, values = [], []
    for y, c in zip(problem.nodes, problem.values):
        z, v = inv.push_taylor(c, y)
        v = v / record.scale
        v[0] += 1j * record.shift
        nodes.append(z)
        values.append(v)
    m = len(nodes)
    order = [record.pivot] + [j for j in range(m) if j != record.pivot]
    restored_nodes = [None] * m
    restored_values = [None] * m
    for pos, j in enumerate(order):
        restored_nodes[j] = nodes[pos]
        restored_values[j] = values[pos]
    return InterpolationProblem(tuple(restored_nodes), tuple(restored_values),
                                check_symmetry=problem.check_symmetry)


def to_caratheodory(problem: InterpolationProblem) -> CaratheodoryProblem:
    """Nodes ``z -> 1/z`` and values transported by the chain rule for ``f(1/t)``."""
    if not problem.is_normalized:
        raise InvalidInputError("problem must be normalized (z_0 = inf, v_00 = 1/2)")
    r = Mobius.reciprocal()
    nodes, values = [], []
    for z, v in zip(problem.nodes, problem.values):
        t, w = r.push_taylor(v, z)
        nodes.append(0j if is_inf(z) else t)
        values.append(w)
    return CaratheodoryProblem(tuple(nodes), tuple(values), check_symmetry=problem.check_symmetry)


def closed_form_caratheodory_values(z, v) -> np.ndarray:
    """Closed-form transform of derivative data at a finite node.

    Kept only as a cross-check of :func:`to_caratheodory`; the coefficient
    recursion is evaluated exactly as written.
    """
    v = np.asarray(v, dtype=complex)
    k_max = v.size - 1
    s = {(1, 1): 1.0}
    for k in range(1, k_max):
        s[(k + 1, 1)] = 1.0
        s[(k + 1, k + 1)] = 1.0
        for ell in range(2, k + 1):
            s[(k + 1, ell)] = (2 * k - ell + 2) / ell * s[(k, ell - 1)] + s[(k, ell)]
    w = np.zeros_like(v)
    w[0] = v[0]
    for k in range(1, k_max + 1):
        acc = 0j
        for ell in range(1, k + 1):
            coef = factorial(ell) * factorial(k - ell + 1) / factorial(k)
            acc += coef * s[(k, ell)] * v[k - ell + 1] * (-1) ** (k + 2) * z ** (2 * k - ell + 1)
        w[k] = acc
    return w


def stein(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Solve ``X = A X A* + Q`` by vectorization (small dense problems)."""
    a = np.asarray(a)
    q = np.asarray(q)
    n = a.shape[0]
    k = np.eye(n * n) - np.kron(a.conj(), a)
    x = np.linalg.solve(k, q.reshape(-1, order="F"))
    return x.reshape(n, n, order="F")


@dataclass(frozen=True, eq=False)
class PickStructure:
    nodes: tuple
    multiplicities: tuple
    W: np.ndarray
    Z: np.ndarray
    e: np.ndarray
    E: np.ndarray
    V: np.ndarray
    Sigma: np.ndarray
    cond_V: float

    @property
    def n(self) -> int:
        return self.W.shape[0] - 1

    @property
    def blocks(self) -> list:
        starts = np.cumsum((0,) + tuple(self.multiplicities))
        return [slice(int(s), int(s + m)) for s, m in zip(starts, self.multiplicities)]

    @property
    def stein_residual(self) -> float:
        r = self.E - self.Z @ self.E @ self.Z.conj().T - np.outer(self.e, self.e.conj())
        return float(np.linalg.norm(r) / np.linalg.norm(self.E))

    @property
    def M(self) -> np.ndarray:
        """``V^-1`` with its first row and column deleted."""
        return np.linalg.inv(self.V)[1:, 1:]

    def with_W(self, W) -> "PickStructure":
        W = np.asarray(W, dtype=complex)
        return PickStructure(self.nodes, self.multiplicities, W, self.Z, self.e, self.E, self.V,
                             W @ self.E + self.E @ W.conj().T, self.cond_V)


def _toeplitz_lower(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    return scipy.linalg.toeplitz(c, np.zeros_like(c))


def node_matrices(nodes, multiplicities):
    """Block-Jordan ``Z`` (ones on the subdiagonal), ``e`` and ``V``."""
    size = sum(multiplicities)
    Z = np.zeros((size, size), dtype=complex)
    e = np.zeros(size, dtype=complex)
    i = 0
    for z, m in zip(nodes, multiplicities):
        Z[i:i + m, i:i + m] = z * np.eye(m) + np.eye(m, k=-1)
        e[i] = 1.0
        i += m
    cols = [e]
    for _ in range(size - 1):
        cols.append(Z @ cols[-1])
    V = np.column_stack(cols)
    return Z, e, V


def build_structure(cp: CaratheodoryProblem, cond_bound: float = V_COND_BOUND) -> PickStructure:
    Z, e, V = node_matrices(cp.nodes, cp.multiplicities)
    W = scipy.linalg.block_diag(*[_toeplitz_lower(w) for w in cp.values]).astype(complex)
    E = stein(Z, np.outer(e, e.conj()))
    E = 0.5 * (E + E.conj().T)
    cond_V = float(np.linalg.cond(V))
    if not np.isfinite(cond_V) or cond_V > cond_bound:
        raise IllConditionedError(f"V is numerically singular (cond {cond_V:.3g})", condition=cond_V)
    Sigma = W @ E + E @ W.conj().T
    return PickStructure(cp.nodes, cp.multiplicities, W, Z, e, E, V, Sigma, cond_V)


def pick_solvable(ps: PickStructure) -> tuple[bool, float]:
    lam = float(np.linalg.eigvalsh(0.5 * (ps.Sigma + ps.Sigma.conj().T))[0])
    return lam > 0, lam


@dataclass(frozen=True, eq=False)
class UParameters:
    u: np.ndarray
    U: np.ndarray
    d: np.ndarray
    M: np.ndarray
    D: np.ndarray


def _truncate_real(x, name, tol):
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    resid = float(np.max(np.abs(np.imag(x)), initial=0.0))
    if resid > tol * scale:
        raise SymmetryError(f"{name} has imaginary residue {resid:.3g}; data not conjugate-symmetric")
    return np.real(x).copy()


def w_to_u(ps: PickStructure, tol: float = SYMMETRY_TOL) -> UParameters:
    n1 = ps.W.shape[0]
    eye = np.eye(n1)
    D = np.linalg.solve(ps.W + 0.5 * eye, ps.W - 0.5 * eye)
    X = np.linalg.solve(ps.V, D @ ps.V)[1:]
    u = _truncate_real(X[:, 0], "u", tol)
    U = _truncate_real(X[:, 1:], "U", tol)
    d = (D @ ps.e)[1:]
    return UParameters(u, U, d, ps.M, D)


def _D_from_d(d, ps: PickStructure) -> np.ndarray:
    full = np.concatenate([[0.0], np.asarray(d, dtype=complex)])
    return scipy.linalg.block_diag(*[_toeplitz_lower(full[b]) for b in ps.blocks]).astype(complex)


def u_matrix(u, ps: PickStructure, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """The linear map ``u -> U`` rebuilt from the block recipe."""
    d = np.linalg.solve(ps.M, np.asarray(u, dtype=complex))
    D = _D_from_d(d, ps)
    X = np.linalg.solve(ps.V, D @ ps.V)[1:, 1:]
    return _truncate_real(X, "U", tol)


def u_to_w(u, ps: PickStructure, tol: float = 1e-12) -> CaratheodoryProblem:
    """Inverse of the data map: the unique ``w`` with ``w_to_u(w) = u``."""
    d = np.linalg.solve(ps.M, np.asarray(u, dtype=complex))
    full = np.concatenate([[0.0], d])
    values = []
    for b in ps.blocks:
        Dj = _toeplitz_lower(full[b])
        if abs(1.0 - Dj[0, 0]) <= tol:
            raise SingularBlockError(f"block with d_j0 = {Dj[0, 0]} is singular")
        m = Dj.shape[0]
        Wj = np.linalg.inv(np.eye(m) - Dj) - 0.5 * np.eye(m)
        values.append(Wj[:, 0])
    return CaratheodoryProblem(ps.nodes, tuple(values), check_symmetry=False)


def deformed_pick(ps: PickStructure, lam: float) -> np.ndarray:
    """Pick matrix of the data obtained by scaling ``u`` by ``lam``."""
    eye = np.eye(ps.W.shape[0])
    D = np.linalg.solve(ps.W + 0.5 * eye, ps.W - 0.5 * eye)
    W_lam = np.linalg.inv(eye - lam * D) - 0.5 * eye
    return W_lam @ ps.E + ps.E @ W_lam.conj().T


# -- file format ---------------------------------------------------------------

def _parse_complex(x, where):
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity"):
            return INF
        raise ParseError(f"unrecognized scalar {x!r}", field=where)
    if isinstance(x, (int, float)):
        return complex(x)
    try:
        re, im = x
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise ParseError(f"expected [re, im], got {x!r}", field=where) from None


def problem_from_dict(data: dict):
    """Parse the JSON problem layout; returns an exterior-domain problem."""
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    for key in ("nodes", "values"):
        if key not in data:
            raise ParseError("missing", field=key)
    nodes = [_parse_complex(z, f"nodes[{j}]") for j, z in enumerate(data["nodes"])]
    values = []
    for j, vals in enumerate(data["values"]):
        if not isinstance(vals, list) or not vals:
            raise ParseError("expected a non-empty list", field=f"values[{j}]")
        values.append([_parse_complex(v, f"values[{j}][{k}]") for k, v in enumerate(vals)])
    if len(values) != len(nodes):
        raise ParseError(f"{len(values)} value lists for {len(nodes)} nodes", field="values")
    mult = data.get("multiplicities")
    if mult is not None:
        if len(mult) != len(nodes) or any(int(m) != len(v) for m, v in zip(mult, values)):
            raise ParseError("does not match the value list lengths", field="multiplicities")
    domain = data.get("domain", "exterior")
    try:
        if domain == "exterior":
            return InterpolationProblem(tuple(nodes), tuple(np.array(v) for v in values))
        if domain == "disc":
            if any(is_inf(z) for z in nodes):
                raise ParseError("infinity is not a disc node", field="nodes")
            cp = CaratheodoryProblem(tuple(nodes), tuple(np.array(v) for v in values))
            return cp.to_exterior()
    except (InvalidInputError,) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), field="nodes") from exc
    raise ParseError(f"unknown domain {domain!r}", field="domain")


def _pair(z):
    if is_inf(z):
        return "inf"
    return [float(np.real(z)), float(np.imag(z))]


def problem_to_dict(problem: InterpolationProblem) -> dict:
    return {
        "nodes": [_pair(z) for z in problem.nodes],
        "multiplicities": list(problem.multiplicities),
        "values": [[_pair(v) for v in vals] for vals in problem.values],
        "domain": "exterior",
    }
