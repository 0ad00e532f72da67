"""Truncated moment sequences, moment and localizing matrices.

Moment vectors are dense and indexed by grevlex position (see
:mod:`ccmpc.poly`): ``values[k]`` is the moment of the k-th monomial of
``monomial_basis(num_vars, max_degree)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .poly import Polynomial, basis_index, monomial_basis, n_monomials, _basis

PSD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MomentSequence:
    num_vars: int
    max_degree: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        expected = n_monomials(self.num_vars, self.max_degree)
        if vals.shape[0] != expected:
            raise ValueError(
                f"moment vector of length {vals.shape[0]}; {self.num_vars} variables "
                f"up to degree {self.max_degree} needs {expected}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def mass(self) -> float:
        return float(self.values[0])

    def __getitem__(self, alpha) -> float:
        alpha = tuple(alpha)
        if sum(alpha) > self.max_degree:
            raise KeyError(
                f"moment of order {sum(alpha)} requested; sequence stops at {self.max_degree}"
            )
        return float(self.values[basis_index(self.num_vars, self.max_degree)[alpha]])

    def truncate(self, degree: int) -> "MomentSequence":
        if degree > self.max_degree:
            raise ValueError(f"cannot extend moments from order {self.max_degree} to {degree}")
        return MomentSequence(self.num_vars, degree, self.values[: n_monomials(self.num_vars, degree)])

    def __mul__(self, c: float) -> "MomentSequence":
        return MomentSequence(self.num_vars, self.max_degree, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other: "MomentSequence") -> "MomentSequence":
        if (other.num_vars, other.max_degree) != (self.num_vars, self.max_degree):
            raise ValueError("moment sequences live in different spaces")
        return MomentSequence(self.num_vars, self.max_degree, self.values + other.values)

    def __sub__(self, other: "MomentSequence") -> "MomentSequence":
        return self + (-1.0) * other

    def to_json(self) -> str:
        return json.dumps(
            {"num_vars": self.num_vars, "max_degree": self.max_degree,
             "values": [float(v) for v in self.values]}
        )

    @classmethod
    def from_json(cls, text: str) -> "MomentSequence":
        d = json.loads(text)
        return cls(int(d["num_vars"]), int(d["max_degree"]), np.array(d["values"], dtype=float))


@dataclass(frozen=True)
class DisturbanceSpec:
    """Independent per-coordinate disturbance law, i.i.d. across time steps.

    ``kind`` is ``"uniform"`` (``bounds`` are the intervals) or ``"point"``
    (deterministic; ``bounds`` hold ``[v, v]``).
    """

    kind: str
    bounds: tuple
    independent: bool = field(default=True)

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        if self.kind == "uniform":
            for lo, hi in b:
                if not lo < hi:
                    raise ValueError(f"uniform disturbance needs a < b, got [{lo}, {hi}]")
        elif self.kind == "point":
            for lo, hi in b:
                if lo != hi:
                    raise ValueError(f"point disturbance needs a == b, got [{lo}, {hi}]")
        else:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if not self.independent:
            raise ValueError("only independent disturbances are supported")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def moments(self, coord: int, max_degree: int) -> MomentSequence:
        lo, hi = self.bounds[coord]
        if self.kind == "uniform":
            return uniform_moments(lo, hi, max_degree)
        return delta_moments([lo], max_degree)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draws of shape ``(*size, dim)`` by inverse CDF on uniform output."""
        size = (size,) if np.isscalar(size) else tuple(size)
        unif = rng.random(size + (self.dim,))
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo + (hi - lo) * unif


def uniform_moments(a: float, b: float, max_degree: int) -> MomentSequence:
    """Moments of the uniform probability law on ``[a, b]``."""
    if not a < b:
        raise ValueError(f"uniform_moments needs a < b, got a={a}, b={b}")
    j = np.arange(max_degree + 1)
    vals = (b ** (j + 1) - a ** (j + 1)) / ((j + 1) * (b - a))
    return MomentSequence(1, max_degree, vals)


def delta_moments(point: Sequence[float], max_degree: int) -> MomentSequence:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    n = point.shape[0]
    exps = np.array(monomial_basis(n, max_degree), dtype=float)
    vals = np.prod(point[None, :] ** exps, axis=1)
    return MomentSequence(n, max_degree, vals)


def empirical_moments(points: np.ndarray, max_degree: int, weights=None) -> MomentSequence:
    """Moments of a weighted sum of point masses (rows of ``points``)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    if weights is None:
        weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
    exps = np.array(monomial_basis(n, max_degree), dtype=float)
    mons = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    return MomentSequence(n, max_degree, np.asarray(weights) @ mons)


def product_moments(ys: Sequence[MomentSequence]) -> MomentSequence:
    """Moments of the product measure over the concatenated variables."""
    if not ys:
        raise ValueError("product_moments needs at least one sequence")
    degs = {y.max_degree for y in ys}
    if len(degs) != 1:
        raise ValueError(f"truncation degrees differ: {sorted(degs)}")
    d = degs.pop()
    sizes = [y.num_vars for y in ys]
    n = sum(sizes)
    idxs = [basis_index(k, d) for k in sizes]
    out = np.empty(n_monomials(n, d))
    for pos, alpha in enumerate(_basis(n, d)):
        v, off = 1.0, 0
        for y, k, idx in zip(ys, sizes, idxs):
            v *= y.values[idx[alpha[off:off + k]]]
            off += k
        out[pos] = v
    return MomentSequence(n, d, out)


def linear_functional(y: MomentSequence, p: Polynomial) -> float:
    """Riesz functional: sum of p_alpha * y_alpha."""
    if p.num_vars != y.num_vars:
        raise ValueError(f"polynomial has {p.num_vars} variables, moments have {y.num_vars}")
    if p.degree > y.max_degree:
        raise ValueError(
            f"polynomial of degree {p.degree} needs moments of order {p.degree}; "
            f"sequence stops at order {y.max_degree}"
        )
    idx = basis_index(y.num_vars, y.max_degree)
    return float(sum(c * y.values[idx[a]] for a, c in p.terms.items()))


@lru_cache(maxsize=None)
def moment_index_matrix(n: int, r: int, shift: tuple | None = None, d: int | None = None) -> np.ndarray:
    """Integer matrix whose (i, j) entry is the 0-based position of
    alpha_i + alpha_j (+ shift) in ``monomial_basis(n, d)``."""
    rows = _basis(n, r)
    shift = shift or (0,) * n
    if d is None:
        d = 2 * r + sum(shift)
    idx = basis_index(n, d)
    s = len(rows)
    out = np.empty((s, s), dtype=np.intp)
    for i in range(s):
        for j in range(i, s):
            key = tuple(a + b + c for a, b, c in zip(rows[i], rows[j], shift))
            out[i, j] = out[j, i] = idx[key]
    out.setflags(write=False)
    return out


def moment_matrix(y: MomentSequence, r: int) -> np.ndarray:
    if y.max_degree < 2 * r:
        raise ValueError(
            f"moment matrix of order {r} needs moments up to {2 * r}; have {y.max_degree}"
        )
    return y.values[moment_index_matrix(y.num_vars, r, None, y.max_degree)]


def localizing_matrix(y: MomentSequence, p: Polynomial, r: int) -> np.ndarray:
    if p.num_vars != y.num_vars:
        raise ValueError(f"polynomial has {p.num_vars} variables, moments have {y.num_vars}")
    need = 2 * r + p.degree
    if y.max_degree < need:
        raise ValueError(
            f"localizing matrix of order {r} for a degree-{p.degree} polynomial needs "
            f"moments up to {need}; have {y.max_degree}"
        )
    s = n_monomials(y.num_vars, r)
    out = np.zeros((s, s))
    for gamma, c in p.terms.items():
        out += c * y.values[moment_index_matrix(y.num_vars, r, gamma, y.max_degree)]
    return out


def min_eig(mat: np.ndarray) -> float:
    if mat.size == 0:
        return np.inf
    sym = 0.5 * (mat + mat.T)
    return float(np.linalg.eigvalsh(sym)[0])


def localizer_order(r: int, p: Polynomial) -> int:
    return r - (p.degree + 1) // 2


def representing_measure_check(y: MomentSequence, constraints: Sequence[Polynomial],
                               r: int, tol: float = PSD_TOL):
    """Necessary PSD conditions for ``y`` to come from a measure on
    ``{p >= 0 for p in constraints}``.

    Returns ``(ok, evidence)`` where evidence maps a label to the minimum
    eigenvalue of the corresponding matrix.
    """
    evidence = {"moment": min_eig(moment_matrix(y, r))}
    for k, p in enumerate(constraints):
        order = localizer_order(r, p)
        if order < 0:
            continue
        evidence[f"localizing[{k}]"] = min_eig(localizing_matrix(y, p, order))
    ok = all(v >= -tol for v in evidence.values())
    return ok, evidence
