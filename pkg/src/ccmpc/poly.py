"""Sparse multivariate polynomials with a graded reverse-lexicographic basis.

A polynomial is stored as a mapping from exponent tuples to float
coefficients.  Moment vectors elsewhere in the package are indexed by the
1-based position of a monomial in :func:`monomial_basis`, so the ordering
defined here is the indexing contract for everything downstream.

Within a fixed total degree monomials are listed so that a larger exponent
in the last position ranks later, e.g. for two variables::

    1, x1, x2, x1^2, x1*x2, x2^2, x1^3, ...
"""
from __future__ import annotations

import ast
import itertools
import re
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

ZERO_TOL = 1e-14

Monomial = tuple  # tuple[int, ...]


def _grevlex_key(alpha):
    return (sum(alpha), tuple(reversed(alpha)))


@lru_cache(maxsize=None)
def _basis(n, d):
    out = []
    for deg in range(d + 1):
        block = [
            tuple(c)
            for c in itertools.product(range(deg + 1), repeat=n)
            if sum(c) == deg
        ]
        block.sort(key=_grevlex_key)
        out.extend(block)
    return tuple(out)


def monomial_basis(n: int, d: int) -> list[Monomial]:
    """All exponent tuples of ``n`` variables with degree <= ``d``, grevlex order."""
    if n < 1 or d < 0:
        raise ValueError(f"monomial_basis needs n >= 1 and d >= 0, got n={n}, d={d}")
    return list(_basis(n, d))


@lru_cache(maxsize=None)
def basis_index(n: int, d: int) -> dict:
    """Map exponent tuple -> 0-based position in ``monomial_basis(n, d)``."""
    return {a: i for i, a in enumerate(_basis(n, d))}


def n_monomials(n: int, d: int) -> int:
    return comb(n + d, n)


def grevlex_rank(alpha: Sequence[int], n: int) -> int:
    """1-based position of ``alpha`` among all monomials in ``n`` variables."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise ValueError(f"exponent vector has length {len(alpha)}, expected {n}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative exponent in {alpha}")
    d = sum(alpha)
    # monomials of strictly lower degree
    rank = comb(n + d - 1, n) if d > 0 else 0
    # within degree d: count monomials whose reversed exponent is lexicographically smaller
    rem = d
    for j in range(n - 1, 0, -1):
        for v in range(alpha[j]):
            rest = rem - v
            rank += comb(rest + j - 1, j - 1)
        rem -= alpha[j]
    return rank + 1


class Polynomial:
    """Immutable sparse polynomial in ``num_vars`` variables.

    Coefficients with magnitude below ``ZERO_TOL`` are dropped on
    construction, so two polynomials compare equal exactly when their
    normalized term maps are equal.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms: Mapping[Sequence[int], float], num_vars: int):
        n = int(num_vars)
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(
                    f"monomial {alpha} has {len(alpha)} exponents, expected {n}"
                )
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = float(c)
            if abs(c) >= ZERO_TOL:
                clean[alpha] = clean.get(alpha, 0.0) + c
        self._terms = {a: c for a, c in clean.items() if abs(c) >= ZERO_TOL}
        self._n = n

    # construction helpers
    @classmethod
    def constant(cls, c: float, num_vars: int) -> "Polynomial":
        return cls({(0,) * num_vars: c}, num_vars)

    @classmethod
    def variable(cls, i: int, num_vars: int) -> "Polynomial":
        """The monomial x_{i+1} (``i`` is 0-based)."""
        if not 0 <= i < num_vars:
            raise IndexError(f"variable index {i} out of range for {num_vars} variables")
        alpha = [0] * num_vars
        alpha[i] = 1
        return cls({tuple(alpha): 1.0}, num_vars)

    @classmethod
    def zero(cls, num_vars: int) -> "Polynomial":
        return cls({}, num_vars)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[float], num_vars: int) -> "Polynomial":
        """Inverse of :meth:`coefficients` (grevlex-ordered dense vector)."""
        coeffs = np.asarray(coeffs, dtype=float)
        d = 0
        while n_monomials(num_vars, d) < len(coeffs):
            d += 1
        if n_monomials(num_vars, d) != len(coeffs):
            raise ValueError(f"length {len(coeffs)} is not a full grevlex block size")
        return cls(dict(zip(_basis(num_vars, d), coeffs)), num_vars)

    # basic properties
    @property
    def num_vars(self) -> int:
        return self._n

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        """Maximum total degree; the zero polynomial has degree 0."""
        if not self._terms:
            return 0
        return max(sum(a) for a in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, alpha: Sequence[int]) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    def coefficients(self, max_degree: int | None = None) -> np.ndarray:
        """Dense coefficient vector in grevlex order up to ``max_degree``."""
        d = self.degree if max_degree is None else max_degree
        if d < self.degree:
            raise ValueError(f"max_degree {d} below polynomial degree {self.degree}")
        idx = basis_index(self._n, d)
        out = np.zeros(len(idx))
        for a, c in self._terms.items():
            out[idx[a]] = c
        return out

    def __iter__(self):
        return iter(sorted(self._terms.items(), key=lambda t: _grevlex_key(t[0])))

    def __len__(self):
        return len(self._terms)

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise ValueError(
                    f"dimension mismatch: {self._n} vs {other._n} variables"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(float(other), self._n)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial(out, self._n)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({a: -c for a, c in self._terms.items()}, self._n)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(out, self._n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError(f"only nonnegative integer powers are supported, got {k!r}")
        result = Polynomial.constant(1.0, self._n)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._n == other._n and self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash((self._n, frozenset(self._terms.items())))

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    # evaluation and composition
    def __call__(self, *point):
        if len(point) == 1:
            return self.evaluate(point[0])
        return self.evaluate(point)

    def evaluate(self, point) -> float | np.ndarray:
        """Evaluate at ``point``; a trailing axis of length ``num_vars`` is
        required, leading axes broadcast (so a batch of points works)."""
        pts = np.asarray(point, dtype=float)
        if pts.shape[-1:] != (self._n,):
            raise ValueError(
                f"point has trailing dimension {pts.shape[-1:]}, expected ({self._n},)"
            )
        if not self._terms:
            out = np.zeros(pts.shape[:-1])
        else:
            exps = np.array(list(self._terms.keys()), dtype=float)
            coefs = np.array(list(self._terms.values()))
            # (..., n) -> (..., T)
            mon = np.prod(pts[..., None, :] ** exps, axis=-1)
            out = mon @ coefs
        return float(out) if out.ndim == 0 else out

    def substitute(self, replacements: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace variable i by ``replacements[i]`` and expand."""
        if len(replacements) != self._n:
            raise ValueError(
                f"need a replacement for each of {self._n} variables, got {len(replacements)}"
            )
        if not replacements:
            raise ValueError("no replacements given")
        target = {r.num_vars for r in replacements}
        if len(target) != 1:
            raise ValueError(f"replacements live in different variable spaces: {target}")
        m = target.pop()
        powers: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                powers[key] = replacements[i] ** k
            return powers[key]

        out = Polynomial.zero(m)
        for alpha, c in self._terms.items():
            term = Polynomial.constant(c, m)
            for i, k in enumerate(alpha):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def embed(self, num_vars: int, positions: Sequence[int]) -> "Polynomial":
        """Re-express in a larger space: variable i goes to ``positions[i]``."""
        if len(positions) != self._n:
            raise ValueError("positions must list one target slot per variable")
        out = {}
        for a, c in self._terms.items():
            b = [0] * num_vars
            for i, k in zip(positions, a):
                b[i] += k
            out[tuple(b)] = out.get(tuple(b), 0.0) + c
        return Polynomial(out, num_vars)

    # text form
    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self._n)]
        if not self._terms:
            return "0"
        parts = []
        for a, c in self:
            mon = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, a) if k
            )
            mag = abs(c)
            if not mon:
                body = repr(mag)
            elif mag == 1.0:
                body = mon
            else:
                body = f"{mag!r}*{mon}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Polynomial({self.to_string()!r}, num_vars={self._n})"


class PolynomialParseError(ValueError):
    pass


_ALLOWED_NAME = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


def parse_polynomial(text: str, names: Sequence[str]) -> Polynomial:
    """Parse text such as ``"2*x1^2*x2 - 0.04"`` over the given variable names.

    Supports ``+ - *``, ``^`` (or ``**``) with nonnegative integer exponents,
    parentheses and numeric literals.  Whitespace is ignored.
    """
    if not isinstance(text, str):
        raise PolynomialParseError(f"expected a string, got {type(text).__name__}")
    n = len(names)
    lookup = {name: i for i, name in enumerate(names)}
    src = text.replace("^", "**").strip()
    if not src:
        raise PolynomialParseError("empty polynomial string")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise PolynomialParseError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return Polynomial.constant(float(node.value), n)
        if isinstance(node, ast.Name):
            if node.id not in lookup:
                raise PolynomialParseError(
                    f"unknown variable {node.id!r} in {text!r}; allowed: {', '.join(names)}"
                )
            return Polynomial.variable(lookup[node.id], n)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                neg = False
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    neg, exp = True, exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)) or neg:
                    raise PolynomialParseError(
                        f"exponents must be nonnegative integer literals in {text!r}"
                    )
                return ev(node.left) ** exp.value
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div) and right.degree == 0:
                return left * (1.0 / right.coefficient((0,) * n))
        raise PolynomialParseError(f"unsupported syntax in {text!r}")

    return ev(tree)


def variable_names(prefix: str, count: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(count)]


def polys_allclose(ps: Iterable[Polynomial], qs: Iterable[Polynomial], atol=1e-12) -> bool:
    return all(p.allclose(q, atol) for p, q in zip(ps, qs))
