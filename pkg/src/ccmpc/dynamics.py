"""Problem data for chance-constrained MPC of polynomial systems.

Variable layouts used throughout:

* ``SystemModel.f`` lives over ``(x_1..x_nx, u_1..u_nu, w_1..w_nw)``.
* Unrolled state polynomials over a horizon ``N`` live over
  ``(u_k, .., u_{k+N-1}, w_k, .., w_{k+N-1})`` with each block ``n_u``
  resp. ``n_w`` wide.
* ``ProblemSpec.cost`` lives over ``(x_{k+1}, .., x_{k+N}, u_k, .., u_{k+N-1})``.
* The chance-constraint polynomial lives over ``(u_k, w_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .moments import DisturbanceSpec
from .poly import Polynomial

CONTRACTION = "contraction"
PAPER_LITERAL = "paper_literal"
SIGN_MODES = (CONTRACTION, PAPER_LITERAL)


@dataclass(frozen=True)
class SystemModel:
    n_x: int
    n_u: int
    n_w: int
    f: tuple

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        if len(self.f) != self.n_x:
            raise ValueError(f"need {self.n_x} dynamics components, got {len(self.f)}")
        nv = self.n_x + self.n_u + self.n_w
        for i, p in enumerate(self.f):
            if p.num_vars != nv:
                raise ValueError(
                    f"f[{i}] has {p.num_vars} variables; expected {nv} (states, inputs, disturbances)"
                )

    @property
    def num_vars(self) -> int:
        return self.n_x + self.n_u + self.n_w

    def __call__(self, x, u, w) -> np.ndarray:
        """Numeric one-step map; ``x``, ``u``, ``w`` may carry leading batch axes."""
        x, u, w = (np.asarray(v, dtype=float) for v in (x, u, w))
        shape = np.broadcast_shapes(x.shape[:-1], u.shape[:-1], w.shape[:-1])
        pt = np.concatenate(
            [np.broadcast_to(x, shape + (self.n_x,)),
             np.broadcast_to(u, shape + (self.n_u,)),
             np.broadcast_to(w, shape + (self.n_w,))], axis=-1)
        return np.stack([np.asarray(p.evaluate(pt)) for p in self.f], axis=-1)


@dataclass(frozen=True)
class SemialgebraicSet:
    """``{v : p(v) >= 0 for p in nonneg}`` intersected with a finite box.

    The desired set is written ``{x : P(x) <= 0}``; use :meth:`below` to
    build it so that ``polynomial`` keeps the original sign.
    """

    polynomials: tuple
    box: tuple
    sense: str = ">="

    def __post_init__(self):
        object.__setattr__(self, "polynomials", tuple(self.polynomials))
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        object.__setattr__(self, "box", box)
        if self.sense not in (">=", "<="):
            raise ValueError(f"sense must be '>=' or '<=', got {self.sense!r}")
        for lo, hi in box:
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ValueError(f"bounding box entry [{lo}, {hi}] is not a finite interval")
        for p in self.polynomials:
            if p.num_vars != len(box):
                raise ValueError(
                    f"set polynomial has {p.num_vars} variables but the box has {len(box)}"
                )

    @classmethod
    def below(cls, p: Polynomial, box) -> "SemialgebraicSet":
        return cls((p,), box, "<=")

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def polynomial(self) -> Polynomial:
        if len(self.polynomials) != 1:
            raise ValueError("set is not described by a single polynomial")
        return self.polynomials[0]

    def nonneg(self) -> list[Polynomial]:
        """Defining polynomials rewritten as ``g >= 0``."""
        return [p if self.sense == ">=" else -p for p in self.polynomials]

    def contains(self, v, tol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        in_box = all(lo - tol <= vi <= hi + tol for vi, (lo, hi) in zip(v, self.box))
        return in_box and all(g.evaluate(v) >= -tol for g in self.nonneg())


@dataclass(frozen=True)
class ProblemSpec:
    model: SystemModel
    desired_set: SemialgebraicSet
    input_set: SemialgebraicSet
    disturbance: DisturbanceSpec
    cost: Polynomial
    alpha: float
    beta: float
    horizon: int
    sign_mode: str = CONTRACTION
    stage_cost: Polynomial | None = field(default=None, compare=False)
    terminal_cost: Polynomial | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.sign_mode not in SIGN_MODES:
            raise ValueError(f"sign_mode must be one of {SIGN_MODES}, got {self.sign_mode!r}")
        m = self.model
        if self.desired_set.dim != m.n_x:
            raise ValueError("desired set must live in the state space")
        if self.input_set.dim != m.n_u:
            raise ValueError("input set must be given per stage over the n_u inputs")
        if self.disturbance.dim != m.n_w:
            raise ValueError(f"disturbance has {self.disturbance.dim} coordinates, model has {m.n_w}")
        want = self.horizon * (m.n_x + m.n_u)
        if self.cost.num_vars != want:
            raise ValueError(
                f"cost has {self.cost.num_vars} variables; horizon {self.horizon} needs {want}"
            )

    @property
    def target(self) -> Polynomial:
        """The polynomial P with desired set ``{P <= 0}``."""
        return self.desired_set.polynomial

    def target_value(self, x) -> float:
        return float(self.target.evaluate(np.asarray(x, dtype=float)))

    @property
    def n_inputs(self) -> int:
        return self.horizon * self.model.n_u

    @property
    def n_disturbances(self) -> int:
        return self.horizon * self.model.n_w


def horizon_cost(stage: Polynomial, n_x: int, n_u: int, horizon: int,
                 terminal: Polynomial | None = None) -> Polynomial:
    """Sum of ``stage(x_{k+i}, u_{k+i-1})`` for i = 1..N plus ``terminal(x_{k+N})``."""
    if stage.num_vars != n_x + n_u:
        raise ValueError(f"stage cost must have {n_x + n_u} variables, has {stage.num_vars}")
    nv = horizon * (n_x + n_u)
    total = Polynomial.zero(nv)
    for i in range(horizon):
        pos = [i * n_x + j for j in range(n_x)] + [horizon * n_x + i * n_u + j for j in range(n_u)]
        total = total + stage.embed(nv, pos)
    if terminal is not None:
        if terminal.num_vars != n_x:
            raise ValueError(f"terminal cost must have {n_x} variables")
        total = total + terminal.embed(nv, [(horizon - 1) * n_x + j for j in range(n_x)])
    return total


def unroll(model: SystemModel, x_k, horizon: int) -> list[list[Polynomial]]:
    """State polynomials ``x_{k+1} .. x_{k+N}`` in the inputs and disturbances."""
    x_k = np.asarray(x_k, dtype=float)
    if x_k.shape != (model.n_x,):
        raise ValueError(f"state has shape {x_k.shape}, expected ({model.n_x},)")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    nu, nw = model.n_u, model.n_w
    nv = horizon * (nu + nw)
    state = [Polynomial.constant(v, nv) for v in x_k]
    out = []
    for i in range(horizon):
        u = [Polynomial.variable(i * nu + j, nv) for j in range(nu)]
        w = [Polynomial.variable(horizon * nu + i * nw + j, nv) for j in range(nw)]
        repl = state + u + w
        state = [p.substitute(repl) for p in model.f]
        out.append(state)
    return out


def integrate_disturbances(p: Polynomial, n_keep: int, disturbance: DisturbanceSpec) -> Polynomial:
    """Integrate every variable after the first ``n_keep`` against the i.i.d.
    disturbance law (blocks of ``disturbance.dim`` per time step)."""
    nw = disturbance.dim
    n_dist = p.num_vars - n_keep
    if nw == 0 or n_dist == 0:
        if n_dist:
            raise ValueError("disturbance variables present but the law has no coordinates")
        return p
    if n_dist % nw:
        raise ValueError("disturbance variable count is not a multiple of the law's dimension")
    deg = p.degree
    tables = [disturbance.moments(j, deg).values for j in range(nw)]
    out: dict = {}
    for alpha, c in p.terms.items():
        keep, rest = alpha[:n_keep], alpha[n_keep:]
        val = c
        for t, e in enumerate(rest):
            if e:
                val *= tables[t % nw][e]
        out[keep] = out.get(keep, 0.0) + val
    return Polynomial(out, n_keep)


def expected_cost(spec: ProblemSpec, x_k) -> Polynomial:
    """Expected horizon cost as a polynomial in the stacked inputs only."""
    m, N = spec.model, spec.horizon
    states = unroll(m, x_k, N)
    nv = N * (m.n_u + m.n_w)
    inputs = [Polynomial.variable(i, nv) for i in range(N * m.n_u)]
    repl = [p for st in states for p in st] + inputs
    realized = spec.cost.substitute(repl)
    return integrate_disturbances(realized, N * m.n_u, spec.disturbance)


def constraint_polynomial(spec: ProblemSpec, x_k) -> Polynomial:
    """Polynomial over ``(u_k, w_k)`` whose nonnegativity is the chance event.

    Contraction mode: ``alpha*P(x_k) - P(f(x_k, u_k, w_k))``; ``paper_literal``
    mode returns its negation (the reversed event).
    """
    m = spec.model
    x_k = np.asarray(x_k, dtype=float)
    nv = m.n_u + m.n_w
    repl = [Polynomial.constant(v, nv) for v in x_k] + [Polynomial.variable(i, nv) for i in range(nv)]
    nxt = [p.substitute(repl) for p in m.f]
    p_next = spec.target.substitute(nxt)
    pk = spec.alpha * spec.target_value(x_k) - p_next
    return pk if spec.sign_mode == CONTRACTION else -pk


def required_probability(spec: ProblemSpec, x_k) -> float:
    return float(np.clip(1.0 - spec.beta * spec.target_value(x_k), 0.0, 1.0))


def contraction_event(spec: ProblemSpec, x_k, x_next) -> np.ndarray:
    """Boolean mask of the chance event for (batched) successor states."""
    now = spec.target_value(x_k)
    nxt = np.asarray(spec.target.evaluate(np.asarray(x_next, dtype=float)))
    if spec.sign_mode == CONTRACTION:
        return nxt <= spec.alpha * now
    return nxt >= spec.alpha * now
