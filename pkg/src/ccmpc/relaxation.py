"""Moment SDP relaxation of one chance-constrained MPC step.

Decision vector layout: ``[y_u | y]`` where ``y_u`` holds the moments up to
order ``2r`` of the input measure over all ``N * n_u`` horizon inputs, and
``y`` holds the moments of the restricted measure over ``(u_k, w_k)``.

Constraint blocks:

* ``M_r(y) >= 0`` and the localizer of the chance polynomial on ``y``;
* box / disturbance-support / stage input-set localizers on ``y``;
* ``M_r(y_u) >= 0`` with box and input-set localizers;
* ``M_r(yhat - y) >= 0`` with box localizers, where ``yhat`` is the product
  of the ``u_k``-marginal of ``y_u`` with the disturbance moments;
* ``y_0 >= 1 - beta * P(x_k)`` and ``(y_u)_0 = 1``.

Objective: ``L_{y_u}(P_E) + omega_r * trace(M_r(y_u))``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    ProblemSpec, SemialgebraicSet, SystemModel, constraint_polynomial,
    expected_cost, required_probability,
)
from .moments import DisturbanceSpec, MomentSequence, moment_index_matrix
from .poly import Polynomial, _basis, basis_index, n_monomials
from .sdp import AffineBlock, SdpProblem, Segment

DEFAULT_ORDER = 5
DEFAULT_TRACE_WEIGHT = 1.0


@dataclass(frozen=True)
class RelaxationConfig:
    r: int = DEFAULT_ORDER
    omega_r: float = DEFAULT_TRACE_WEIGHT
    scale: bool = True
    domination_localizers: bool = True

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"relaxation order must be >= 1, got {self.r}")
        if self.omega_r < 0:
            raise ValueError(f"trace weight must be nonnegative, got {self.omega_r}")


class RelaxationOrderError(ValueError):
    def __init__(self, r, required, reasons):
        self.r, self.required, self.reasons = r, required, reasons
        detail = ", ".join(f"{k} needs r >= {v}" for k, v in reasons.items())
        super().__init__(f"relaxation order r={r} too small; minimum is {required} ({detail})")


@dataclass(frozen=True)
class InputScaling:
    """Per-input affine map ``u = center + half_width * u_scaled``."""

    center: np.ndarray
    half_width: np.ndarray

    def to_original(self, u_scaled) -> np.ndarray:
        u = np.asarray(u_scaled, dtype=float)
        reps = u.shape[-1] // self.center.shape[0]
        return np.tile(self.center, reps) + np.tile(self.half_width, reps) * u

    def to_scaled(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        reps = u.shape[-1] // self.center.shape[0]
        return (u - np.tile(self.center, reps)) / np.tile(self.half_width, reps)

    @classmethod
    def identity(cls, n_u: int) -> "InputScaling":
        return cls(np.zeros(n_u), np.ones(n_u))


def _affine_subs(center, half, num_vars, offset):
    return [Polynomial.constant(c, num_vars) + h * Polynomial.variable(offset + i, num_vars)
            for i, (c, h) in enumerate(zip(center, half))]


def _box_affine(box, what):
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    if np.any(hi - lo <= 0):
        raise ValueError(f"degenerate {what} box {list(map(tuple, box))}: zero width")
    return (hi + lo) / 2.0, (hi - lo) / 2.0


def scale_problem(spec: ProblemSpec):
    """Rescale every input and (uniform) disturbance coordinate to [-1, 1].

    Returns ``(scaled_spec, InputScaling)``; point disturbances are left as is.
    """
    m = spec.model
    uc, uh = _box_affine(spec.input_set.box, "input")
    if spec.disturbance.kind == "uniform":
        wc, wh = _box_affine(spec.disturbance.bounds, "disturbance")
    else:
        wc, wh = np.zeros(m.n_w), np.ones(m.n_w)
    nv = m.num_vars
    repl = ([Polynomial.variable(i, nv) for i in range(m.n_x)]
            + _affine_subs(uc, uh, nv, m.n_x) + _affine_subs(wc, wh, nv, m.n_x + m.n_u))
    f = tuple(p.substitute(repl) for p in m.f)
    model = SystemModel(m.n_x, m.n_u, m.n_w, f)

    in_repl = _affine_subs(uc, uh, m.n_u, 0)
    input_set = SemialgebraicSet(
        tuple(p.substitute(in_repl) for p in spec.input_set.polynomials),
        tuple((-1.0, 1.0) for _ in range(m.n_u)), spec.input_set.sense)

    if spec.disturbance.kind == "uniform":
        dist = DisturbanceSpec("uniform", tuple((-1.0, 1.0) for _ in range(m.n_w)))
    else:
        dist = spec.disturbance

    N = spec.horizon
    nc = spec.cost.num_vars
    cost_repl = [Polynomial.variable(i, nc) for i in range(N * m.n_x)]
    for i in range(N):
        cost_repl += _affine_subs(uc, uh, nc, N * m.n_x + i * m.n_u)
    cost = spec.cost.substitute(cost_repl)
    scaled = replace(spec, model=model, input_set=input_set, disturbance=dist, cost=cost,
                     stage_cost=None, terminal_cost=None)
    return scaled, InputScaling(uc, uh)


def _box_polys(box, num_vars, offset):
    """``(hi - v)(v - lo) >= 0`` for each coordinate."""
    out = []
    for i, (lo, hi) in enumerate(box):
        v = Polynomial.variable(offset + i, num_vars)
        out.append((hi - v) * (v - lo))
    return out


def _support_polys(dist: DisturbanceSpec, num_vars, offset):
    if dist.kind == "uniform":
        return _box_polys(dist.bounds, num_vars, offset)
    out = []
    for i, (v0, _) in enumerate(dist.bounds):
        v = Polynomial.variable(offset + i, num_vars)
        out.append(-((v - v0) ** 2))
    return out


def _half_ceil(d):
    return (d + 1) // 2


def _moment_block(name, T, n, order, poly, m):
    """Block ``sum_gamma p_gamma * (T z)[gamma + a_i + a_j]`` where the rows of
    ``T`` give moments (grevlex, order ``2r``) as linear maps of ``z``."""
    s = n_monomials(n, order)
    F = np.zeros((m, s, s))
    full_deg = _full_degree(T, n)
    for gamma, coeff in poly.terms.items():
        idx = moment_index_matrix(n, order, gamma, full_deg)
        F += coeff * np.moveaxis(T[idx], -1, 0)
    return AffineBlock.from_dense(name, np.zeros((s, s)), F)


def _full_degree(T, n):
    d = 0
    while n_monomials(n, d) < T.shape[0]:
        d += 1
    return d


def order_requirements(spec: ProblemSpec, x_k) -> dict:
    """Minimum relaxation order demanded by each polynomial in the SDP."""
    pk = constraint_polynomial(spec, x_k)
    pe = expected_cost(spec, x_k)
    req = {"chance polynomial": max(1, _half_ceil(pk.degree)),
           "expected cost": max(1, _half_ceil(pe.degree))}
    for k, g in enumerate(spec.input_set.nonneg()):
        req[f"input set polynomial {k}"] = max(1, _half_ceil(g.degree))
    return req


def build_relaxation(spec: ProblemSpec, x_k, cfg: RelaxationConfig | None = None):
    """Assemble the moment SDP for state ``x_k``.

    Returns ``(SdpProblem, InputScaling)``; the SDP is stated in scaled
    coordinates when ``cfg.scale`` is set.
    """
    cfg = cfg or RelaxationConfig()
    x_k = np.asarray(x_k, dtype=float)
    if cfg.scale:
        work, scaling = scale_problem(spec)
    else:
        work, scaling = spec, InputScaling.identity(spec.model.n_u)
    model = work.model
    r = cfg.r
    nu, nw, N = model.n_u, model.n_w, work.horizon

    pk = constraint_polynomial(work, x_k)
    pe = expected_cost(work, x_k)
    reqs = order_requirements(work, x_k)
    need = max(reqs.values())
    if r < need:
        raise RelaxationOrderError(r, need, reqs)

    n_in = N * nu          # variables of y_u
    n_y = nu + nw          # variables of y
    size_u = n_monomials(n_in, 2 * r)
    size_y = n_monomials(n_y, 2 * r)
    m = size_u + size_y
    off_u, off_y = 0, size_u

    T_u = np.zeros((size_u, m))
    T_u[np.arange(size_u), off_u + np.arange(size_u)] = 1.0
    T_y = np.zeros((size_y, m))
    T_y[np.arange(size_y), off_y + np.arange(size_y)] = 1.0

    # yhat = (u_k-marginal of y_u) x (disturbance moments), linear in y_u
    idx_u = basis_index(n_in, 2 * r)
    w_tables = [work.disturbance.moments(j, 2 * r).values for j in range(nw)]
    T_hat = np.zeros((size_y, m))
    for pos, beta in enumerate(_basis(n_y, 2 * r)):
        bu, bw = beta[:nu], beta[nu:]
        factor = 1.0
        for j, e in enumerate(bw):
            factor *= w_tables[j][e]
        T_hat[pos, off_u + idx_u[tuple(bu) + (0,) * (n_in - nu)]] = factor
    T_dom = T_hat - T_y

    one_y = Polynomial.constant(1.0, n_y)
    one_u = Polynomial.constant(1.0, n_in)
    box_y = (_box_polys(work.input_set.box, n_y, 0)
             + _support_polys(work.disturbance, n_y, nu))
    box_u = [g for i in range(N) for g in _box_polys(work.input_set.box, n_in, i * nu)]
    # input-set polynomials that merely restate the box (e.g. 1 - u^2 on
    # [-1, 1]) would duplicate a localizer block and make the dual degenerate
    in_set = [g for g in work.input_set.nonneg()
              if not any(g.allclose(bx) for bx in _box_polys(work.input_set.box, nu, 0))]
    set_y = [g.embed(n_y, list(range(nu))) for g in in_set]
    set_u = [g.embed(n_in, [i * nu + j for j in range(nu)]) for i in range(N) for g in in_set]

    blocks = [_moment_block("M_r(y)", T_y, n_y, r, one_y, m)]
    blocks.append(_moment_block("M(y; P_K)", T_y, n_y, r - _half_ceil(pk.degree), pk, m))
    for k, g in enumerate(box_y + set_y):
        blocks.append(_moment_block(f"M(y; g{k})", T_y, n_y, r - _half_ceil(g.degree), g, m))
    blocks.append(_moment_block("M_r(y_u)", T_u, n_in, r, one_u, m))
    for k, g in enumerate(box_u + set_u):
        blocks.append(_moment_block(f"M(y_u; g{k})", T_u, n_in, r - _half_ceil(g.degree), g, m))
    blocks.append(_moment_block("M_r(yhat - y)", T_dom, n_y, r, one_y, m))
    if cfg.domination_localizers:
        for k, g in enumerate(box_y):
            blocks.append(_moment_block(f"M(yhat - y; g{k})", T_dom, n_y,
                                        r - _half_ceil(g.degree), g, m))

    p_req = required_probability(spec, x_k)
    G = np.zeros((1, m))
    G[0, off_y] = 1.0
    h = np.array([-p_req])
    A = np.zeros((1, m))
    A[0, off_u] = 1.0
    b = np.array([1.0])

    c = np.zeros(m)
    for alpha, coeff in pe.terms.items():
        c[off_u + idx_u[alpha]] += coeff
    if cfg.omega_r:
        diag = moment_index_matrix(n_in, r, None, 2 * r).diagonal()
        np.add.at(c, off_u + diag, cfg.omega_r)

    prob = SdpProblem(
        m, c, blocks, G, h, A, b,
        segments={"y_u": Segment(off_u, n_in, 2 * r, size_u),
                  "y": Segment(off_y, n_y, 2 * r, size_y)},
        labels={"required_probability": p_req, "r": r, "omega_r": cfg.omega_r,
                "chance_polynomial": pk, "expected_cost": pe},
    )
    return prob, scaling


def moment_segment(problem: SdpProblem, z, name: str) -> MomentSequence:
    seg = problem.segments[name]
    return MomentSequence(seg.num_vars, seg.max_degree, problem.segment(z, name))


def pack_decision(problem: SdpProblem, **moments: MomentSequence) -> np.ndarray:
    """Decision vector holding the given segment moments (others zero)."""
    z = np.zeros(problem.num_vars)
    for name, y in moments.items():
        seg = problem.segments[name]
        vals = y.truncate(seg.max_degree).values if y.max_degree > seg.max_degree else y.values
        if vals.shape[0] != seg.size:
            raise ValueError(f"segment {name!r} expects {seg.size} moments, got {vals.shape[0]}")
        z[seg.offset:seg.offset + seg.size] = vals
    return z
