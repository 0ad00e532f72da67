"""Receding-horizon loop, Monte Carlo validation and reachability bounds.

Random numbers come from numpy's Philox-4x64-10 counter-based generator
keyed by ``SeedSequence([seed, stream, step])``: stream 0 draws the applied
disturbances, stream 1 the Monte Carlo validation samples.  Disturbances
are produced by inverse CDF from uniform output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ProblemSpec, contraction_event, required_probability
from .extraction import RANK_TOL, extract_control
from .relaxation import RelaxationConfig, build_relaxation, moment_segment
from .sdp import SolverSettings, solve

log = logging.getLogger(__name__)

DISTURBANCE_STREAM = 0
VALIDATION_STREAM = 1
MIN_SAMPLES = 100

REACHED = "reached"
STEP_CAP = "step_cap"
SOLVER_FAILURE = "solver_failure"
VALIDATION_FAILURE = "validation_failure"
REPLAY_END = "replay_end"


class StepError(RuntimeError):
    """The relaxation at the current state did not solve to optimality."""

    def __init__(self, status, diagnostics):
        self.status = status
        self.diagnostics = diagnostics
        super().__init__(f"SDP solve ended with status {status!r}")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    max_steps: int = 25
    epsilon: float = 0.01
    samples: int = 100_000
    strict: bool = False
    rank_tol: float = RANK_TOL

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def step(spec: ProblemSpec, x_k, cfg: RelaxationConfig | None = None,
         settings: SolverSettings | None = None, rank_tol: float = RANK_TOL):
    """Solve the relaxation at ``x_k`` and return ``(u_k, diagnostics)``.

    ``u_k`` is the first stage of the extracted input sequence.  Raises
    :class:`StepError` when the solver does not report optimality.
    """
    cfg = cfg or RelaxationConfig()
    x_k = np.asarray(x_k, dtype=float)
    problem, scaling = build_relaxation(spec, x_k, cfg)
    sol = solve(problem, settings)
    diag = {
        "target_value": spec.target_value(x_k),
        "required_probability": problem.labels["required_probability"],
        "state_in_box": bool(spec.desired_set.box and all(
            lo <= v <= hi for v, (lo, hi) in zip(x_k, spec.desired_set.box))),
        "solver_status": sol.status,
        "iterations": sol.iterations,
        "objective": sol.objective,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "gap": sol.gap,
    }
    if not sol.optimal:
        raise StepError(sol.status, diag)
    y_u = moment_segment(problem, sol.z, "y_u")
    ext = extract_control(y_u, cfg.r, rank_tol)
    u_seq = scaling.to_original(ext.u_star)
    diag.update({
        "trace": ext.trace,
        "rank_ratio": ext.rank_ratio,
        "certified": ext.certified,
        "consistency": ext.consistency,
        "input_sequence": [float(v) for v in u_seq],
        "restricted_mass": float(problem.segment(sol.z, "y")[0]),
    })
    if not ext.certified:
        log.warning("rank-one extraction not certified at x=%s (ratio %.2e)", x_k, ext.rank_ratio)
    return u_seq[: spec.model.n_u], diag


def mc_validate(spec: ProblemSpec, x_k, u_k, samples: int, seed=0):
    """Monte Carlo estimate of the chance event probability and its 95%
    confidence half-width."""
    if samples < MIN_SAMPLES:
        raise ValueError(f"at least {MIN_SAMPLES} samples are required, got {samples}")
    keys = seed if isinstance(seed, (tuple, list)) else (seed,)
    rng = make_rng(*keys)
    w = spec.disturbance.sample(rng, samples)
    x_k = np.asarray(x_k, dtype=float)
    u_k = np.asarray(u_k, dtype=float).reshape(spec.model.n_u)
    nxt = spec.model(x_k, u_k, w)
    hits = contraction_event(spec, x_k, nxt)
    p_hat = float(np.mean(hits))
    half = 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return p_hat, half


@dataclass
class TrajectoryLog:
    x0: list
    steps: list = field(default_factory=list)
    terminal: str = ""
    final_state: list = field(default_factory=list)
    seed: int | None = None
    error: str | None = None

    @property
    def states(self) -> np.ndarray:
        xs = [s["state"] for s in self.steps] + [self.final_state]
        return np.array(xs, dtype=float)

    @property
    def reached(self) -> bool:
        return self.terminal == REACHED

    def to_dict(self) -> dict:
        return {"x0": self.x0, "seed": self.seed, "terminal": self.terminal,
                "final_state": self.final_state, "error": self.error, "steps": self.steps}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TrajectoryLog":
        d = json.loads(text)
        return cls(d["x0"], d["steps"], d["terminal"], d["final_state"], d.get("seed"), d.get("error"))

    CSV_COLUMNS = ("k", "state", "input", "disturbance", "target_value", "required_probability",
                   "mc_probability", "mc_halfwidth", "objective", "trace", "rank_ratio", "solver_status")

    def to_csv(self) -> str:
        buf = io.StringIO()
        if not self.steps:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(self.CSV_COLUMNS)
            return buf.getvalue()
        nx = len(self.steps[0]["state"])
        nu = len(self.steps[0]["input"])
        nw = len(self.steps[0]["disturbance"])
        head = (["k"] + [f"x{i + 1}" for i in range(nx)] + [f"u{i + 1}" for i in range(nu)]
                + [f"w{i + 1}" for i in range(nw)] + list(self.CSV_COLUMNS[4:]))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(head)
        for s in self.steps:
            row = [s["k"], *s["state"], *s["input"], *s["disturbance"]]
            row += [s.get(c) for c in self.CSV_COLUMNS[4:]]
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()


def _clean(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating,)):
            v = float(v)
        elif isinstance(v, np.bool_):
            v = bool(v)
        out[k] = v
    return out


def simulate(spec: ProblemSpec, x0, run: RunConfig | None = None,
             cfg: RelaxationConfig | None = None, settings: SolverSettings | None = None) -> TrajectoryLog:
    """Closed-loop run from ``x0``; deterministic given ``run.seed``.

    Stops when the target polynomial is <= 0, after ``run.max_steps`` solves,
    on a non-optimal solve, or (strict mode) when Monte Carlo validation
    undershoots the required probability by more than three half-widths.
    """
    run = run or RunConfig()
    cfg = cfg or RelaxationConfig()
    x = np.asarray(x0, dtype=float)
    trace = TrajectoryLog(x0=[float(v) for v in x], seed=run.seed)
    for k in range(run.max_steps + 1):
        if spec.target_value(x) <= 0:
            trace.terminal = REACHED
            break
        if k == run.max_steps:
            trace.terminal = STEP_CAP
            break
        try:
            u, diag = step(spec, x, cfg, settings, run.rank_tol)
        except StepError as exc:
            trace.terminal = SOLVER_FAILURE
            trace.error = str(exc)
            trace.steps.append(_clean({"k": k, "state": [float(v) for v in x], "input": [],
                                       "disturbance": [], **exc.diagnostics}))
            break
        p_hat, half = mc_validate(spec, x, u, run.samples, (run.seed, VALIDATION_STREAM, k))
        w = spec.disturbance.sample(make_rng(run.seed, DISTURBANCE_STREAM, k), 1)[0]
        x_next = spec.model(x, u, w)
        rec = {"k": k, "state": [float(v) for v in x], "input": [float(v) for v in u],
               "disturbance": [float(v) for v in w], "mc_probability": p_hat, "mc_halfwidth": half}
        rec.update(diag)
        trace.steps.append(_clean(rec))
        if run.strict and p_hat < diag["required_probability"] - 3 * half:
            trace.terminal = VALIDATION_FAILURE
            trace.error = (f"step {k}: Monte Carlo probability {p_hat:.4f} below required "
                           f"{diag['required_probability']:.4f}")
            x = x_next
            break
        x = x_next
    trace.final_state = [float(v) for v in x]
    return trace


def replay(spec: ProblemSpec, x0, inputs, disturbances) -> TrajectoryLog:
    """Propagate recorded input/disturbance sequences without solving."""
    m = spec.model
    U = np.asarray(inputs, dtype=float).reshape(-1, m.n_u)
    W = np.asarray(disturbances, dtype=float).reshape(-1, m.n_w)
    if U.shape[0] != W.shape[0]:
        raise ValueError(f"{U.shape[0]} inputs but {W.shape[0]} disturbances")
    x = np.asarray(x0, dtype=float)
    trace = TrajectoryLog(x0=[float(v) for v in x])
    for k, (u, w) in enumerate(zip(U, W)):
        trace.steps.append({
            "k": k, "state": [float(v) for v in x], "input": [float(v) for v in u],
            "disturbance": [float(v) for v in w], "target_value": spec.target_value(x),
            "required_probability": required_probability(spec, x),
        })
        x = spec.model(x, u, w)
    trace.final_state = [float(v) for v in x]
    trace.terminal = REACHED if spec.target_value(x) <= 0 else REPLAY_END
    return trace


def theorem1_khat(epsilon: float, alpha: float, p0: float) -> int:
    """Steps after which the target polynomial is below ``epsilon`` when every
    step contracts by ``alpha``: ceil((ln eps - ln p0) / ln alpha)."""
    if p0 <= 0:
        raise ValueError("bound undefined for p0 <= 0 (state already in the desired set)")
    if not 0 < epsilon < p0:
        raise ValueError(f"need 0 < epsilon < p0, got epsilon={epsilon}, p0={p0}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    v = (math.log(epsilon) - math.log(p0)) / math.log(alpha)
    return max(1, math.ceil(v - 1e-9 * max(1.0, abs(v))))


def theorem1_phat(alpha: float, beta: float, khat: int) -> float:
    """Probability lower bound prod_{i=0}^{khat-1} (1 - beta * alpha^i)."""
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("alpha and beta must lie in (0, 1)")
    if khat < 0:
        raise ValueError("khat must be nonnegative")
    i = np.arange(int(khat))
    return float(np.prod(1.0 - beta * alpha ** i))


def theorem1_phat_limit(alpha: float, beta: float) -> float:
    """Infinite-product limit of :func:`theorem1_phat`."""
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("alpha and beta must lie in (0, 1)")
    n = int(math.ceil(math.log(1e-18 / beta) / math.log(alpha))) + 1
    return theorem1_phat(alpha, beta, max(n, 1))
