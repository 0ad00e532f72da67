"""Command-line front end.

Commands::

    ccmpc bound     --alpha A --beta B (--epsilon E --p0 P | --khat K)
    ccmpc plan      --config F --state "1,1" [--order r] [--json OUT]
    ccmpc simulate  --config F --x0 "1,1" --seed S --out trace.json [--replay R]
    ccmpc validate  --config F --state "1,1" --input "-0.5634" --samples 100000
    ccmpc inspect-moments (--uniform "a,b" | --delta "p1,p2" | --file M) --degree d

``--config`` accepts a path or the name of a shipped fixture
(``example1``, ``example2``).  Exit codes: 0 success, 1 usage or config
error, 2 solver failure, 3 validation failure (uncertified extraction in
``plan``, Monte Carlo undershoot under ``--strict``).  Log verbosity comes
from ``-v`` or the ``CCMPC_LOG`` environment variable.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, example_path, load_config
from .dynamics import required_probability
from .extraction import extract_control
from .moments import MomentSequence, delta_moments, moment_matrix, uniform_moments
from .mpc import (
    MIN_SAMPLES, SOLVER_FAILURE, VALIDATION_FAILURE, StepError, mc_validate, replay, simulate,
    step, theorem1_khat, theorem1_phat, theorem1_phat_limit,
)
from .relaxation import RelaxationOrderError
from .sdp import SolverSettings

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3

log = logging.getLogger("ccmpc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vector(text: str, what: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.replace(" ", "").split(",") if t != ""])
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if v.size == 0:
        raise UsageError(f"{what}: empty vector")
    return v


def _load(cfg: str):
    path = Path(cfg)
    if not path.exists() and cfg in ("example1", "example2"):
        path = example_path(cfg)
    if not path.exists():
        raise UsageError(f"config file not found: {cfg}")
    return load_config(path)


def _state(text, spec, what="--state"):
    x = _vector(text, what)
    if x.size != spec.model.n_x:
        raise UsageError(f"{what}: expected {spec.model.n_x} values, got {x.size}")
    return x


def _relax(relax, args):
    if getattr(args, "order", None) is not None:
        relax = replace(relax, r=args.order)
    if getattr(args, "omega_r", None) is not None:
        relax = replace(relax, omega_r=args.omega_r)
    return relax


def _fmt(v):
    return "[" + ", ".join(f"{x:.4f}" for x in np.atleast_1d(v)) + "]"


# --- commands ----------------------------------------------------------------

def cmd_bound(args) -> int:
    try:
        if args.khat is not None:
            khat = args.khat
            if khat < 1:
                raise UsageError("--khat must be >= 1")
        else:
            if args.epsilon is None or args.p0 is None:
                raise UsageError("give --epsilon and --p0, or --khat")
            khat = theorem1_khat(args.epsilon, args.alpha, args.p0)
        phat = theorem1_phat(args.alpha, args.beta, khat)
        limit = theorem1_phat_limit(args.alpha, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"khat  = {khat}")
    print(f"P_hat = {phat:.6f}")
    print(f"P_hat limit (khat -> inf) = {limit:.6f}")
    return EXIT_OK


def cmd_plan(args) -> int:
    spec, relax, run = _load(args.config)
    relax = _relax(relax, args)
    x = _state(args.state, spec)
    p = spec.target_value(x)
    print(f"state {_fmt(x)}  P_D(x) = {p:.6g}")
    if p <= 0:
        print("target reached; no solve")
        return EXIT_OK
    try:
        u, diag = step(spec, x, relax, rank_tol=run.rank_tol)
    except StepError as exc:
        print(f"solver failure: {exc.status}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"required probability  {diag['required_probability']:.6f}")
    print(f"input sequence u*     {_fmt(diag['input_sequence'])}")
    print(f"first input u_k       {_fmt(u)}")
    print(f"objective             {diag['objective']:.6g}")
    print(f"trace M_r(y_u)        {diag['trace']:.6g}")
    print(f"rank ratio s2/s1      {diag['rank_ratio']:.3e}  "
          f"({'certified' if diag['certified'] else 'NOT certified'})")
    print(f"solver                {diag['solver_status']} in {diag['iterations']} iterations")
    if args.json:
        Path(args.json).write_text(json.dumps({"u_k": [float(v) for v in u], **diag},
                                              sort_keys=True, indent=1) + "\n")
    return EXIT_OK if diag["certified"] else EXIT_VALIDATION


def cmd_simulate(args) -> int:
    spec, relax, run = _load(args.config)
    relax = _relax(relax, args)
    if args.max_steps is not None:
        if args.max_steps < 1:
            raise UsageError("--max-steps must be >= 1")
        run = replace(run, max_steps=args.max_steps)
    if args.seed is not None:
        if args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        run = replace(run, seed=args.seed)
    if args.samples is not None:
        if args.samples < MIN_SAMPLES:
            raise UsageError(f"--samples must be >= {MIN_SAMPLES}")
        run = replace(run, samples=args.samples)
    if args.strict:
        run = replace(run, strict=True)

    if args.replay:
        data = json.loads(Path(args.replay).read_text())
        x0 = _state(args.x0, spec, "--x0") if args.x0 else np.asarray(data["x0"], dtype=float)
        try:
            trace = replay(spec, x0, data["inputs"], data["disturbances"])
        except (KeyError, ValueError) as exc:
            raise UsageError(f"replay file: {exc}") from None
    else:
        if not args.x0:
            raise UsageError("--x0 is required unless --replay supplies it")
        trace = simulate(spec, _state(args.x0, spec, "--x0"), run, relax)

    for s in trace.steps:
        print(f"k={s['k']:2d}  x={_fmt(s['state'])}  u={_fmt(s['input'])}  "
              f"P_D={s['target_value']:.4f}")
    print(f"final {_fmt(trace.final_state)}  terminal: {trace.terminal}")
    if args.out:
        out = Path(args.out)
        out.write_text(trace.to_json() + "\n")
        out.with_suffix(".csv").write_text(trace.to_csv())
    if trace.terminal == SOLVER_FAILURE:
        print(trace.error, file=sys.stderr)
        return EXIT_SOLVER
    if trace.terminal == VALIDATION_FAILURE:
        print(trace.error, file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_validate(args) -> int:
    spec, _, run = _load(args.config)
    x = _state(args.state, spec)
    u = _vector(args.input, "--input")
    if u.size not in (spec.model.n_u, spec.n_inputs):
        raise UsageError(f"--input: expected {spec.model.n_u} values")
    u = u[: spec.model.n_u]
    samples = args.samples if args.samples is not None else run.samples
    if samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be >= {MIN_SAMPLES}, got {samples}")
    p_hat, half = mc_validate(spec, x, u, samples, args.seed)
    req = required_probability(spec, x)
    print(f"contraction probability {p_hat:.4f} +/- {half:.4f}  (n={samples})")
    print(f"required probability    {req:.4f}")
    if args.strict and p_hat < req - 3 * half:
        print("validation failed: estimate below required probability", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_inspect(args) -> int:
    chosen = [a for a in (args.uniform, args.delta, args.file) if a]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --uniform, --delta, --file")
    if args.file:
        y = MomentSequence.from_json(Path(args.file).read_text())
    else:
        if args.degree is None or args.degree < 0:
            raise UsageError("--degree must be given and nonnegative")
        if args.uniform:
            ab = _vector(args.uniform, "--uniform")
            if ab.size != 2:
                raise UsageError("--uniform: expected 'a,b'")
            try:
                y = uniform_moments(ab[0], ab[1], args.degree)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        else:
            y = delta_moments(_vector(args.delta, "--delta"), args.degree)
    print(y.to_json())
    r = args.order if args.order is not None else y.max_degree // 2
    if r >= 1 and 2 * r <= y.max_degree:
        M = moment_matrix(y, r)
        lam = np.linalg.eigvalsh(M)
        print(f"M_{r}: side {M.shape[0]}, eigenvalues in [{lam[0]:.4g}, {lam[-1]:.4g}]")
        if abs(y.mass - 1.0) <= 1e-6:
            ext = extract_control(y, r)
            print(f"first moments {_fmt(ext.u_star)}  rank ratio {ext.rank_ratio:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ccmpc", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"ccmpc {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="reachability step count and probability bound")
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--beta", type=float, required=True)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--p0", type=float)
    b.add_argument("--khat", type=int, help="use this step count instead of computing it")
    b.set_defaults(func=cmd_bound)

    pl = sub.add_parser("plan", help="solve one relaxation and extract the input")
    pl.add_argument("--config", required=True)
    pl.add_argument("--state", required=True)
    pl.add_argument("--order", type=int)
    pl.add_argument("--omega-r", type=float)
    pl.add_argument("--json", help="write diagnostics to this JSON file")
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("simulate", help="closed-loop run or replay")
    s.add_argument("--config", required=True)
    s.add_argument("--x0")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="JSON trace path; a CSV is written next to it")
    s.add_argument("--replay", help="JSON file with 'inputs' and 'disturbances' (and 'x0')")
    s.add_argument("--max-steps", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--order", type=int)
    s.add_argument("--omega-r", type=float)
    s.add_argument("--strict", action="store_true")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="Monte Carlo check of the chance constraint")
    v.add_argument("--config", required=True)
    v.add_argument("--state", required=True)
    v.add_argument("--input", required=True)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--strict", action="store_true")
    v.set_defaults(func=cmd_validate)

    im = sub.add_parser("inspect-moments", help="print a moment sequence and its moment matrix")
    im.add_argument("--uniform")
    im.add_argument("--delta")
    im.add_argument("--file")
    im.add_argument("--degree", type=int)
    im.add_argument("--order", type=int)
    im.set_defaults(func=cmd_inspect)
    return ap


def _setup_logging(verbose: int):
    env = os.environ.get("CCMPC_LOG", "").upper()
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    if env and not verbose:
        level = getattr(logging, env, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.func(args)
    except (UsageError, ConfigError, RelaxationOrderError) as exc:
        print(f"ccmpc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
