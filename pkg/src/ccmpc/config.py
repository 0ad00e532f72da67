"""JSON problem configs.

Layout::

    {
      "model":        {"n_x": 2, "n_u": 1, "n_w": 1, "f": ["x2", "x1*x2 + w1 + u1"]},
      "desired_set":  {"polynomial": "x1^2 + x2^2 - 0.04", "box": [[-1, 1], [-1, 1]]},
      "input_set":    {"polynomials": ["1 - u1^2"], "box": [[-1, 1]]},
      "disturbance":  {"kind": "uniform", "bounds": [[-0.5, 0.5]]},
      "cost":         {"stage": "x1^2 + x2^2 + u1^2", "terminal": null},
      "parameters":   {"alpha": 0.8, "beta": 0.051, "N_p": 3, "r": 5,
                       "omega_r": 1.0, "sign_mode": "contraction"},
      "run":          {"seed": 0, "max_steps": 25, "samples": 100000, "epsilon": 0.01}
    }

Dynamics use variables ``x1..xn, u1..um, w1..wk``; the desired set uses the
states, the input set the per-stage inputs, and the stage cost ``(x, u)``
evaluated at ``(x_{k+i}, u_{k+i-1})`` for i = 1..N.  Unknown keys are errors.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .dynamics import CONTRACTION, ProblemSpec, SemialgebraicSet, SystemModel, horizon_cost
from .moments import DisturbanceSpec
from .mpc import RunConfig
from .poly import PolynomialParseError, parse_polynomial, variable_names
from .relaxation import RelaxationConfig


class ConfigError(ValueError):
    pass


_SECTIONS = {
    "model": {"n_x", "n_u", "n_w", "f"},
    "desired_set": {"polynomial", "box", "radius"},
    "input_set": {"polynomial", "polynomials", "box"},
    "disturbance": {"kind", "bounds"},
    "cost": {"stage", "terminal"},
    "parameters": {"alpha", "beta", "N_p", "r", "omega_r", "sign_mode"},
    "run": {"seed", "max_steps", "samples", "epsilon", "strict"},
}
_REQUIRED = ("model", "desired_set", "input_set", "disturbance", "cost", "parameters")


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def _poly(text, names, where):
    try:
        return parse_polynomial(text, names)
    except PolynomialParseError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _get(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def parse_config(data: dict):
    """Return ``(ProblemSpec, RelaxationConfig, RunConfig)`` from a config dict."""
    _check_keys(data, _SECTIONS, "config")
    for sec in _REQUIRED:
        if sec not in data:
            raise ConfigError(f"config: missing section {sec!r}")
    for sec, keys in _SECTIONS.items():
        if sec in data:
            _check_keys(data[sec], keys, sec)

    md = data["model"]
    n_x, n_u, n_w = (int(_get(md, k, "model")) for k in ("n_x", "n_u", "n_w"))
    xs, us, ws = variable_names("x", n_x), variable_names("u", n_u), variable_names("w", n_w)
    f_txt = _get(md, "f", "model")
    if not isinstance(f_txt, list) or len(f_txt) != n_x:
        raise ConfigError(f"model.f: expected a list of {n_x} polynomial strings")
    f = tuple(_poly(t, xs + us + ws, f"model.f[{i}]") for i, t in enumerate(f_txt))
    try:
        model = SystemModel(n_x, n_u, n_w, f)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None

    ds = data["desired_set"]
    target = _poly(_get(ds, "polynomial", "desired_set"), xs, "desired_set.polynomial")
    desired = SemialgebraicSet.below(target, _get(ds, "box", "desired_set"))

    ins = data["input_set"]
    if "polynomial" in ins and "polynomials" in ins:
        raise ConfigError("input_set: give either 'polynomial' or 'polynomials', not both")
    texts = ins.get("polynomials", [ins["polynomial"]] if "polynomial" in ins else [])
    in_polys = tuple(_poly(t, us, f"input_set.polynomials[{i}]") for i, t in enumerate(texts))
    input_set = SemialgebraicSet(in_polys, _get(ins, "box", "input_set"))

    dd = data["disturbance"]
    try:
        dist = DisturbanceSpec(_get(dd, "kind", "disturbance"), tuple(map(tuple, _get(dd, "bounds", "disturbance"))))
    except ValueError as exc:
        raise ConfigError(f"disturbance: {exc}") from None

    pr = data["parameters"]
    N = int(_get(pr, "N_p", "parameters"))
    cd = data["cost"]
    stage = _poly(_get(cd, "stage", "cost"), xs + us, "cost.stage")
    terminal = cd.get("terminal")
    terminal = _poly(terminal, xs, "cost.terminal") if terminal else None
    cost = horizon_cost(stage, n_x, n_u, N, terminal)
    try:
        spec = ProblemSpec(model, desired, input_set, dist, cost,
                           float(_get(pr, "alpha", "parameters")), float(_get(pr, "beta", "parameters")),
                           N, pr.get("sign_mode", CONTRACTION), stage, terminal)
        relax = RelaxationConfig(int(pr.get("r", 5)), float(pr.get("omega_r", 1.0)))
        rd = data.get("run", {})
        run = RunConfig(seed=int(rd.get("seed", 0)), max_steps=int(rd.get("max_steps", 25)),
                        epsilon=float(rd.get("epsilon", 0.01)), samples=int(rd.get("samples", 100_000)),
                        strict=bool(rd.get("strict", False)))
    except ValueError as exc:
        raise ConfigError(f"parameters: {exc}") from None
    return spec, relax, run


def load_config(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data)


def dump_config(spec: ProblemSpec, relax: RelaxationConfig | None = None,
                run: RunConfig | None = None) -> dict:
    """Inverse of :func:`parse_config` for specs that carry their stage cost."""
    if spec.stage_cost is None:
        raise ConfigError("spec has no stage cost; cannot express its cost in config form")
    m = spec.model
    xs, us, ws = variable_names("x", m.n_x), variable_names("u", m.n_u), variable_names("w", m.n_w)
    relax = relax or RelaxationConfig()
    run = run or RunConfig()
    return {
        "model": {"n_x": m.n_x, "n_u": m.n_u, "n_w": m.n_w,
                  "f": [p.to_string(xs + us + ws) for p in m.f]},
        "desired_set": {"polynomial": spec.target.to_string(xs),
                        "box": [list(b) for b in spec.desired_set.box]},
        "input_set": {"polynomials": [p.to_string(us) for p in spec.input_set.polynomials],
                      "box": [list(b) for b in spec.input_set.box]},
        "disturbance": {"kind": spec.disturbance.kind,
                        "bounds": [list(b) for b in spec.disturbance.bounds]},
        "cost": {"stage": spec.stage_cost.to_string(xs + us),
                 "terminal": spec.terminal_cost.to_string(xs) if spec.terminal_cost else None},
        "parameters": {"alpha": spec.alpha, "beta": spec.beta, "N_p": spec.horizon,
                       "r": relax.r, "omega_r": relax.omega_r, "sign_mode": spec.sign_mode},
        "run": {"seed": run.seed, "max_steps": run.max_steps, "samples": run.samples,
                "epsilon": run.epsilon, "strict": run.strict},
    }


def example_path(name: str) -> Path:
    """Path of a shipped fixture config (``"example1"`` or ``"example2"``)."""
    return Path(str(resources.files("ccmpc") / "data" / f"{name}.json"))


def load_example(name: str):
    return load_config(example_path(name))
