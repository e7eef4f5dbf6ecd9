"""Run configuration: a flat ``key = value`` text format with dotted keys.

Lines are ``key = value`` pairs; ``#`` starts a comment; blank lines are
ignored.  Values are whitespace-separated tokens typed per field.  Validation
collects every problem (unknown keys, missing fields, bad ranges) instead of
stopping at the first, and the resolved configuration echoes every default it
filled in so a run manifest can reproduce the run exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .mps import TruncationParams
from .problems import (
    ADVECTION_DIFFUSION,
    IC_KINDS,
    KINDS,
    InitialCondition,
    PdeProblem,
)
from .tensorization import BOUNDARIES, GridSpec

_KEY_RE = re.compile(r"^[a-z][a-z0-9_.]*$")

REQUIRED = object()

# key -> (type tag, default); REQUIRED defaults must appear in the file
_SCHEMA: dict[str, tuple[str, object]] = {
    "experiment": ("str", "custom"),
    "problem.kind": ("choice:" + "|".join(KINDS), REQUIRED),
    "problem.spatial_dim": ("int", REQUIRED),
    "problem.velocity": ("floats", ""),
    "problem.viscosity": ("float", REQUIRED),
    "problem.boundary": ("choice:" + "|".join(BOUNDARIES), REQUIRED),
    "problem.ic": ("choice:" + "|".join(IC_KINDS), REQUIRED),
    "problem.ic_center": ("floats", "0.3 0.4"),
    "problem.ic_width": ("float", "100.0"),
    "problem.ic_amplitude": ("float", "0.5"),
    "problem.final_time": ("float", REQUIRED),
    "grid.points": ("ints", REQUIRED),
    "grid.extent": ("floats", "0.0 1.0"),
    "layout.variant": ("choice:auto|sequential|interleaved", "auto"),
    "stepper.dt": ("float_or_auto", "auto"),
    "stepper.safety": ("float", "0.4"),
    "stepper.chi_max": ("int_or_none", "none"),
    "stepper.eps_svd": ("float", "1e-12"),
    "stepper.mask_chi_max": ("int_or_none", "none"),
    "stepper.mask_eps": ("float", "1e-12"),
    "stepper.snapshot_stride": ("int_or_auto", "auto"),
    "stepper.keep_states": ("bool", "false"),
    "reference.rtol": ("float", "1e-8"),
    "reference.atol": ("float", "1e-10"),
    "metrics.horizons": ("ints", "1 2 5 10 20 50 100"),
    "metrics.restart_stride": ("int", "1"),
    "metrics.bound_check": ("choice:auto|on|off", "auto"),
    "metrics.bound_perturbation": ("float", "1e-3"),
    "run.out_dir": ("str", ""),
    "run.seed": ("int", "0"),
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    problem: PdeProblem
    grid: GridSpec
    layout_variant: str
    dt_spec: float | None  # None means derive from the stability rule
    safety: float
    state_truncation: TruncationParams
    mask_truncation: TruncationParams
    snapshot_stride: int | None
    keep_states: bool
    rtol: float
    atol: float
    horizons: tuple[int, ...]
    restart_stride: int
    bound_check: str
    bound_perturbation: float
    out_dir: str
    seed: int
    resolved: dict[str, str]  # every schema key with its final serialized value


def parse_flat(text: str) -> tuple[dict[str, str], list[str]]:
    """Parse the flat format into raw string values; returns (values, problems)."""
    values: dict[str, str] = {}
    problems: list[str] = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw_line.strip()!r}")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        value = " ".join(value.split())
        if not _KEY_RE.match(key):
            problems.append(f"line {lineno}: malformed key {key!r}")
            continue
        if key in values:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        values[key] = value
    return values, problems


def format_flat(values: dict[str, str]) -> str:
    return "".join(f"{k} = {values[k]}\n" for k in values)


def _parse_value(key: str, tag: str, raw: str, problems: list[str]):
    tokens = raw.split()
    try:
        if tag == "str":
            return raw
        if tag.startswith("choice:"):
            choices = tag.split(":", 1)[1].split("|")
            if raw not in choices:
                raise ValueError(f"must be one of {', '.join(choices)}")
            return raw
        if tag == "int":
            (tok,) = tokens
            return int(tok)
        if tag == "float":
            (tok,) = tokens
            return float(tok)
        if tag == "bool":
            (tok,) = tokens
            if tok not in ("true", "false"):
                raise ValueError("must be true or false")
            return tok == "true"
        if tag == "ints":
            if not tokens:
                raise ValueError("needs at least one integer")
            return tuple(int(t) for t in tokens)
        if tag == "floats":
            return tuple(float(t) for t in tokens)
        if tag == "int_or_auto":
            (tok,) = tokens
            return None if tok == "auto" else int(tok)
        if tag == "float_or_auto":
            (tok,) = tokens
            return None if tok == "auto" else float(tok)
        if tag == "int_or_none":
            (tok,) = tokens
            return None if tok == "none" else int(tok)
        raise AssertionError(f"unhandled tag {tag}")
    except (ValueError, TypeError) as exc:
        reason = str(exc) or "bad value"
        if "not enough values" in reason or "too many values" in reason:
            reason = "expected exactly one token"
        problems.append(f"{key}: {reason} (got {raw!r})")
        return None


def resolve_config(raw_values: dict[str, str]) -> tuple[RunConfig | None, list[str]]:
    """Type, default, and cross-validate raw values into a RunConfig."""
    problems: list[str] = [f"unknown key {key!r}" for key in raw_values if key not in _SCHEMA]
    fatal: list[str] = []
    resolved_raw: dict[str, str] = {}
    typed: dict[str, object] = {}
    for key, (tag, default) in _SCHEMA.items():
        if key in raw_values:
            raw = raw_values[key]
        elif default is REQUIRED:
            fatal.append(f"{key}: required key is missing")
            continue
        else:
            raw = default
        resolved_raw[key] = raw
        typed[key] = _parse_value(key, tag, raw, fatal)
    if fatal:
        # cross-field checks need every value present and typed
        return None, problems + fatal

    dim = typed["problem.spatial_dim"]
    if dim not in (1, 2):
        return None, ["problem.spatial_dim: must be 1 or 2"]

    shape_checks_start = len(problems)
    velocity = typed["problem.velocity"]
    if typed["problem.kind"] == ADVECTION_DIFFUSION:
        if len(velocity) != dim:
            problems.append(
                f"problem.velocity: needs {dim} component(s) for {ADVECTION_DIFFUSION}"
            )
    center = typed["problem.ic_center"][:dim]
    if len(center) < dim:
        problems.append("problem.ic_center: needs one component per axis")

    points = typed["grid.points"]
    if len(points) == 1 and dim == 2:
        points = points * 2
    if len(points) != dim:
        problems.append(f"grid.points: needs 1 or {dim} value(s)")
    extent = typed["grid.extent"]
    if len(extent) != 2:
        problems.append("grid.extent: needs exactly two values (lo hi)")

    grid = None
    problem = None
    if len(problems) == shape_checks_start:
        try:
            grid = GridSpec(dim, tuple(points), (tuple(extent),) * dim, typed["problem.boundary"])
        except Exception as exc:
            problems.append(f"grid.points: {exc}")
        try:
            problem = PdeProblem(
                kind=typed["problem.kind"],
                spatial_dim=dim,
                velocity=tuple(velocity),
                viscosity=typed["problem.viscosity"],
                boundary=typed["problem.boundary"],
                initial=InitialCondition(
                    kind=typed["problem.ic"],
                    center=tuple(center),
                    width=typed["problem.ic_width"],
                    amplitude=typed["problem.ic_amplitude"],
                ),
                final_time=typed["problem.final_time"],
            )
        except ConfigError as exc:
            problems.extend(f"problem: {p}" for p in exc.problems)
        except Exception as exc:
            problems.append(f"problem: {exc}")

    for key in ("stepper.chi_max", "stepper.mask_chi_max"):
        if typed[key] is not None and typed[key] < 1:
            problems.append(f"{key}: must be >= 1 or none")
    for key in ("stepper.eps_svd", "stepper.mask_eps"):
        if not 0.0 <= typed[key] < 1.0:
            problems.append(f"{key}: must be in [0, 1)")
    if typed["stepper.dt"] is not None and typed["stepper.dt"] <= 0:
        problems.append("stepper.dt: must be positive or auto")
    if typed["stepper.safety"] <= 0 or typed["stepper.safety"] > 1:
        problems.append("stepper.safety: must be in (0, 1]")
    if typed["stepper.snapshot_stride"] is not None and typed["stepper.snapshot_stride"] < 1:
        problems.append("stepper.snapshot_stride: must be >= 1 or auto")
    if any(m < 1 for m in typed["metrics.horizons"]):
        problems.append("metrics.horizons: every horizon must be >= 1")
    if typed["metrics.restart_stride"] < 1:
        problems.append("metrics.restart_stride: must be >= 1")
    for key in ("reference.rtol", "reference.atol"):
        if typed[key] <= 0:
            problems.append(f"{key}: must be positive")
    if typed["metrics.bound_check"] == "on" and typed["problem.kind"] != ADVECTION_DIFFUSION:
        problems.append("metrics.bound_check: the one-step bound needs the linear kind")

    if problems or grid is None or problem is None:
        return None, problems

    out_dir = typed["run.out_dir"] or f"runs/{typed['experiment']}"
    resolved_raw["run.out_dir"] = out_dir
    config = RunConfig(
        experiment=typed["experiment"],
        problem=problem,
        grid=grid,
        layout_variant=typed["layout.variant"],
        dt_spec=typed["stepper.dt"],
        safety=typed["stepper.safety"],
        state_truncation=TruncationParams(typed["stepper.chi_max"], typed["stepper.eps_svd"]),
        mask_truncation=TruncationParams(typed["stepper.mask_chi_max"], typed["stepper.mask_eps"]),
        snapshot_stride=typed["stepper.snapshot_stride"],
        keep_states=typed["stepper.keep_states"],
        rtol=typed["reference.rtol"],
        atol=typed["reference.atol"],
        horizons=tuple(typed["metrics.horizons"]),
        restart_stride=typed["metrics.restart_stride"],
        bound_check=typed["metrics.bound_check"],
        bound_perturbation=typed["metrics.bound_perturbation"],
        out_dir=out_dir,
        seed=typed["run.seed"],
        resolved=resolved_raw,
    )
    return config, []


def apply_overrides(values: dict[str, str], overrides) -> list[str]:
    """Apply CLI ``key=value`` strings on top of file values, in order."""
    problems = []
    for item in overrides:
        if "=" not in item:
            problems.append(f"override {item!r}: expected key=value")
            continue
        key, value = item.split("=", 1)
        key = key.strip()
        if not _KEY_RE.match(key):
            problems.append(f"override {item!r}: malformed key")
            continue
        values[key] = " ".join(value.split())
    return problems


def preset_names() -> list[str]:
    root = resources.files("ttflow").joinpath("presets")
    return sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    path = resources.files("ttflow").joinpath("presets", f"{name}.cfg")
    if not path.is_file():
        raise ConfigError([f"unknown preset {name!r}; available: {', '.join(preset_names())}"])
    return path.read_text()


def validate_config(source: str, overrides=()) -> tuple[RunConfig | None, list[str]]:
    """Resolve a config file path, preset name, or literal text.

    Returns (config, problems); exactly one of the two is meaningful.
    """
    import os

    if os.path.exists(source):
        text = open(source).read()
    else:
        try:
            text = preset_text(source)
        except ConfigError as exc:
            return None, [f"config {source!r} is neither a file nor a preset"] + exc.problems
    values, problems = parse_flat(text)
    problems.extend(apply_overrides(values, overrides))
    if problems:
        return None, problems
    return resolve_config(values)


def load_config(source: str, overrides=()) -> RunConfig:
    config, problems = validate_config(source, overrides)
    if config is None:
        raise ConfigError(problems)
    return config
