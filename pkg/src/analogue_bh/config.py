"""Strict ``key = value`` experiment configuration.

Lines are ``key = value``; ``#`` starts a comment.  Keys are namespaced with
dots (``grid.n_rho``).  Unknown keys, and keys that do not apply to the
selected command, are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

COMMANDS = ("ergo", "horizon", "check-surface", "design", "perturb", "wave", "travel-time", "dn")


class ConfigParseError(ValueError):
    def __init__(self, msg, line, col):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}")


class ConfigValidationError(ValueError):
    def __init__(self, msg, key=None):
        self.key = key
        super().__init__(msg if key is None else f"{key}: {msg}")


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _ints(s):
    return tuple(int(x) for x in s.split(",") if x.strip())


# key -> (parser, default); None default means "required when used"
_METRIC = {
    "metric.family": (str, None),
    "metric.m": (float, 1.0),
    "metric.a": (float, 0.0),
    "metric.seed": (int, 0),
    "metric.r0": (float, 1.0),
    "metric.c": (float, 1.0),
    "metric.power": (float, 1.0),
    "metric.length": (float, 1.0),
    "metric.dim": (int, 3),
    "bump.epsilon": (float, 0.0),
    "bump.radius": (float, 0.3),
    "bump.center_rho": (float, float("nan")),
    "bump.center_z": (float, 0.0),
}
_CURVE = {
    "curve.kind": (str, "ellipse"),
    "curve.a": (float, 1.0),
    "curve.b": (float, 1.0),
    "curve.radius": (float, 1.0),
    "curve.amp": (float, 0.1),
    "curve.k": (int, 2),
    "curve.samples": (int, 400),
}
_WINDOW = {
    "grid.rho_max": (float, 3.0),
    "grid.z_max": (float, 3.0),
    "grid.n": (int, 512),
}
_COMMON = {
    "command": (str, None),
    "seed": (int, 0),
    "anchor": (str, ""),
    "description": (str, ""),
}

SCHEMA: Dict[str, Dict[str, Tuple[Any, Any]]] = {
    "ergo": {**_METRIC, **_WINDOW,
             "check.ellipse_samples": (int, 400),
             "check.containment": (_bool, False),
             "check.random_metrics": (int, 0),
             "tol.delta1": (float, 1e-9)},
    "horizon": {**_METRIC, **_WINDOW,
                "search.n_seeds": (int, 64),
                "search.h": (float, 1e-3),
                "search.check_order": (_bool, False),
                "tol.hausdorff": (float, 1e-4),
                "tol.order": (float, 3.5)},
    "check-surface": {**_METRIC, **_CURVE,
                      "tol.residual": (float, 1e-6),
                      "expect.classification": (str, "")},
    "design": {**_CURVE,
               "metric.dim": (int, 2),
               "design.family_eps": (_floats, ()),
               "design.family_base_m": (float, 1.0),
               "design.family_base_a": (float, 0.5),
               "tol.residual": (float, 1e-8),
               "tol.eikonal": (float, 1e-8)},
    "perturb": {**_METRIC, **_WINDOW,
                "search.n_seeds": (int, 64),
                "search.h": (float, 1e-3),
                "tol.delta1_change": (float, 1e-12),
                "tol.min_residual": (float, 1e-3)},
    "wave": {**_METRIC,
             "grid.n_rho": (int, 200),
             "grid.n_z": (int, 200),
             "grid.rho_max": (float, 10.0),
             "grid.z_max": (float, 10.0),
             "grid.outer": (str, "sponge"),
             "grid.excise": (_bool, True),
             "grid.excision_offset": (float, 2.0),
             "time.T": (float, 50.0),
             "time.cfl": (float, 0.4),
             "time.sample_stride": (int, 10),
             "time.ko": (float, float("nan")),
             "pulse.rho0": (float, 0.0),
             "pulse.z0": (float, 4.0),
             "pulse.width": (float, 0.7),
             "pulse.amp": (float, 1.0),
             "output.snapshot_times": (_floats, ()),
             "tol.energy_rise": (float, 0.01),
             "tol.balance": (float, float("inf"))},
    "travel-time": {**_METRIC,
                    "path.start": (_floats, None),
                    "path.end": (_floats, None),
                    "path.samples": (int, 101),
                    "path.dist_exponents": (_ints, (2, 3, 4)),
                    "tol.vieta": (float, 1e-12),
                    "tol.slope": (float, 0.05)},
    "dn": {**_METRIC,
           "grid.length": (float, 1.5),
           "grid.n": (int, 600),
           "grid.width_cells": (int, 16),
           "time.T": (float, 1.0),
           "pulse.center": (float, 0.4),
           "pulse.half_width": (float, 0.3),
           "echo.depths": (_floats, ()),
           "echo.h": (float, 2e-3),
           "tol.flat_oracle": (float, 1e-3),
           "tol.echo": (float, 0.05)},
}
for _cmd in SCHEMA:
    SCHEMA[_cmd].update(_COMMON)


@dataclass
class ExperimentConfig:
    command: str
    values: Dict[str, Any]
    raw: Dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def echo(self) -> Dict[str, Any]:
        out = {}
        for k, v in sorted(self.values.items()):
            if isinstance(v, float) and not np.isfinite(v):
                v = str(v)
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def parse_text(text: str) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigParseError("expected 'key = value'", ln, col)
        key, value = body.split("=", 1)
        k = key.strip()
        if not k or any(ch.isspace() for ch in k):
            raise ConfigParseError(f"malformed key {k!r}", ln, len(key) - len(key.lstrip()) + 1)
        if k in raw:
            raise ConfigParseError(f"duplicate key {k!r}", ln, 1)
        raw[k] = value.strip()
    return raw


def validate(raw: Dict[str, str]) -> ExperimentConfig:
    if "command" not in raw:
        raise ConfigValidationError("missing required key", "command")
    cmd = raw["command"]
    if cmd not in SCHEMA:
        raise ConfigValidationError(f"unknown command {cmd!r}; expected one of {COMMANDS}", "command")
    schema = SCHEMA[cmd]
    values: Dict[str, Any] = {}
    for k, v in raw.items():
        if k not in schema:
            known = any(k in s for s in SCHEMA.values())
            why = f"not used by command {cmd!r}" if known else "unknown key"
            raise ConfigValidationError(why, k)
        parser = schema[k][0]
        try:
            values[k] = parser(v)
        except ValueError as exc:
            raise ConfigValidationError(f"bad value {v!r} ({exc})", k) from None
    for k, (_, default) in schema.items():
        if k not in values:
            if default is None and _required(cmd, k, values):
                raise ConfigValidationError("missing required key", k)
            values[k] = default
    return ExperimentConfig(cmd, values, dict(raw))


def _required(cmd, key, values) -> bool:
    if key == "metric.family":
        return cmd not in ("design",)
    return True


def load(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return validate(parse_text(text))
