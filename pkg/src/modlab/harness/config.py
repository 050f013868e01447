"""Flat ``key = value`` configuration files.

One setting per line, dotted section prefixes (``grid.N = 512``), ``#``
starts a comment.  Numbers accept a trailing ``pi`` (``16pi``) and ``inf``;
lists are comma separated.
"""
from __future__ import annotations

import math
from pathlib import Path

from ..potentials import KINDS, PotentialModel
from ..propagator import SCHEMES
from ..windows import WindowSpec

DEFAULTS = {
    "name": "scenario",
    "grid.n": "1",
    "grid.N": "512",
    "grid.L": "16pi",
    "window.kind": "gaussian",
    "window.sigma": "1",
    "window.lambda": "1",
    "potential.kind": "zero",
    "potential.c": "",
    "potential.A": "",
    "potential.c0": "1",
    "potential.eps": "0",
    "potential.omega": "1",
    "potential.rho": "0.5",
    "potential.v": "",
    "data.count": "10",
    "data.seed": "0",
    "data.x0_max": "4",
    "data.width_min": "0.8",
    "data.width_max": "1.5",
    "data.k0_max": "1.5",
    "time.T": "1",
    "time.outputs": "5",
    "time.dt": "0.01",
    "scheme": "strang-split",
    "norms.p": "1,2,inf",
    "tol.cap": "100",
    "tol.refine": "0.02",
    "refine.N": "1024",
    "characteristics.x": "-2,0,2",
    "characteristics.xi": "-1,0,1",
    "characteristics.t": "0",
    "characteristics.s": "1",
    "characteristics.delta": "0.5",
    "characteristics.xi_max": "50",
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict:
    """Read a config file and fill in defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = dict(DEFAULTS)
    cfg.update(parse_text(text))
    return cfg


def number(text: str, key: str = "value") -> float:
    s = text.strip().lower()
    try:
        if s.endswith("pi"):
            coef = s[:-2].strip().rstrip("*")
            return (float(coef) if coef else 1.0) * math.pi
        return float(s)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number {text!r}") from None


def integer(text: str, key: str = "value") -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def numbers(text: str, key: str = "value") -> tuple:
    return tuple(number(part, key) for part in text.split(",") if part.strip())


def window_spec(cfg: dict) -> WindowSpec:
    try:
        return WindowSpec(cfg["window.kind"], number(cfg["window.sigma"], "window.sigma"),
                          number(cfg["window.lambda"], "window.lambda"))
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None


def potential_model(cfg: dict) -> PotentialModel:
    kind = cfg["potential.kind"]
    if kind not in KINDS:
        raise ConfigError(f"potential.kind must be one of {KINDS}, got {kind!r}")
    try:
        return PotentialModel(
            kind, integer(cfg["grid.n"], "grid.n"),
            c=numbers(cfg["potential.c"], "potential.c"),
            A=numbers(cfg["potential.A"], "potential.A"),
            c0=number(cfg["potential.c0"], "potential.c0"),
            eps=number(cfg["potential.eps"], "potential.eps"),
            omega=number(cfg["potential.omega"], "potential.omega"),
            rho=number(cfg["potential.rho"], "potential.rho"),
            v=numbers(cfg["potential.v"], "potential.v"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"potential: {exc}") from None


def scheme(cfg: dict) -> str:
    if cfg["scheme"] not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}, got {cfg['scheme']!r}")
    return cfg["scheme"]
