"""Experiment configuration files (TOML).

Example::

    dim = 2
    p = 0.0
    phi = "1 + 0.5*cos(2*theta)"   # or phi = { file = "phi.csv" }
    init = "random 3 8 0.3 even"
    grid = 512
    max_iter = 2000
    seed = 0
    out_dir = "out/run"

    [tolerances]
    step = 1e-8
    residual = 1e-6

For sweeps ``p`` and ``phi`` may be lists; the sweep runs their cross
product.  Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import tomli

from . import body2d as b2
from . import polytope3d as p3
from .curvature_image import OperatorConfig
from .expressions import ExpressionError, compile_density
from .iteration import RunConfig
from .quadrature import Density, make_grid

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "parse_body",
    "parse_phi",
]

TOP_KEYS = {
    "dim", "p", "phi", "init", "grid", "tolerances", "max_iter", "seed",
    "out_dir", "minimal_position", "degree",
}
TOLERANCE_KEYS = {"step", "residual", "closure", "normalize"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dim: int
    p: list
    phi: list
    init: str
    grid: int | None = None
    max_iter: int = 2000
    seed: int = 0
    out_dir: Path = Path("out")
    tolerances: dict = field(default_factory=dict)
    minimal_position: bool | None = None
    degree: int | None = None
    base_dir: Path = Path(".")

    @property
    def is_sweep(self) -> bool:
        return len(self.p) != 1 or len(self.phi) != 1

    def combinations(self):
        """One single-valued config per (p, phi) pair."""
        for p, phi in itertools.product(self.p, self.phi):
            yield replace(self, p=[p], phi=[phi])

    def label(self) -> str:
        phi = self.phi[0]
        tag = phi if isinstance(phi, str) else Path(phi["file"]).stem
        tag = re.sub(r"[^A-Za-z0-9.+-]+", "_", str(tag)).strip("_") or "phi"
        return f"p{self.p[0]:+g}_{tag}"

    def build(self, unsafe: bool = False) -> RunConfig:
        """The run configuration of a single-valued config."""
        if self.is_sweep:
            raise ConfigError("build() needs a single (p, phi) combination")
        grid = make_grid(self.dim, self.grid)
        p = float(self.p[0])
        phi = parse_phi(self.phi[0], grid, self.base_dir)
        body = parse_body(self.init, grid, self.seed, self.degree)
        tol = self.tolerances
        op = OperatorConfig(
            p,
            phi,
            closure_tol=tol.get("closure", 1e-8),
            normalize_tol=tol.get("normalize", 1e-10),
            degree=self.degree,
            unsafe=unsafe,
        )
        try:
            op.check(self.dim)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        minpos = self.minimal_position
        if minpos is None:
            minpos = p == -self.dim and phi.is_constant
        try:
            return RunConfig(op, body, self.max_iter, tol.get("step", 1e-8),
                             tol.get("residual", 1e-6), minpos)
        except ValueError as err:
            raise ConfigError(str(err)) from None


def _as_list(value):
    if isinstance(value, list):
        return value
    return [value]


def parse_config(text: str, base_dir=".") -> ExperimentConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        msg = getattr(err, "msg", str(err))
        raise ConfigError(
            f"TOML parse error at line {err.lineno}, column {err.colno}: {msg}"
        ) from None
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("dim", "p", "init"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    dim = raw["dim"]
    if dim not in (2, 3):
        raise ConfigError(f"dim must be 2 or 3, got {dim!r}")
    p = _as_list(raw["p"])
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p):
        raise ConfigError("p must be a number or a list of numbers")
    phi = _as_list(raw.get("phi", "1"))
    for v in phi:
        if isinstance(v, dict):
            if set(v) != {"file"}:
                raise ConfigError("a tabulated phi is written phi = { file = \"path.csv\" }")
        elif not isinstance(v, (str, int, float)):
            raise ConfigError("phi must be an expression, a number or { file = ... }")
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances must be a table")
    bad = set(tol) - TOLERANCE_KEYS
    if bad:
        raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(bad))}")
    for k, v in tol.items():
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k!r} must be a positive number")
    max_iter = raw.get("max_iter", 2000)
    if not isinstance(max_iter, int) or max_iter < 1:
        raise ConfigError("max_iter must be a positive integer")
    base_dir = Path(base_dir)
    return ExperimentConfig(
        dim=dim,
        p=[float(v) for v in p],
        phi=[str(v) if isinstance(v, (int, float)) else v for v in phi],
        init=str(raw["init"]),
        grid=raw.get("grid"),
        max_iter=max_iter,
        seed=int(raw.get("seed", 0)),
        out_dir=Path(os.path.normpath(base_dir / raw.get("out_dir", "out"))),
        tolerances=dict(tol),
        minimal_position=raw.get("minimal_position"),
        degree=raw.get("degree"),
        base_dir=base_dir,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from None
    return parse_config(text, path.parent)


def parse_phi(spec, grid, base_dir=".") -> Density:
    if isinstance(spec, dict):
        return Density.from_csv(grid, Path(base_dir) / spec["file"])
    try:
        func = compile_density(str(spec), grid.dim)
        return Density.from_function(grid, func)
    except (ExpressionError, ValueError) as err:
        raise ConfigError(f"phi: {err}") from None


def _numbers(tokens, spec):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ConfigError(f"cannot read numbers in body spec {spec!r}") from None


def parse_body(spec: str, grid, seed: int = 0, degree: int | None = None):
    """Build a body from ``disk r``, ``ellipse a b``, ``fourier [..]``, ``random ...``.

    In 3D: ``ball r``, ``ellipsoid a b c``, ``cube half``,
    ``random seed degree amplitude [even]``.  A ``random`` spec without a
    seed uses the config ``seed``.  ``fourier`` lists ``a0, a1, b1, a2, b2, ...``.
    """
    text = spec.strip()
    m = re.match(r"fourier\s*\[(.*)\]\s*$", text)
    if m:
        if grid.dim != 2:
            raise ConfigError("fourier bodies are planar")
        c = _numbers([t for t in re.split(r"[,\s]+", m.group(1)) if t], spec)
        if len(c) % 2 == 0:
            raise ConfigError("fourier lists a0 followed by (a_k, b_k) pairs")
        a = np.array([c[0]] + c[1::2])
        b = np.array([0.0] + c[2::2])
        K = b2.Body2D(a, b, grid)
        d = degree or b2.default_degree(grid)
        return K.with_degree(max(d, K.degree))
    kind, *rest = text.split()
    even = "even" in rest
    rest = [t for t in rest if t != "even"]
    args = _numbers(rest, spec)
    try:
        if grid.dim == 2:
            if kind == "disk":
                return b2.disk(*(args or [1.0]), grid=grid, degree=degree)
            if kind == "ellipse" and len(args) == 2:
                return b2.ellipse(*args, grid=grid, degree=degree or b2.default_degree(grid))
            if kind == "random" and len(args) <= 3:
                s, n, amp = (args + [math.nan] * 3)[:3] if args else (seed, 8, 0.3)
                s = seed if math.isnan(s) else int(s)
                n = 8 if math.isnan(n) else int(n)
                amp = 0.3 if math.isnan(amp) else amp
                return b2.random_body(s, n, amp, even, grid,
                                      degree or b2.default_degree(grid))
        else:
            if kind == "ball":
                return p3.ball(*(args or [1.0]), grid=grid)
            if kind == "ellipsoid" and len(args) == 3:
                return p3.ellipsoid(*args, grid=grid)
            if kind == "cube":
                return p3.reconstruct(p3.cube_support(grid, *(args or [1.0])), grid)
            if kind == "random" and len(args) <= 3:
                s, d, amp = (args + [math.nan] * 3)[:3] if args else (seed, 4, 0.3)
                s = seed if math.isnan(s) else int(s)
                d = 4 if math.isnan(d) else int(d)
                amp = 0.3 if math.isnan(amp) else amp
                return p3.random_polytope(s, d, amp, even, grid)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"body spec {spec!r}: {err}") from None
    raise ConfigError(f"unrecognised {grid.dim}D body spec {spec!r}")
