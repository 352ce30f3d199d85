"""Experiment configuration and the flat ``key = value`` file format.

One pair per line; ``#`` starts a comment.  Numbers may use ``pi``
(``x0 = pi - 0.05``).  Lists are comma separated, and float lists also accept
an inclusive range ``start:stop:step``::

    K_grid = 0.2:2.0:0.02
    sigma_list = 0.004, 0.005, 0.006, 0.007
"""
from __future__ import annotations

import ast
import math
import operator
import os
from dataclasses import dataclass, field, fields, replace
from typing import Iterable

from .core import MIN_POINTS_PER_SIGMA, MAX_SIGMA, TWO_PI, QKRError


class ConfigError(QKRError, ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def default_k_grid() -> list[float]:
    return [round(0.2 + 0.02 * i, 10) for i in range(91)]


@dataclass
class ExperimentConfig:
    K_grid: list[float] = field(default_factory=default_k_grid)
    sigma: float = 0.006
    hbar: float = 1e-6
    k0: int = 10000
    x0: float = math.pi
    n_kicks: int = 10
    n_points: int = 2**17
    epsilon: float = 0.002
    perturbation_dx: float = 0.05
    n_fixed: int = 3
    n_window: int = 6
    sigma_list: list[float] = field(default_factory=lambda: [0.004, 0.005, 0.006, 0.007])
    snapshot_kicks: list[int] = field(default_factory=lambda: [6, 18])
    # classical comparison: tangent (dx, dp); zeros mean (sigma, hbar / 2 sigma)
    tangent_dx: float = 0.0
    tangent_dp: float = 0.0
    threads: int = 1
    oracle_n_points: int = 256
    oracle_hbar: float = 1.0
    oracle_alpha: float = 2.0
    oracle_beta: float = 0.5
    oracle_sigma: float = 0.2
    oracle_x0: float = math.pi
    oracle_k0: int = 0
    oracle_kicks: int = 5
    oracle_band: int = 0
    lyapunov_kicks: int = 5000
    lyapunov_seeds: int = 16
    rng_seed: int = 12345
    portrait_K: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    portrait_kicks: int = 1000
    portrait_seeds: int = 40

    def validate(self) -> "ExperimentConfig":
        if not self.K_grid:
            raise ConfigError("K_grid", "must not be empty")
        if any(k <= 0 for k in self.K_grid):
            raise ConfigError("K_grid", "all K values must be positive")
        if any(b <= a for a, b in zip(self.K_grid, self.K_grid[1:])):
            raise ConfigError("K_grid", "must be strictly ascending")
        for key in ("hbar", "epsilon", "oracle_hbar", "oracle_beta", "oracle_sigma"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be positive")
        if self.oracle_alpha < 0:
            raise ConfigError("oracle_alpha", "must be non-negative")
        if not self.epsilon < 1:
            raise ConfigError("epsilon", "must lie in (0, 1)")
        if self.perturbation_dx < 0:
            raise ConfigError("perturbation_dx", "must be non-negative")
        for key in ("n_points", "oracle_n_points"):
            n = getattr(self, key)
            if n < 8 or n & (n - 1):
                raise ConfigError(key, f"must be a power of two >= 8, got {n}")
        if self.oracle_n_points > 2**10:
            raise ConfigError("oracle_n_points", "the Bessel check is limited to N <= 1024")
        for key in ("n_kicks", "n_fixed", "n_window", "oracle_kicks", "threads",
                    "lyapunov_kicks", "lyapunov_seeds", "portrait_kicks", "portrait_seeds"):
            if getattr(self, key) < 1:
                raise ConfigError(key, "must be >= 1")
        if not self.portrait_K or any(k < 0 for k in self.portrait_K):
            raise ConfigError("portrait_K", "must be a non-empty list of non-negative values")
        if any(n < 0 for n in self.snapshot_kicks):
            raise ConfigError("snapshot_kicks", "kick indices must be non-negative")
        if not -math.pi <= self.x0 < TWO_PI:
            raise ConfigError("x0", "must lie in [-pi, 2pi)")
        dx = TWO_PI / self.n_points
        for key, values in (("sigma", [self.sigma]), ("sigma_list", self.sigma_list)):
            for s in values:
                if not 0 < s < MAX_SIGMA:
                    raise ConfigError(key, f"sigma={s} must lie in (0, {MAX_SIGMA})")
                # sigma_list is checked for resolution when the sigma sweep runs
                if key == "sigma" and s < MIN_POINTS_PER_SIGMA * dx:
                    raise ConfigError(
                        key, f"sigma={s} is under-resolved on {self.n_points} points "
                        f"(need >= {MIN_POINTS_PER_SIGMA * dx:.3g})")
        if self.oracle_sigma < MIN_POINTS_PER_SIGMA * TWO_PI / self.oracle_n_points:
            raise ConfigError("oracle_sigma", "under-resolved on the oracle grid")
        return self


CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig))
_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_number(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"not a number: {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval").body)
    except SyntaxError as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def _to_int(text: str) -> int:
    value = _eval_number(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _to_float_list(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range must be start:stop:step")
        start, stop, step = (_eval_number(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(_eval_number(p)) for p in text.split(",") if p.strip()]


_PARSERS = {
    "float": lambda t: float(_eval_number(t)),
    "int": _to_int,
    "list[float]": _to_float_list,
    "list[int]": lambda t: [_to_int(p) for p in t.split(",") if p.strip()],
}


def parse_value(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(key, "unknown configuration key")
    try:
        return _PARSERS[_FIELD_TYPES[key]](text)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(key, f"expected {_FIELD_TYPES[key]}: {exc}") from exc


def parse_pairs(lines: Iterable[str], source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected key = value, got {raw.strip()!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        values[key] = parse_value(key, text)
    return values


def load_config(path: str | os.PathLike | None = None,
                overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then ``key=value`` overrides."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_pairs(fh, str(path)))
    values.update(parse_pairs(overrides, "--set"))
    return replace(ExperimentConfig(), **values).validate()


def dump_config(cfg: ExperimentConfig) -> str:
    out = []
    for key in CONFIG_KEYS:
        value = getattr(cfg, key)
        if isinstance(value, list):
            value = ", ".join(repr(v) for v in value)
        out.append(f"{key} = {value!r}" if not isinstance(value, str) else f"{key} = {value}")
    return "\n".join(out) + "\n"
