"""Run configuration: flat ``key = value`` files with dotted keys.

Example::

    # standard massive run
    grid.n = 256
    grid.L = 64
    model.mass = 1
    data.direction = 1, 0
    companion = false

Every key can also be given on the command line as ``--grid.n 512``.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .evolve import StepperConfig
from .grid import MAX_BUMP_DX, Grid


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_direction(text):
    if isinstance(text, (tuple, list)):
        parts = list(text)
    else:
        parts = [p for p in str(text).replace(" ", "").split(",") if p]
    d = np.array([complex(p) for p in parts])
    if d.shape != (2,):
        raise ValueError(f"direction needs two components, got {text!r}")
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    d = d / norm
    return tuple(complex(c) if c.imag else float(c.real) for c in d)


def _format_direction(d):
    return ", ".join(repr(c) for c in d)


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 256
    grid_L: float = 64.0
    sim_dt: float = 0.03125
    sim_t_end: float = 50.0
    sim_snapshot_stride: float = 0.5
    model_mass: float = 1.0
    data_epsilon: float = 0.05
    data_direction: tuple = (1.0, 0.0)
    sobolev_N: int = 2
    output_dir: str = "soler2d-out"
    companion: bool = False
    linear_only: bool = False

    # --- dotted-key plumbing ---

    @staticmethod
    def key_of(attr):
        return attr.replace("_", ".", 1) if "_" in attr and attr not in ("linear_only",) else attr

    @classmethod
    def keys(cls):
        return {cls.key_of(f.name): f.name for f in fields(cls)}

    @classmethod
    def parser_for(cls, attr):
        default = getattr(cls(), attr)
        if attr == "data_direction":
            return _parse_direction
        if isinstance(default, bool):
            return _parse_bool
        return type(default)

    def updated(self, pairs):
        """Return a copy with ``{dotted_key: text}`` applied; unknown keys are errors."""
        keys = self.keys()
        changes = {}
        for key, text in pairs.items():
            if key not in keys:
                raise ConfigError(f"unknown configuration key {key!r}")
            attr = keys[key]
            try:
                changes[attr] = self.parser_for(attr)(text)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        return replace(self, **changes)

    def as_pairs(self):
        out = {}
        for key, attr in self.keys().items():
            v = getattr(self, attr)
            if attr == "data_direction":
                v = _format_direction(v)
            elif isinstance(v, bool):
                v = str(v).lower()
            out[key] = str(v)
        return out

    def dumps(self):
        return "".join(f"{k} = {v}\n" for k, v in self.as_pairs().items())

    # --- derived objects ---

    @property
    def grid(self):
        return Grid(self.grid_n, self.grid_L)

    @property
    def stepper(self):
        return StepperConfig(self.sim_dt, self.sim_t_end, self.sim_snapshot_stride,
                             self.companion, self.linear_only)

    def validate(self):
        """Raise :class:`ConfigError` on any violated constraint; returns ``self``."""
        grid = self.grid
        self.stepper.validate(grid)
        if not 0.0 <= self.model_mass <= 1.0:
            raise ConfigError(f"model.mass must lie in [0, 1], got {self.model_mass}")
        if not self.data_epsilon >= 0:
            raise ConfigError(f"data.epsilon must be nonnegative, got {self.data_epsilon}")
        if grid.dx > MAX_BUMP_DX:
            raise ConfigError(f"grid.L / grid.n gives dx = {grid.dx} > {MAX_BUMP_DX}; the bump is unresolved")
        if self.sobolev_N < 2:
            raise ConfigError(f"sobolev.N must be an integer >= 2, got {self.sobolev_N}")
        if self.companion and self.model_mass != 0.0:
            raise ConfigError("companion requires model.mass = 0")
        return self


def parse_config_text(text):
    """``{key: value}`` from flat ``key = value`` lines; ``#`` starts a comment."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides``; validated."""
    cfg = RunConfig()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        cfg = cfg.updated(parse_config_text(text))
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg.validate()
