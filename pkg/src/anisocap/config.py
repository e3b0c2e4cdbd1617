"""Run configuration: a flat JSON object with validated, documented keys."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class RunConfig:
    """Parameters shared by the command-line subcommands.

    Attributes
    ----------
    subcommand : str
    body : str
        Stock body name or path to a body JSON file.
    set : str or None
        Path to a set (or function) JSON file.
    alphas, betas : list of float
        Empty lists keep each suite's own sweep.
    extent : int
        Cells per axis for generated grids.
    half_width : float
        Generated grids cover ``[-half_width, half_width]^n``.
    pad : int
        Outer layers excluded from capacity domains.
    near_radius, subdiv : int
    trunc_radius : float or None
    seed : int
    output : str or None
    tolerance : float or None
        Replaces every suite tolerance (error bars included) when set.
    suites : list of str
        Empty runs every suite.
    """

    subcommand: str = "verify"
    body: str = "square"
    set: str | None = None
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    extent: int = 128
    half_width: float = 2.0
    pad: int = 1
    near_radius: int = 3
    subdiv: int = 8
    trunc_radius: float | None = None
    seed: int = 0
    output: str | None = None
    tolerance: float | None = None
    suites: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for a in self.alphas:
            if not 0 < float(a) < 1:
                raise ConfigError(f"alphas: {a} is outside (0, 1)")
        for b in self.betas:
            if not float(b) > 0:
                raise ConfigError(f"betas: {b} must be positive")
        if int(self.extent) < 2:
            raise ConfigError("extent: need at least 2 cells per axis")
        if not float(self.half_width) > 0:
            raise ConfigError("half_width: must be positive")
        if int(self.pad) < 1:
            raise ConfigError("pad: must be at least 1")
        if int(self.near_radius) < 1:
            raise ConfigError("near_radius: must be at least 1")
        if int(self.subdiv) < 1:
            raise ConfigError("subdiv: must be positive")
        if self.trunc_radius is not None and not float(self.trunc_radius) > 0:
            raise ConfigError("trunc_radius: must be positive")
        if self.tolerance is not None and float(self.tolerance) < 0:
            raise ConfigError("tolerance: must be nonnegative")
        if not isinstance(self.suites, (list, tuple)):
            raise ConfigError("suites: must be a list")

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in sorted(d):
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc.msg})") from None
        return cls.from_dict(data)
