"""Protocol parameters, simulation window, and validation.

Every other module consumes these value objects; all are immutable and safe
to share across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

ED_MODES = ("static", "per_slot_iid")


class InvalidParam(ValueError):
    """A model parameter violates its invariant."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


@dataclass(frozen=True)
class ModelParams:
    """The six protocol knobs.

    lambda_l / lambda_e are densities (points per unit area), p is the ALOHA
    transmit probability, eta the maximum link range, beta_l the interference
    guard factor, and beta_e the eavesdropper decoding factor.
    """

    lambda_l: float
    lambda_e: float
    p: float
    eta: float
    beta_l: float
    beta_e: float

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Window:
    """Axis-aligned sampling rectangle with an optional guard band.

    Points are sampled on the full rectangle; per-node statistics are taken
    only on the core (the rectangle shrunk by guard_margin on every side) to
    soften boundary effects.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    guard_margin: float = 0.0

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def core(self) -> "Window":
        g = self.guard_margin
        return Window(self.x_min + g, self.y_min + g, self.x_max - g, self.y_max - g)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    @staticmethod
    def centered(half_width: float, half_height: float | None = None,
                 guard_margin: float = 0.0) -> "Window":
        hh = half_width if half_height is None else half_height
        return Window(-half_width, -hh, half_width, hh, guard_margin)


@dataclass(frozen=True)
class SimConfig:
    """Reproducibility and censoring knobs for Monte Carlo runs."""

    seed: int = 1
    trials: int = 1000
    slot_cap: int = 1000
    ed_mode: str = "static"


def validate(params: ModelParams) -> ModelParams:
    """Check every ModelParams invariant; raise InvalidParam on the first violation.

    Pure: identical inputs give identical results. Returns the params so call
    sites can validate inline.
    """
    for field in ("lambda_l", "lambda_e", "p", "eta", "beta_l", "beta_e"):
        value = getattr(params, field)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidParam(field, f"must be finite, got {value!r}")
    if params.lambda_l < 0:
        raise InvalidParam("lambda_l", "density must be >= 0")
    if params.lambda_e < 0:
        raise InvalidParam("lambda_e", "density must be >= 0")
    if not 0.0 <= params.p < 1.0:
        # p = 1 empties every receiver set and makes the analytic
        # denominators degenerate, so the interval is half-open.
        raise InvalidParam("p", "transmit probability must satisfy 0 <= p < 1")
    if params.eta <= 0:
        raise InvalidParam("eta", "link range must be > 0")
    if params.beta_l < 0:
        raise InvalidParam("beta_l", "interference factor must be >= 0")
    if params.beta_e < 0:
        raise InvalidParam("beta_e", "decoding factor must be >= 0")
    return params


def validate_window(window: Window) -> Window:
    if window.guard_margin < 0:
        raise InvalidParam("guard_margin", "must be >= 0")
    if window.width <= 2 * window.guard_margin:
        raise InvalidParam("window", "x extent must exceed twice the guard margin")
    if window.height <= 2 * window.guard_margin:
        raise InvalidParam("window", "y extent must exceed twice the guard margin")
    return window


def validate_config(config: SimConfig) -> SimConfig:
    if config.trials < 1:
        raise InvalidParam("trials", "must be >= 1")
    if config.slot_cap < 1:
        raise InvalidParam("slot_cap", "must be >= 1")
    if config.ed_mode not in ED_MODES:
        raise InvalidParam("ed_mode", f"must be one of {ED_MODES}")
    return config


def parse_config_file(path: str) -> dict[str, str]:
    """Read a plain `key = value` file; `#` starts a comment, blank lines skipped."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParam("config", f"line {lineno}: expected key = value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


_PARAM_FIELDS = ("lambda_l", "lambda_e", "p", "eta", "beta_l", "beta_e")
_WINDOW_FIELDS = ("x_min", "y_min", "x_max", "y_max", "guard_margin")
_CONFIG_FIELDS = ("seed", "trials", "slot_cap", "ed_mode")

DEFAULT_PARAMS = ModelParams(lambda_l=1.0, lambda_e=0.1, p=0.5, eta=1.0,
                             beta_l=0.2, beta_e=0.6)
DEFAULT_WINDOW = Window.centered(10.0, guard_margin=1.0)


def build_from_mapping(values: dict[str, str],
                       overrides: dict[str, object] | None = None
                       ) -> tuple[ModelParams, Window, SimConfig]:
    """Assemble (params, window, config) from string key-values plus overrides.

    Overrides win over file values; unknown keys are rejected so typos in a
    config file fail loudly.
    """
    merged: dict[str, object] = dict(values)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    known = set(_PARAM_FIELDS) | set(_WINDOW_FIELDS) | set(_CONFIG_FIELDS)
    unknown = set(merged) - known
    if unknown:
        raise InvalidParam(sorted(unknown)[0], "unknown configuration key")

    def num(field, default):
        return float(merged.get(field, default))

    params = ModelParams(*(num(f, getattr(DEFAULT_PARAMS, f)) for f in _PARAM_FIELDS))
    window = Window(*(num(f, getattr(DEFAULT_WINDOW, f)) for f in _WINDOW_FIELDS))
    config = SimConfig(
        seed=int(merged.get("seed", SimConfig.seed)),
        trials=int(merged.get("trials", SimConfig.trials)),
        slot_cap=int(merged.get("slot_cap", SimConfig.slot_cap)),
        ed_mode=str(merged.get("ed_mode", SimConfig.ed_mode)),
    )
    validate(params)
    validate_window(window)
    validate_config(config)
    return params, window, config
