"""Experiment configuration documents.

A config is one JSON object::

    {"experiment": "single-gate",
     "parameters": {"theta": 0.785, "phi": 0.0},
     "output_path": "results",
     "seed": 0}

``parameters`` is validated against the model for the chosen experiment;
unknown keys and non-finite numbers are rejected everywhere.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigurationError
from .model import ENVELOPE_SHAPES
from .noise import CHANNELS
from .propagate import SCHEMES

EXPERIMENTS = ("single-gate", "compose", "two-qubit", "concurrence-sweep",
               "fidelity-curve", "verify-all")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, frozen=True)


class EnvelopeConfig(_Strict):
    shape: Literal[ENVELOPE_SHAPES] = "square"
    area: float = math.pi
    duration: float = Field(math.pi, gt=0)
    sigma_frac: float = Field(1.0 / 6.0, gt=0)


class IntegratorSettings(_Strict):
    tolerance: float = Field(1e-10, gt=0)
    max_steps: int = Field(2**20, ge=8)
    scheme: Literal[SCHEMES] = "magnus4"


class NoiseConfig(_Strict):
    gamma: float = Field(ge=0)
    mask: str = "111"
    channel: Literal[CHANNELS] = "site-dephasing"

    @field_validator("mask")
    @classmethod
    def _bits(cls, v: str) -> str:
        if not v or set(v) - {"0", "1"}:
            raise ValueError("mask must be a string of 0/1 characters, e.g. '101'")
        return v


class LoopConfig(_Strict):
    theta: float
    phi: float = 0.0


class SingleGateParams(_Strict):
    theta: float = math.pi / 4
    phi: float = 0.0
    envelope: EnvelopeConfig = EnvelopeConfig()
    integrator: IntegratorSettings = IntegratorSettings()
    n_grid: int = Field(32, ge=2)
    cyclicity_threshold: float = Field(1e-6, gt=0)
    noise: Optional[NoiseConfig] = None


class ComposeParams(_Strict):
    loops: list[LoopConfig] = Field(min_length=1)
    envelope: EnvelopeConfig = EnvelopeConfig()
    integrator: IntegratorSettings = IntegratorSettings()
    noise: Optional[NoiseConfig] = None


class TwoQubitConfig(_Strict):
    alpha: float = 1.0
    delta: float = 1.0
    amp1: float = 2.0
    amp2: float = 0.0
    n1: int = Field(0, ge=0, le=1)
    n2: int = Field(0, ge=0, le=1)
    gap: float = Field(0.0, ge=0)
    target_concurrence: Optional[float] = Field(None, ge=0, le=1)
    free: Literal["amp1", "amp2"] = "amp1"
    integrator: IntegratorSettings = IntegratorSettings()
    noise: Optional[NoiseConfig] = None


class SweepParams(_Strict):
    phi_ratio: tuple[float, float] = (0.0, 4.0)
    alpha_ratio: tuple[float, float] = (0.0, 4.0)
    points: tuple[int, int] = (201, 201)
    crosscheck: int = Field(100, ge=0)

    @field_validator("points")
    @classmethod
    def _positive(cls, v):
        if min(v) < 1:
            raise ValueError("grid needs at least one point per axis")
        return v


class RatioGrid(_Strict):
    start: float = Field(1.0, gt=0)
    stop: float = Field(1e4, gt=0)
    num: int = Field(20, ge=1)


class FidelityParams(_Strict):
    gate: Literal["hadamard", "pi8", "entangler"] = "hadamard"
    masks: Optional[list[str]] = None
    channel: Literal[CHANNELS] = "site-dephasing"
    ratios: RatioGrid = RatioGrid()
    tau_ratios: list[float] = [1.0, 2.0, 4.0, 8.0]
    varphi: float = math.pi / 4
    envelope: EnvelopeConfig = EnvelopeConfig()
    integrator: IntegratorSettings = IntegratorSettings(tolerance=1e-9)

    @model_validator(mode="after")
    def _masks(self):
        width = 4 if self.gate == "entangler" else 3
        masks = self.masks if self.masks is not None else ["1" * width]
        for m in masks:
            if set(m) - {"0", "1"} or len(m) not in ((4, 6) if width == 4 else (3,)):
                raise ValueError(f"mask {m!r} does not fit the {self.gate} gate")
        if any(r <= 0 for r in self.tau_ratios):
            raise ValueError("tau_ratios must be positive")
        object.__setattr__(self, "masks", masks)
        return self


class VerifyParams(_Strict):
    tolerance: float = Field(1e-10, gt=0)


PARAMETER_MODELS: dict[str, type[_Strict]] = {
    "single-gate": SingleGateParams,
    "compose": ComposeParams,
    "two-qubit": TwoQubitConfig,
    "concurrence-sweep": SweepParams,
    "fidelity-curve": FidelityParams,
    "verify-all": VerifyParams,
}


class ExperimentConfig(_Strict):
    """Top-level document; ``parse_config`` swaps ``parameters`` for its typed model."""

    experiment: Literal[EXPERIMENTS]
    parameters: Any = {}
    output_path: str = "results"
    seed: int = 0

    def normalized(self) -> dict:
        return self.model_dump(mode="json")


def _describe(err: ValidationError, prefix: tuple = ()) -> str:
    lines = []
    for e in err.errors():
        where = ".".join(str(p) for p in prefix + tuple(e["loc"])) or "<root>"
        lines.append(f"  {where}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document; raise ConfigurationError on any problem."""
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    params = data.get("parameters", {})
    try:
        cfg = ExperimentConfig(**{**data, "parameters": {}})
    except ValidationError as exc:
        raise ConfigurationError(_describe(exc)) from None
    if not isinstance(params, dict):
        raise ConfigurationError("invalid configuration:\n  parameters: must be an object")
    try:
        typed = PARAMETER_MODELS[cfg.experiment](**params)
    except ValidationError as exc:
        raise ConfigurationError(_describe(exc, ("parameters",))) from None
    return cfg.model_copy(update={"parameters": typed})


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
