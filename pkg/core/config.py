"""
config.py
Run configuration: every hyperparameter in validated records, plus the
plain-text `section.key = value` file format.

Records (pydantic, unknown keys rejected, validated at construction):
  TrainConfig    optimizer / regularization / loop settings
  NetworkSpec    architecture of the Chebyshev CNN
  AugmentConfig  on-the-fly augmentation
  DataConfig     dataset locations and split
  RunConfig      all of the above

Example:
    from core.config import load_config, render_config, RunConfig
    cfg = load_config("run.cfg")
    print(render_config(RunConfig()))
"""
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = ("train", "network", "augment", "data")
# "#" opens a comment at line start or after whitespace; "run#3" stays a value
COMMENT = re.compile(r"(?:^|\s)#.*$")


class _Record(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("*", mode="before")
    @classmethod
    def _split_sequences(cls, value: Any, info) -> Any:
        # "32, 64" -> (32, 64) for tuple-typed fields read from text
        field = cls.model_fields.get(info.field_name)
        if isinstance(value, str) and field is not None and "Tuple" in str(field.annotation):
            return tuple(part.strip() for part in value.split(",") if part.strip())
        return value


class TrainConfig(_Record):
    """Optimizer, regularization and training-loop hyperparameters"""
    learning_rate: float = Field(0.001, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    l2_lambda: float = Field(1e-4, ge=0)
    patience: int = Field(10, ge=1)
    max_epochs: int = Field(100, ge=1)
    batch_size: int = Field(32, ge=1)
    seed: int = Field(0, ge=0)
    min_delta: float = Field(1e-6, ge=0)
    bias_correction: bool = False
    augment: bool = True
    prefetch: int = Field(2, ge=0)


class NetworkSpec(_Record):
    """Chebyshev CNN architecture (two convolution stages, two dense layers)"""
    side: int = Field(128, ge=4)
    in_channels: int = Field(1, ge=1)
    num_classes: int = Field(3, ge=2)
    widths: Tuple[int, int] = (32, 64)
    orders: Tuple[int, int] = (4, 6)
    kernel: int = Field(3, ge=1)
    dense_width: int = Field(256, ge=1)
    dropout: float = Field(0.5, ge=0, lt=1)
    conv_kind: Literal["cheb", "standard"] = "cheb"

    @model_validator(mode="after")
    def _check_shapes(self) -> "NetworkSpec":
        if any(w < 1 for w in self.widths):
            raise ValueError(f"widths must be positive, got {self.widths}")
        if any(k < 0 for k in self.orders):
            raise ValueError(f"orders must be non-negative, got {self.orders}")
        if self.kernel % 2 == 0:
            raise ValueError(f"kernel must be odd for same padding, got {self.kernel}")
        return self


class AugmentConfig(_Record):
    """Rotation, scaling, flips and additive noise applied per epoch"""
    rotation: bool = True
    rotation_degrees: float = Field(15.0, ge=0, le=180)
    scaling: bool = True
    scale_min: float = Field(0.9, gt=0)
    scale_max: float = Field(1.1, gt=0)
    flips: bool = True
    hflip_prob: float = Field(0.5, ge=0, le=1)
    vflip_prob: float = Field(0.5, ge=0, le=1)
    noise: bool = True
    noise_sigma: float = Field(0.05, ge=0)

    @model_validator(mode="after")
    def _check_scale(self) -> "AugmentConfig":
        if self.scale_min > self.scale_max:
            raise ValueError(f"scale_min {self.scale_min} exceeds scale_max {self.scale_max}")
        return self

    @classmethod
    def disabled(cls) -> "AugmentConfig":
        return cls(rotation=False, scaling=False, flips=False, noise=False)


class DataConfig(_Record):
    """Dataset locations, split and synthetic-generation size"""
    train_dir: Optional[str] = None
    val_dir: Optional[str] = None
    val_fraction: float = Field(0.2, gt=0, lt=1)
    per_class: int = Field(250, ge=1)
    workers: int = Field(4, ge=1)


class RunConfig(_Record):
    """Complete configuration of a run"""
    train: TrainConfig = TrainConfig()
    network: NetworkSpec = NetworkSpec()
    augment: AugmentConfig = AugmentConfig()
    data: DataConfig = DataConfig()

    @model_validator(mode="after")
    def _check_side(self) -> "RunConfig":
        if self.network.side % 4:
            raise ValueError(f"network.side must be divisible by 4 (two 2x2 pools), got {self.network.side}")
        return self

    def with_overrides(self, **sections: Dict[str, Any]) -> "RunConfig":
        """Copy with per-section field overrides, re-validated"""
        data = self.model_dump()
        for section, values in sections.items():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section '{section}'")
            data[section].update(values)
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            key = ".".join(str(p) for p in first.get("loc", ())[:2]) or None
            raise ConfigError(f"invalid override: {first.get('msg', 'invalid value')}", key=key) from None


# ---- text format ----

def _render_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(_render_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Every key of a RunConfig in file format; parses back to an equal RunConfig"""
    lines = ["# Chebyshev CNN run configuration", ""]
    for section in SECTIONS:
        record = getattr(cfg, section)
        lines.append(f"# [{section}]")
        for key in type(record).model_fields:
            lines.append(f"{section}.{key} = {_render_value(getattr(record, key))}")
        lines.append("")
    return "\n".join(lines)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """
    Parse `section.key = value` lines into a RunConfig

    Raises:
        ConfigError: malformed line, unknown or duplicate key, invalid value;
            the message names the key and its 1-based line number
    """
    values: Dict[str, Dict[str, Optional[str]]] = {s: {} for s in SECTIONS}
    lines: Dict[str, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = COMMENT.sub("", raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: expected 'section.key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in SECTIONS or not name:
            raise ConfigError(f"{source}: unknown key", key=key, line=number)
        record_type = RunConfig.model_fields[section].annotation
        if name not in record_type.model_fields:
            raise ConfigError(f"{source}: unknown key", key=key, line=number)
        if key in lines:
            raise ConfigError(f"{source}: duplicate key (first set on line {lines[key]})", key=key, line=number)
        values[section][name] = value if value != "" else None
        lines[key] = number

    try:
        return RunConfig.model_validate({s: v for s, v in values.items() if v})
    except ValidationError as e:
        first = e.errors()[0]
        loc = [str(part) for part in first.get("loc", ()) if not str(part).isdigit()]
        key = ".".join(loc[:2]) if loc else None
        line = lines.get(key) if key else None
        raise ConfigError(f"{source}: {first.get('msg', 'invalid value')}", key=key, line=line) from None


def load_config(path: Union[str, os.PathLike]) -> RunConfig:
    """Read and parse a configuration file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}") from None
    cfg = parse_config(text, source=str(path))
    logger.info(f"✅ Configuration loaded from {path}")
    return cfg
