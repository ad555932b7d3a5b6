"""Run configuration: one flat key=value namespace for every hyperparameter.

Config files are plain text, one ``key=value`` per line, ``#`` comments
allowed. Command-line overrides use the same keys and win over the file.
Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .alignment import ATTENTION_AXES
from .association import FUSION_VARIANTS


class ConfigError(ValueError):
    """Bad key, bad value, or a value violating a module precondition."""


@dataclass
class RunConfig:
    d: int = 1024
    d_r: int = 1024
    d_G: int = 200
    d_B: int = 768
    d_inv: int = 200
    d_var: int = 200
    K: int = 36
    N_max: int = 100
    lam: float = 0.7
    eta: float = 1.3
    alpha: float = 0.1
    beta: float = 2.0
    lr: float = 0.001
    batch: int = 64
    epochs: int = 50
    seed: int = 0
    attention_axis: str = "attended"
    fusion_variant: str = "inv"

    def validate(self):
        for name in ("d", "d_r", "d_G", "d_B", "d_inv", "d_var", "K", "N_max",
                     "batch", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.d % 2 != 0:
            raise ConfigError(f"d must be even (bidirectional halves), got {self.d}")
        if self.lr < 0:
            raise ConfigError(f"lr must be >= 0, got {self.lr}")
        if self.attention_axis not in ATTENTION_AXES:
            raise ConfigError(
                f"attention_axis must be one of {ATTENTION_AXES}, got {self.attention_axis!r}"
            )
        if self.fusion_variant not in FUSION_VARIANTS:
            raise ConfigError(
                f"fusion_variant must be one of {sorted(FUSION_VARIANTS)}, "
                f"got {self.fusion_variant!r}"
            )
        return self


# the reserved word "lambda" is the on-disk key for the lam attribute
_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {"lam": "lambda"}


def _coerce(field_name: str, raw: str):
    kind = {
        "d": int, "d_r": int, "d_G": int, "d_B": int, "d_inv": int, "d_var": int,
        "K": int, "N_max": int, "batch": int, "epochs": int, "seed": int,
        "lam": float, "eta": float, "alpha": float, "beta": float, "lr": float,
        "attention_axis": str, "fusion_variant": str,
    }[field_name]
    try:
        return kind(raw)
    except ValueError as e:
        raise ConfigError(f"bad value for {field_name}: {raw!r}") from e


def apply_pairs(cfg: RunConfig, pairs) -> RunConfig:
    """Apply (key, raw-value) pairs onto a config, rejecting unknown keys."""
    known = {f.name for f in fields(RunConfig)}
    for key, raw in pairs:
        field_name = _KEY_TO_FIELD.get(key, key)
        if field_name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, field_name, _coerce(field_name, raw))
    return cfg


def load_config(path=None, overrides=()) -> RunConfig:
    """Build a RunConfig from an optional file plus CLI-style overrides."""
    cfg = RunConfig()
    if path is not None:
        file_pairs = []
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path} line {lineno}: expected key=value, got {line!r}")
                key, _, raw = line.partition("=")
                file_pairs.append((key.strip(), raw.strip()))
        apply_pairs(cfg, file_pairs)
    apply_pairs(cfg, overrides)
    return cfg.validate()


def config_to_dict(cfg: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        out[_FIELD_TO_KEY.get(f.name, f.name)] = getattr(cfg, f.name)
    return out


def config_from_dict(obj: dict) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for key, value in obj.items():
        field_name = _KEY_TO_FIELD.get(key, key)
        if field_name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, field_name, value)
    return cfg.validate()
