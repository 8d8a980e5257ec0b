"""Run configuration: an INI file with sections, overridable by CLI flags.

Every tunable lives here with its default, so a config file only needs
the keys it wants to change. `RunConfig.load` reads a file; command-line
flags are merged on top by the CLI (flag wins when given).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from typing import Optional

__all__ = ["RunConfig", "ConfigError", "parse_ratios"]


class ConfigError(ValueError):
    pass


def parse_ratios(text: str) -> tuple[float, float, float]:
    """'8:1:1' -> (0.8, 0.1, 0.1); any positive weights allowed."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"ratios need three parts, got {text!r}")
    try:
        weights = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"ratios must be numeric, got {text!r}")
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise ConfigError(f"ratios must be nonnegative with a positive sum: {text!r}")
    total = sum(weights)
    return tuple(w / total for w in weights)


@dataclass
class RunConfig:
    # data
    dataset: str = "data/mini_uspto.csv"
    seed: int = 7
    ratios: str = "8:1:1"
    # model
    width: int = 256
    n_layers: int = 6
    heads: int = 4
    dropout: float = 0.0
    class_emb_dim: int = 128
    pair_width: int = 512
    pair_layers: int = 2
    pair_heads: int = 4
    # templates
    k: int = 150
    # train
    batch_size: int = 128
    ci_epochs: int = 30
    ci_lr: float = 1e-3
    sc_epochs: int = 50
    sc_lr: float = 1e-4
    one_cycle: bool = True
    # inference
    k_ci: int = 3
    k_sc: int = 4
    k_total: int = 10
    use_filter: bool = True
    use_correcting: bool = True

    _SECTIONS = {
        "data": ("dataset", "seed", "ratios"),
        "model": ("width", "n_layers", "heads", "dropout", "class_emb_dim",
                  "pair_width", "pair_layers", "pair_heads"),
        "templates": ("k",),
        "train": ("batch_size", "ci_epochs", "ci_lr", "sc_epochs", "sc_lr",
                  "one_cycle"),
        "inference": ("k_ci", "k_sc", "k_total", "use_filter", "use_correcting"),
    }

    def validate(self) -> "RunConfig":
        parse_ratios(self.ratios)
        positive = ("width", "n_layers", "heads", "class_emb_dim", "pair_width",
                    "pair_layers", "pair_heads", "k", "batch_size", "ci_epochs",
                    "sc_epochs", "k_ci", "k_sc", "k_total")
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("ci_lr", "sc_lr"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if self.width % self.heads or self.pair_width % self.pair_heads:
            raise ConfigError("width must be divisible by heads")
        return self

    @classmethod
    def load(cls, path: Optional[str] = None) -> "RunConfig":
        cfg = cls()
        if path is None:
            return cfg.validate()
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        types = {f.name: f.type for f in fields(cls)}
        for section, keys in cls._SECTIONS.items():
            if not parser.has_section(section):
                continue
            for key in parser.options(section):
                if key not in keys:
                    raise ConfigError(f"unknown key [{section}] {key}")
                kind = types[key]
                if kind == "int":
                    setattr(cfg, key, parser.getint(section, key))
                elif kind == "float":
                    setattr(cfg, key, parser.getfloat(section, key))
                elif kind == "bool":
                    setattr(cfg, key, parser.getboolean(section, key))
                else:
                    setattr(cfg, key, parser.get(section, key))
        return cfg.validate()

    def save(self, path: str) -> None:
        parser = configparser.ConfigParser()
        for section, keys in self._SECTIONS.items():
            parser[section] = {k: str(getattr(self, k)) for k in keys}
        with open(path, "w") as fh:
            parser.write(fh)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
