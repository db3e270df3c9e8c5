"""System configuration files.

A configuration is a JSON object ``{"systems": [...]}``; each system has a
``name``, a ``dimension``, a ``rule`` (explicit | matrix_power |
scaled_power), its matrices as row-major arrays of integers or decimal
strings, and a ``depth``. See ``docs/config.schema.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .lattice import LatticeError, as_matrix
from .odometer import RULES, Chain, ChainError, ChainSpec, make_chain


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    name: str
    spec: ChainSpec

    @property
    def depth(self) -> int:
        return self.spec.depth

    def chain(self, depth: int | None = None) -> Chain:
        spec = self.spec
        if depth is not None:
            spec = spec.with_depth(min(depth, spec.depth))
        return make_chain(spec)


def _matrix(raw, name: str, key: str, d: int):
    try:
        m = as_matrix([[int(str(x)) for x in row] for row in raw])
    except (TypeError, ValueError, LatticeError) as exc:
        raise ConfigError(f"system {name!r}: field {key!r} is not an integer matrix ({exc})") from None
    if len(m) != d or len(m[0]) != d:
        raise ConfigError(f"system {name!r}: field {key!r} must be {d}x{d}")
    return m


def system_from_dict(raw: dict, position: int = 0) -> SystemConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"systems[{position}] must be an object")
    name = str(raw.get("name", f"system{position}"))
    try:
        d = int(raw["dimension"])
        rule = raw["rule"]
        depth = int(raw.get("depth", len(raw.get("matrices", [])) or 0))
    except KeyError as exc:
        raise ConfigError(f"system {name!r}: missing field {exc.args[0]!r}") from None
    if d < 1:
        raise ConfigError(f"system {name!r}: dimension must be positive")
    if rule not in RULES:
        raise ConfigError(f"system {name!r}: unknown rule {rule!r} (expected one of {', '.join(RULES)})")
    if rule == "explicit":
        mats = tuple(_matrix(m, name, f"matrices[{i}]", d) for i, m in enumerate(raw.get("matrices", [])))
        if not mats:
            raise ConfigError(f"system {name!r}: explicit rule needs a non-empty 'matrices' list")
        spec = ChainSpec(d, rule, min(depth, len(mats)) if depth else len(mats), matrices=mats)
    elif rule == "matrix_power":
        spec = ChainSpec(d, rule, depth, base=_matrix(raw.get("base"), name, "base", d))
    else:
        side = raw.get("side", "left")
        if side not in ("left", "right"):
            raise ConfigError(f"system {name!r}: side must be 'left' or 'right'")
        spec = ChainSpec(
            d, rule, depth,
            base=_matrix(raw.get("base"), name, "base", d),
            front=_matrix(raw.get("front"), name, "front", d),
            side=side,
        )
    if spec.depth < 1:
        raise ConfigError(f"system {name!r}: depth must be at least 1")
    try:
        make_chain(spec)
    except (ChainError, LatticeError) as exc:
        raise ConfigError(f"system {name!r}: {exc}") from None
    return SystemConfig(name, spec)


def parse_config_text(text: str, source: str = "<config>") -> list[SystemConfig]:
    if not text.strip():
        raise ConfigError(f"{source}: no systems")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    systems = data.get("systems") if isinstance(data, dict) else None
    if not systems:
        raise ConfigError(f"{source}: no systems")
    out = [system_from_dict(s, i) for i, s in enumerate(systems)]
    names = [s.name for s in out]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise ConfigError(f"{source}: duplicate system names {sorted(dup)}")
    return out


def parse_config(path) -> list[SystemConfig]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    return parse_config_text(path.read_text(), str(path))


def bundled_config() -> list[SystemConfig]:
    text = resources.files("odorigid").joinpath("data/paper_example.json").read_text()
    return parse_config_text(text, "paper_example.json")
