"""Bundled fusion-system data files, addressable by short name."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..fusion import FusionSystem, from_dict

ALIASES = {
    "fib": "fibonacci",
    "fibonacci": "fibonacci",
    "ising": "ising",
    "toric": "toric",
    "semion": "semion",
    "trivial": "trivial",
    "z2boson": "z2boson",
}

MODEL_NAMES = ("trivial", "z2boson", "semion", "toric", "fibonacci", "ising")


def model_path(name: str) -> Path:
    try:
        canonical = ALIASES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(ALIASES)}") from None
    return Path(str(resources.files(__name__).joinpath(f"{canonical}.json")))


def load_model(name: str) -> FusionSystem:
    path = model_path(name)
    with path.open(encoding="utf-8") as fh:
        return from_dict(json.load(fh), name=path.stem)


def all_models() -> dict[str, FusionSystem]:
    return {name: load_model(name) for name in MODEL_NAMES}
