"""Superselection braids: braid words, the coloured braid groupoid, braided
fusion data and the action of braids on fusion-tree bases."""

from __future__ import annotations

from .braid import BraidWord, beta, normal_form, permutation, t_braid, u_braid
from .fusion import FusionSystem, apply_gauge, solve_twists, validate
from .groupoid import ColorString, generator_domain, word_domain
from .models import load_model
from .state_space import (
    braid_map,
    build_basis,
    enumerate_shapes,
    superselection_spectrum,
    uniqueness_search,
)

__all__ = [
    "BraidWord",
    "ColorString",
    "FusionSystem",
    "apply_gauge",
    "beta",
    "braid_map",
    "build_basis",
    "enumerate_shapes",
    "generator_domain",
    "load_model",
    "normal_form",
    "permutation",
    "solve_twists",
    "superselection_spectrum",
    "t_braid",
    "u_braid",
    "uniqueness_search",
    "validate",
    "word_domain",
]
