"""Exact decisions for the multiplicative Deligne-Simpson problem on star quivers."""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

from .quiver import QuiverKind, RootKind, StarQuiver
from .spectral import CharacterQ, Cyclo, ProblemInstance, RelationLattice, Sym, XiTable, q_from_xi, q_pow, xi_char

# the decision names load on first use, so certificate checking can import
# this package without pulling in the decider
_DECIDER_NAMES = {"Guards", "Status", "Verdict", "decide_dsp", "decide_pair", "sigma_by_definition", "sigma_by_pairing"}


def __getattr__(name: str):
    if name in _DECIDER_NAMES:
        return getattr(importlib.import_module(".decider", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "CharacterQ",
    "Cyclo",
    "Guards",
    "ProblemInstance",
    "QuiverKind",
    "RelationLattice",
    "RootKind",
    "StarQuiver",
    "Status",
    "Sym",
    "Verdict",
    "XiTable",
    "decide_dsp",
    "decide_pair",
    "q_from_xi",
    "q_pow",
    "sigma_by_definition",
    "sigma_by_pairing",
    "xi_char",
]
