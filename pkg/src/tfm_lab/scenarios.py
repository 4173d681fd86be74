"""Scenario spaces for audits.

The audit grid is every non-increasing value vector of length <= 4 over
{0, 0.5, ..., 5}.  Mechanism outcomes and coalition utilities depend on the
bid multiset only (slot swaps permute outcomes), so sorted representatives
cover every vector on the grid.
"""
from __future__ import annotations

import itertools
import json

from .core import Scenario
from .money import Money

DEFAULT_GRID = tuple(Money(i * 500_000) for i in range(11))

# Bid vectors used throughout the worked examples; handy for regressions.
NAMED_VECTORS = {
    "four-bids": ("10", "8", "5", "3"),
    "three-bids": ("10", "8", "5"),
}


def grid_scenarios(max_len: int = 4,
                   grid: tuple[Money, ...] = DEFAULT_GRID) -> list[Scenario]:
    """All truthful scenarios with sorted value multisets of length <= max_len."""
    out = []
    desc = sorted(grid, key=lambda v: -v.micro)
    for n in range(max_len + 1):
        for combo in itertools.combinations_with_replacement(desc, n):
            out.append(Scenario.truthful(combo))
    return out


def named_scenario(name: str) -> Scenario:
    return Scenario.truthful(NAMED_VECTORS[name])


def load_scenarios(path: str) -> list[Scenario]:
    """Read a scenario space file: a JSON list of value-string lists."""
    with open(path) as fh:
        data = json.load(fh)
    return [Scenario.truthful(vec) for vec in data]
