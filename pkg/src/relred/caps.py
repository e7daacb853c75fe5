"""Enumeration caps.

Everything in this library works by explicit enumeration of D^Sigma, so
domain size and arity are capped to keep that enumerable.  Defaults can be
overridden with the RELRED_CAPS environment variable, a comma-separated
list of ``name=value`` pairs, e.g. ``RELRED_CAPS=max_arity=10,max_domain=6``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Caps:
    max_domain: int = 8          # |D|
    max_arity: int = 8           # enumerated schemes (standard, complement)
    max_census_cells: int = 16   # census enumerates all 2^(d^n) relations when d^n <= this
    rank_max_cells: int = 65536  # Boolean-rank search refuses larger matrices
    rank_max_ones: int = 24      # ... or denser ones


def _parse(spec: str) -> Caps:
    caps = Caps()
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, value = item.partition("=")
        name = name.strip()
        if name not in Caps.__dataclass_fields__:
            raise ValueError(f"unknown cap {name!r} in RELRED_CAPS")
        caps = replace(caps, **{name: int(value)})
    return caps


def from_env() -> Caps:
    spec = os.environ.get("RELRED_CAPS", "")
    return _parse(spec) if spec else Caps()


DEFAULT_CAPS = from_env()
