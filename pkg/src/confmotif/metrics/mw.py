"""Per-pocket molecular-weight windows for set-level evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import DegenerateRangeError
from ..molgraph import Molecule, molecular_weight

MIN_MOLECULES = 5
TRIM_FRACTION = 0.2
SIGMA_CONVENTIONS = ("population", "sample")


@dataclass(frozen=True)
class MwRange:
    pocket_id: str
    mu: float
    sigma: float
    lower: float
    upper: float
    n_total: int
    n_survivors: int
    sigma_convention: str = "population"

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise DegenerateRangeError(f"pocket {self.pocket_id!r}: degenerate weight range [{self.lower}, {self.upper}]")
        if self.n_survivors < 3:
            raise ValueError("a weight range needs at least 3 surviving molecules")

    def contains(self, mw: float) -> bool:
        return self.lower <= mw <= self.upper


def trimmed(values: Sequence[float]) -> np.ndarray:
    """Sorted values with floor(0.2 n) dropped from each end."""
    v = np.sort(np.asarray(values, dtype=float))
    k = math.floor(TRIM_FRACTION * len(v))
    return v[k : len(v) - k]


def mw_range(pocket_id: str, weights: Sequence[float], sigma: str = "population") -> MwRange:
    if sigma not in SIGMA_CONVENTIONS:
        raise ValueError(f"sigma must be one of {SIGMA_CONVENTIONS}")
    if len(weights) < MIN_MOLECULES:
        raise ValueError(f"pocket {pocket_id!r} has {len(weights)} molecules; at least {MIN_MOLECULES} are needed")
    kept = trimmed(weights)
    mu = float(kept.mean())
    sd = float(kept.std(ddof=0 if sigma == "population" else 1))
    if sd <= 1e-12 * max(1.0, abs(mu)):
        sd = 0.0  # identical survivors up to rounding
    return MwRange(pocket_id, mu, sd, mu - sd, mu + sd, len(weights), len(kept), sigma)


def mw_ranges(per_pocket: Mapping[str, Sequence[float]], sigma: str = "population") -> dict[str, MwRange]:
    return {pid: mw_range(pid, weights, sigma) for pid, weights in per_pocket.items()}


def mw_filter(molecules: Iterable[Molecule], window: MwRange) -> list[Molecule]:
    """Molecules whose weight lies in the closed interval of ``window``."""
    return [m for m in molecules if window.contains(molecular_weight(m))]
