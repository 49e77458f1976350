"""Distance and bond-angle histograms and their Jensen-Shannon divergence."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..molgraph import Molecule

DISTANCE_BIN = 0.25  # Å
DISTANCE_MAX = 12.0  # Å
ANGLE_BIN = 2.5  # degrees
ANGLE_MAX = 180.0
DEFAULT_PATTERNS = ("CCC", "CCO", "CNC", "NCC", "CC=O")

ALL_ATOM = "all_atom"
CARBON_CARBON = "carbon_carbon"

_BOND_MARK = {"-": "single", "=": "double", "#": "triple", ":": "aromatic"}
_PATTERN = re.compile(r"^([A-Z][a-z]?)([-=#:]?)([A-Z][a-z]?)([-=#:]?)([A-Z][a-z]?)$")


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if counts.shape != (len(edges) - 1,):
            raise ValueError("counts must have one entry per bin")
        if np.any(counts < 0):
            raise ValueError("negative histogram count")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def normalize(self) -> "Histogram":
        total = self.total
        if total <= 0:
            raise ValueError("cannot normalize an empty histogram")
        return Histogram(self.edges, self.counts / total, True)


def uniform_edges(width: float, upper: float) -> np.ndarray:
    if width <= 0:
        raise ValueError("bin width must be positive")
    n = int(round(upper / width))
    if not np.isclose(n * width, upper):
        raise ValueError(f"bin width {width} does not divide {upper}")
    return np.linspace(0.0, upper, n + 1)


def pair_distances(mol: Molecule, mode: str = ALL_ATOM) -> np.ndarray:
    """Intra-molecular distances over all unordered heavy-atom (or C-C) pairs."""
    if mode == ALL_ATOM:
        idx = [i for i, a in enumerate(mol.atoms) if not a.is_dummy]
    elif mode == CARBON_CARBON:
        idx = [i for i, a in enumerate(mol.atoms) if a.element == "C"]
    else:
        raise ValueError(f"unknown distance mode {mode!r}")
    xyz = mol.coords[idx]
    i, j = np.triu_indices(len(idx), k=1)
    return np.linalg.norm(xyz[i] - xyz[j], axis=1)


def distance_hist(
    molecules: Iterable[Molecule], mode: str = ALL_ATOM, bin_width: float = DISTANCE_BIN, max_distance: float = DISTANCE_MAX
) -> Histogram:
    edges = uniform_edges(bin_width, max_distance)
    values = [pair_distances(m, mode) for m in molecules]
    values = np.concatenate(values) if values else np.zeros(0)
    values = values[values <= max_distance]
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges, counts)


@dataclass(frozen=True)
class AnglePattern:
    """Path a-b-c with the angle measured at b; ``None`` bond orders match any bond."""

    first: str
    center: str
    last: str
    bond_first: str | None = None
    bond_last: str | None = None

    @property
    def symmetric(self) -> bool:
        return self.first == self.last and self.bond_first == self.bond_last


def parse_pattern(text: str) -> AnglePattern:
    m = _PATTERN.match(text.strip())
    if m is None:
        raise ValueError(f"bad angle pattern {text!r}; expected e.g. 'CCC' or 'CC=O'")
    a, m1, b, m2, c = m.groups()
    return AnglePattern(a, b, c, _BOND_MARK.get(m1), _BOND_MARK.get(m2))


def _matches(mol: Molecule, nbr: int, bond_k: int, element: str, order: str | None) -> bool:
    return mol.atoms[nbr].element == element and (order is None or mol.bonds[bond_k].order == order)


def bond_angles(mol: Molecule, pattern: AnglePattern | str) -> np.ndarray:
    """Angles in degrees at the centre atom of every path matching ``pattern``."""
    if isinstance(pattern, str):
        pattern = parse_pattern(pattern)
    xyz = mol.coords
    out = []
    for b, atom in enumerate(mol.atoms):
        if atom.element != pattern.center:
            continue
        nbrs = mol.adjacency[b]
        for x, (a, ka) in enumerate(nbrs):
            for y, (c, kc) in enumerate(nbrs):
                if x == y or (pattern.symmetric and y < x):
                    continue
                if _matches(mol, a, ka, pattern.first, pattern.bond_first) and _matches(
                    mol, c, kc, pattern.last, pattern.bond_last
                ):
                    u, v = xyz[a] - xyz[b], xyz[c] - xyz[b]
                    cos = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
                    out.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return np.asarray(out, dtype=float)


def angle_hist(molecules: Iterable[Molecule], pattern: AnglePattern | str, bin_width: float = ANGLE_BIN) -> Histogram:
    if isinstance(pattern, str):
        pattern = parse_pattern(pattern)
    edges = uniform_edges(bin_width, ANGLE_MAX)
    values = [bond_angles(m, pattern) for m in molecules]
    values = np.concatenate(values) if values else np.zeros(0)
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges, counts)


def jsd(p: Histogram | Sequence[float], q: Histogram | Sequence[float]) -> float:
    """Jensen-Shannon divergence in nats; 0 log 0 is taken as 0."""
    if isinstance(p, Histogram) and isinstance(q, Histogram):
        if p.edges.shape != q.edges.shape or not np.array_equal(p.edges, q.edges):
            raise ValueError("histograms have different binning")
        p, q = p.counts, q.counts
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("histograms have different binning")
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("cannot compare an empty histogram")
    p, q = p / p.sum(), q / q.sum()
    m = 0.5 * (p + q)

    def kl(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / m[mask])))

    return float(min(max(0.5 * kl(p) + 0.5 * kl(q), 0.0), np.log(2.0)))
