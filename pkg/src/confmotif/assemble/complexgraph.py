"""Heterogeneous ligand-pocket radius graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..molgraph import Molecule, Pocket

LL_CUTOFF = 5.0
LP_CUTOFF = 10.0
PP_CUTOFF = 15.0


@dataclass(frozen=True, eq=False)
class EdgeSet:
    """Index pairs (k, 2) with their distances in Å."""

    pairs: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.pairs)

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.pairs}


@dataclass(frozen=True, eq=False)
class HeteroGraph:
    """Ligand and pocket nodes with four typed edge sets.

    ``ll`` and ``pp`` hold unordered pairs (i < j). ``lp`` holds
    (ligand, pocket) pairs and ``pl`` the same pairs reversed.
    ``covalent`` flags which ``ll`` edges are ligand bonds.
    """

    ligand_coords: np.ndarray
    pocket_coords: np.ndarray
    ll: EdgeSet
    lp: EdgeSet
    pl: EdgeSet
    pp: EdgeSet
    covalent: np.ndarray


def _pairs_within(xa: np.ndarray, xb: np.ndarray, r: float, upper: bool = False) -> np.ndarray:
    """Index pairs with |xa[i] - xb[j]| <= r, decided on the exact distance."""
    # tree search with a little slack, then an exact inclusive test
    found = cKDTree(xa).sparse_distance_matrix(cKDTree(xb), r + 1e-6, output_type="ndarray")
    pairs = np.stack([found["i"], found["j"]], axis=1).astype(int)
    if upper:
        pairs = pairs[pairs[:, 0] < pairs[:, 1]]
    dist = np.linalg.norm(xa[pairs[:, 0]] - xb[pairs[:, 1]], axis=1)
    return pairs[dist <= r]


def _edges(pairs: np.ndarray, xa: np.ndarray, xb: np.ndarray) -> EdgeSet:
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if len(pairs):
        pairs = np.unique(pairs, axis=0)
    dist = np.linalg.norm(xa[pairs[:, 0]] - xb[pairs[:, 1]], axis=1)
    return EdgeSet(pairs, dist)


def build_complex_graph(
    ligand: Molecule,
    pocket: Pocket,
    ll_cutoff: float = LL_CUTOFF,
    lp_cutoff: float = LP_CUTOFF,
    pp_cutoff: float = PP_CUTOFF,
) -> HeteroGraph:
    """Radius graph over ligand and pocket atoms; cutoffs are inclusive and
    every covalent ligand bond is an ``ll`` edge regardless of length."""
    if len(ligand.atoms) == 0:
        raise ValueError("empty ligand")
    lx, px = ligand.coords, pocket.coords
    bonded = np.array([(min(b.a, b.b), max(b.a, b.b)) for b in ligand.bonds], dtype=int).reshape(-1, 2)
    ll = _edges(np.vstack([_pairs_within(lx, lx, ll_cutoff, upper=True), bonded]), lx, lx)
    bonded_set = {tuple(p) for p in bonded.tolist()}
    covalent = np.array([tuple(p) in bonded_set for p in ll.pairs.tolist()], dtype=bool)
    lp = _pairs_within(lx, px, lp_cutoff)
    pp = _pairs_within(px, px, pp_cutoff, upper=True)
    return HeteroGraph(lx, px, ll, _edges(lp, lx, px), _edges(lp[:, ::-1], px, lx), _edges(pp, px, px), covalent)


def state_complex_graph(state) -> HeteroGraph:
    if state.pocket is None:
        raise ValueError("state has no pocket")
    return build_complex_graph(state.ligand, state.pocket)
