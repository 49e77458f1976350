"""Choice policies for the generation loop.

Policies stand in for learned predictors: they pick the first motif and its
pose, the fragment connection site, the motif offer and the torsion of the
new bond. Returning ``None`` from a site choice ends generation.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from ..connect import ConnectionSite
from ..errors import ConfmotifError
from ..molgraph import Pocket
from ..motif import Motif
from .state import AssemblyState, Pose, attach, heuristic_first_pose

Offer = tuple[Motif, ConnectionSite]


class Policy(Protocol):
    def choose_first(self, pocket: Pocket | None, vocabulary: Sequence[Motif]) -> tuple[Motif, Pose]: ...

    def choose_fragment_fcs(self, state: AssemblyState, candidates: Sequence[ConnectionSite]) -> ConnectionSite | None: ...

    def choose_motif_fcs(
        self, state: AssemblyState, fragment_site: ConnectionSite, offers: Sequence[Offer]
    ) -> Offer | None: ...

    def choose_torsion(
        self, state: AssemblyState, fragment_site: ConnectionSite, motif: Motif, motif_site: ConnectionSite
    ) -> float: ...


def _first_pose(pocket: Pocket | None, motif: Motif, rng: np.random.Generator) -> Pose:
    seed = int(rng.integers(2**32))
    if pocket is None:
        return Pose.identity()
    return heuristic_first_pose(pocket, motif, seed)


class RandomPolicy:
    """Uniform choices from a seeded generator."""

    name = "random"

    def __init__(self, seed: int | Sequence[int] = 0) -> None:
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def choose_first(self, pocket, vocabulary):
        motifs = list(vocabulary)
        motif = motifs[int(self.rng.integers(len(motifs)))]
        return motif, _first_pose(pocket, motif, self.rng)

    def choose_fragment_fcs(self, state, candidates):
        return candidates[int(self.rng.integers(len(candidates)))]

    def choose_motif_fcs(self, state, fragment_site, offers):
        return offers[int(self.rng.integers(len(offers)))]

    def choose_torsion(self, state, fragment_site, motif, motif_site):
        return float(self.rng.uniform(-np.pi, np.pi))


class GreedyClashFreePolicy:
    """First candidate whose attachment passes the clash rule, anti torsion."""

    name = "greedy-clash-free"
    torsion = np.pi

    def __init__(self, seed: int | Sequence[int] = 0) -> None:
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def choose_first(self, pocket, vocabulary):
        motif = list(vocabulary)[0]
        return motif, _first_pose(pocket, motif, self.rng)

    def choose_fragment_fcs(self, state, candidates):
        return candidates[0]

    def choose_motif_fcs(self, state, fragment_site, offers):
        for motif, site in offers:
            try:
                attach(state, fragment_site, motif, site, self.torsion)
            except (ConfmotifError, ValueError):
                continue
            return motif, site
        return None

    def choose_torsion(self, state, fragment_site, motif, motif_site):
        return self.torsion


POLICIES = {RandomPolicy.name: RandomPolicy, GreedyClashFreePolicy.name: GreedyClashFreePolicy}


def make_policy(name: str, seed: int | Sequence[int] = 0) -> Policy:
    try:
        return POLICIES[name](seed)
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
