"""The step-wise generation loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..connect import enumerate_ccs_fragment
from ..errors import ConfmotifError, PolicyError
from ..molgraph import Molecule, Pocket, molecular_weight
from ..motif import Motif, Vocabulary
from .policy import Policy
from .state import CLASH_THRESHOLD, AssemblyState, attach, place_first_motif


@dataclass(frozen=True)
class Terminated:
    reason: str


def motif_weight(motif: Motif) -> float:
    """Weight of the motif's real atoms as a standalone, hydrogen-capped molecule."""
    return molecular_weight(motif.graph.subgraph(motif.real_atoms))


def _offered(choice, offers) -> bool:
    return any(choice[0] is m and choice[1] == s for m, s in offers)


def step(
    state: AssemblyState,
    vocabulary: Vocabulary,
    policy: Policy,
    mw_cap: float | None = None,
    max_attempts: int = 16,
    clash_threshold: float = CLASH_THRESHOLD,
) -> AssemblyState | Terminated:
    """One attachment: fragment site, motif offer, torsion, attach.

    Failed attachments (clash, valence, weight cap) are retried with fresh
    policy choices up to ``max_attempts`` times before giving up.
    """
    candidates = enumerate_ccs_fragment(state.ligand, state.open_sites)
    if not candidates:
        return Terminated("no connection site left")
    for _ in range(max_attempts):
        fsite = policy.choose_fragment_fcs(state, candidates)
        if fsite is None:
            return Terminated("policy declined")
        if fsite not in candidates:
            raise PolicyError(f"fragment site {fsite.describe()} was not offered")
        offers = vocabulary.rccs(fsite.kind)
        if not offers:
            continue
        choice = policy.choose_motif_fcs(state, fsite, offers)
        if choice is None:
            return Terminated("policy declined")
        if not _offered(choice, offers):
            raise PolicyError("motif site was not offered")
        motif, msite = choice
        torsion = policy.choose_torsion(state, fsite, motif, msite)
        try:
            new = attach(state, fsite, motif, msite, torsion, clash_threshold=clash_threshold)
        except (ConfmotifError, ValueError):
            continue
        if mw_cap is not None and molecular_weight(new.ligand) > mw_cap:
            continue
        return new
    return Terminated("no valid attachment found")


def run_state(
    pocket: Pocket | None,
    vocabulary: Vocabulary,
    policy: Policy,
    max_steps: int = 20,
    mw_cap: float | None = None,
    clash_threshold: float = CLASH_THRESHOLD,
) -> AssemblyState:
    if len(vocabulary) == 0:
        raise ValueError("empty vocabulary")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    firsts: Sequence[Motif] = list(vocabulary)
    if mw_cap is not None:
        firsts = [m for m in firsts if motif_weight(m) <= mw_cap]
        if not firsts:
            raise ValueError(f"no motif fits under mw_cap {mw_cap}")
    motif, pose = policy.choose_first(pocket, firsts)
    state = place_first_motif(pocket, motif, pose, clash_threshold)
    while state.step < max_steps:
        nxt = step(state, vocabulary, policy, mw_cap, clash_threshold=clash_threshold)
        if isinstance(nxt, Terminated):
            break
        state = nxt
    return state


def run(
    pocket: Pocket | None,
    vocabulary: Vocabulary,
    policy: Policy,
    max_steps: int = 20,
    mw_cap: float | None = None,
    clash_threshold: float = CLASH_THRESHOLD,
) -> Molecule:
    """Generate one ligand by repeated :func:`step` calls."""
    return run_state(pocket, vocabulary, policy, max_steps, mw_cap, clash_threshold).ligand


def generate(
    pocket: Pocket | None,
    vocabulary: Vocabulary,
    policy_name: str,
    seed: int,
    n_samples: int,
    max_steps: int = 20,
    mw_cap: float | None = None,
) -> tuple[list[Molecule], list[tuple[int, str]]]:
    """Run ``n_samples`` independent generations; sample ``i`` is seeded by ``(seed, i)``.

    Returns the molecules and the ``(index, message)`` of every failed sample.
    """
    from .policy import make_policy

    out, failures = [], []
    for i in range(n_samples):
        policy = make_policy(policy_name, (seed, i))
        try:
            mol = run(pocket, vocabulary, policy, max_steps, mw_cap)
        except ConfmotifError as exc:
            failures.append((i, str(exc)))
            continue
        out.append(Molecule(mol.atoms, mol.bonds, f"sample_{i}"))
    return out, failures
