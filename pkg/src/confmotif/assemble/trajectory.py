"""Supervised training trajectories from a known ligand.

Motifs are ordered breadth-first over the motif tree, starting from the
motif nearest the pocket centroid. A sampled mask ratio hides the last K
motifs; the first hidden one becomes the prediction target.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..connect import ConnectionSite
from ..molgraph import Molecule, Pocket
from ..motif import FragmentationResult, fragment

TRAJ_HEADER = "TRAJ v1"


@dataclass(frozen=True)
class TreeEdge:
    a: int
    b: int
    kind: str  # "severed" or "fused"
    atoms: tuple[int, int]  # source atoms: (in a, in b) or the shared bond
    record: int | None = None  # index into severed_bonds


@dataclass(frozen=True)
class TrainingTarget:
    motif_key: bytes
    fragment_index: int
    fragment_site: ConnectionSite
    motif_site: ConnectionSite
    torsion: float


@dataclass(frozen=True, eq=False)
class TrainingStep:
    mask_ratio: float
    n_masked: int
    order: tuple[int, ...]
    ligand: Molecule | None  # None when every motif is masked
    atom_map: tuple[int, ...]  # masked-ligand index -> source atom
    pocket: Pocket | None
    target: TrainingTarget | None  # None when nothing is masked


def _real_source_atoms(result: FragmentationResult, k: int) -> list[int]:
    frag = result.fragments[k]
    return [frag.atom_map[i] for i in frag.motif.real_atoms]


def motif_tree(result: FragmentationResult) -> list[TreeEdge]:
    """Severed rotatable bonds plus shared-bond links between fused ring motifs."""
    owner: dict[int, list[int]] = {}
    for k in range(len(result.fragments)):
        for a in _real_source_atoms(result, k):
            owner.setdefault(a, []).append(k)
    edges = []
    for r, rec in enumerate(result.severed_bonds):
        u, v = rec.atoms
        edges.append(TreeEdge(owner[u][0], owner[v][0], "severed", (u, v), r))
    by_piece: dict[int, list[int]] = {}
    for k, frag in enumerate(result.fragments):
        by_piece.setdefault(frag.piece, []).append(k)
    src = result.source
    for members in by_piece.values():
        for x, a in enumerate(members):
            sa = set(_real_source_atoms(result, a))
            for b in members[x + 1 :]:
                shared = sorted(sa & set(_real_source_atoms(result, b)))
                bonded = [(i, j) for i in shared for j in shared if i < j and src.bond_between(i, j) is not None]
                if bonded:
                    edges.append(TreeEdge(a, b, "fused", bonded[0]))
    return edges


def bfs_order(result: FragmentationResult, edges: Sequence[TreeEdge], root: int) -> tuple[list[int], dict[int, TreeEdge]]:
    """BFS order and, for every non-root node, the edge to its parent."""
    adj: dict[int, list[tuple[int, TreeEdge]]] = {k: [] for k in range(len(result.fragments))}
    for e in edges:
        adj[e.a].append((e.b, e))
        adj[e.b].append((e.a, e))
    order, parent_edge = [root], {}
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, e in sorted(adj[u], key=lambda t: t[0]):
            if v not in seen:
                seen.add(v)
                parent_edge[v] = e
                order.append(v)
                queue.append(v)
    return order, parent_edge


def _target(result, k, edge, atom_map) -> TrainingTarget:
    frag = result.fragments[k]
    motif = frag.motif
    lig_index = {s: i for i, s in enumerate(atom_map)}
    local = {}
    for i in motif.real_atoms:
        local[frag.atom_map[i]] = i
    if edge.kind == "severed":
        rec = result.severed_bonds[edge.record]
        u, v = rec.atoms
        if v not in local:
            u, v = v, u
        dummy = next((i for i in motif.dummies if frag.atom_map[i] == u), None)
        anchor = local[v]
        msite = ConnectionSite("atom", anchor if dummy is None else dummy, host="motif", anchor=anchor)
        xyz = result.source.coords
        fsite = ConnectionSite("atom", lig_index[u], host="fragment", placeholder=tuple(map(float, xyz[v])))
        return TrainingTarget(motif.key, k, fsite, msite, float(rec.torsion))
    m, n = edge.atoms
    fsite = ConnectionSite("bond", bond=(lig_index[m], lig_index[n]), host="fragment")
    msite = ConnectionSite("bond", bond=(local[m], local[n]), host="motif")
    return TrainingTarget(motif.key, k, fsite, msite, 0.0)


def build_trajectories(ligand: Molecule, pocket: Pocket | None, seed: int, n_samples: int = 1) -> list[TrainingStep]:
    """Sample ``n_samples`` masked states with their next-motif targets."""
    result = fragment(ligand)
    edges = motif_tree(result)
    xyz = ligand.coords
    centre = pocket.centroid if pocket is not None else xyz.mean(axis=0)
    dists = [np.linalg.norm(xyz[_real_source_atoms(result, k)].mean(axis=0) - centre) for k in range(len(result.fragments))]
    root = int(np.argmin(dists))
    order, parent_edge = bfs_order(result, edges, root)
    n = len(order)
    rng = np.random.default_rng(seed)
    steps = []
    for _ in range(n_samples):
        ratio = float(rng.uniform(0.0, 1.0))
        k_mask = int(round(ratio * n))
        kept = order[: n - k_mask]
        atoms = sorted({a for k in kept for a in _real_source_atoms(result, k)})
        masked = ligand.subgraph(atoms) if atoms else None
        target = None
        if k_mask > 0:
            nxt = order[n - k_mask]
            if kept:
                target = _target(result, nxt, parent_edge[nxt], atoms)
            else:
                frag = result.fragments[nxt]
                target = TrainingTarget(frag.motif.key, nxt, None, None, 0.0)
        steps.append(TrainingStep(ratio, k_mask, tuple(order), masked, tuple(atoms), pocket, target))
    return steps


def _site_dict(site: ConnectionSite | None):
    if site is None:
        return None
    return {"kind": site.kind, "atom": site.atom, "anchor": site.anchor, "bond": site.bond, "host": site.host}


def trajectory_record(step: TrainingStep) -> dict:
    t = step.target
    return {
        "mask_ratio": step.mask_ratio,
        "n_masked": step.n_masked,
        "order": list(step.order),
        "ligand_atoms": list(step.atom_map),
        "target": None
        if t is None
        else {
            "motif_key": t.motif_key.hex(),
            "fragment": t.fragment_index,
            "fragment_site": _site_dict(t.fragment_site),
            "motif_site": _site_dict(t.motif_site),
            "torsion": t.torsion,
        },
    }


def write_trajectories(steps: Sequence[TrainingStep]) -> str:
    lines = [TRAJ_HEADER] + [json.dumps(trajectory_record(s), sort_keys=True) for s in steps]
    return "\n".join(lines) + "\n"


def read_trajectories(text: str) -> list[dict]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TRAJ_HEADER:
        raise ValueError("missing TRAJ v1 header")
    return [json.loads(line) for line in lines[1:] if line.strip()]
