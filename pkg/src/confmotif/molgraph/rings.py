"""SSSR ring perception via Horton candidate cycles and GF(2) elimination."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import Molecule, connected_components


@dataclass(frozen=True)
class RingInfo:
    rings: tuple[tuple[int, ...], ...]
    ring_bonds: frozenset[int]
    fused_components: tuple[frozenset[int], ...]
    # ring indices grouped by fused system, parallel to fused_components
    fused_rings: tuple[tuple[int, ...], ...] = ()

    @property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(a for ring in self.rings for a in ring)

    def is_fused(self) -> bool:
        return any(len(group) > 1 for group in self.fused_rings)


def _bfs_tree(mol: Molecule, root: int) -> tuple[list[int], list[int]]:
    n = len(mol.atoms)
    parent = [-1] * n
    dist = [-1] * n
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in mol.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return parent, dist


def _path(parent: list[int], v: int) -> list[int]:
    out = [v]
    while parent[out[-1]] >= 0:
        out.append(parent[out[-1]])
    return out


def _edge_mask(mol: Molecule, atoms: list[int]) -> int:
    mask = 0
    for x, y in zip(atoms, atoms[1:]):
        mask |= 1 << mol.bond_index[frozenset((x, y))]
    return mask


def _ordered_cycle(mol: Molecule, mask: int) -> tuple[int, ...]:
    edges = [mol.bonds[k] for k in range(len(mol.bonds)) if mask >> k & 1]
    adj: dict[int, list[int]] = {}
    for b in edges:
        adj.setdefault(b.a, []).append(b.b)
        adj.setdefault(b.b, []).append(b.a)
    start = min(adj)
    cycle = [start]
    prev, cur = start, min(adj[start])
    while cur != start:
        cycle.append(cur)
        nxt = [w for w in adj[cur] if w != prev]
        prev, cur = cur, nxt[0]
    if len(cycle) > 2 and cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[1:][::-1]
    return tuple(cycle)


def perceive_rings(mol: Molecule) -> RingInfo:
    n, m = len(mol.atoms), len(mol.bonds)
    n_comp = len(connected_components(n, ((b.a, b.b) for b in mol.bonds))) if n else 0
    nu = m - n + n_comp
    if nu <= 0:
        return RingInfo((), frozenset(), (), ())

    candidates: dict[int, int] = {}
    for v in range(n):
        parent, dist = _bfs_tree(mol, v)
        paths = {u: _path(parent, u) for u in range(n) if dist[u] >= 0}
        for bond in mol.bonds:
            x, y = bond.a, bond.b
            if dist[x] < 0 or parent[x] == y or parent[y] == x:
                continue
            px, py = paths[x], paths[y]
            if set(px) & set(py) != {v}:
                continue
            mask = _edge_mask(mol, px) | _edge_mask(mol, py) | (1 << mol.bond_index[bond.pair])
            candidates[mask] = bin(mask).count("1")

    ordered = sorted(candidates, key=lambda mk: (candidates[mk], _ordered_cycle(mol, mk)))
    basis: list[tuple[int, int]] = []  # (pivot bit, reduced vector)
    chosen: list[int] = []
    for mask in ordered:
        vec = mask
        for pivot, row in basis:
            if vec >> pivot & 1:
                vec ^= row
        if vec:
            basis.append((vec.bit_length() - 1, vec))
            chosen.append(mask)
            if len(chosen) == nu:
                break

    rings = tuple(_ordered_cycle(mol, mk) for mk in chosen)
    ring_bonds = frozenset(k for mk in chosen for k in range(m) if mk >> k & 1)

    ring_edges = [{mol.bond_index[frozenset((r[i], r[(i + 1) % len(r)]))] for i in range(len(r))} for r in rings]
    links = [(i, j) for i in range(len(rings)) for j in range(i + 1, len(rings)) if ring_edges[i] & ring_edges[j]]
    groups = connected_components(len(rings), links)
    fused_components = tuple(frozenset(a for r in g for a in rings[r]) for g in groups)
    return RingInfo(rings, ring_bonds, fused_components, tuple(tuple(g) for g in groups))
