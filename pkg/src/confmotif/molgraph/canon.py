"""Canonical labeling by colour refinement with individualisation on ties.

The search explores every branch of the smallest non-singleton cell and keeps
the lexicographically smallest certificate, so the result does not depend on
the input atom order.
"""

from __future__ import annotations

import hashlib
from typing import Hashable, Mapping, Sequence

from .core import Molecule

CanonicalKey = bytes

MARK_LABEL = "@"


def _rank(values: Sequence) -> list[int]:
    table = {v: r for r, v in enumerate(sorted(set(values)))}
    return [table[v] for v in values]


def _refine(colors: list[int], adj: list[list[tuple[int, str]]]) -> list[int]:
    n_cells = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted((bl, colors[u]) for u, bl in adj[v]))) for v in range(len(colors))]
        new = _rank(sig)
        cells = len(set(new))
        if cells == n_cells:
            return new
        colors, n_cells = new, cells


def canonical_form(
    labels: Sequence[Hashable], edges: Sequence[tuple[int, int, str]]
) -> tuple[tuple, list[int]]:
    """Return ``(certificate, rank)`` where ``rank[v]`` is v's canonical position."""
    n = len(labels)
    adj: list[list[tuple[int, str]]] = [[] for _ in range(n)]
    for a, b, bl in edges:
        adj[a].append((b, bl))
        adj[b].append((a, bl))
    str_labels = [repr(l) for l in labels]
    best: list = [None, None]

    def certificate(colors: list[int]) -> tuple:
        order = sorted(range(n), key=colors.__getitem__)
        pos = colors
        return (
            tuple(str_labels[v] for v in order),
            tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b]), bl) for a, b, bl in edges)),
        )

    def search(colors: list[int]) -> None:
        colors = _refine(colors, adj)
        if len(set(colors)) == n:
            cert = certificate(colors)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, colors
            return
        sizes: dict[int, int] = {}
        for c in colors:
            sizes[c] = sizes.get(c, 0) + 1
        target = min(c for c, s in sizes.items() if s > 1)
        for v in range(n):
            if colors[v] != target:
                continue
            child = [2 * c for c in colors]
            child[v] -= 1
            search(_rank(child))

    if n == 0:
        return ((), ()), []
    search(_rank(str_labels))
    return best[0], best[1]


def atom_label(mol: Molecule, i: int) -> tuple[str, int]:
    atom = mol.atoms[i]
    return (atom.element, atom.formal_charge)


def canonical_key(mol: Molecule, marks: Mapping[int, int] | None = None) -> CanonicalKey:
    """Permutation-invariant key of the labeled graph.

    ``marks`` maps atom indices to distinguished labels (1, 2, ...) appended to
    the atom label, used to test site equivalence. The element is kept so a
    marked carbon never matches a marked heteroatom.
    """
    return canonical_key_and_rank(mol, marks)[0]


def canonical_key_and_rank(mol: Molecule, marks: Mapping[int, int] | None = None) -> tuple[CanonicalKey, list[int]]:
    marks = marks or {}
    labels = [
        atom_label(mol, i) + (MARK_LABEL, marks[i]) if i in marks else atom_label(mol, i) for i in range(len(mol.atoms))
    ]
    edges = [(b.a, b.b, b.order) for b in mol.bonds]
    cert, rank = canonical_form(labels, edges)
    return hashlib.sha256(repr(cert).encode()).digest(), rank
