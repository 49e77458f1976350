"""Conformal motif extraction.

Molecules are cut at freely rotatable bonds. Acyclic pieces get dummy atoms
('*') at the positions of their severed neighbours, fused ring systems are
split into one motif per SSSR ring, and everything else is kept as a rigid
ring-like motif.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geom3d import dihedral, perpendicular_distance
from .molgraph import (
    DUMMY,
    Atom,
    Bond,
    CanonicalKey,
    Molecule,
    RingInfo,
    connected_components,
    perceive_rings,
)
from .molgraph.canon import canonical_key

RING_LIKE = "ring_like"
CHAIN_LIKE = "chain_like"

OFF_AXIS_TOL = 0.1  # Å


@dataclass(frozen=True, eq=False)
class Motif:
    graph: Molecule
    kind: str
    key: CanonicalKey
    frequency: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (RING_LIKE, CHAIN_LIKE):
            raise ValueError(f"unknown motif kind {self.kind!r}")
        g = self.graph
        if self.kind == RING_LIKE and any(a.is_dummy for a in g.atoms):
            raise ValueError("ring-like motifs carry no dummy atoms")
        for i, atom in enumerate(g.atoms):
            if atom.is_dummy:
                nbrs = g.neighbors(i)
                if len(nbrs) != 1 or g.atoms[nbrs[0]].is_dummy:
                    raise ValueError(f"dummy atom {i} must have exactly one non-dummy neighbour")
        xyz = g.coords
        for bond in g.bonds:
            length = float(np.linalg.norm(xyz[bond.a] - xyz[bond.b]))
            if not 0.9 <= length <= 2.0:
                raise ValueError(f"motif bond ({bond.a}, {bond.b}) has implausible length {length:.3f} Å")

    @property
    def conformation(self) -> np.ndarray:
        return self.graph.coords

    @property
    def dummies(self) -> list[int]:
        return [i for i, a in enumerate(self.graph.atoms) if a.is_dummy]

    @property
    def real_atoms(self) -> list[int]:
        return [i for i, a in enumerate(self.graph.atoms) if not a.is_dummy]

    @property
    def n_heavy(self) -> int:
        return len(self.real_atoms)

    def with_frequency(self, frequency: int) -> "Motif":
        return Motif(self.graph, self.kind, self.key, frequency)


def make_motif(graph: Molecule, kind: str, frequency: int = 1) -> Motif:
    return Motif(graph, kind, canonical_key(graph), frequency)


@dataclass(frozen=True)
class Fragment:
    motif: Motif
    # motif atom -> source atom; a dummy maps to the neighbour it stands for
    atom_map: tuple[int, ...]
    piece: int


@dataclass(frozen=True)
class SeveredBond:
    bond: int
    atoms: tuple[int, int]
    torsion: float
    length: float
    # off-axis atoms defining the recorded torsion (ref_u, u, v, ref_v)
    references: tuple[int, int]
    pieces: tuple[int, int]


@dataclass(frozen=True, eq=False)
class FragmentationResult:
    source: Molecule
    fragments: tuple[Fragment, ...]
    severed_bonds: tuple[SeveredBond, ...]
    pieces: tuple[tuple[int, ...], ...]
    piece_kinds: tuple[str, ...] = ()


# --------------------------------------------------------------------------
# rotatable bonds


def _side(mol: Molecule, start: int, blocked: int) -> list[int]:
    """Atoms reachable from ``start`` without crossing bond ``blocked``."""
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v, k in mol.adjacency[u]:
            if k != blocked and v not in seen:
                seen.add(v)
                queue.append(v)
    return sorted(seen)


def _off_axis(mol: Molecule, atoms: Sequence[int], a: int, b: int) -> np.ndarray:
    xyz = mol.coords
    return perpendicular_distance(xyz[list(atoms)], xyz[a], xyz[b]) > OFF_AXIS_TOL


def torsion_reference(mol: Molecule, a: int, b: int, blocked: int | None = None) -> int | None:
    """First off-axis atom on ``b``'s side of the a-b bond, in BFS order from ``b``."""
    if blocked is None:
        blocked = mol.bond_index[frozenset((a, b))]
    xyz = mol.coords
    seen = {b, a}
    queue = deque([b])
    while queue:
        u = queue.popleft()
        for v, k in mol.adjacency[u]:
            if k == blocked or v in seen:
                continue
            seen.add(v)
            if perpendicular_distance(xyz[v], xyz[a], xyz[b])[0] > OFF_AXIS_TOL:
                return v
            queue.append(v)
    return None


def find_rotatable_bonds(mol: Molecule, rings: RingInfo | None = None) -> list[int]:
    """Indices of freely rotatable bonds.

    A single, non-ring bond qualifies when both sides left after cutting it
    contain an atom away from the bond axis.
    """
    rings = rings if rings is not None else perceive_rings(mol)
    out = []
    for k, bond in enumerate(mol.bonds):
        if bond.order != "single" or k in rings.ring_bonds:
            continue
        side_a = _side(mol, bond.a, k)
        side_b = _side(mol, bond.b, k)
        if not _off_axis(mol, side_a, bond.a, bond.b).any():
            continue
        if not _off_axis(mol, side_b, bond.a, bond.b).any():
            continue
        out.append(k)
    return out


def bond_torsion(mol: Molecule, u: int, v: int) -> tuple[float, tuple[int, int]]:
    """Dihedral across bond u-v using the canonical off-axis reference atoms."""
    k = mol.bond_index[frozenset((u, v))]
    ref_u = torsion_reference(mol, v, u, k)
    ref_v = torsion_reference(mol, u, v, k)
    if ref_u is None or ref_v is None:
        raise ValueError(f"bond ({u}, {v}) has no off-axis reference atoms")
    xyz = mol.coords
    return dihedral(xyz[ref_u], xyz[u], xyz[v], xyz[ref_v]), (ref_u, ref_v)


# --------------------------------------------------------------------------
# fragmentation


def augment_chain(atoms: Sequence[int], source: Molecule) -> tuple[Motif, tuple[int, ...]]:
    """Chain motif for ``atoms`` plus one dummy per external neighbour.

    Returns the motif and its atom map back into ``source``.
    """
    core = sorted(atoms)
    inside = set(core)
    extra = sorted({n for a in core for n in source.neighbors(a) if n not in inside})
    order = core + extra
    index = {src: i for i, src in enumerate(order)}
    dummy = set(extra)
    new_atoms = [
        Atom(DUMMY, 0, source.atoms[s].coord) if s in dummy else source.atoms[s] for s in order
    ]
    bonds = []
    for b in source.bonds:
        if b.a in index and b.b in index and not (b.a in dummy and b.b in dummy):
            bonds.append(Bond(index[b.a], index[b.b], b.order))
    bonds.sort(key=lambda b: (min(b.a, b.b), max(b.a, b.b)))
    graph = Molecule(tuple(new_atoms), tuple(bonds), source.name)
    return make_motif(graph, CHAIN_LIKE), tuple(order)


def decompose_fused(piece: Molecule, rings: RingInfo | None = None) -> list[tuple[Motif, tuple[int, ...]]]:
    """Split a fused ring piece into one ring-like motif per SSSR ring.

    Shared atoms and bonds are duplicated into every ring containing them and
    acyclic substituents follow each ring that holds their attachment atom.
    Atom maps index into ``piece``.
    """
    rings = rings if rings is not None else perceive_rings(piece)
    if not rings.is_fused():
        raise ValueError("decompose_fused needs at least two rings sharing a bond")
    ring_atoms = rings.ring_atoms
    rest = [i for i in range(len(piece.atoms)) if i not in ring_atoms]
    rest_set = set(rest)
    local = {a: n for n, a in enumerate(rest)}
    groups = connected_components(
        len(rest),
        ((local[b.a], local[b.b]) for b in piece.bonds if b.a in rest_set and b.b in rest_set),
    )
    substituents: dict[int, list[int]] = {}
    for group in groups:
        members = [rest[g] for g in group]
        roots = {n for m in members for n in piece.neighbors(m) if n in ring_atoms}
        for root in roots:
            substituents.setdefault(root, []).extend(members)

    out = []
    for ring in rings.rings:
        keep = set(ring)
        for a in ring:
            keep.update(substituents.get(a, ()))
        order = tuple(sorted(keep))
        out.append((make_motif(piece.subgraph(order), RING_LIKE), order))
    return out


def fragment(mol: Molecule) -> FragmentationResult:
    """Cut ``mol`` at its rotatable bonds and turn every piece into motifs."""
    rings = perceive_rings(mol)
    severed = set(find_rotatable_bonds(mol, rings))
    kept_edges = [(b.a, b.b) for k, b in enumerate(mol.bonds) if k not in severed]
    pieces = [tuple(p) for p in connected_components(len(mol.atoms), kept_edges)]
    piece_of = {a: p for p, atoms in enumerate(pieces) for a in atoms}

    fragments: list[Fragment] = []
    kinds: list[str] = []
    for p, atoms in enumerate(pieces):
        sub = mol.subgraph(atoms)
        sub_rings = perceive_rings(sub)
        if sub_rings.is_fused():
            kinds.append(RING_LIKE)
            for motif, local in decompose_fused(sub, sub_rings):
                fragments.append(Fragment(motif, tuple(atoms[i] for i in local), p))
        elif not sub_rings.rings:
            kinds.append(CHAIN_LIKE)
            motif, amap = augment_chain(atoms, mol)
            fragments.append(Fragment(motif, amap, p))
        else:
            kinds.append(RING_LIKE)
            fragments.append(Fragment(make_motif(sub, RING_LIKE), tuple(atoms), p))

    records = []
    for k in sorted(severed):
        bond = mol.bonds[k]
        u, v = bond.a, bond.b
        torsion, refs = bond_torsion(mol, u, v)
        length = float(np.linalg.norm(mol.coords[u] - mol.coords[v]))
        records.append(SeveredBond(k, (u, v), torsion, length, refs, (piece_of[u], piece_of[v])))
    return FragmentationResult(mol, tuple(fragments), tuple(records), tuple(pieces), tuple(kinds))


# --------------------------------------------------------------------------
# vocabulary


@dataclass(eq=False)
class Vocabulary:
    motifs: list[Motif]
    min_frequency: int = 1
    _classes: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        keys = [m.key for m in self.motifs]
        if len(set(keys)) != len(keys):
            raise ValueError("vocabulary keys must be unique")
        self.motifs = sorted(self.motifs, key=lambda m: (-m.frequency, m.key))

    def __len__(self) -> int:
        return len(self.motifs)

    def __iter__(self):
        return iter(self.motifs)

    def by_key(self, key: CanonicalKey) -> Motif:
        for m in self.motifs:
            if m.key == key:
                return m
        raise KeyError(key.hex())

    def classes(self, motif: Motif):
        """Cached RCCS equivalence classes of ``motif``."""
        from .connect import enumerate_ccs_motif, equivalence_classes

        if motif.key not in self._classes:
            self._classes[motif.key] = equivalence_classes(motif, enumerate_ccs_motif(motif))
        return self._classes[motif.key]

    def rccs(self, kind: str) -> list:
        """All ``(motif, representative site)`` offers of the given site kind."""
        offers = []
        for motif in self.motifs:
            classes = self.classes(motif)
            reps = classes.atom_representatives if kind == "atom" else classes.bond_representatives
            offers.extend((motif, site) for site in reps)
        return offers


def merge_counts(acc: dict[CanonicalKey, Motif], motifs: Iterable[Motif]) -> dict[CanonicalKey, Motif]:
    """Fold motifs into ``acc``; the first stored conformation wins, counts add up."""
    for motif in motifs:
        prev = acc.get(motif.key)
        acc[motif.key] = motif if prev is None else prev.with_frequency(prev.frequency + motif.frequency)
    return acc


def extract_vocabulary(corpus: Sequence[Molecule], min_frequency: int = 1) -> Vocabulary:
    if not corpus:
        raise ValueError("empty corpus")
    acc: dict[CanonicalKey, Motif] = {}
    for mol in corpus:
        merge_counts(acc, (f.motif for f in fragment(mol).fragments))
    kept = [m for m in acc.values() if m.frequency >= min_frequency]
    return Vocabulary(kept, min_frequency)


# --------------------------------------------------------------------------
# round trip


def _piece_motif(result: FragmentationResult, p: int) -> tuple[Motif, tuple[int, ...]]:
    """Rebuild a whole piece (fused rings merged back) as one motif."""
    frags = [f for f in result.fragments if f.piece == p]
    if len(frags) == 1:
        return frags[0].motif, frags[0].atom_map
    elements: dict[int, Atom] = {}
    bonds: dict[frozenset[int], str] = {}
    for f in frags:
        g = f.motif.graph
        for i, src in enumerate(f.atom_map):
            elements.setdefault(src, g.atoms[i])
        for b in g.bonds:
            bonds[frozenset((f.atom_map[b.a], f.atom_map[b.b]))] = b.order
    order = tuple(sorted(elements))
    index = {s: i for i, s in enumerate(order)}
    blist = sorted(
        (Bond(index[min(pair)], index[max(pair)], o) for pair, o in bonds.items()), key=lambda b: (b.a, b.b)
    )
    graph = Molecule(tuple(elements[s] for s in order), tuple(blist), result.source.name)
    return make_motif(graph, RING_LIKE), order


def reconstruct(result: FragmentationResult) -> Molecule:
    """Reassemble the source molecule from its fragments.

    Pieces are re-joined with :func:`confmotif.assemble.attach` across every
    severed bond, restoring the recorded bond lengths, directions and
    torsions. Atoms of the output follow the source order.
    """
    from .assemble import Pose, attach, place_first_motif
    from .connect import ConnectionSite

    src = result.source
    n_pieces = len(result.pieces)
    if not result.fragments or n_pieces == 0:
        raise ValueError("inconsistent fragmentation result: no fragments")
    piece_motifs = [_piece_motif(result, p) for p in range(n_pieces)]
    for p, (motif, amap) in enumerate(piece_motifs):
        real = {amap[i] for i in motif.real_atoms}
        if real != set(result.pieces[p]):
            raise ValueError(f"inconsistent fragmentation result: piece {p} atom map mismatch")

    xyz = src.coords
    motif0, amap0 = piece_motifs[0]
    state = place_first_motif(None, motif0, Pose.identity())
    # ligand atom -> source atom
    lig_src: list[int] = [amap0[i] for i in motif0.real_atoms]
    placed = {0}
    pending = list(result.severed_bonds)
    while pending:
        progress = False
        for rec in list(pending):
            pu, pv = rec.pieces
            if (pu in placed) == (pv in placed):
                if pu in placed:
                    raise ValueError("inconsistent fragmentation result: severed bond inside placed set")
                continue
            u, v = rec.atoms
            ref_u, ref_v = rec.references
            torsion = rec.torsion
            if pv in placed:
                u, v, ref_u, ref_v, pv = v, u, ref_v, ref_u, pu
            motif, amap = piece_motifs[pv]
            f_anchor = lig_src.index(u)
            site = next(
                (s for s in state.open_sites if s.anchor == f_anchor and np.allclose(s.placeholder, xyz[v])),
                None,
            )
            if site is None:
                site = ConnectionSite("atom", f_anchor, None, "fragment", f_anchor)
            m_anchor = next(i for i in motif.real_atoms if amap[i] == v)
            dummy = next((i for i in motif.dummies if amap[i] == u), None)
            m_site = ConnectionSite("atom", m_anchor if dummy is None else dummy, None, "motif", m_anchor)
            direction = (xyz[v] - xyz[u]) / rec.length
            state = attach(
                state,
                site,
                motif,
                m_site,
                torsion,
                bond_length=rec.length,
                fragment_direction=direction,
                motif_direction=-direction,
                torsion_reference=(xyz[ref_u], xyz[ref_v]),
                check_clash=False,
            )
            lig_src.extend(amap[i] for i in motif.real_atoms)
            placed.add(pv)
            pending.remove(rec)
            progress = True
        if not progress:
            raise ValueError("inconsistent fragmentation result: severed bonds do not connect the pieces")
    if len(placed) != n_pieces:
        raise ValueError("inconsistent fragmentation result: disconnected pieces")

    lig = state.ligand
    pos = {s: i for i, s in enumerate(lig_src)}
    perm = [pos[s] for s in range(len(src.atoms))]
    inverse = {old: new for new, old in enumerate(perm)}
    bonds = sorted(
        (Bond(min(inverse[b.a], inverse[b.b]), max(inverse[b.a], inverse[b.b]), b.order) for b in lig.bonds),
        key=lambda b: (b.a, b.b),
    )
    atoms = tuple(lig.atoms[i] for i in perm)
    return Molecule(atoms, tuple(bonds), src.name)
