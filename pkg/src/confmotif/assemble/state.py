"""Assembly state, first-motif placement and motif attachment."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from ..connect import ConnectionSite
from ..errors import AttachmentError, ClashError, MergeConflictError, PlacementError, ValenceError
from ..geom3d import (
    RigidTransform,
    dihedral,
    kabsch,
    perpendicular_distance,
    rotation_about_axis,
    rotation_between,
    wrap_angle,
)
from ..molgraph import Atom, Bond, Molecule, Pocket, free_valence, perceive_rings
from ..motif import OFF_AXIS_TOL, RING_LIKE, Motif

CLASH_THRESHOLD = 1.2  # Å, minimum heavy-atom separation

BOND_LENGTHS = {
    frozenset(("C",)): 1.51,
    frozenset(("C", "N")): 1.47,
    frozenset(("C", "O")): 1.43,
    frozenset(("C", "S")): 1.81,
    frozenset(("N",)): 1.45,
}
DEFAULT_BOND_LENGTH = 1.50


def single_bond_length(a: str, b: str) -> float:
    return BOND_LENGTHS.get(frozenset((a, b)), DEFAULT_BOND_LENGTH)


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        # validates orthonormality and det = +1
        t = RigidTransform(self.rotation, self.translation)
        object.__setattr__(self, "rotation", t.rotation)
        object.__setattr__(self, "translation", t.translation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    def as_transform(self, centroid: np.ndarray) -> RigidTransform:
        """x -> R (x - c) + c + t as a single rigid transform."""
        return RigidTransform(self.rotation, centroid + self.translation - self.rotation @ centroid)


@dataclass(frozen=True)
class HistoryEntry:
    motif_key: bytes
    fragment_site: ConnectionSite | None
    motif_site: ConnectionSite | None
    torsion: float


@dataclass(frozen=True, eq=False)
class AssemblyState:
    """Partial ligand docked in a pocket.

    ``transforms[k]`` maps motif ``history[k]``'s stored conformation onto its
    placed coordinates; ``atom_origin`` records which history entry
    contributed each ligand atom.
    """

    pocket: Pocket | None
    ligand: Molecule
    open_sites: tuple[ConnectionSite, ...] = ()
    history: tuple[HistoryEntry, ...] = ()
    transforms: tuple[RigidTransform, ...] = ()
    atom_origin: tuple[int, ...] = ()

    @property
    def step(self) -> int:
        return len(self.history)


def _clash_pairs(new_xyz: np.ndarray, others: np.ndarray, threshold: float) -> np.ndarray:
    if len(new_xyz) == 0 or len(others) == 0:
        return np.zeros((0, 2), dtype=int)
    d = np.linalg.norm(new_xyz[:, None, :] - others[None, :, :], axis=-1)
    return np.argwhere(d < threshold)


def pocket_clash(xyz: np.ndarray, pocket: Pocket | None, threshold: float = CLASH_THRESHOLD) -> bool:
    if pocket is None or len(xyz) == 0:
        return False
    return len(_clash_pairs(np.asarray(xyz), pocket.coords, threshold)) > 0


def ligand_clashes(mol: Molecule, threshold: float = CLASH_THRESHOLD) -> list[tuple[int, int]]:
    """Non-bonded atom pairs closer than ``threshold``."""
    xyz = mol.coords
    d = np.linalg.norm(xyz[:, None, :] - xyz[None, :, :], axis=-1)
    out = []
    for i, j in np.argwhere(d < threshold):
        if i < j and mol.bond_between(int(i), int(j)) is None:
            out.append((int(i), int(j)))
    return out


def _centroid(motif: Motif) -> np.ndarray:
    return motif.conformation[motif.real_atoms].mean(axis=0)


def _realize(motif: Motif, transform: RigidTransform) -> tuple[list[Atom], list[Bond], dict[int, int], np.ndarray]:
    """Placed real atoms of ``motif`` plus an old->new index map (dummies excluded)."""
    placed = transform.apply(motif.conformation)
    real = motif.real_atoms
    index = {old: new for new, old in enumerate(real)}
    atoms = [
        Atom(motif.graph.atoms[i].element, motif.graph.atoms[i].formal_charge, tuple(map(float, placed[i])))
        for i in real
    ]
    bonds = [
        Bond(index[b.a], index[b.b], b.order) for b in motif.graph.bonds if b.a in index and b.b in index
    ]
    return atoms, bonds, index, placed


def place_first_motif(
    pocket: Pocket | None,
    motif: Motif,
    pose: Pose,
    clash_threshold: float = CLASH_THRESHOLD,
    check_clash: bool = True,
) -> AssemblyState:
    """Place ``motif`` by rotating about its centroid and translating; t = 1."""
    transform = pose.as_transform(_centroid(motif))
    atoms, bonds, index, placed = _realize(motif, transform)
    xyz = np.array([a.coord for a in atoms])
    if check_clash and pocket_clash(xyz, pocket, clash_threshold):
        raise ClashError("first motif clashes with the pocket")
    ligand = Molecule(tuple(atoms), tuple(bonds), "ligand")
    sites = tuple(
        ConnectionSite("atom", index[motif.graph.neighbors(d)[0]], host="fragment", placeholder=tuple(map(float, placed[d])))
        for d in motif.dummies
    )
    entry = HistoryEntry(motif.key, None, None, 0.0)
    return AssemblyState(pocket, ligand, sites, (entry,), (transform,), (0,) * len(atoms))


def heuristic_first_pose(
    pocket: Pocket,
    motif: Motif,
    seed: int,
    clash_threshold: float = CLASH_THRESHOLD,
    n_rotations: int = 10,
    n_retreats: int = 25,
    step_size: float = 0.2,
) -> Pose:
    """Centre the motif on the pocket centroid with a random orientation, then
    back away from clashing pocket atoms until the clash rule holds."""
    rng = np.random.default_rng(seed)
    conf = motif.conformation[motif.real_atoms]
    centroid = conf.mean(axis=0)
    target = pocket.centroid
    pxyz = pocket.coords
    for _ in range(n_rotations):
        rot = Rotation.random(random_state=rng).as_matrix()
        base = (conf - centroid) @ rot.T + centroid
        shift = target - centroid
        for _ in range(n_retreats + 1):
            xyz = base + shift
            diff = xyz[:, None, :] - pxyz[None, :, :]
            dist = np.linalg.norm(diff, axis=-1)
            close = dist < clash_threshold
            if not close.any():
                return Pose(rot, shift)
            push = (diff[close] / np.maximum(dist[close], 1e-6)[:, None]).sum(axis=0)
            norm = np.linalg.norm(push)
            if norm < 1e-8:
                push = rng.normal(size=3)
                norm = np.linalg.norm(push)
            shift = shift + step_size * push / norm
    raise PlacementError("no clash-free pose found within the retry budget")


def outward_direction(xyz: np.ndarray, center: int, neighbors: Sequence[int]) -> np.ndarray:
    """Unit vector pointing away from the existing bonds of ``center``."""
    if not neighbors:
        return np.array([1.0, 0.0, 0.0])
    units = [(xyz[n] - xyz[center]) / np.linalg.norm(xyz[n] - xyz[center]) for n in neighbors]
    v = -np.sum(units, axis=0)
    if np.linalg.norm(v) > 1e-3:
        return v / np.linalg.norm(v)
    # linear or symmetric environment: any perpendicular direction
    perp = np.cross(units[0], [1.0, 0.0, 0.0])
    if np.linalg.norm(perp) < 1e-3:
        perp = np.cross(units[0], [0.0, 1.0, 0.0])
    return perp / np.linalg.norm(perp)


def _first_off_axis(mol: Molecule, xyz: np.ndarray, start: int, skip: set[int], a_xyz, b_xyz, allowed=None) -> int | None:
    """Nearest atom (BFS from ``start``) lying off the a-b line; ``xyz`` is the frame a and b live in."""
    seen = set(skip) | {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in mol.neighbors(u):
            if v in seen or (allowed is not None and v not in allowed):
                continue
            seen.add(v)
            if perpendicular_distance(xyz[v], a_xyz, b_xyz)[0] > OFF_AXIS_TOL:
                return v
            queue.append(v)
    return None


def attach(
    state: AssemblyState,
    fragment_site: ConnectionSite,
    motif: Motif,
    motif_site: ConnectionSite,
    torsion: float | None = None,
    *,
    bond_length: float | None = None,
    fragment_direction: np.ndarray | None = None,
    motif_direction: np.ndarray | None = None,
    torsion_reference: tuple[np.ndarray, np.ndarray] | None = None,
    clash_threshold: float = CLASH_THRESHOLD,
    check_clash: bool = True,
) -> AssemblyState:
    """Attach ``motif`` to the partial ligand at a pair of matching sites.

    Atom sites form a new single bond; the motif is moved rigidly so its
    attachment direction points back along the fragment's, then spun about
    the new bond to ``torsion`` when that bond is rotatable. Bond sites fuse
    the motif ring onto the fragment bond.

    ``torsion_reference`` optionally gives the two flank positions defining
    the torsion (fragment side in ligand coordinates, motif side in the
    motif's stored frame); by default the first off-axis atom on each side is
    used.
    """
    if fragment_site.kind != motif_site.kind:
        raise AttachmentError(f"site kind mismatch: {fragment_site.kind} vs {motif_site.kind}")
    if fragment_site.kind == "atom":
        return _attach_atom(
            state, fragment_site, motif, motif_site, torsion, bond_length,
            fragment_direction, motif_direction, torsion_reference, clash_threshold, check_clash,
        )
    return _attach_bond(state, fragment_site, motif, motif_site, clash_threshold, check_clash)


def _new_state(state, ligand, open_sites, entry, transform, n_new) -> AssemblyState:
    return AssemblyState(
        state.pocket,
        ligand,
        tuple(open_sites),
        state.history + (entry,),
        state.transforms + (transform,),
        state.atom_origin + (len(state.history),) * n_new,
    )


def _attach_atom(state, fsite, motif, msite, torsion, bond_length, f_dir, m_dir, refs, threshold, check_clash):
    lig = state.ligand
    g = motif.graph
    f = fsite.anchor
    if not 0 <= f < len(lig.atoms):
        raise AttachmentError(f"fragment anchor {f} out of range")
    if free_valence(lig, f) < 1:
        raise ValenceError(f"fragment atom {f} has no free valence")
    m = msite.anchor
    if not (0 <= msite.atom < len(g.atoms) and 0 <= m < len(g.atoms)) or g.atoms[m].is_dummy:
        raise AttachmentError("invalid motif site")
    consumed = msite.atom if g.atoms[msite.atom].is_dummy else None
    if consumed is not None and g.neighbors(consumed) != [m]:
        raise AttachmentError("motif dummy site is not bonded to its anchor")
    if consumed is None and free_valence(g, m) < 1:
        raise ValenceError(f"motif atom {m} has no free valence")

    lxyz = lig.coords
    mxyz = g.coords
    if f_dir is None:
        if fsite.placeholder is not None:
            f_dir = np.asarray(fsite.placeholder) - lxyz[f]
        else:
            f_dir = outward_direction(lxyz, f, lig.neighbors(f))
    if m_dir is None:
        if consumed is not None:
            m_dir = mxyz[consumed] - mxyz[m]
        else:
            m_dir = outward_direction(mxyz, m, [n for n in g.neighbors(m) if not g.atoms[n].is_dummy])
    f_dir = np.asarray(f_dir, dtype=float) / np.linalg.norm(f_dir)
    m_dir = np.asarray(m_dir, dtype=float) / np.linalg.norm(m_dir)
    length = bond_length if bond_length is not None else single_bond_length(lig.atoms[f].element, g.atoms[m].element)

    rot0 = rotation_between(m_dir, -f_dir)
    m_target = lxyz[f] + length * f_dir
    transform = RigidTransform(rot0, m_target - rot0 @ mxyz[m])
    placed = transform.apply(mxyz)

    real = motif.real_atoms
    real_set = set(real)
    axis_a, axis_b = lxyz[f], placed[m]
    rotatable = bool(
        (perpendicular_distance(lxyz, axis_a, axis_b) > OFF_AXIS_TOL).any()
        and (perpendicular_distance(placed[real], axis_a, axis_b) > OFF_AXIS_TOL).any()
    )
    recorded = 0.0
    if rotatable:
        if refs is not None:
            ref_f = np.asarray(refs[0], dtype=float)
            ref_m = transform.apply(np.asarray(refs[1], dtype=float)[None])[0]
        else:
            rf = _first_off_axis(lig, lxyz, f, set(), axis_a, axis_b)
            rm = _first_off_axis(g, placed, m, {consumed} if consumed is not None else set(), axis_a, axis_b, real_set)
            # rotatable guarantees both exist
            ref_f, ref_m = lxyz[rf], placed[rm]
        current = dihedral(ref_f, axis_a, axis_b, ref_m)
        if torsion is None:
            recorded = current
        else:
            recorded = wrap_angle(torsion)
            delta = wrap_angle(recorded - current)
            spin = rotation_about_axis(axis_b - axis_a, delta)
            transform = RigidTransform(spin, axis_b - spin @ axis_b).compose(transform)
            placed = transform.apply(mxyz)

    atoms, bonds, index, _ = _realize(motif, transform)
    new_xyz = np.array([a.coord for a in atoms])
    n0 = len(lig.atoms)
    m_new = n0 + index[m]
    if check_clash:
        if pocket_clash(new_xyz, state.pocket, threshold):
            raise ClashError("attached motif clashes with the pocket")
        for i, j in _clash_pairs(new_xyz, lxyz, threshold):
            if not (n0 + int(i) == m_new and int(j) == f):
                raise ClashError(f"attached motif atom clashes with ligand atom {int(j)}")

    all_bonds = list(lig.bonds) + [Bond(n0 + b.a, n0 + b.b, b.order) for b in bonds] + [Bond(f, m_new, "single")]
    product = Molecule(lig.atoms + tuple(atoms), tuple(all_bonds), lig.name)

    sites = [s for s in state.open_sites if s != fsite]
    for d in motif.dummies:
        if d == consumed:
            continue
        anchor = n0 + index[g.neighbors(d)[0]]
        sites.append(ConnectionSite("atom", anchor, host="fragment", placeholder=tuple(map(float, placed[d]))))
    entry = HistoryEntry(motif.key, fsite, msite, float(recorded))
    return _new_state(state, product, sites, entry, transform, len(atoms))


def _smallest_ring_with(mol: Molecule, a: int, b: int) -> tuple[int, ...] | None:
    best = None
    for ring in perceive_rings(mol).rings:
        n = len(ring)
        pairs = {frozenset((ring[k], ring[(k + 1) % n])) for k in range(n)}
        if frozenset((a, b)) in pairs and (best is None or n < len(best)):
            best = ring
    return best


def _bond_frame(xyz: np.ndarray, a: int, b: int, ring: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint of a-b and the in-plane unit vector towards the ring centre."""
    mid = 0.5 * (xyz[a] + xyz[b])
    axis = (xyz[b] - xyz[a]) / np.linalg.norm(xyz[b] - xyz[a])
    to_centre = xyz[list(ring)].mean(axis=0) - mid
    perp = to_centre - np.dot(to_centre, axis) * axis
    return mid, perp / np.linalg.norm(perp)


def _attach_bond(state, fsite, motif, msite, threshold, check_clash):
    lig = state.ligand
    g = motif.graph
    if motif.kind != RING_LIKE:
        raise AttachmentError("bond sites require a ring-like motif")
    fm, fn = fsite.bond
    mi, mj = msite.bond
    fb, mb = lig.bond_between(fm, fn), g.bond_between(mi, mj)
    if fb is None or mb is None:
        raise AttachmentError("bond site does not name an existing bond")
    if fb.order != mb.order:
        raise MergeConflictError(f"fused bond order differs: {fb.order} vs {mb.order}")
    for fa, ma in ((fm, mi), (fn, mj)):
        a, b = lig.atoms[fa], g.atoms[ma]
        if (a.element, a.formal_charge) != (b.element, b.formal_charge):
            raise MergeConflictError(f"fused atom {fa} is {a.element} but motif atom {ma} is {b.element}")
    f_ring = _smallest_ring_with(lig, fm, fn)
    m_ring = _smallest_ring_with(g, mi, mj)
    if f_ring is None or m_ring is None:
        raise AttachmentError("bond sites must lie on rings")

    lxyz, mxyz = lig.coords, g.coords
    f_mid, f_in = _bond_frame(lxyz, fm, fn, f_ring)
    m_mid, m_in = _bond_frame(mxyz, mi, mj, m_ring)
    # the new ring goes on the far side of the shared bond, in the fragment ring's plane
    src = np.array([mxyz[mi], mxyz[mj], m_mid + m_in])
    dst = np.array([lxyz[fm], lxyz[fn], f_mid - f_in])
    transform, _ = kabsch(src, dst)
    placed = transform.apply(mxyz)

    n0 = len(lig.atoms)
    others = [i for i in range(len(g.atoms)) if i not in (mi, mj)]
    index = {mi: fm, mj: fn}
    index.update({old: n0 + k for k, old in enumerate(others)})
    atoms = [Atom(g.atoms[i].element, g.atoms[i].formal_charge, tuple(map(float, placed[i]))) for i in others]
    new_bonds = [
        Bond(index[b.a], index[b.b], b.order) for b in g.bonds if frozenset((b.a, b.b)) != frozenset((mi, mj))
    ]
    new_xyz = placed[others]
    if check_clash:
        if pocket_clash(new_xyz, state.pocket, threshold):
            raise ClashError("fused motif clashes with the pocket")
        bonded = {frozenset((b.a, b.b)) for b in new_bonds}
        for i, j in _clash_pairs(new_xyz, lxyz, threshold):
            if frozenset((n0 + int(i), int(j))) not in bonded:
                raise ClashError(f"fused motif atom clashes with ligand atom {int(j)}")
    product = Molecule(lig.atoms + tuple(atoms), lig.bonds + tuple(new_bonds), lig.name)
    entry = HistoryEntry(motif.key, fsite, msite, 0.0)
    return _new_state(state, product, state.open_sites, entry, transform, len(atoms))
