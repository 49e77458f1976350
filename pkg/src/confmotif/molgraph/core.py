"""Heavy-atom molecular graphs, pockets and valence bookkeeping."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ..errors import ValenceError

DUMMY = "*"

BOND_ORDERS = ("single", "double", "triple", "aromatic")
# V2000 bond type codes
BOND_CODE = {"single": 1, "double": 2, "triple": 3, "aromatic": 4}
CODE_BOND = {v: k for k, v in BOND_CODE.items()}
_BOND_VALENCE = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.5}

ATOMIC_WEIGHTS = {
    "H": 1.008,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "Si": 28.085,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.45,
    "Se": 78.971,
    "Br": 79.904,
    "I": 126.904,
    "Li": 6.94,
    "Na": 22.990,
    "K": 39.098,
    "Mg": 24.305,
    "Ca": 40.078,
    "Zn": 65.38,
    DUMMY: 0.0,
}

# Allowed valence states, lowest first; the last entry is the maximum.
_VALENCE_STATES = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "F": (1,),
    "Si": (4,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "Se": (2, 4, 6),
    "Br": (1,),
    "I": (1,),
    # common counter-ions
    "Li": (1,),
    "Na": (1,),
    "K": (1,),
    "Mg": (2,),
    "Ca": (2,),
    "Zn": (2,),
    DUMMY: (1,),
}

KNOWN_ELEMENTS = frozenset(_VALENCE_STATES)


def _charge_shift(element: str, charge: int) -> int:
    if charge == 0:
        return 0
    if element in ("N", "O", "P", "S", "Se"):
        # onium cations gain a bond, anions lose one
        return charge
    return -abs(charge)


def valence_states(element: str, charge: int = 0) -> tuple[int, ...]:
    shift = _charge_shift(element, charge)
    return tuple(max(v + shift, 0) for v in _VALENCE_STATES[element])


def max_valence(element: str, charge: int = 0) -> int:
    return valence_states(element, charge)[-1]


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    coord: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def is_dummy(self) -> bool:
        return self.element == DUMMY


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: str = "single"

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a

    @property
    def pair(self) -> frozenset[int]:
        return frozenset((self.a, self.b))


def _component_labels(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    label = [-1] * n
    comp = 0
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = comp
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = comp
                    queue.append(v)
        comp += 1
    return label


@dataclass(frozen=True, eq=False)
class Molecule:
    """Connected heavy-atom graph with one 3D conformation.

    Dummy atoms (element ``"*"``) are only expected inside motif graphs.
    Construction validates every invariant and raises on violation.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()
    name: str = ""
    validate: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        if self.validate:
            self._check()

    def _check(self) -> None:
        n = len(self.atoms)
        seen: set[frozenset[int]] = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n) or bond.a == bond.b:
                raise ValueError(f"invalid bond endpoints ({bond.a}, {bond.b})")
            if bond.order not in _BOND_VALENCE:
                raise ValueError(f"unknown bond order {bond.order!r}")
            if bond.pair in seen:
                raise ValueError(f"duplicate bond ({bond.a}, {bond.b})")
            seen.add(bond.pair)
        for i, atom in enumerate(self.atoms):
            if atom.element not in KNOWN_ELEMENTS:
                raise ValueError(f"unknown element {atom.element!r} at atom {i}")
            if not all(math.isfinite(c) for c in atom.coord):
                raise ValueError(f"non-finite coordinate at atom {i}")
        if n and len(set(_component_labels(n, ((b.a, b.b) for b in self.bonds)))) > 1:
            raise ValueError("molecule graph is not connected")
        for i, atom in enumerate(self.atoms):
            used = self.valence_used(i)
            if used > max_valence(atom.element, atom.formal_charge) + 1e-9:
                raise ValenceError(
                    f"atom {i} ({atom.element}) exceeds its valence: "
                    f"{used:g} > {max_valence(atom.element, atom.formal_charge)}"
                )

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def coords(self) -> np.ndarray:
        xyz = np.array([a.coord for a in self.atoms], dtype=float).reshape(-1, 3)
        xyz.flags.writeable = False
        return xyz

    @cached_property
    def elements(self) -> tuple[str, ...]:
        return tuple(a.element for a in self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per atom, ``(neighbor, bond_index)`` pairs sorted by neighbor."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for k, bond in enumerate(self.bonds):
            adj[bond.a].append((bond.b, k))
            adj[bond.b].append((bond.a, k))
        return tuple(tuple(sorted(row)) for row in adj)

    @cached_property
    def bond_index(self) -> dict[frozenset[int], int]:
        return {b.pair: k for k, b in enumerate(self.bonds)}

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def bond_between(self, i: int, j: int) -> Bond | None:
        k = self.bond_index.get(frozenset((i, j)))
        return None if k is None else self.bonds[k]

    def valence_used(self, i: int) -> float:
        """Bond-order sum around atom ``i``.

        Aromatic bonds count 1.5 each, but the aromatic share of an atom is
        capped at ``n_aromatic + 1`` so ring-fusion atoms (three aromatic
        bonds) count 4, not 4.5.
        """
        total = 0.0
        n_arom = 0
        for _, k in self.adjacency[i]:
            order = self.bonds[k].order
            if order == "aromatic":
                n_arom += 1
            else:
                total += _BOND_VALENCE[order]
        if n_arom:
            total += min(1.5 * n_arom, n_arom + 1.0)
        return total

    def with_coords(self, coords: np.ndarray, name: str | None = None) -> "Molecule":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (len(self.atoms), 3):
            raise ValueError("coordinate array shape mismatch")
        atoms = tuple(
            Atom(a.element, a.formal_charge, tuple(float(c) for c in xyz))
            for a, xyz in zip(self.atoms, coords)
        )
        return Molecule(atoms, self.bonds, self.name if name is None else name, validate=False)

    def subgraph(self, keep: Sequence[int], name: str | None = None) -> "Molecule":
        """Induced subgraph on ``keep`` (new indices follow ``keep`` order)."""
        index = {old: new for new, old in enumerate(keep)}
        bonds = [
            Bond(index[b.a], index[b.b], b.order)
            for b in self.bonds
            if b.a in index and b.b in index
        ]
        bonds.sort(key=lambda b: (min(b.a, b.b), max(b.a, b.b)))
        return Molecule(
            tuple(self.atoms[i] for i in keep), tuple(bonds), self.name if name is None else name
        )


def free_valence(mol: Molecule, i: int) -> int:
    """Remaining valence of atom ``i`` (maximum valence minus bond-order sum, floored at 0)."""
    atom = mol.atoms[i]
    return max(int(math.floor(max_valence(atom.element, atom.formal_charge) - mol.valence_used(i) + 1e-9)), 0)


def implicit_hydrogens(mol: Molecule, i: int) -> int:
    """Implicit H count: fill up to the lowest valence state that accommodates the bonds."""
    atom = mol.atoms[i]
    if atom.is_dummy:
        return 0
    used = mol.valence_used(i)
    for state in valence_states(atom.element, atom.formal_charge):
        if state + 1e-9 >= used:
            return max(int(math.floor(state - used + 1e-9)), 0)
    return 0


def molecular_weight(mol: Molecule) -> float:
    """Molecular weight in Da, heavy atoms plus implicit hydrogens; dummies weigh nothing."""
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        if atom.is_dummy:
            continue
        total += ATOMIC_WEIGHTS[atom.element] + implicit_hydrogens(mol, i) * ATOMIC_WEIGHTS["H"]
    return total


def connected_components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    label = _component_labels(n, edges)
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(label):
        groups.setdefault(c, []).append(i)
    return [groups[c] for c in sorted(groups)]


BACKBONE_NAMES = frozenset({"N", "CA", "C", "O"})


@dataclass(frozen=True)
class PocketAtom:
    element: str
    coord: tuple[float, float, float]
    residue_name: str = ""
    residue_seq: int = 0
    chain_id: str = ""
    is_backbone: bool = False
    name: str = ""


@dataclass(frozen=True, eq=False)
class Pocket:
    atoms: tuple[PocketAtom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("pocket has no atoms")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite pocket coordinate")

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def coords(self) -> np.ndarray:
        xyz = np.array([a.coord for a in self.atoms], dtype=float).reshape(-1, 3)
        xyz.flags.writeable = False
        return xyz

    @property
    def centroid(self) -> np.ndarray:
        return self.coords.mean(axis=0)

    @classmethod
    def from_coords(cls, coords: np.ndarray, element: str = "C") -> "Pocket":
        return cls(tuple(PocketAtom(element, tuple(map(float, xyz))) for xyz in np.asarray(coords)))
