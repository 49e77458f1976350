"""Connection sites on partial ligands and motifs, and their reduction into
equivalence classes by marked-graph isomorphism."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .molgraph import Molecule, free_valence, perceive_rings
from .molgraph.canon import canonical_key, canonical_key_and_rank
from .motif import CHAIN_LIKE, Motif


@dataclass(frozen=True)
class ConnectionSite:
    """An atom or directed ring bond available for attachment.

    For atom sites ``anchor`` is the heavy atom that receives the new bond;
    ``atom`` differs from it only for motif dummy sites, where ``atom`` is the
    dummy itself. Fragment-side sites left behind by consumed chain motifs
    carry the dummy position in ``placeholder``.
    """

    kind: str
    atom: int | None = None
    bond: tuple[int, int] | None = None
    host: str = "fragment"
    anchor: int | None = None
    placeholder: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind == "atom":
            if self.atom is None:
                raise ValueError("atom site needs an atom index")
            if self.anchor is None:
                object.__setattr__(self, "anchor", self.atom)
        elif self.kind == "bond":
            if self.bond is None or self.bond[0] == self.bond[1]:
                raise ValueError("bond site needs a directed pair of distinct atoms")
            object.__setattr__(self, "bond", tuple(self.bond))
        else:
            raise ValueError(f"unknown site kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "atom":
            return f"atom:{self.atom}" if self.atom == self.anchor else f"atom:{self.atom}->{self.anchor}"
        return f"bond:{self.bond[0]}>{self.bond[1]}"


def _ring_sites(mol: Molecule, host: str) -> list[ConnectionSite]:
    rings = perceive_rings(mol)
    ring_atoms = sorted(rings.ring_atoms)
    ok = {a for a in ring_atoms if not mol.atoms[a].is_dummy and free_valence(mol, a) >= 1}
    sites = [ConnectionSite("atom", a, host=host) for a in ring_atoms if a in ok]
    for k in sorted(rings.ring_bonds):
        b = mol.bonds[k]
        if b.a in ok and b.b in ok:
            sites.append(ConnectionSite("bond", bond=(b.a, b.b), host=host))
            sites.append(ConnectionSite("bond", bond=(b.b, b.a), host=host))
    return sites


def enumerate_ccs_fragment(ligand: Molecule, open_sites: Iterable[ConnectionSite] = ()) -> list[ConnectionSite]:
    """Candidate sites of a partial ligand: unconsumed dummy positions, ring
    atoms with spare valence and directed ring bonds between such atoms."""
    sites = [s for s in open_sites if free_valence(ligand, s.anchor) >= 1]
    return sites + _ring_sites(ligand, "fragment")


def enumerate_ccs_motif(motif: Motif) -> list[ConnectionSite]:
    g = motif.graph
    if motif.kind == CHAIN_LIKE:
        return [ConnectionSite("atom", d, host="motif", anchor=g.neighbors(d)[0]) for d in motif.dummies]
    return _ring_sites(g, "motif")


@dataclass(frozen=True)
class EquivalenceClasses:
    atom_classes: tuple[tuple[ConnectionSite, ...], ...]
    bond_classes: tuple[tuple[ConnectionSite, ...], ...]

    @property
    def atom_representatives(self) -> list[ConnectionSite]:
        return [c[0] for c in self.atom_classes]

    @property
    def bond_representatives(self) -> list[ConnectionSite]:
        return [c[0] for c in self.bond_classes]

    @property
    def representatives(self) -> list[ConnectionSite]:
        return self.atom_representatives + self.bond_representatives

    def class_of(self, site: ConnectionSite) -> int:
        """Class id; atom classes first, then bond classes."""
        for i, cls in enumerate(self.atom_classes + self.bond_classes):
            if site in cls:
                return i
        raise KeyError(site)


def _marks(site: ConnectionSite) -> dict[int, int]:
    return {site.atom: 1} if site.kind == "atom" else {site.bond[0]: 1, site.bond[1]: 2}


def site_key(graph: Molecule, site: ConnectionSite) -> bytes:
    """Canonical key of ``graph`` with the site's atoms given distinguished labels."""
    return canonical_key(graph, _marks(site))


def equivalence_classes(motif: Motif, sites: Sequence[ConnectionSite]) -> EquivalenceClasses:
    """Group sites whose marked motif graphs are isomorphic.

    Directed bonds are marked with two ordered labels at once. Each class is
    listed with its lowest-canonical-rank member first.
    """
    g = motif.graph
    _, rank = canonical_key_and_rank(g)

    def order(site: ConnectionSite) -> tuple:
        return (rank[site.atom],) if site.kind == "atom" else (rank[site.bond[0]], rank[site.bond[1]])

    out = {}
    for kind in ("atom", "bond"):
        groups: dict[bytes, list[ConnectionSite]] = {}
        for site in sites:
            if site.kind == kind:
                groups.setdefault(site_key(g, site), []).append(site)
        classes = [tuple(sorted(members, key=order)) for members in groups.values()]
        classes.sort(key=lambda c: order(c[0]))
        out[kind] = tuple(classes)
    return EquivalenceClasses(out["atom"], out["bond"])
