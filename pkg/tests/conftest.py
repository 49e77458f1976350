"""Shared fixtures and independent oracles.

Oracles here deliberately avoid the package's own algorithms: graphs are
compared with networkx (VF2), coordinates are built from internal
coordinates with the NeRF construction, and ideal rings from trigonometry.
"""

from __future__ import annotations

from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.isomorphism import categorical_edge_match, categorical_node_match

from scipy.spatial.transform import Rotation

from confmotif.assemble import Pose, attach, place_first_motif
from confmotif.connect import ConnectionSite
from confmotif.molgraph import Atom, Bond, Molecule, parse_pocket_pdb, parse_sdf
from confmotif.motif import RING_LIKE, make_motif

DATA = Path(__file__).parent / "data"


# ---------------------------------------------------------------- builders


def make_mol(elements, bonds, coords, name="", charges=None) -> Molecule:
    charges = charges or [0] * len(elements)
    atoms = tuple(Atom(e, q, tuple(map(float, c))) for e, q, c in zip(elements, charges, coords))
    return Molecule(atoms, tuple(Bond(a, b, o) for a, b, o in bonds), name)


def nerf(a, b, c, bond, angle, torsion):
    """Place d with |cd| = bond, angle(b, c, d) = angle, dihedral(a, b, c, d) = torsion."""
    a, b, c = map(np.asarray, (a, b, c))
    bc = (c - b) / np.linalg.norm(c - b)
    n = np.cross(b - a, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d2 = np.array([-bond * np.cos(angle), bond * np.sin(angle) * np.cos(torsion), bond * np.sin(angle) * np.sin(torsion)])
    return c + d2[0] * bc + d2[1] * m + d2[2] * n


TETRA = np.radians(109.4712)


def butane(torsion_deg: float, bond: float = 1.53) -> Molecule:
    c1 = np.array([0.0, 0.0, 0.0])
    c2 = np.array([bond, 0.0, 0.0])
    c3 = c2 + bond * np.array([-np.cos(TETRA), np.sin(TETRA), 0.0])
    c4 = nerf(c1, c2, c3, bond, TETRA, np.radians(torsion_deg))
    return make_mol("CCCC", [(0, 1, "single"), (1, 2, "single"), (2, 3, "single")], [c1, c2, c3, c4], "butane")


def ring_coords(n: int, bond: float) -> np.ndarray:
    r = bond / (2.0 * np.sin(np.pi / n))
    t = 2.0 * np.pi * np.arange(n) / n
    return np.stack([r * np.cos(t), r * np.sin(t), np.zeros(n)], axis=1)


def benzene(bond: float = 1.39) -> Molecule:
    return make_mol("CCCCCC", [(i, (i + 1) % 6, "aromatic") for i in range(6)], ring_coords(6, bond), "benzene")


def pyridine() -> Molecule:
    return make_mol("NCCCCC", [(i, (i + 1) % 6, "aromatic") for i in range(6)], ring_coords(6, 1.39), "pyridine")


def toluene_like(elements="CCCCCCC") -> Molecule:
    xyz = ring_coords(6, 1.39)
    sub = xyz[0] * (1.0 + 1.51 / np.linalg.norm(xyz[0]))
    bonds = [(i, (i + 1) % 6, "aromatic") for i in range(6)] + [(0, 6, "single")]
    return make_mol(elements, bonds, np.vstack([xyz, sub]), "toluene")


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


# ---------------------------------------------------------------- graph oracle


def to_nx(mol: Molecule) -> nx.Graph:
    g = nx.Graph()
    for i, a in enumerate(mol.atoms):
        g.add_node(i, label=(a.element, a.formal_charge))
    for b in mol.bonds:
        g.add_edge(b.a, b.b, order=b.order)
    return g


def isomorphic(m1: Molecule, m2: Molecule) -> bool:
    return nx.is_isomorphic(
        to_nx(m1), to_nx(m2), node_match=categorical_node_match("label", None), edge_match=categorical_edge_match("order", None)
    )


def graph_identical(m1: Molecule, m2: Molecule) -> bool:
    """Same atom order, labels and bond set."""
    if [(a.element, a.formal_charge) for a in m1.atoms] != [(a.element, a.formal_charge) for a in m2.atoms]:
        return False
    bonds = lambda m: {(min(b.a, b.b), max(b.a, b.b), b.order) for b in m.bonds}  # noqa: E731
    return bonds(m1) == bonds(m2)


# ---------------------------------------------------------------- brute-force oracles


def brute_force_rotatable(mol: Molecule, tol: float = 0.1) -> set[int]:
    """Literal reading of the definition: cut each single non-ring bond with
    networkx, require two components, and test each side for an atom off the
    bond line."""
    g = nx.Graph([(b.a, b.b) for b in mol.bonds])
    g.add_nodes_from(range(len(mol.atoms)))
    xyz = mol.coords
    out = set()
    for k, b in enumerate(mol.bonds):
        if b.order != "single":
            continue
        h = g.copy()
        h.remove_edge(b.a, b.b)
        comps = list(nx.connected_components(h))
        if len(comps) != 2:
            continue  # ring bond
        axis = (xyz[b.b] - xyz[b.a]) / np.linalg.norm(xyz[b.b] - xyz[b.a])

        def off(atoms):
            rel = xyz[list(atoms)] - xyz[b.a]
            perp = rel - np.outer(rel @ axis, axis)
            return bool((np.linalg.norm(perp, axis=1) > tol).any())

        if all(off(c) for c in comps):
            out.add(k)
    return out



def brute_force_edges(lx, px, bonds, r_ll=5.0, r_lp=10.0, r_pp=15.0):
    ll = {(i, j) for i in range(len(lx)) for j in range(i + 1, len(lx)) if np.linalg.norm(lx[i] - lx[j]) <= r_ll}
    ll |= {(min(a, b), max(a, b)) for a, b in bonds}
    lp = {(i, j) for i in range(len(lx)) for j in range(len(px)) if np.linalg.norm(lx[i] - px[j]) <= r_lp}
    pp = {(i, j) for i in range(len(px)) for j in range(i + 1, len(px)) if np.linalg.norm(px[i] - px[j]) <= r_pp}
    return ll, lp, pp



def probe_state(kind: str, order: str = "aromatic", ends=(("C", 0), ("C", 0))):
    """Asymmetric probe: a six-ring with one nitrogen. Atom sites use the
    meta carbon; bond sites use the directed bond 1->2, which carries the
    given order and the elements of the motif atoms it will be fused with."""
    elements, charges = list("NCCCCC"), [0] * 6
    if kind == "atom":
        bonds = [(i, (i + 1) % 6, "aromatic") for i in range(6)]
    else:
        bonds = [(i, (i + 1) % 6, "single") for i in range(6)]
        bonds[1] = (1, 2, order)
        (elements[1], charges[1]), (elements[2], charges[2]) = ends
    probe = make_motif(make_mol(elements, bonds, ring_coords(6, 1.39), charges=charges), RING_LIKE)
    state = place_first_motif(None, probe, Pose.identity(), check_clash=False)
    site = ConnectionSite("atom", 2) if kind == "atom" else ConnectionSite("bond", bond=(1, 2))
    return state, site


def attachment_product(motif, msite):
    if msite.kind == "atom":
        state, fsite = probe_state("atom")
    else:
        g = motif.graph
        b = g.bond_between(*msite.bond)
        ends = tuple((g.atoms[a].element, g.atoms[a].formal_charge) for a in msite.bond)
        state, fsite = probe_state("bond", b.order, ends)
    return attach(state, fsite, motif, msite, check_clash=False).ligand



def oracle_rmsd(p, q):
    """Superposed RMSD computed with scipy's rotation fit."""
    p, q = p - p.mean(0), q - q.mean(0)
    rot, _ = Rotation.align_vectors(q, p)
    return float(np.sqrt(np.mean(np.sum((rot.apply(p) - q) ** 2, axis=1))))


# ---------------------------------------------------------------- data fixtures


@pytest.fixture(scope="session")
def corpus() -> list[Molecule]:
    return parse_sdf((DATA / "corpus.sdf").read_bytes())


@pytest.fixture(scope="session")
def corpus_ff() -> list[Molecule]:
    return parse_sdf((DATA / "corpus_ff.sdf").read_bytes())


@pytest.fixture(scope="session")
def corpus_alt() -> list[Molecule]:
    return parse_sdf((DATA / "corpus_alt.sdf").read_bytes())


@pytest.fixture(scope="session")
def by_name(corpus) -> dict[str, Molecule]:
    return {m.name: m for m in corpus}


@pytest.fixture(scope="session")
def pocket():
    return parse_pocket_pdb((DATA / "pocket.pdb").read_bytes())


@pytest.fixture(scope="session")
def vocab(corpus):
    from confmotif.motif import extract_vocabulary

    return extract_vocabulary(corpus)


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    """Record the outcome of each acceptance criterion test."""
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        verdict = "PASS" if report.passed else "FAIL"
        _, spent = _ACCEPTANCE.get(name, ("", 0.0))
        _ACCEPTANCE[name] = (verdict, spent + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        verdict, spent = _ACCEPTANCE[name]
        number, title = name.removeprefix("test_criterion_").split("_", 1)
        terminalreporter.write_line(f"{verdict} criterion {int(number):2d} {title.replace('_', ' ')} ({spent:.2f} s)")
