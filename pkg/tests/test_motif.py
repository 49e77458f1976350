import numpy as np
import pytest

from confmotif.geom3d import dihedral, rmsd
from confmotif.molgraph import canonical_key, free_valence
from confmotif.motif import (
    CHAIN_LIKE,
    RING_LIKE,
    augment_chain,
    decompose_fused,
    extract_vocabulary,
    find_rotatable_bonds,
    fragment,
    reconstruct,
)
from confmotif.vocabfile import read_vocabulary, write_vocabulary

from conftest import benzene, brute_force_rotatable, butane, graph_identical, make_mol


def test_rotatable_examples(by_name):
    assert find_rotatable_bonds(butane(180.0)) == [1]
    assert find_rotatable_bonds(by_name["propane"]) == []
    assert find_rotatable_bonds(benzene()) == []


def test_rotatable_matches_brute_force(corpus):
    for mol in corpus:
        assert set(find_rotatable_bonds(mol)) == brute_force_rotatable(mol), mol.name


def test_linear_substituent_is_not_rotatable(by_name):
    # phenyl-C#C-H: the ring-alkyne bond has only on-axis atoms beyond it
    mol = by_name["phenylacetylene"]
    assert find_rotatable_bonds(mol) == []


def test_fragment_examples(by_name):
    res = fragment(by_name["ethylbenzene"])
    kinds = sorted(f.motif.kind for f in res.fragments)
    assert kinds == [CHAIN_LIKE, RING_LIKE]
    ring = next(f for f in res.fragments if f.motif.kind == RING_LIKE)
    chain = next(f for f in res.fragments if f.motif.kind == CHAIN_LIKE)
    assert ring.motif.dummies == [] and ring.motif.n_heavy == 6
    assert len(chain.motif.dummies) == 1 and chain.motif.n_heavy == 2
    (dummy,) = chain.motif.dummies
    # the dummy sits where the ring carbon sits
    assert by_name["ethylbenzene"].atoms[chain.atom_map[dummy]].element == "C"
    assert np.allclose(chain.motif.conformation[dummy], by_name["ethylbenzene"].coords[chain.atom_map[dummy]])

    res = fragment(benzene())
    assert len(res.fragments) == 1 and res.severed_bonds == ()

    res = fragment(by_name["biphenyl"])
    assert len(res.fragments) == 2 and len(res.severed_bonds) == 1
    assert res.fragments[0].motif.key == res.fragments[1].motif.key == canonical_key(benzene())


def test_fragment_maps_partition_source(corpus):
    for mol in corpus:
        res = fragment(mol)
        pieces = sorted(a for p in res.pieces for a in p)
        assert pieces == list(range(len(mol.atoms)))
        assert {k for k in (r.bond for r in res.severed_bonds)} == set(find_rotatable_bonds(mol))
        for frag in res.fragments:
            real = {frag.atom_map[i] for i in frag.motif.real_atoms}
            assert real <= set(res.pieces[frag.piece])
            for d in frag.motif.dummies:
                # dummies stand for atoms of another piece
                assert frag.atom_map[d] not in res.pieces[frag.piece]


def test_fragments_are_valence_valid(corpus):
    for mol in corpus:
        for frag in fragment(mol).fragments:
            g = frag.motif.graph
            assert all(free_valence(g, i) >= 0 for i in range(len(g.atoms)))
            assert all(g.valence_used(i) <= 6 for i in range(len(g.atoms)))


def test_decompose_examples(by_name):
    naph = by_name["naphthalene"]
    parts = decompose_fused(naph)
    assert len(parts) == 2
    (m1, o1), (m2, o2) = parts
    assert m1.key == m2.key == canonical_key(benzene())
    assert len(set(o1) & set(o2)) == 2

    indole = by_name["indole"]
    parts = decompose_fused(indole)
    assert sorted(m.n_heavy for m, _ in parts) == [5, 6]
    assert len(set(parts[0][1]) & set(parts[1][1])) == 2

    with pytest.raises(ValueError):
        decompose_fused(benzene())


def test_decompose_keeps_exocyclic_atoms_with_their_ring(by_name):
    # methylnaphthalene built from the fixture: the methyl follows its anchor's ring
    naph = by_name["naphthalene"]
    xyz = naph.coords
    # attach a methyl to an atom that belongs to only one ring
    parts = decompose_fused(naph)
    only_first = next(a for a in parts[0][1] if a not in parts[1][1])
    direction = xyz[only_first] - xyz.mean(axis=0)
    sub = xyz[only_first] + 1.51 * direction / np.linalg.norm(direction)
    atoms = [(a.element, a.coord) for a in naph.atoms] + [("C", tuple(sub))]
    bonds = [(b.a, b.b, b.order) for b in naph.bonds] + [(only_first, 10, "single")]
    mol = make_mol([e for e, _ in atoms], bonds, [c for _, c in atoms])
    parts = decompose_fused(mol)
    holders = [order for _, order in parts if 10 in order]
    assert len(holders) == 1 and only_first in holders[0]


def test_augment_chain_examples(by_name):
    eb = by_name["ethylbenzene"]
    # the two non-aromatic carbons
    chain = [i for i in range(len(eb.atoms)) if all(eb.bonds[k].order != "aromatic" for _, k in eb.adjacency[i])]
    motif, order = augment_chain(chain, eb)
    assert motif.n_heavy == 2 and len(motif.dummies) == 1

    ethane = make_mol("CC", [(0, 1, "single")], [(0, 0, 0), (1.53, 0, 0)])
    motif, _ = augment_chain([0, 1], ethane)
    assert motif.dummies == []

    b = butane(180.0)
    motif, order = augment_chain([1], b)
    assert motif.n_heavy == 1 and len(motif.dummies) == 2


def test_vocabulary_examples(by_name):
    vocab = extract_vocabulary([benzene()])
    assert len(vocab) == 1 and vocab.motifs[0].frequency == 1

    pair = [by_name["ethylbenzene"], by_name["propylbenzene"]]
    vocab = extract_vocabulary(pair)
    ring = vocab.by_key(canonical_key(benzene()))
    assert ring.frequency == 2
    # propylbenzene's CH2-CH2 bond is rotatable too, so its terminal piece is the
    # same *-CH2-CH3 motif ethylbenzene yields; only the *-CH2-* linker is unique
    chains = {m.n_heavy: m for m in vocab if m.kind == CHAIN_LIKE}
    assert sorted(chains) == [1, 2]
    assert chains[2].frequency == 2 and len(chains[2].dummies) == 1
    assert chains[1].frequency == 1 and len(chains[1].dummies) == 2
    trimmed = extract_vocabulary(pair, min_frequency=2)
    assert {m.key for m in trimmed} == {ring.key, chains[2].key}
    assert all(m.frequency >= 2 for m in trimmed)


def test_vocabulary_order_and_first_occurrence(corpus):
    vocab = extract_vocabulary(corpus)
    freqs = [m.frequency for m in vocab]
    assert freqs == sorted(freqs, reverse=True)
    assert len({m.key for m in vocab}) == len(vocab)
    # stored conformation = first occurrence in corpus order
    for motif in vocab.motifs[:10]:
        first = next(f.motif for mol in corpus for f in fragment(mol).fragments if f.motif.key == motif.key)
        assert np.array_equal(first.conformation, motif.conformation)


def test_vocabulary_serialization_is_deterministic(corpus):
    a = write_vocabulary(extract_vocabulary(corpus))
    b = write_vocabulary(extract_vocabulary(corpus))
    assert a == b
    assert a.splitlines()[0] == f"MOTIFVOCAB v1 {len(extract_vocabulary(corpus))}"
    back = read_vocabulary(a)
    assert write_vocabulary(back) == a


def test_vocabulary_reader_rejects_tampered_key(corpus):
    from confmotif.errors import ParseError

    text = write_vocabulary(extract_vocabulary(corpus[:3]))
    lines = text.splitlines()
    k = next(i for i, l in enumerate(lines) if l.startswith("MOTIF "))
    parts = lines[k].split()
    parts[1] = "00" * 32
    lines[k] = " ".join(parts)
    with pytest.raises(ParseError, match="key"):
        read_vocabulary("\n".join(lines))


def test_reconstruct_examples(by_name):
    b = butane(65.0)
    r = reconstruct(fragment(b))
    assert graph_identical(r, b)
    assert rmsd(r.coords, b.coords, superpose=True) <= 1e-6
    assert np.degrees(dihedral(*r.coords)) == pytest.approx(65.0, abs=1e-6)

    ben = benzene()
    r = reconstruct(fragment(ben))
    assert graph_identical(r, ben) and np.allclose(r.coords, ben.coords)


def test_reconstruct_whole_corpus(corpus):
    for mol in corpus:
        r = reconstruct(fragment(mol))
        assert graph_identical(r, mol), mol.name
        assert rmsd(r.coords, mol.coords, superpose=True) <= 1e-6, mol.name
