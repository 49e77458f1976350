"""Molecular and pocket data model, file I/O, rings and canonical keys."""

from .canon import CanonicalKey, canonical_form, canonical_key, canonical_key_and_rank
from .core import (
    ATOMIC_WEIGHTS,
    DUMMY,
    Atom,
    Bond,
    Molecule,
    Pocket,
    PocketAtom,
    connected_components,
    free_valence,
    implicit_hydrogens,
    max_valence,
    molecular_weight,
)
from .pdb import parse_pocket_pdb, write_pocket_pdb
from .rings import RingInfo, perceive_rings
from .sdf import mol_block, parse_sdf, write_sdf

__all__ = [
    "ATOMIC_WEIGHTS",
    "DUMMY",
    "Atom",
    "Bond",
    "CanonicalKey",
    "Molecule",
    "Pocket",
    "PocketAtom",
    "RingInfo",
    "canonical_form",
    "canonical_key",
    "canonical_key_and_rank",
    "connected_components",
    "free_valence",
    "implicit_hydrogens",
    "max_valence",
    "mol_block",
    "molecular_weight",
    "parse_pocket_pdb",
    "parse_sdf",
    "perceive_rings",
    "write_pocket_pdb",
    "write_sdf",
]
