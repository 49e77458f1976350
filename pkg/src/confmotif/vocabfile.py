"""Plain-text serialization of motif vocabularies.

Layout::

    MOTIFVOCAB v1 <count>
    MINFREQ <min_frequency>
    MOTIF <key hex> <kind> <frequency> <n atoms> <n bonds>
    ATOM <label> <x> <y> <z>          (label: element with optional charge, e.g. N+1)
    BOND <i> <j> <order>
    SITE atom <i> <class>  |  SITE bond <i> <j> <class>
    END
"""

from __future__ import annotations

import re

from .errors import ConfmotifError, ParseError
from .molgraph import Atom, Bond, Molecule
from .molgraph.canon import canonical_key
from .motif import CHAIN_LIKE, RING_LIKE, Motif, Vocabulary

HEADER = "MOTIFVOCAB v1"
_LABEL = re.compile(r"^(\*|[A-Z][a-z]?)([+-]\d+)?$")


def _label(atom: Atom) -> str:
    return atom.element if atom.formal_charge == 0 else f"{atom.element}{atom.formal_charge:+d}"


def write_vocabulary(vocab: Vocabulary) -> str:
    lines = [f"{HEADER} {len(vocab)}", f"MINFREQ {vocab.min_frequency}"]
    for motif in vocab:
        g = motif.graph
        lines.append(f"MOTIF {motif.key.hex()} {motif.kind} {motif.frequency} {len(g.atoms)} {len(g.bonds)}")
        for atom in g.atoms:
            x, y, z = atom.coord
            lines.append(f"ATOM {_label(atom)} {x:.6f} {y:.6f} {z:.6f}")
        for bond in g.bonds:
            lines.append(f"BOND {bond.a} {bond.b} {bond.order}")
        classes = vocab.classes(motif)
        for cid, members in enumerate(classes.atom_classes + classes.bond_classes):
            for site in members:
                if site.kind == "atom":
                    lines.append(f"SITE atom {site.atom} {cid}")
                else:
                    lines.append(f"SITE bond {site.bond[0]} {site.bond[1]} {cid}")
        lines.append("END")
    return "\n".join(lines) + "\n"


def read_vocabulary(text: str) -> Vocabulary:
    """Parse a vocabulary file; stored keys are checked against the graphs."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER):
        raise ParseError("missing MOTIFVOCAB v1 header", line=1)
    head = lines[0].split()
    try:
        count = int(head[2])
    except (IndexError, ValueError):
        raise ParseError("malformed vocabulary header", line=1) from None
    if len(head) != 3:
        raise ParseError("malformed vocabulary header", line=1)
    min_freq, i = 1, 1
    if len(lines) > 1 and lines[1].startswith("MINFREQ"):
        try:
            min_freq = int(lines[1].split()[1])
        except (IndexError, ValueError):
            raise ParseError("malformed MINFREQ line", line=2) from None
        i = 2
    motifs = []
    while i < len(lines):
        lineno = i + 1
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        if parts[0] != "MOTIF" or len(parts) != 6:
            raise ParseError(f"expected MOTIF record, got {lines[i]!r}", line=lineno)
        try:
            key_hex, kind, freq, n_atoms, n_bonds = parts[1], parts[2], int(parts[3]), int(parts[4]), int(parts[5])
            key = bytes.fromhex(key_hex)
        except ValueError:
            raise ParseError("malformed MOTIF record", line=lineno) from None
        if kind not in (RING_LIKE, CHAIN_LIKE):
            raise ParseError(f"unknown motif kind {kind!r}", line=lineno)
        atoms, bonds = [], []
        i += 1
        try:
            for _ in range(n_atoms):
                tag, label, x, y, z = lines[i].split()
                m = _LABEL.match(label)
                if tag != "ATOM" or m is None:
                    raise ValueError
                atoms.append(Atom(m.group(1), int(m.group(2) or 0), (float(x), float(y), float(z))))
                i += 1
            for _ in range(n_bonds):
                tag, a, b, order = lines[i].split()
                if tag != "BOND":
                    raise ValueError
                bonds.append(Bond(int(a), int(b), order))
                i += 1
        except (ValueError, IndexError):
            raise ParseError("malformed ATOM/BOND record", line=i + 1) from None
        while i < len(lines) and lines[i].startswith("SITE"):
            i += 1
        if i >= len(lines) or lines[i].strip() != "END":
            raise ParseError("missing END", line=i + 1)
        i += 1
        try:
            graph = Molecule(tuple(atoms), tuple(bonds), "motif")
            motif = Motif(graph, kind, key, freq)
        except (ValueError, ConfmotifError) as exc:
            raise ParseError(f"invalid motif: {exc}", line=lineno) from None
        if canonical_key(graph) != key:
            raise ParseError("motif key does not match its graph", line=lineno)
        motifs.append(motif)
    if len(motifs) != count:
        raise ParseError(f"header declares {count} motifs, found {len(motifs)}")
    return Vocabulary(motifs, min_freq)
