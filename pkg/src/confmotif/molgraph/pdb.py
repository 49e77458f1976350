"""Fixed-column PDB reader for pocket atoms."""

from __future__ import annotations

from ..errors import ParseError
from .core import BACKBONE_NAMES, Pocket, PocketAtom

WATER_NAMES = frozenset({"HOH", "WAT", "H2O", "DOD", "TIP", "TIP3", "SOL"})


def _element(line: str, atom_name: str) -> str:
    symbol = line[76:78].strip() if len(line) >= 78 else ""
    if not symbol:
        # columns 13-14 hold the element for standard atom-name alignment
        symbol = atom_name.lstrip("0123456789")[:1]
    return symbol[:1].upper() + symbol[1:].lower()


def parse_pocket_pdb(data: bytes | str) -> Pocket:
    text = data.decode("utf-8", errors="replace") if isinstance(data, (bytes, bytearray)) else data
    atoms = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip()
        if record not in ("ATOM", "HETATM"):
            continue
        name = line[12:16].strip()
        resname = line[17:20].strip()
        if resname in WATER_NAMES:
            continue
        if line[16:17] not in (" ", "A", ""):
            continue
        element = _element(line, name)
        if element in ("H", "D"):
            continue
        try:
            xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
            seq = int(line[22:26]) if line[22:26].strip() else 0
        except ValueError:
            raise ParseError("malformed coordinate or residue field", line=lineno) from None
        atoms.append(
            PocketAtom(
                element=element,
                coord=xyz,
                residue_name=resname,
                residue_seq=seq,
                chain_id=line[21:22].strip(),
                is_backbone=record == "ATOM" and name in BACKBONE_NAMES,
                name=name,
            )
        )
    if not atoms:
        raise ParseError("no parsable ATOM/HETATM records")
    return Pocket(tuple(atoms))


def write_pocket_pdb(pocket: Pocket) -> str:
    lines = []
    for serial, atom in enumerate(pocket.atoms, start=1):
        name = atom.name or atom.element
        name = f" {name:<3}" if len(name) < 4 else name
        x, y, z = atom.coord
        lines.append(
            f"{'ATOM':<6}{serial:>5} {name:<4} {atom.residue_name or 'UNK':>3} "
            f"{atom.chain_id or 'A'}{atom.residue_seq:>4}    {x:8.3f}{y:8.3f}{z:8.3f}"
            f"  1.00  0.00          {atom.element:>2}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"
