"""Minimal V2000 MOL/SDF reader and writer (heavy atoms only)."""

from __future__ import annotations

from typing import Iterable

from ..errors import ParseError, SerializationError, ValenceError
from .core import BOND_CODE, CODE_BOND, KNOWN_ELEMENTS, Atom, Bond, Molecule, connected_components

_CHARGE_CODE = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}
_HYDROGENS = frozenset({"H", "D", "T"})


def _text(data: bytes | str) -> str:
    return data.decode("utf-8", errors="replace") if isinstance(data, (bytes, bytearray)) else data


def _int(field: str, what: str, line: int, record: int) -> int:
    try:
        return int(field)
    except ValueError:
        raise ParseError(f"cannot read {what} from {field!r}", line=line, record=record) from None


def _float(field: str, line: int, record: int) -> float:
    try:
        return round(float(field), 4)
    except ValueError:
        raise ParseError(f"bad coordinate {field!r}", line=line, record=record) from None


def parse_sdf(data: bytes | str) -> list[Molecule]:
    """Parse V2000 SDF/MOL text into one Molecule per connected component per record.

    Explicit hydrogens are dropped; their count reappears as free valence.
    """
    lines = _text(data).splitlines()
    mols: list[Molecule] = []
    pos = 0
    record = 0
    while pos < len(lines):
        # skip blank padding between records
        if not lines[pos].strip() and all(not l.strip() for l in lines[pos:pos + 4]):
            pos += 1
            continue
        start = pos
        try:
            end = next(k for k in range(pos, len(lines)) if lines[k].startswith("$$$$"))
        except StopIteration:
            end = len(lines)
        mols.extend(_parse_record(lines[start:end], start, record))
        record += 1
        pos = end + 1
    return mols


def _parse_record(block: list[str], offset: int, record: int) -> list[Molecule]:
    if len(block) < 4:
        raise ParseError("truncated header block", line=offset + len(block), record=record)
    name = block[0].strip()
    counts = block[3]
    lineno = offset + 4
    if "V3000" in counts:
        raise ParseError("V3000 records are not supported", line=lineno, record=record)
    if len(counts) < 6:
        raise ParseError("malformed counts line", line=lineno, record=record)
    n_atoms = _int(counts[0:3], "atom count", lineno, record)
    n_bonds = _int(counts[3:6], "bond count", lineno, record)
    if len(block) < 4 + n_atoms + n_bonds:
        raise ParseError("record ends before atom/bond blocks are complete", line=offset + len(block), record=record)

    elements: list[str] = []
    charges: list[int] = []
    coords: list[tuple[float, float, float]] = []
    for k in range(n_atoms):
        line = block[4 + k]
        lineno = offset + 5 + k
        symbol = line[31:34].strip()
        if symbol in ("R", "A", "Q", "R#"):
            symbol = "*"
        if symbol not in KNOWN_ELEMENTS and symbol not in _HYDROGENS:
            raise ParseError(f"unknown element symbol {symbol!r}", line=lineno, record=record)
        coords.append(tuple(_float(line[c:c + 10], lineno, record) for c in (0, 10, 20)))
        code = line[36:39].strip()
        charges.append(_CHARGE_CODE.get(_int(code, "charge code", lineno, record), 0) if code else 0)
        elements.append(symbol)

    raw_bonds: list[tuple[int, int, str]] = []
    for k in range(n_bonds):
        line = block[4 + n_atoms + k]
        lineno = offset + 5 + n_atoms + k
        a = _int(line[0:3], "bond atom", lineno, record)
        b = _int(line[3:6], "bond atom", lineno, record)
        code = _int(line[6:9], "bond type", lineno, record)
        if not (1 <= a <= n_atoms and 1 <= b <= n_atoms) or a == b:
            raise ParseError(f"bond atom index out of range ({a}, {b})", line=lineno, record=record)
        if code not in CODE_BOND:
            raise ParseError(f"unsupported bond type {code}", line=lineno, record=record)
        raw_bonds.append((a - 1, b - 1, CODE_BOND[code]))

    seen_chg = False
    for k in range(4 + n_atoms + n_bonds, len(block)):
        line = block[k]
        if line.startswith("M  END"):
            break
        if line.startswith("M  CHG"):
            if not seen_chg:
                # property block charges supersede the atom block
                charges = [0] * n_atoms
                seen_chg = True
            fields = line[6:].split()
            count = _int(fields[0], "CHG count", offset + k + 1, record) if fields else 0
            for j in range(count):
                try:
                    idx, chg = int(fields[1 + 2 * j]), int(fields[2 + 2 * j])
                except (IndexError, ValueError):
                    raise ParseError("malformed M  CHG line", line=offset + k + 1, record=record) from None
                if not 1 <= idx <= n_atoms:
                    raise ParseError(f"charge atom index {idx} out of range", line=offset + k + 1, record=record)
                charges[idx - 1] = chg

    heavy = [i for i, e in enumerate(elements) if e not in _HYDROGENS]
    index = {old: new for new, old in enumerate(heavy)}
    atoms = [Atom(elements[i], charges[i], coords[i]) for i in heavy]
    bonds = [(index[a], index[b], o) for a, b, o in raw_bonds if a in index and b in index]

    out = []
    for comp in connected_components(len(atoms), ((a, b) for a, b, _ in bonds)):
        local = {old: new for new, old in enumerate(comp)}
        comp_bonds = tuple(Bond(local[a], local[b], o) for a, b, o in bonds if a in local)
        try:
            out.append(Molecule(tuple(atoms[i] for i in comp), comp_bonds, name))
        except ValenceError as exc:
            raise ParseError(str(exc), line=offset + 1, record=record) from None
        except ValueError as exc:
            raise ParseError(str(exc), line=offset + 1, record=record) from None
    return out


def write_sdf(mols: Iterable[Molecule]) -> bytes:
    """Serialize molecules as V2000 SDF; coordinates with 4 decimals."""
    chunks = []
    for mol in mols:
        chunks.append(mol_block(mol))
        chunks.append("$$$$\n")
    return "".join(chunks).encode()


def mol_block(mol: Molecule) -> str:
    if len(mol.atoms) > 999 or len(mol.bonds) > 999:
        raise SerializationError(f"{mol.name or 'molecule'}: V2000 is limited to 999 atoms/bonds")
    out = [mol.name.splitlines()[0] if mol.name else "", "     confmotif      3D", ""]
    out.append(f"{len(mol.atoms):3d}{len(mol.bonds):3d}  0  0  0  0  0  0  0  0999 V2000")
    for atom in mol.atoms:
        x, y, z = atom.coord
        out.append(
            f"{x:10.4f}{y:10.4f}{z:10.4f} {atom.element:<3} 0  0  0  0  0  0  0  0  0  0  0  0"
        )
    for bond in mol.bonds:
        out.append(f"{bond.a + 1:3d}{bond.b + 1:3d}{BOND_CODE[bond.order]:3d}  0")
    charged = [(i + 1, a.formal_charge) for i, a in enumerate(mol.atoms) if a.formal_charge]
    for start in range(0, len(charged), 8):
        chunk = charged[start:start + 8]
        out.append(f"M  CHG{len(chunk):3d}" + "".join(f"{i:4d}{c:4d}" for i, c in chunk))
    out.append("M  END")
    return "\n".join(out) + "\n"
