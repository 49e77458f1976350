"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
3 runtime failure (placement, optimisation, inconsistent inputs).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .assemble import build_trajectories, generate, write_trajectories
from .assemble.policy import POLICIES
from .errors import ConfmotifError, ParseError
from .metrics import (
    DEFAULT_PATTERNS,
    EvalConfig,
    evaluate,
    mw_filter,
    mw_range,
    parse_pattern,
    prepare_docking_inputs,
)
from .molgraph import molecular_weight, parse_pocket_pdb, parse_sdf, write_sdf
from .motif import CHAIN_LIKE, extract_vocabulary, fragment
from .vocabfile import read_vocabulary, write_vocabulary

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3
DEFAULT_SEED = 0


class InputError(Exception):
    """Raised for input files that cannot be read or parsed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def config_fingerprint(args: argparse.Namespace) -> str:
    """SHA-256 over the parsed options, for provenance in reports."""
    # the worker count does not change outputs, so it stays out of the hash
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "workers")}
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_sdf(path: str):
    try:
        return parse_sdf(_read_bytes(path))
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_vocab(path: str):
    try:
        return read_vocabulary(_read_bytes(path).decode())
    except (ParseError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_pocket(path: str):
    try:
        return parse_pocket_pdb(_read_bytes(path))
    except (ParseError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def cmd_extract_vocab(args) -> int:
    corpus = _load_sdf(args.sdf)
    vocab = extract_vocabulary(corpus, args.min_freq)
    Path(args.output).write_text(write_vocabulary(vocab))
    n_chain = sum(1 for m in vocab if m.kind == CHAIN_LIKE)
    print(f"molecules\t{len(corpus)}")
    print(f"motifs\t{len(vocab)}")
    print(f"ring_like\t{len(vocab) - n_chain}")
    print(f"chain_like\t{n_chain}")
    return EXIT_OK


def cmd_fragment(args) -> int:
    rows = ["record\tname\tfragment\tpiece\tkind\tkey\tsource_atoms"]
    for r, mol in enumerate(_load_sdf(args.sdf), start=1):
        res = fragment(mol)
        for k, frag in enumerate(res.fragments):
            atoms = ",".join(str(a) for a in frag.atom_map)
            rows.append(f"{r}\t{mol.name}\t{k}\t{frag.piece}\t{frag.motif.kind}\t{frag.motif.key.hex()[:16]}\t{atoms}")
    text = "\n".join(rows) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_assemble(args) -> int:
    pocket = _load_pocket(args.pocket)
    vocab = _load_vocab(args.vocab)
    mols, failures = generate(pocket, vocab, args.policy, args.seed, args.n_samples, args.max_steps, args.mw_cap)
    Path(args.output).write_bytes(write_sdf(mols))
    for i, message in failures:
        _warn(f"sample {i}: {message}")
    print(f"generated\t{len(mols)}")
    print(f"failed\t{len(failures)}")
    print(f"fingerprint\t{config_fingerprint(args)}")
    if failures and not mols and args.n_samples > 0:
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_trajectories(args) -> int:
    pocket = _load_pocket(args.pocket)
    steps = []
    for r, mol in enumerate(_load_sdf(args.sdf)):
        steps.extend(build_trajectories(mol, pocket, args.seed + r, args.n_samples))
    Path(args.output).write_text(write_trajectories(steps))
    print(f"steps\t{len(steps)}")
    return EXIT_OK


def _eval_config(args) -> EvalConfig:
    patterns = tuple(p.strip() for p in args.patterns.split(",") if p.strip())
    for p in patterns:
        parse_pattern(p)
    return EvalConfig(args.bins_distance, args.bins_angle, patterns, args.sigma, args.seed)


def cmd_eval(args) -> int:
    cfg = _eval_config(args)
    gen, ref = _load_sdf(args.gen), _load_sdf(args.ref)
    ff = _load_sdf(args.ff) if args.ff else None
    report = evaluate(gen, ref, ff, cfg, workers=args.workers)
    prefix = Path(args.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.tsv").write_text(report.to_tsv())
    Path(f"{prefix}.json").write_text(report.to_json())
    print(f"report\t{prefix}.tsv")
    return EXIT_OK


def cmd_mw_filter(args) -> int:
    src = Path(args.directory)
    if not src.is_dir():
        raise InputError(f"{src} is not a directory")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = [f"# fingerprint\t{config_fingerprint(args)}", "pocket\tmu\tsigma\tlower\tupper\tkept\ttotal"]
    for path in sorted(src.glob("*.sdf")):
        mols = _load_sdf(str(path))
        try:
            window = mw_range(path.stem, [molecular_weight(m) for m in mols], args.sigma)
        except (ValueError, ConfmotifError) as exc:
            _warn(f"skipping {path.stem}: {exc}")
            continue
        kept = mw_filter(mols, window)
        (out / path.name).write_bytes(write_sdf(kept))
        rows.append(
            f"{path.stem}\t{window.mu:.4f}\t{window.sigma:.4f}\t{window.lower:.4f}\t{window.upper:.4f}\t{len(kept)}\t{len(mols)}"
        )
    (out / "ranges.tsv").write_text("\n".join(rows) + "\n")
    print(f"pockets\t{len(rows) - 2}")
    return EXIT_OK


def cmd_dock_prep(args) -> int:
    gen, ff = _load_sdf(args.gen), _load_sdf(args.ff)
    sdf_path, manifest = prepare_docking_inputs(gen, ff, args.output, args.seed, args.workers)
    print(f"structures\t{sdf_path}")
    print(f"manifest\t{manifest}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confmotif", description="Conformal motif extraction, assembly and evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract-vocab", help="build a motif vocabulary from an SDF corpus")
    p.add_argument("sdf")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--min-freq", type=int, default=1)
    p.set_defaults(func=cmd_extract_vocab)

    p = sub.add_parser("fragment", help="list the motifs of every molecule")
    p.add_argument("sdf")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fragment)

    p = sub.add_parser("assemble", help="generate ligands inside a pocket")
    p.add_argument("--pocket", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--policy", choices=sorted(POLICIES), default="random")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-steps", type=int, default=20)
    p.add_argument("--mw-cap", type=float)
    p.add_argument("--n-samples", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("trajectories", help="export masked training steps for known ligands")
    p.add_argument("sdf")
    p.add_argument("--pocket", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n-samples", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("eval", help="distance/angle JSDs and conformer RMSD")
    p.add_argument("--gen", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--ff")
    p.add_argument("-o", "--output", required=True, help="report path prefix (.tsv and .json are written)")
    p.add_argument("--bins-distance", type=float, default=0.25)
    p.add_argument("--bins-angle", type=float, default=2.5)
    p.add_argument("--patterns", default=",".join(DEFAULT_PATTERNS))
    p.add_argument("--sigma", choices=("population", "sample"), default="population")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1, help="processes for conformer matching")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mw-filter", help="per-pocket molecular-weight windows")
    p.add_argument("directory")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sigma", choices=("population", "sample"), default="population")
    p.set_defaults(func=cmd_mw_filter)

    p = sub.add_parser("dock-prep", help="torsion-matched conformers for external docking")
    p.add_argument("--gen", required=True)
    p.add_argument("--ff", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1, help="processes for conformer matching")
    p.set_defaults(func=cmd_dock_prep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfmotifError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
