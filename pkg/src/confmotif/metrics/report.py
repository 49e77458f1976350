"""Metric suite evaluation, report serialization and docking-input preparation."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import GraphMismatchError
from ..molgraph import Molecule, write_sdf
from .conformer import ConformerMatch, DEConfig, conformer_match, same_graph
from .histograms import (
    ALL_ATOM,
    ANGLE_BIN,
    CARBON_CARBON,
    DEFAULT_PATTERNS,
    DISTANCE_BIN,
    DISTANCE_MAX,
    angle_hist,
    distance_hist,
    parse_pattern,
    jsd,
)


@dataclass(frozen=True)
class EvalConfig:
    distance_bin: float = DISTANCE_BIN
    angle_bin: float = ANGLE_BIN
    patterns: tuple[str, ...] = DEFAULT_PATTERNS
    sigma: str = "population"
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "distance_bin": self.distance_bin,
            "distance_max": DISTANCE_MAX,
            "angle_bin": self.angle_bin,
            "patterns": list(self.patterns),
            "sigma": self.sigma,
            "seed": self.seed,
            "jsd_log_base": "e",
        }

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.as_dict(), sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class MetricReport:
    """JSD tables, conformer RMSD summary and set sizes.

    A JSD entry is ``None`` when either side has no samples for it.
    """

    config: dict
    distance_jsd_ref: dict[str, float | None]
    angle_jsd_ref: dict[str, float | None]
    distance_jsd_ff: dict[str, float | None] | None = None
    angle_jsd_ff: dict[str, float | None] | None = None
    conformer_rmsd: dict[str, float] | None = None
    conformer_rmsds: tuple[float, ...] = ()
    counts: dict[str, int] = field(default_factory=dict)
    external_scores: dict[str, dict[str, float]] | None = None

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "counts": self.counts,
            "distance_jsd_ref": self.distance_jsd_ref,
            "angle_jsd_ref": self.angle_jsd_ref,
            "distance_jsd_ff": self.distance_jsd_ff,
            "angle_jsd_ff": self.angle_jsd_ff,
            "conformer_rmsd": self.conformer_rmsd,
            "conformer_rmsds": list(self.conformer_rmsds),
            "external_scores": self.external_scores,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def to_tsv(self) -> str:
        lines = [f"# config\t{json.dumps(self.config, sort_keys=True)}", "section\tmetric\tvalue"]

        def fmt(v) -> str:
            if v is None:
                return "nan"
            return str(v) if isinstance(v, int) else f"{v:.6f}"

        for name, value in sorted(self.counts.items()):
            lines.append(f"counts\t{name}\t{value}")
        for section in ("distance_jsd_ref", "angle_jsd_ref", "distance_jsd_ff", "angle_jsd_ff", "conformer_rmsd"):
            table = getattr(self, section)
            for name, value in (table or {}).items():
                lines.append(f"{section}\t{name}\t{fmt(value)}")
        for score, summary in sorted((self.external_scores or {}).items()):
            for name, value in summary.items():
                lines.append(f"external:{score}\t{name}\t{fmt(value)}")
        return "\n".join(lines) + "\n"


def _safe_jsd(p, q) -> float | None:
    if p.total <= 0 or q.total <= 0:
        return None
    return jsd(p, q)


def _jsd_tables(gen: Sequence[Molecule], other: Sequence[Molecule], cfg: EvalConfig):
    dist = {
        mode: _safe_jsd(distance_hist(gen, mode, cfg.distance_bin), distance_hist(other, mode, cfg.distance_bin))
        for mode in (ALL_ATOM, CARBON_CARBON)
    }
    angles = {
        pat: _safe_jsd(angle_hist(gen, pat, cfg.angle_bin), angle_hist(other, pat, cfg.angle_bin))
        for pat in cfg.patterns
    }
    return dist, angles


def summarize(values: Sequence[float]) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        return {"n": 0}
    q1, median, q3 = np.percentile(v, [25, 50, 75])
    return {
        "n": int(len(v)),
        "mean": float(v.mean()),
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(v.min()),
        "max": float(v.max()),
    }


def check_pairs(generated: Sequence[Molecule], ff_optimized: Sequence[Molecule]) -> None:
    offenders = []
    if len(generated) != len(ff_optimized):
        offenders.append(f"count {len(generated)} vs {len(ff_optimized)}")
    for i, (g, f) in enumerate(zip(generated, ff_optimized)):
        if not same_graph(g, f):
            offenders.append(f"record {i + 1} ({g.name or 'unnamed'})")
    if offenders:
        raise GraphMismatchError("force-field set does not match the generated set", offenders)


def match_all(
    generated: Sequence[Molecule], ff_optimized: Sequence[Molecule], seed: int = 0, workers: int = 1
) -> list[ConformerMatch]:
    """Conformer-match each pair. With ``workers > 1`` pairs are spread over
    processes; results keep input order and each pair's seed, so the output
    does not depend on the worker count."""
    check_pairs(generated, ff_optimized)
    configs = [DEConfig(seed=seed)] * len(generated)
    if workers <= 1 or len(generated) < 2:
        return list(map(conformer_match, generated, ff_optimized, configs))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(conformer_match, generated, ff_optimized, configs, chunksize=4))


def evaluate(
    generated: Sequence[Molecule],
    reference: Sequence[Molecule],
    ff_optimized: Sequence[Molecule] | None = None,
    config: EvalConfig = EvalConfig(),
    external_scores: Mapping[str, Sequence[float]] | None = None,
    workers: int = 1,
) -> MetricReport:
    """Compare generated structures with a reference set and, optionally,
    with their force-field optimized counterparts."""
    if not generated or not reference:
        raise ValueError("generated and reference sets must be nonempty")
    for pat in config.patterns:
        parse_pattern(pat)
    dist_ref, ang_ref = _jsd_tables(generated, reference, config)
    dist_ff = ang_ff = summary = None
    rmsds: tuple[float, ...] = ()
    counts = {"generated": len(generated), "reference": len(reference)}
    if ff_optimized is not None:
        matches = match_all(generated, ff_optimized, config.seed, workers)
        dist_ff, ang_ff = _jsd_tables(generated, ff_optimized, config)
        rmsds = tuple(m.conformer_rmsd for m in matches)
        summary = summarize(rmsds)
        counts["ff_optimized"] = len(ff_optimized)
    scores = None
    if external_scores:
        scores = {name: summarize(values) for name, values in sorted(external_scores.items())}
    cfg = dict(config.as_dict(), fingerprint=config.fingerprint())
    return MetricReport(cfg, dist_ref, ang_ref, dist_ff, ang_ff, summary, rmsds, counts, scores)


def prepare_docking_inputs(
    generated: Sequence[Molecule], ff_optimized: Sequence[Molecule], out_dir: str | Path, seed: int = 0, workers: int = 1
) -> tuple[Path, Path]:
    """Write torsion-matched force-field conformers, posed onto the generated
    ones, for external docking, plus a per-molecule manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matches = match_all(generated, ff_optimized, seed, workers)
    sdf_path = out / "matched.sdf"
    manifest_path = out / "manifest.tsv"
    sdf_path.write_bytes(write_sdf([m.matched for m in matches]))
    rows = ["index\tname\tn_rotatable\tconformer_rmsd\tbaseline_rmsd"]
    for i, m in enumerate(matches):
        rows.append(f"{i}\t{m.reference.name}\t{len(m.rotatable_bonds)}\t{m.conformer_rmsd:.6f}\t{m.baseline_rmsd:.6f}")
    manifest_path.write_text("\n".join(rows) + "\n")
    return sdf_path, manifest_path
