import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from confmotif.assemble import build_trajectories, generate, write_trajectories
from confmotif.cli import EXIT_INPUT, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from confmotif.metrics import EvalConfig, evaluate, mw_range
from confmotif.molgraph import molecular_weight, parse_pocket_pdb, parse_sdf, write_sdf
from confmotif.motif import extract_vocabulary
from confmotif.vocabfile import read_vocabulary, write_vocabulary

from conftest import DATA, benzene


@pytest.fixture()
def vocab_file(tmp_path):
    path = tmp_path / "vocab.txt"
    assert main(["extract-vocab", str(DATA / "corpus.sdf"), "-o", str(path)]) == EXIT_OK
    return path


def test_extract_vocab_parity(tmp_path, capsys, corpus):
    path = tmp_path / "v.txt"
    assert main(["extract-vocab", str(DATA / "corpus.sdf"), "-o", str(path), "--min-freq", "2"]) == EXIT_OK
    lib = extract_vocabulary(corpus, 2)
    assert path.read_text() == write_vocabulary(lib)
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert int(out["motifs"]) == len(lib) and int(out["molecules"]) == len(corpus)
    assert int(out["ring_like"]) + int(out["chain_like"]) == len(lib)

    single = tmp_path / "benzene.sdf"
    single.write_bytes(write_sdf([benzene()]))
    assert main(["extract-vocab", str(single), "-o", str(path)]) == EXIT_OK
    assert len(read_vocabulary(path.read_text())) == 1


def test_input_errors(tmp_path, capsys):
    assert main(["extract-vocab", str(tmp_path / "missing.sdf"), "-o", str(tmp_path / "v")]) == EXIT_INPUT
    assert "missing.sdf" in capsys.readouterr().err
    bad = tmp_path / "bad.sdf"
    bad.write_text("x\n\n\n  2  1  0  0  0  0            999 V2000\nnot an atom line\n")
    assert main(["extract-vocab", str(bad), "-o", str(tmp_path / "v")]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "record 1" in err or "line" in err


def test_usage_errors(capsys):
    assert main(["assemble", "--no-such-flag"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["assemble", "--pocket", "p", "--vocab", "v", "-o", "o", "--policy", "magic"]) == EXIT_USAGE
    capsys.readouterr()


def test_fragment_listing(tmp_path, corpus):
    out = tmp_path / "frags.tsv"
    assert main(["fragment", str(DATA / "corpus.sdf"), "-o", str(out)]) == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0].startswith("record\tname")
    from confmotif.motif import fragment

    assert len(rows) - 1 == sum(len(fragment(m).fragments) for m in corpus)


def test_assemble_parity_and_determinism(tmp_path, vocab_file, capsys):
    pocket_path = DATA / "pocket.pdb"
    args = ["assemble", "--pocket", str(pocket_path), "--vocab", str(vocab_file), "--seed", "7", "--n-samples", "5", "--max-steps", "6"]
    a, b = tmp_path / "a.sdf", tmp_path / "b.sdf"
    assert main(args + ["-o", str(a)]) == EXIT_OK
    assert main(args + ["-o", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    pocket = parse_pocket_pdb(pocket_path.read_bytes())
    mols, _ = generate(pocket, read_vocabulary(vocab_file.read_text()), "random", 7, 5, 6, None)
    assert a.read_bytes() == write_sdf(mols)
    fp = [line for line in capsys.readouterr().out.splitlines() if line.startswith("fingerprint")]
    assert len(fp) == 2 and fp[0] != fp[1]  # outputs differ, so do the fingerprints

    empty = tmp_path / "empty.sdf"
    assert main(["assemble", "--pocket", str(pocket_path), "--vocab", str(vocab_file), "--n-samples", "0", "-o", str(empty)]) == EXIT_OK
    assert parse_sdf(empty.read_bytes()) == []


def test_assemble_hundred_samples(tmp_path, vocab_file):
    out = tmp_path / "gen.sdf"
    code = main(["assemble", "--pocket", str(DATA / "pocket.pdb"), "--vocab", str(vocab_file), "--n-samples", "100",
                 "--max-steps", "6", "--seed", "1", "-o", str(out)])
    assert code == EXIT_OK
    assert len(parse_sdf(out.read_bytes())) == 100


def test_assemble_bad_vocab(tmp_path):
    bad = tmp_path / "v.txt"
    bad.write_text("MOTIFVOCAB v1 1\nMOTIF zz\n")
    code = main(["assemble", "--pocket", str(DATA / "pocket.pdb"), "--vocab", str(bad), "-o", str(tmp_path / "o.sdf")])
    assert code == EXIT_INPUT


def test_trajectories_parity(tmp_path, corpus, pocket):
    out = tmp_path / "t.jsonl"
    assert main(["trajectories", str(DATA / "corpus.sdf"), "--pocket", str(DATA / "pocket.pdb"), "--seed", "2", "--n-samples", "2", "-o", str(out)]) == EXIT_OK
    steps = [s for r, m in enumerate(corpus) for s in build_trajectories(m, pocket, 2 + r, 2)]
    assert out.read_text() == write_trajectories(steps)


def test_eval_parity(tmp_path, corpus, corpus_alt, corpus_ff):
    prefix = tmp_path / "rep" / "r"
    args = ["eval", "--gen", str(DATA / "corpus.sdf"), "--ref", str(DATA / "corpus_alt.sdf"), "--ff", str(DATA / "corpus_ff.sdf"),
            "-o", str(prefix), "--bins-distance", "0.5", "--seed", "4"]
    assert main(args) == EXIT_OK
    lib = evaluate(corpus, corpus_alt, corpus_ff, EvalConfig(distance_bin=0.5, seed=4))
    assert Path(f"{prefix}.tsv").read_text() == lib.to_tsv()
    assert Path(f"{prefix}.json").read_text() == lib.to_json()
    cfg = json.loads(Path(f"{prefix}.json").read_text())["config"]
    assert cfg["distance_bin"] == 0.5 and cfg["fingerprint"]

    # spreading conformer matching over processes changes nothing in the output
    parallel = tmp_path / "par" / "r"
    assert main([*args[:-6], "-o", str(parallel), *args[-4:], "--workers", "2"]) == EXIT_OK
    assert Path(f"{parallel}.json").read_text() == Path(f"{prefix}.json").read_text()


def test_eval_self_and_mismatch(tmp_path, capsys):
    prefix = tmp_path / "self"
    assert main(["eval", "--gen", str(DATA / "corpus.sdf"), "--ref", str(DATA / "corpus.sdf"), "-o", str(prefix)]) == EXIT_OK
    report = json.loads(Path(f"{prefix}.json").read_text())
    assert all(v == 0.0 for v in report["distance_jsd_ref"].values())
    assert all(v in (0.0, None) for v in report["angle_jsd_ref"].values())

    short = tmp_path / "short.sdf"
    short.write_bytes((DATA / "corpus.sdf").read_bytes().split(b"$$$$")[0] + b"$$$$\n")
    code = main(["eval", "--gen", str(DATA / "corpus.sdf"), "--ref", str(DATA / "corpus.sdf"), "--ff", str(short), "-o", str(prefix)])
    assert code == EXIT_RUNTIME
    assert "does not match" in capsys.readouterr().err


def _pocket_dir(tmp_path, corpus):
    d = tmp_path / "pockets"
    d.mkdir()
    (d / "p1.sdf").write_bytes(write_sdf(corpus[:20]))
    (d / "p2.sdf").write_bytes(write_sdf(corpus[20:23]))  # too few
    (d / "p3.sdf").write_bytes(write_sdf([benzene()] * 6))  # identical weights
    return d


def test_mw_filter_parity(tmp_path, corpus, capsys):
    src = _pocket_dir(tmp_path, corpus)
    out = tmp_path / "out"
    assert main(["mw-filter", str(src), "-o", str(out)]) == EXIT_OK
    err = capsys.readouterr().err
    assert "p2" in err and "p3" in err and "degenerate" in err
    rows = (out / "ranges.tsv").read_text().splitlines()
    assert rows[0].startswith("# fingerprint") and rows[1].startswith("pocket\tmu")
    assert len(rows) == 3
    fields = rows[2].split("\t")
    r = mw_range("p1", [molecular_weight(m) for m in corpus[:20]])
    assert fields[0] == "p1"
    assert np.allclose([float(x) for x in fields[1:5]], [r.mu, r.sigma, r.lower, r.upper], atol=1e-4)
    kept = parse_sdf((out / "p1.sdf").read_bytes())
    assert int(fields[5]) == len(kept) and int(fields[6]) == 20


def test_mw_filter_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["mw-filter", str(tmp_path / "empty"), "-o", str(tmp_path / "out")]) == EXIT_OK
    assert len((tmp_path / "out" / "ranges.tsv").read_text().splitlines()) == 2
    assert main(["mw-filter", str(tmp_path / "nope"), "-o", str(tmp_path / "out")]) == EXIT_INPUT


def test_dock_prep(tmp_path, corpus):
    out = tmp_path / "dock"
    assert main(["dock-prep", "--gen", str(DATA / "corpus.sdf"), "--ff", str(DATA / "corpus_ff.sdf"), "-o", str(out)]) == EXIT_OK
    assert len(parse_sdf((out / "matched.sdf").read_bytes())) == len(corpus)
    assert len((out / "manifest.tsv").read_text().splitlines()) == len(corpus) + 1


def test_console_script_installed():
    exe = shutil.which("confmotif")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("confmotif")
