"""CLI surface: subcommands, outputs, exit codes, seed plumbing."""

import math

import numpy as np
import pytest

from cosmic.cli import main
from cosmic.core import EmbeddingMatrix
from cosmic.io import Manifest, write_cemb, write_manifest
from cosmic.knife import KnifeConfig
from cosmic.knife.serialize import save_model
from cosmic.knife.training import fit_marginal

EST = ["--epochs", "10", "--patience", "3"]


def write_matrix(path, values, ids=None):
    values = np.asarray(values, dtype=np.float64)
    if ids is None:
        ids = tuple(f"doc{i}" for i in range(values.shape[0]))
    write_cemb(EmbeddingMatrix(values=values, ids=tuple(ids)), str(path))


@pytest.fixture()
def score_files(tmp_path):
    rng = np.random.default_rng(70)
    n, d = 200, 2
    z = rng.normal(size=(n, d))
    s = 0.8 * z + 0.6 * rng.normal(size=(n, d))
    src = tmp_path / "src.cemb"
    summ = tmp_path / "sum.cemb"
    write_matrix(src, z)
    write_matrix(summ, s)
    return str(src), str(summ)


class TestScore:
    def test_writes_report_and_csv(self, tmp_path, score_files):
        src, summ = score_files
        report = tmp_path / "report.txt"
        csv = tmp_path / "report.csv"
        code = main(
            ["score", src, summ, "--report", str(report), "--csv", str(csv),
             "--summarizer-name", "m1", *EST]
        )
        assert code == 0
        text = report.read_text()
        assert "[score]" in text
        assert "summarizer_name: m1" in text
        assert "mi: " in text
        lines = csv.read_text().strip().split("\n")
        assert len(lines) == 2
        assert lines[0].startswith("summarizer,")

    def test_stdout_default(self, capsys, score_files):
        src, summ = score_files
        assert main(["score", src, summ, *EST]) == 0
        out = capsys.readouterr().out
        assert "cosmic-report-version: 1" in out

    def test_rerun_byte_identical(self, tmp_path, score_files):
        src, summ = score_files
        r1 = tmp_path / "r1.txt"
        r2 = tmp_path / "r2.txt"
        main(["score", src, summ, "--report", str(r1), *EST])
        main(["score", src, summ, "--report", str(r2), *EST])
        assert r1.read_bytes() == r2.read_bytes()

    def test_seed_changes_estimate(self, tmp_path, score_files):
        src, summ = score_files
        r1 = tmp_path / "r1.txt"
        r2 = tmp_path / "r2.txt"
        main(["score", src, summ, "--report", str(r1), "--seed", "0", *EST])
        main(["score", src, summ, "--report", str(r2), "--seed", "1", *EST])
        grab = lambda p: [l for l in p.read_text().splitlines() if l.startswith("mi: ")]
        assert grab(r1) != grab(r2)

    def test_env_seed_matches_flag(self, tmp_path, score_files, monkeypatch):
        src, summ = score_files
        r1 = tmp_path / "r1.txt"
        r2 = tmp_path / "r2.txt"
        monkeypatch.setenv("COSMIC_SEED", "5")
        main(["score", src, summ, "--report", str(r1), *EST])
        monkeypatch.delenv("COSMIC_SEED")
        main(["score", src, summ, "--report", str(r2), "--seed", "5", *EST])
        assert r1.read_bytes() == r2.read_bytes()

    def test_bad_env_seed(self, score_files, monkeypatch, capsys):
        src, summ = score_files
        monkeypatch.setenv("COSMIC_SEED", "soup")
        assert main(["score", src, summ, *EST]) == 2
        assert "COSMIC_SEED" in capsys.readouterr().err

    def test_bits_flag(self, tmp_path, score_files):
        src, summ = score_files
        nats = tmp_path / "n.txt"
        bits = tmp_path / "b.txt"
        main(["score", src, summ, "--report", str(nats), *EST])
        main(["score", src, summ, "--report", str(bits), "--bits", *EST])
        assert "units: bits" in bits.read_text()

        def grab(p, key):
            for line in p.read_text().splitlines():
                if line.startswith(key + ": "):
                    return float(line.split(": ")[1])

        assert grab(bits, "mi") == pytest.approx(grab(nats, "mi") / math.log(2.0))

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["score", str(tmp_path / "a.cemb"), str(tmp_path / "b.cemb")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_mismatched_ids_exit_2(self, tmp_path, score_files, capsys):
        src, _ = score_files
        other = tmp_path / "other.cemb"
        write_matrix(other, np.ones((3, 2)), ids=("x1", "x2", "x3"))
        assert main(["score", src, str(other), *EST]) == 2

    def test_bad_config_exits_2(self, score_files):
        src, summ = score_files
        assert main(["score", src, summ, "--modes", "0"]) == 2


class TestBounds:
    def test_point_output(self, capsys):
        assert main(["bounds", "--mi", "0.7", "--m", "4"]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(": ") for line in out.strip().split("\n"))
        assert float(values["lower"]) == pytest.approx(0.186615, abs=1e-5)
        assert float(values["upper"]) == pytest.approx(
            1.0 - math.exp(-(math.log(4) - 0.7)), abs=1e-12
        )
        assert float(values["entropy"]) == pytest.approx(math.log(4), abs=1e-15)
        assert float(values["kappa"]) == pytest.approx(0.25, abs=1e-12)

    def test_explicit_entropy(self, capsys):
        assert main(["bounds", "--mi", "0.2", "--m", "3", "--entropy", "0.9"]) == 0
        values = dict(
            line.split(": ") for line in capsys.readouterr().out.strip().split("\n")
        )
        assert float(values["entropy"]) == 0.9

    def test_negative_mi_exits_2(self, capsys):
        assert main(["bounds", "--mi", "-1", "--m", "4"]) == 2
        assert "OutOfRange" in capsys.readouterr().err

    def test_missing_args_exit_2(self):
        assert main(["bounds", "--mi", "0.5"]) == 2

    def test_sweep(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["bounds", "--sweep", "--m-list", "2,4", "--points", "50", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "m,mi,lower,upper"
        assert len(lines) == 1 + 2 * 50
        first = lines[1].split(",")
        assert first[0] == "2"
        assert float(first[1]) == 0.0
        assert float(first[2]) == pytest.approx(0.5, abs=1e-12)  # rd_inverse(2, 0)

    def test_sweep_bounds_ordering(self, tmp_path):
        out = tmp_path / "sweep.csv"
        main(["bounds", "--sweep", "--m-list", "3", "--points", "80", "--out", str(out)])
        rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
        for _, _, lower, upper in rows:
            assert float(lower) <= float(upper) + 1e-12

    def test_bad_m_list(self, capsys):
        assert main(["bounds", "--sweep", "--m-list", "2,snake"]) == 2


class TestVerifyBounds:
    def test_all_pass(self, capsys):
        assert main(["verify-bounds", "--trials", "200", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "200/200 pass" in out
        assert "worst_lower_slack:" in out
        assert "worst_upper_slack:" in out

    def test_deterministic(self, capsys):
        main(["verify-bounds", "--trials", "50", "--seed", "3"])
        first = capsys.readouterr().out
        main(["verify-bounds", "--trials", "50", "--seed", "3"])
        assert capsys.readouterr().out == first

    def test_bad_trials(self, capsys):
        assert main(["verify-bounds", "--trials", "0"]) == 2

    def test_class_range(self, capsys):
        assert main(
            ["verify-bounds", "--trials", "50", "--seed", "2",
             "--min-classes", "3", "--max-classes", "4"]
        ) == 0
        assert "50/50 pass" in capsys.readouterr().out


def make_manifest(tmp_path, name, values, ids):
    stem = tmp_path / name
    write_matrix(stem.with_suffix(".cemb"), values, ids)
    manifest = Manifest(
        dataset_name="toy",
        embedder_name="emb",
        summarizer_name=name,
        embedding_file=f"{name}.cemb",
        ids_file=f"{name}.cemb.ids",
    )
    path = stem.with_suffix(".manifest")
    write_manifest(manifest, str(path))
    return str(path)


@pytest.fixture()
def manifests(tmp_path):
    rng = np.random.default_rng(71)
    n, d = 120, 2
    ids = tuple(f"doc{i}" for i in range(n))
    z = rng.normal(size=(n, d))
    return [
        make_manifest(tmp_path, "alpha", z + 0.3 * rng.normal(size=(n, d)), ids),
        make_manifest(tmp_path, "beta", z + 0.5 * rng.normal(size=(n, d)), ids),
        make_manifest(tmp_path, "gamma", rng.normal(size=(n, d)), ids),
    ]


class TestHierarchy:
    def test_dot_and_csv(self, tmp_path, manifests):
        dot = tmp_path / "h.dot"
        csv = tmp_path / "h.csv"
        code = main(
            ["hierarchy", *manifests, "--dot", str(dot), "--csv", str(csv),
             "--jobs", "1", *EST]
        )
        assert code == 0
        dot_text = dot.read_text()
        assert dot_text.count("avg_outgoing=") == 3
        assert dot_text.count("->") == 6
        lines = csv.read_text().strip().split("\n")
        assert lines[0] == "name,alpha,beta,gamma"
        assert len(lines) == 4

    def test_stdout_dot_when_no_outputs(self, capsys, manifests):
        assert main(["hierarchy", *manifests, "--jobs", "1", *EST]) == 0
        assert capsys.readouterr().out.startswith("digraph hierarchy {")

    def test_jobs_invariance(self, tmp_path, manifests):
        c1 = tmp_path / "h1.csv"
        c2 = tmp_path / "h2.csv"
        main(["hierarchy", *manifests, "--csv", str(c1), "--jobs", "1", *EST])
        main(["hierarchy", *manifests, "--csv", str(c2), "--jobs", "2", *EST])
        assert c1.read_bytes() == c2.read_bytes()

    def test_threshold_trims_edges(self, tmp_path, manifests):
        dot = tmp_path / "h.dot"
        main(["hierarchy", *manifests, "--dot", str(dot), "--jobs", "1",
              "--threshold", "1e9", *EST])
        assert dot.read_text().count("->") == 0

    def test_single_manifest_exits_2(self, manifests, capsys):
        assert main(["hierarchy", manifests[0], "--jobs", "1", *EST]) == 2
        assert "TooFewModels" in capsys.readouterr().err


class TestCorrelate:
    def write_scores(self, path, rows):
        path.write_text("".join(f"{k},{v}\n" for k, v in rows))
        return str(path)

    def test_text_and_csv(self, tmp_path, capsys):
        metric = self.write_scores(
            tmp_path / "m.csv", [("s1", 0.9), ("s2", 0.7), ("s3", 0.4)]
        )
        target = self.write_scores(
            tmp_path / "t.csv", [("s1", 3.0), ("s2", 2.0), ("s3", 1.0)]
        )
        csv = tmp_path / "out.csv"
        code = main(
            ["correlate", "--metric", f"cosmic={metric}", "--target", f"human={target}",
             "--csv", str(csv)]
        )
        assert code == 0
        lines = csv.read_text().strip().split("\n")
        assert lines[0] == "metric,target,spearman,kendall_tau_b,n"
        assert lines[1] == "cosmic,human,1.0,1.0,3"

    def test_stdout_table(self, tmp_path, capsys):
        metric = self.write_scores(
            tmp_path / "m.csv", [("s1", 0.9), ("s2", 0.7), ("s3", 0.4)]
        )
        target = self.write_scores(
            tmp_path / "t.csv", [("s1", 1.0), ("s2", 2.0), ("s3", 3.0)]
        )
        assert main(
            ["correlate", "--metric", f"a={metric}", "--target", f"b={target}"]
        ) == 0
        out = capsys.readouterr().out
        assert "rho=-1.0000" in out

    def test_bad_entry_format(self, tmp_path, capsys):
        target = self.write_scores(tmp_path / "t.csv", [("s1", 1.0)])
        assert main(["correlate", "--metric", "nopath", "--target", f"b={target}"]) == 2

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit):
            main(["correlate", "--metric", "a=b"])


class TestAgreement:
    def test_output(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("d1,pos\nd2,neg\nd3,pos\nd4,pos\n")
        b.write_text("d1,pos\nd2,pos\nd3,pos\nd4,neg\n")
        assert main(["agreement", str(a), str(b)]) == 0
        out = capsys.readouterr().out
        assert "n_common: 4" in out
        assert "error_rate: 0.5" in out

    def test_identical_files(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        a.write_text("d1,x\nd2,y\n")
        assert main(["agreement", str(a), str(a)]) == 0
        assert "error_rate: 0.0" in capsys.readouterr().out

    def test_no_common_ids_exits_2(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("d1,x\n")
        b.write_text("d2,x\n")
        assert main(["agreement", str(a), str(b)]) == 2


class TestValidate:
    def test_cemb(self, tmp_path, capsys):
        path = tmp_path / "m.cemb"
        write_matrix(path, np.ones((4, 3)))
        assert main(["validate", str(path)]) == 0
        assert "OK cemb n_rows=4 dim=3" in capsys.readouterr().out

    def test_model(self, tmp_path, capsys):
        rng = np.random.default_rng(72)
        data = EmbeddingMatrix(
            values=rng.normal(size=(100, 2)), ids=tuple(map(str, range(100)))
        )
        model = fit_marginal(data, KnifeConfig(epochs=3, patience=2))
        path = tmp_path / "m.cknf"
        save_model(model, str(path))
        assert main(["validate", str(path)]) == 0
        assert "OK model kind=MarginalKnife" in capsys.readouterr().out

    def test_manifest(self, tmp_path, capsys):
        rng = np.random.default_rng(73)
        ids = tuple(f"d{i}" for i in range(5))
        manifest = make_manifest(tmp_path, "demo", rng.normal(size=(5, 2)), ids)
        assert main(["validate", manifest]) == 0
        assert "OK manifest summarizer=demo" in capsys.readouterr().out

    def test_scores_and_labels(self, tmp_path, capsys):
        scores = tmp_path / "s.csv"
        scores.write_text("d1,0.5\nd2,0.7\n")
        labels = tmp_path / "l.csv"
        labels.write_text("d1,pos\nd2,neg\n")
        assert main(["validate", str(scores), str(labels)]) == 0
        out = capsys.readouterr().out
        assert "OK scores n=2" in out
        assert "OK labels n=2 vocabulary=neg,pos" in out

    def test_corrupt_cemb_exits_2(self, tmp_path, capsys):
        path = tmp_path / "m.cemb"
        write_matrix(path, np.ones((4, 3)))
        blob = path.read_bytes()
        path.write_bytes(blob[:-5])
        assert main(["validate", str(path)]) == 2
        assert "TruncatedPayload" in capsys.readouterr().err

    def test_multiple_paths_first_bad_stops(self, tmp_path, capsys):
        good = tmp_path / "g.csv"
        good.write_text("d1,0.5\n")
        missing = tmp_path / "missing.cemb"
        assert main(["validate", str(good), str(missing)]) == 2


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip() == "cosmic 0.1.0"

    def test_no_command(self):
        with pytest.raises(SystemExit):
            main([])

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["transmogrify"])
