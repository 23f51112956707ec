import json

import pytest

from rankhist.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main
from rankhist.distances import DistanceKind
from rankhist.study import generate_deck, synthetic_labels


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def rank_csv(tmp_path):
    path = tmp_path / "ranks.csv"
    path.write_text("rank\n" + "\n".join(str(1 + i % 3) for i in range(30)) + "\n")
    return str(path)


class TestTransform:
    def test_json_output(self, capsys, rank_csv):
        code, out, _ = run(
            capsys, "transform", "--ranks", rank_csv, "--ensemble-size", "2",
            "--bins", "3", "--seed", "1",
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["k"] == 3 and payload["n"] == 30
        assert sum(payload["counts"]) == 30

    def test_byte_identical_reruns(self, capsys, rank_csv):
        args = ("transform", "--ranks", rank_csv, "--ensemble-size", "2", "--bins", "2", "--seed", "9")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_csv_format(self, capsys, rank_csv):
        code, out, _ = run(
            capsys, "transform", "--ranks", rank_csv, "--ensemble-size", "2",
            "--bins", "3", "--format", "csv",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "bin,count,height"
        assert len(lines) == 4


class TestDistance:
    def test_flat_histogram_zero(self, capsys, tmp_path):
        hist = tmp_path / "h.json"
        hist.write_text(json.dumps({"k": 4, "heights": [1, 1, 1, 1]}))
        code, out, _ = run(capsys, "distance", "--histogram", str(hist), "--kind", "l2")
        assert code == EXIT_OK
        assert json.loads(out) == {"distance": 0.0, "kind": "l2"}

    def test_heights_only_payload(self, capsys, tmp_path):
        hist = tmp_path / "h.json"
        hist.write_text(json.dumps({"heights": [1.5, 0.5]}))
        code, out, _ = run(capsys, "distance", "--histogram", str(hist), "--kind", "l1")
        assert code == EXIT_OK
        assert json.loads(out)["distance"] == pytest.approx(0.5)

    def test_missing_file_is_domain_error(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "distance", "--histogram", str(tmp_path / "gone.json"), "--kind", "l1"
        )
        assert code == EXIT_DOMAIN
        assert "error" in json.loads(err)


class TestThreshold:
    def test_exact_two_by_two(self, capsys):
        code, out, _ = run(
            capsys, "threshold", "--kind", "l2", "--alpha", "0.05", "--bins", "2",
            "--n", "2", "--mc-samples", "50000",
        )
        assert code == EXIT_OK
        assert json.loads(out)["c"] == 1.0

    def test_cache_file(self, capsys, tmp_path):
        cache = tmp_path / "cache.json"
        args = (
            "threshold", "--kind", "l1", "--alpha", "0.2", "--bins", "3", "--n", "5",
            "--mc-samples", "20000", "--cache", str(cache),
        )
        _, first, _ = run(capsys, *args)
        assert cache.exists()
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_bad_alpha_domain_error(self, capsys):
        code, _, err = run(
            capsys, "threshold", "--kind", "l2", "--alpha", "1.5", "--bins", "2",
            "--n", "2", "--mc-samples", "1000",
        )
        assert code == EXIT_DOMAIN
        assert "alpha" in json.loads(err)["error"]


class TestOptimalK:
    def test_reports_table(self, capsys):
        code, out, _ = run(
            capsys, "optimal-k", "--kind", "l2", "--alpha", "0.1", "--n", "40",
            "--c-target", "0.1", "--mc-samples", "30000",
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert len(payload["per_k"]) == 11
        assert 2 <= payload["k_opt"] <= 12

    def test_csv_rows(self, capsys):
        code, out, _ = run(
            capsys, "optimal-k", "--kind", "l2", "--alpha", "0.1", "--n", "40",
            "--c-target", "0.1", "--k-min", "2", "--k-max", "4",
            "--mc-samples", "20000", "--format", "csv",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "k,c,gap,k_opt"
        assert len(lines) == 4

    def test_reference_cell(self, capsys):
        # five bins for a hundred observations at the 5% level
        code, out, _ = run(
            capsys, "optimal-k", "--kind", "l2", "--alpha", "0.05", "--n", "100",
            "--c-target", "0.1", "--mc-samples", "200000",
        )
        assert code == EXIT_OK
        assert json.loads(out)["k_opt"] == 5


class TestPower:
    def test_power_row(self, capsys):
        code, out, _ = run(
            capsys, "power", "--alternative", "ushaped", "--kind", "l2", "--c", "0.1",
            "--bins", "8", "--n", "100", "--reps", "2000", "--format", "csv",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "alternative,kind,c,k,n,rejection_prob,replications"
        assert lines[1].startswith("ushaped,l2,0.1,8,100,")


class TestStudyCommands:
    def test_new_then_analyze(self, capsys, tmp_path):
        deck_path = tmp_path / "deck.json"
        code, out, _ = run(
            capsys, "study", "new", "--out", str(deck_path), "--per-category", "1", "--seed", "4"
        )
        assert code == EXIT_OK
        assert json.loads(out)["items"] == 40

        from rankhist.study import StudyDeck, append_label

        deck = StudyDeck.load(deck_path)
        labels_path = tmp_path / "labels.jsonl"
        for record in synthetic_labels(deck, DistanceKind.L2, 0.1):
            append_label(labels_path, record)

        code, out, _ = run(
            capsys, "study", "analyze", "--deck", str(deck_path), "--labels", str(labels_path)
        )
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["n_labels"] == 40
        assert report["thresholds"]["l2"]["c_acc"] == pytest.approx(0.1)

    def test_analyze_to_file(self, capsys, tmp_path):
        deck_path = tmp_path / "deck.json"
        generate_deck(categories=[(5, 0.3)], per_category=2, shuffle_seed=0).save(deck_path)
        from rankhist.study import StudyDeck, append_label

        labels_path = tmp_path / "labels.jsonl"
        for record in synthetic_labels(StudyDeck.load(deck_path), DistanceKind.L1, 0.25):
            append_label(labels_path, record)
        report_path = tmp_path / "report.json"
        code, out, _ = run(
            capsys, "study", "analyze", "--deck", str(deck_path),
            "--labels", str(labels_path), "--out", str(report_path),
        )
        assert code == EXIT_OK
        assert report_path.exists()
        assert json.loads(report_path.read_text())["n_labels"] == 2

    def test_empty_labels_domain_error(self, capsys, tmp_path):
        deck_path = tmp_path / "deck.json"
        generate_deck(categories=[(5, 0.3)], per_category=1, shuffle_seed=0).save(deck_path)
        labels_path = tmp_path / "labels.jsonl"
        labels_path.write_text("")
        code, _, err = run(
            capsys, "study", "analyze", "--deck", str(deck_path), "--labels", str(labels_path)
        )
        assert code == EXIT_DOMAIN


class TestServeDefaults:
    def test_data_dir_from_environment(self, monkeypatch, tmp_path):
        from rankhist.cli import build_parser

        monkeypatch.setenv("RANKHIST_DATA_DIR", str(tmp_path))
        args = build_parser().parse_args(["study", "serve"])
        assert args.data_dir == str(tmp_path)

    def test_data_dir_required_without_environment(self, capsys, monkeypatch):
        monkeypatch.delenv("RANKHIST_DATA_DIR", raising=False)
        code, _, _ = run(capsys, "study", "serve")
        assert code == EXIT_USAGE


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "no-such-command")
        assert code == EXIT_USAGE

    def test_missing_required_flag(self, capsys):
        code, _, _ = run(capsys, "threshold", "--kind", "l2")
        assert code == EXIT_USAGE

    def test_bad_choice(self, capsys):
        code, _, _ = run(capsys, "distance", "--histogram", "x.json", "--kind", "cosine")
        assert code == EXIT_USAGE
