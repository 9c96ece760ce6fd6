import json

import pytest

from helpers import EXAMPLE_QUERY_FILES, write_example_corpus, write_tree
from oscn.cli import main


@pytest.fixture()
def fixture_dirs(tmp_path):
    return write_example_corpus(tmp_path)


def index_args(db_path, component_dirs, *extra):
    specs = [f"{name}={path}" for name, path in component_dirs.items()]
    return ["index", "--db", str(db_path), *specs, *extra]


@pytest.fixture()
def indexed_db(tmp_path, fixture_dirs):
    component_dirs, query_dir = fixture_dirs
    db_path = tmp_path / "eco.db"
    assert main(index_args(db_path, component_dirs, "--seed", "7")) == 0
    return db_path, query_dir


class TestIndex:
    def test_creates_database(self, indexed_db, capsys):
        db_path, _ = indexed_db
        assert db_path.exists()
        assert main(["inspect", "--db", str(db_path)]) == 0
        out = capsys.readouterr().out
        assert "components: 3" in out
        assert "X-1.0  3 files" in out
        assert "X-1.1  3 files" in out
        assert "Y-0.2  5 files" in out

    def test_duplicate_name_fails_that_component_only(self, indexed_db, fixture_dirs,
                                                      tmp_path, capsys):
        db_path, _ = indexed_db
        component_dirs, _ = fixture_dirs
        extra = write_tree(tmp_path / "extra", {"n.c": "int n;"})
        code = main(["index", "--db", str(db_path),
                     f"X-1.0={component_dirs['X-1.0']}", f"fresh={extra}"])
        captured = capsys.readouterr()
        assert code == 2
        assert "X-1.0" in captured.err
        assert main(["inspect", "--db", str(db_path)]) == 0
        assert "fresh  1 files" in capsys.readouterr().out

    def test_manifest_equivalent_to_args(self, tmp_path, fixture_dirs):
        component_dirs, _ = fixture_dirs
        via_args = tmp_path / "args.db"
        via_manifest = tmp_path / "manifest.db"
        assert main(index_args(via_args, component_dirs, "--seed", "3")) == 0
        manifest = tmp_path / "components.txt"
        manifest.write_text(
            "# fixture components\n"
            + "\n".join(f"{name}={path}" for name, path in component_dirs.items())
            + "\n")
        assert main(["index", "--db", str(via_manifest), "--manifest", str(manifest),
                     "--seed", "3"]) == 0
        assert via_args.read_bytes() == via_manifest.read_bytes()

    def test_existing_header_wins_over_flags(self, indexed_db, tmp_path, capsys):
        db_path, _ = indexed_db
        extra = write_tree(tmp_path / "extra2", {"m.c": "int m;"})
        code = main(["index", "--db", str(db_path), f"later={extra}",
                     "--k", "1024", "--seed", "999"])
        captured = capsys.readouterr()
        assert code == 0
        assert "header" in captured.err
        main(["inspect", "--db", str(db_path), "--format", "json"])
        info = json.loads(capsys.readouterr().out)
        assert info["k"] == 2048 and info["seed"] == 7

    def test_no_specs_is_usage_error(self, tmp_path):
        assert main(["index", "--db", str(tmp_path / "x.db")]) == 1

    def test_bad_spec_is_usage_error(self, tmp_path):
        assert main(["index", "--db", str(tmp_path / "x.db"), "nameonly"]) == 1


class TestQuery:
    def test_text_output(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        code = main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6"])
        out = capsys.readouterr().out
        assert code == 0
        assert "Y-0.2  (3.8 / 5)  5 files" in out
        assert "X-1.1  (2.7 / 5)  3 files" in out

    def test_json_output(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir),
                     "--th", "0.6", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [e["name"] for e in payload["filtered"]] == ["Y-0.2", "X-1.1"]
        assert [e["name"] for e in payload["full"]] == ["Y-0.2", "X-1.0", "X-1.1"]
        assert payload["params"]["th"] == 0.6
        assert payload["unmatched"] == ["S.c"]

    def test_tsv_output(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir),
                     "--th", "0.6", "--format", "tsv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split("\t")[0] == "Q"
        assert lines[-1].startswith("|C|\t")

    def test_same_scores_across_formats(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6",
              "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6",
              "--format", "tsv"])
        tsv = capsys.readouterr().out
        sq_row = next(l for l in tsv.splitlines() if l.startswith("S_Q(C)"))
        assert sq_row.split("\t")[1] == f"{payload['table']['scores'][0]:.3f}"

    def test_byte_identical_json_across_runs(self, indexed_db, tmp_path):
        db_path, query_dir = indexed_db
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for out in (out1, out2):
            assert main(["query", "--db", str(db_path), str(query_dir),
                         "--th", "0.6", "--format", "json", "--output", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_exclude_patterns(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6",
                     "--exclude", "Y-*", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert all(not e["name"].startswith("Y-") for e in payload["full"])
        assert payload["full"]  # X components still reported

    def test_th_one_finds_identical_clone_at_rank_one(self, indexed_db, tmp_path, capsys):
        db_path, _ = indexed_db
        clone = write_tree(tmp_path / "clone", {
            "P.c": EXAMPLE_QUERY_FILES["P.c"], "R.c": EXAMPLE_QUERY_FILES["R.c"]})
        assert main(["query", "--db", str(db_path), str(clone), "--th", "1.0",
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["full"][0]["name"] == "Y-0.2"
        assert payload["full"][0]["score"] == 2.0  # S_Q = |Q| for a full clone

    def test_query_files_flag(self, indexed_db, tmp_path, capsys):
        db_path, _ = indexed_db
        f = tmp_path / "single.c"
        f.write_text(EXAMPLE_QUERY_FILES["R.c"])
        assert main(["query", "--db", str(db_path), "--files", str(f),
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [e["name"] for e in payload["full"]] == ["Y-0.2"]

    def test_stats_flag(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir),
                     "--th", "0.6", "--stats"]) == 0
        err = capsys.readouterr().err
        assert "pairs considered:" in err
        assert "exact computed:" in err
        assert "elapsed:" in err

    def test_figures_written(self, indexed_db, tmp_path, capsys):
        db_path, query_dir = indexed_db
        figdir = tmp_path / "figs"
        assert main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6",
                     "--figures", str(figdir)]) == 0
        assert (figdir / "query_similarity_table.png").exists()
        assert (figdir / "query_component_scores.png").exists()
        assert "wrote figure" in capsys.readouterr().err

    def test_env_var_supplies_db(self, indexed_db, monkeypatch, capsys):
        db_path, query_dir = indexed_db
        monkeypatch.setenv("OSCN_DB", str(db_path))
        assert main(["query", str(query_dir), "--th", "0.6"]) == 0
        assert "Y-0.2" in capsys.readouterr().out

    def test_threads_flag(self, indexed_db, capsys):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir), "--th", "0.6",
                     "--threads", "4", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [e["name"] for e in payload["filtered"]] == ["Y-0.2", "X-1.1"]


class TestBaselineCommand:
    def test_exact_clone_found(self, indexed_db, tmp_path, capsys):
        db_path, _ = indexed_db
        clone = write_tree(tmp_path / "c", {"R.c": EXAMPLE_QUERY_FILES["R.c"]})
        assert main(["baseline", "--db", str(db_path), str(clone),
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["full"][0]["name"] == "Y-0.2"
        assert payload["full"][0]["score"] == 1.0
        assert payload["params"]["mode"] == "baseline"

    def test_whitespace_change_defeats_baseline(self, indexed_db, tmp_path, capsys):
        db_path, _ = indexed_db
        modified = EXAMPLE_QUERY_FILES["R.c"].replace(" ", "  ") + "// note\n"
        clone = write_tree(tmp_path / "ws", {"R.c": modified})
        assert main(["baseline", "--db", str(db_path), str(clone)]) == 0
        assert "No components found." in capsys.readouterr().out
        # the same query at th=1.0 still finds the origin
        assert main(["query", "--db", str(db_path), str(clone), "--th", "1.0",
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["full"][0]["name"] == "Y-0.2"


class TestInspect:
    def test_json_format(self, indexed_db, capsys):
        db_path, _ = indexed_db
        assert main(["inspect", "--db", str(db_path), "--format", "json"]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["k"] == 2048
        assert info["b"] == 1
        assert info["unique_files"] == 10
        assert info["file_references"] == 11
        assert {c["name"]: c["file_count"] for c in info["components"]} == \
            {"X-1.0": 3, "X-1.1": 3, "Y-0.2": 5}

    def test_empty_database(self, tmp_path, capsys):
        from oscn import SignatureDatabase, save_database
        db_path = tmp_path / "empty.db"
        save_database(SignatureDatabase.create(seed=1, k=128), db_path)
        assert main(["inspect", "--db", str(db_path)]) == 0
        out = capsys.readouterr().out
        assert "components: 0" in out
        assert "unique files: 0" in out

    def test_corrupted_database_exit_code(self, indexed_db, capsys):
        db_path, _ = indexed_db
        blob = bytearray(db_path.read_bytes())
        blob[-3] ^= 0xFF
        db_path.write_bytes(bytes(blob))
        assert main(["inspect", "--db", str(db_path)]) == 2


class TestExitCodes:
    def test_missing_database(self, tmp_path, capsys):
        assert main(["query", "--db", str(tmp_path / "nope.db"), str(tmp_path)]) == 2

    def test_bad_threshold_is_usage_error(self, indexed_db):
        db_path, query_dir = indexed_db
        assert main(["query", "--db", str(db_path), str(query_dir), "--th", "1.5"]) == 1

    def test_no_db_anywhere(self, tmp_path, monkeypatch):
        monkeypatch.delenv("OSCN_DB", raising=False)
        assert main(["query", str(tmp_path)]) == 1

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0

    def test_missing_query_inputs(self, indexed_db):
        db_path, _ = indexed_db
        assert main(["query", "--db", str(db_path)]) == 1
