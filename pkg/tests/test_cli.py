import json

import pytest

from subgames.cli import main
from subgames.game_core import Game, classify, parse, serialize


def write_game(path, game):
    path.write_text(serialize(game))
    return str(path)


def chain(n, k):
    return Game.from_edges(n, k, [(j, j - 1) for j in range(1, n + 1)])


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


class TestGen:
    def test_same_seed_same_files(self, tmp_path, capsys):
        argv = ["gen", "--family", "balanced", "--n", "30", "--k", "3", "--seed", "5",
                "--count", "4", "--out-dir", str(tmp_path)]
        snapshots = []
        for _ in range(2):
            assert run(argv, capsys)[0] == 0
            snapshots.append({p.name: p.read_bytes() for p in tmp_path.iterdir()})
        assert snapshots[0] == snapshots[1]
        assert "balanced_n30_k3_s5_0003.subgame" in snapshots[0] and "manifest.json" in snapshots[0]

    def test_different_seed_different_games(self, tmp_path, capsys):
        for seed in ("1", "2"):
            run(["gen", "--family", "dense", "--n", "20", "--seed", seed, "--out-dir", str(tmp_path)], capsys)
        a, b = sorted(tmp_path.glob("*.subgame"))
        assert a.read_bytes() != b.read_bytes()

    def test_pinned_games_are_losing(self, tmp_path, capsys):
        argv = ["gen", "--family", "balanced", "--n", "40", "--pin-losing", "--count", "10",
                "--variant", "deterministic-base", "--out-dir", str(tmp_path)]
        assert run(argv, capsys)[0] == 0
        for path in tmp_path.glob("*.subgame"):
            assert classify(parse(path.read_text())).is_losing

    def test_restricted_family(self, tmp_path, capsys):
        argv = ["gen", "--family", "restricted", "--n", "25", "--move-prob", "0.5",
                "--count", "3", "--out-dir", str(tmp_path)]
        assert run(argv, capsys)[0] == 0
        for path in tmp_path.glob("*.subgame"):
            assert classify(parse(path.read_text())).is_restricted

    def test_manifest_contents(self, tmp_path, capsys):
        run(["gen", "--family", "dense", "--n", "8", "--seed", "3", "--out-dir", str(tmp_path)], capsys)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["master_seed"] == 3
        assert manifest["flags"]["n"] == 8
        assert manifest["outputs"] == ["dense_n8_k3_s3_0000.subgame"]
        assert "tool_version" in manifest

    @pytest.mark.parametrize(
        "extra",
        [
            ["--family", "dense", "--n", "0"],
            ["--family", "dense", "--n", "5", "--k", "1"],
            ["--family", "dense", "--n", "5", "--pin-losing"],
            ["--family", "balanced", "--n", "5", "--move-prob", "0.5"],
            ["--family", "balanced", "--n", "2", "--k", "3", "--variant", "deterministic-base"],
            ["--family", "cubes", "--n", "5"],
        ],
    )
    def test_usage_errors(self, tmp_path, capsys, extra):
        with pytest.raises(SystemExit) as info:
            main(["gen", *extra, "--out-dir", str(tmp_path)])
        assert info.value.code == 2

    def test_impossible_balanced_game(self, tmp_path, capsys):
        argv = ["gen", "--family", "balanced", "--n", "1", "--k", "3", "--pin-losing", "--out-dir", str(tmp_path)]
        code, out = run(argv, capsys)
        assert code == 1 and "restarts" in out.err


class TestSolve:
    def test_two_player_chain(self, tmp_path, capsys):
        path = write_game(tmp_path / "c.subgame", chain(5, 2))
        code, out = run(["solve", "--game", path, "--solver", "dp", "--full-vector"], capsys)
        assert code == 0
        assert "value: 1" in out.out
        assert "queries: 15" in out.out
        assert "values: 0 1 0 1 0 1" in out.out

    def test_restricted_solver_verifies(self, tmp_path, capsys):
        path = write_game(tmp_path / "c.subgame", chain(40, 3))
        code, out = run(["solve", "--game", path, "--solver", "quantum-restricted", "--verify"], capsys)
        assert code == 0 and "correct: true" in out.out

    @pytest.mark.parametrize("solver", ["quantum", "quantum-exactish", "walk"])
    def test_other_solvers(self, tmp_path, capsys, solver):
        path = write_game(tmp_path / "c.subgame", chain(12, 3))
        code, out = run(["solve", "--game", path, "--solver", solver, "--seed", "2", "--verify"], capsys)
        assert code == 0 and f"value: {(-12) % 3}" in out.out

    @pytest.mark.parametrize("solver", ["walk", "quantum-restricted"])
    def test_restricted_solver_on_dense_game(self, tmp_path, capsys, solver):
        path = write_game(tmp_path / "g.subgame", Game.from_edges(2, 3, [(1, 0), (2, 0), (2, 1)]))
        code, out = run(["solve", "--game", path, "--solver", solver], capsys)
        assert code == 1 and "row 2" in out.err

    def test_too_many_players_for_small_k_solver(self, tmp_path, capsys):
        path = write_game(tmp_path / "g.subgame", chain(3, 17))
        assert run(["solve", "--game", path, "--solver", "quantum-exactish"], capsys)[0] == 1

    def test_missing_file(self, tmp_path, capsys):
        code, out = run(["solve", "--game", str(tmp_path / "nope.subgame")], capsys)
        assert code == 3 and "not found" in out.err

    def test_malformed_file(self, tmp_path, capsys):
        (tmp_path / "bad.subgame").write_text("3 2\n1\n1x\n")
        code, out = run(["solve", "--game", str(tmp_path / "bad.subgame")], capsys)
        assert code == 4 and "line 3" in out.err

    def test_csv_row(self, tmp_path, capsys):
        path = write_game(tmp_path / "c.subgame", chain(5, 2))
        csv_path = tmp_path / "out.csv"
        run(["solve", "--game", path, "--verify", "--csv", str(csv_path)], capsys)
        lines = csv_path.read_text().split("\n")
        assert lines[0] == "game,solver,seed,n,k,value,queries,correct"
        assert lines[1] == f"{path},dp,0,5,2,1,15,1"


class TestBench:
    def test_dp_slope(self, tmp_path, capsys):
        csv_path = tmp_path / "b.csv"
        argv = ["bench", "--sizes", "64,128,256,512,1024", "--trials", "2", "--solvers", "dp",
                "--csv", str(csv_path), "--jobs", "1"]
        code, out = run(argv, capsys)
        assert code == 0
        line = next(x for x in out.out.splitlines() if x.startswith("slope dp"))
        slope = float(line.split(":")[1].split()[0])
        assert abs(slope - 2.0) <= 0.01
        manifest = json.loads((tmp_path / "b.csv.manifest.json").read_text())
        assert manifest["command"] == "bench" and "jobs" not in manifest["flags"]

    def test_reruns_are_byte_identical(self, tmp_path, capsys):
        csv_path = tmp_path / "b.csv"
        outputs = []
        for jobs in ("1", "1", "2"):
            argv = ["bench", "--sizes", "16,32,64,256", "--trials", "2", "--solvers", "quantum,quantum-restricted",
                    "--seed", "7", "--csv", str(csv_path), "--jobs", jobs]
            code, out = run(argv, capsys)
            assert code == 0
            manifest = (tmp_path / "b.csv.manifest.json").read_bytes()
            outputs.append((csv_path.read_bytes(), manifest, out.out))
        assert outputs[0] == outputs[1] == outputs[2]

    @pytest.mark.parametrize(
        "extra", [["--sizes", "16,32,64"], ["--sizes", "16,x"], ["--solvers", "dp,nope"], ["--trials", "0"]]
    )
    def test_usage_errors(self, capsys, extra):
        with pytest.raises(SystemExit) as info:
            main(["bench", *extra])
        assert info.value.code == 2


class TestSensitivity:
    def test_forced_case_one(self, capsys):
        code, out = run(["sensitivity", "--n", "20", "--trials", "50", "--force-case", "1", "--jobs", "1"], capsys)
        assert code == 0
        assert "p_hat: 1.000000" in out.out
        assert "case 1 (j=n, i=0): 50/50" in out.out

    def test_csv_and_manifest(self, tmp_path, capsys):
        texts = []
        for _ in range(2):
            csv_path = tmp_path / "s.csv"
            run(["sensitivity", "--n", "20", "--trials", "40", "--seed", "3", "--csv", str(csv_path)], capsys)
            texts.append((csv_path.read_bytes(), (tmp_path / "s.csv.manifest.json").read_bytes()))
        assert texts[0] == texts[1]
        assert texts[0][0].startswith(b"trial,j,i,case,changed\n")

    def test_case_needs_room(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["sensitivity", "--n", "2", "--force-case", "4"])
        assert info.value.code == 2
