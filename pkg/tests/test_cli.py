import json

import numpy as np
import pytest

from vertiplan.cli import main
from vertiplan.dataio import load_demand_archive, load_plan
from vertiplan.synthetic import write_dataset


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    """A small synthetic workspace, ingested and seeded once for the module."""
    base = tmp_path_factory.mktemp("cliws")
    write_dataset(base, seed=3, flights=600)
    config = base / "config.json"
    paths = {
        "base": base,
        "config": config,
        "od": base / "od.csv",
        "demand": base / "demand.npz",
        "seeded": base / "seeded.json",
        "optimized": base / "optimized.json",
    }
    assert main(["--config", str(config), "ingest", "--out", str(paths["demand"])]) == 0
    assert (
        main(
            ["--config", str(config), "init", "--k", "60", "--seed", "5",
             "--out", str(paths["seeded"]), "--deterministic"]
        )
        == 0
    )
    assert (
        main(
            ["--config", str(config), "optimize", "--plan", str(paths["seeded"]),
             "--iterations", "6", "--out", str(paths["optimized"]), "--deterministic"]
        )
        == 0
    )
    return paths


def run(ws, *argv):
    return main(["--config", str(ws["config"])] + [str(a) for a in argv])


class TestIngest:
    def test_archive_and_figure_written(self, ws):
        assert ws["demand"].exists()
        assert ws["demand"].with_suffix(".png").exists()

    def test_demand_totals_are_conservative(self, ws):
        demand, points = load_demand_archive(ws["demand"])
        assert demand.shape == (24, 50, 50)
        assert demand.sum() == len(points)
        assert demand.sum() > 0

    def test_missing_od_file_exits_3(self, ws, tmp_path):
        code = run(ws, "ingest", "--od", tmp_path / "nope.csv", "--out", tmp_path / "d.npz")
        assert code == 3


class TestInit:
    def test_site_count_matches_k(self, ws):
        doc = load_plan(ws["seeded"])
        assert int(doc.layout.sum()) == 60
        assert doc.provenance["algorithm"] == "kmeans"
        assert "created" not in doc.provenance

    def test_over_cluster_flag(self, ws, tmp_path):
        out = tmp_path / "over.json"
        code = run(ws, "init", "--k", "10", "--over-cluster", "5", "--seed", "1",
                   "--out", out, "--deterministic")
        assert code == 0
        assert int(load_plan(out).layout.sum()) == 10

    def test_byte_identical_reruns(self, ws, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run(ws, "init", "--k", "25", "--seed", "9", "--out", out,
                       "--deterministic") == 0
        assert a.read_bytes() == b.read_bytes()


class TestOptimize:
    def test_outputs_exist(self, ws):
        assert ws["optimized"].exists()
        loss_csv = ws["optimized"].with_suffix(".loss.csv")
        assert loss_csv.exists()
        assert loss_csv.with_suffix(".png").exists()

    def test_loss_curve_has_initial_plus_iterations(self, ws):
        lines = ws["optimized"].with_suffix(".loss.csv").read_text().splitlines()
        assert lines[0] == "iteration,loss"
        assert len(lines) == 8  # header + initial + 6 iterations

    def test_site_budget_preserved(self, ws):
        doc = load_plan(ws["optimized"])
        assert int(doc.layout.sum()) == 60

    def test_best_loss_never_above_initial(self, ws):
        doc = load_plan(ws["optimized"])
        losses = [loss for _, loss in doc.loss_history]
        assert min(losses) <= losses[0]

    def test_zero_iterations_is_identity(self, ws, tmp_path):
        out = tmp_path / "same.json"
        code = run(ws, "optimize", "--plan", ws["seeded"], "--iterations", "0",
                   "--out", out, "--deterministic")
        assert code == 0
        before = load_plan(ws["seeded"])
        after = load_plan(out)
        assert np.array_equal(after.layout, before.layout)
        assert len(after.loss_history) == 1

    def test_byte_identical_reruns(self, ws, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / f"{name}.json"
            loss = tmp_path / f"{name}.loss.csv"
            assert run(ws, "optimize", "--plan", ws["seeded"], "--iterations", "5",
                       "--out", out, "--loss-out", loss, "--deterministic") == 0
            outs.append((out.read_bytes(), loss.read_bytes()))
        assert outs[0] == outs[1]

    def test_geojson_export(self, ws, tmp_path):
        out = tmp_path / "plan.json"
        geo = tmp_path / "plan.geojson"
        assert run(ws, "optimize", "--plan", ws["seeded"], "--iterations", "2",
                   "--out", out, "--geojson", geo, "--deterministic") == 0
        collection = json.loads(geo.read_text())
        doc = load_plan(out)
        assert len(collection["features"]) == int(np.count_nonzero(doc.layout))

    def test_missing_plan_exits_3(self, ws, tmp_path):
        code = run(ws, "optimize", "--plan", tmp_path / "ghost.json",
                   "--out", tmp_path / "o.json")
        assert code == 3


@pytest.fixture(scope="module")
def score_dir(ws, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("scores")
    assert run(ws, "score", "--plan", ws["optimized"], "--out-dir", out_dir) == 0
    return out_dir


class TestScoreAndRecommend:
    def test_all_layers_written_with_figures(self, score_dir):
        for name in ("demand", "coverage", "connectivity", "cost", "comprehensive"):
            assert (score_dir / f"{name}.csv").exists()
            assert (score_dir / f"{name}.png").exists()

    def test_layer_value_ranges(self, score_dir):
        for name in ("demand", "coverage", "connectivity", "cost"):
            values = np.loadtxt(score_dir / f"{name}.csv", delimiter=",")
            assert values.min() >= 0.0 and values.max() <= 1.0
        comprehensive = np.loadtxt(score_dir / "comprehensive.csv", delimiter=",")
        assert comprehensive.min() > 0.0 and comprehensive.max() < 1.0

    def test_recommend_to_stdout(self, ws, score_dir, capsys):
        code = run(ws, "recommend", "--scores", score_dir / "comprehensive.csv", "--k", "3")
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "rank,row,col,score"
        assert len(lines) == 4
        scores = [float(line.split(",")[3]) for line in lines[1:]]
        assert scores == sorted(scores, reverse=True)

    def test_recommend_to_file_respects_separation(self, ws, score_dir, tmp_path):
        out = tmp_path / "recs.csv"
        assert run(ws, "recommend", "--scores", score_dir / "comprehensive.csv",
                   "--k", "5", "--min-separation", "1000", "--out", out) == 0
        rows = out.read_text().strip().splitlines()[1:]
        cells = [(int(r.split(",")[1]), int(r.split(",")[2])) for r in rows]
        for a in range(len(cells)):
            for b in range(a + 1, len(cells)):
                di = cells[a][0] - cells[b][0]
                dj = cells[a][1] - cells[b][1]
                assert 200.0 * (di * di + dj * dj) ** 0.5 >= 1000.0

    def test_recommend_to_file_renders_marked_heatmap(self, ws, score_dir, tmp_path):
        out = tmp_path / "recs.csv"
        assert run(ws, "recommend", "--scores", score_dir / "comprehensive.csv",
                   "--out", out) == 0
        figure = out.with_suffix(".png")
        assert figure.exists() and figure.stat().st_size > 0

    def test_bad_weights_exit_1(self, ws, score_dir, tmp_path):
        code = run(ws, "score", "--plan", ws["optimized"], "--out-dir", tmp_path,
                   "--weights", "1,2")
        assert code == 1


class TestValidate:
    def test_feasible_plan_exits_0(self, ws, capsys):
        assert run(ws, "validate", "--plan", ws["optimized"]) == 0
        assert "feasible" in capsys.readouterr().out

    def test_wrong_total_exits_1(self, ws, tmp_path, capsys):
        data = json.loads(ws["optimized"].read_text())
        # drop one site: granularity still fine, the budget total is not
        layout = np.asarray(data["layout"])
        i, j = np.argwhere(layout > 0)[0]
        data["layout"][i][j] -= 1
        data["supply"][i][j] -= 20
        bad = tmp_path / "short.json"
        bad.write_text(json.dumps(data))
        assert run(ws, "validate", "--plan", bad) == 1
        assert "total" in capsys.readouterr().out

    def test_corrupt_supply_exits_1(self, ws, tmp_path):
        data = json.loads(ws["optimized"].read_text())
        i, j = np.argwhere(np.asarray(data["supply"]) > 0)[0]
        data["supply"][i][j] += 10
        bad = tmp_path / "broken.json"
        bad.write_text(json.dumps(data))
        assert run(ws, "validate", "--plan", bad) == 1


class TestUsageErrors:
    def test_unknown_subcommand_exits_2(self, ws):
        with pytest.raises(SystemExit) as err:
            main(["--config", str(ws["config"]), "frobnicate"])
        assert err.value.code == 2

    def test_missing_config_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["validate", "--plan", "x.json"])
        assert err.value.code == 2
