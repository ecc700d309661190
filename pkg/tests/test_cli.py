"""CLI verbs: artifacts on disk, exit codes, byte-level reproducibility."""

import json

import pytest
from click.testing import CliRunner

from caterfuse import artifacts, cli


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args, expect=0):
    result = runner.invoke(cli.main, [str(a) for a in args])
    if result.exit_code != expect:  # surface the failure context
        raise AssertionError(
            f"exit {result.exit_code} != {expect}\n{result.output}\n{result.exception!r}"
        )
    return result


def gen_graph(runner, tmp_path, family, *args, name="g.json"):
    path = tmp_path / name
    invoke(runner, "gen", family, *args, "-o", path)
    return path


def compile_graph(runner, tmp_path, graph, *args, name="c.json", expect=0):
    path = tmp_path / name
    invoke(runner, "compile", graph, *args, "-o", path, expect=expect)
    return path


def test_gen_path_writes_edge_list(runner, tmp_path):
    path = gen_graph(runner, tmp_path, "path", "--n", 5)
    doc = json.loads(path.read_text())
    assert doc["n"] == 5
    assert doc["edges"] == [[0, 1], [1, 2], [2, 3], [3, 4]]
    assert doc["generator"]["family"] == "path"


def test_gen_lattice_3x3(runner, tmp_path):
    doc = json.loads(gen_graph(runner, tmp_path, "lattice", "--rows", 3, "--cols", 3).read_text())
    assert len(doc["edges"]) == 12


def test_gen_random_identical_across_runs(runner, tmp_path):
    a = gen_graph(runner, tmp_path, "random", "--n", 10, "--p", 0.3, "--seed", 7, name="a.json")
    b = gen_graph(runner, tmp_path, "random", "--n", 10, "--p", 0.3, "--seed", 7, name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_gen_missing_param_is_usage_error(runner, tmp_path):
    result = runner.invoke(cli.main, ["gen", "lattice", "--rows", "3", "-o", str(tmp_path / "x")])
    assert result.exit_code == 2
    assert "cols" in result.output


def test_compile_p5(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "path", "--n", 5)
    art = json.loads(compile_graph(runner, tmp_path, graph).read_text())
    assert art["summary"]["K"] == 0
    assert art["summary"]["height"] == 0
    assert art["summary"]["subgraphs"] == 1


def test_compile_star_k13(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "star", "--n", 4)
    art = json.loads(compile_graph(runner, tmp_path, graph).read_text())
    assert art["summary"]["K"] == 1
    assert art["summary"]["height"] == 1


def test_compile_embeds_resolved_config(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    art = json.loads(
        compile_graph(runner, tmp_path, graph, "--scheme", "rus", "--m", 6).read_text()
    )
    assert art["config"]["scheme"] == {"kind": "rus", "m": 6}
    assert art["config"]["hw"]["max_caterpillar"] == 30
    assert "wall" not in json.dumps(art)  # timing never lands in the artifact


def test_compile_idempotent_bytes(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    a = compile_graph(runner, tmp_path, graph, name="a.json")
    b = compile_graph(runner, tmp_path, graph, name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_compile_capacity_exit_3(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    result = runner.invoke(
        cli.main,
        ["compile", str(graph), "--max-caterpillar", "5", "-o", str(tmp_path / "c.json")],
    )
    assert result.exit_code == 3
    assert "capacity" in result.output


def test_compile_heuristic_exit_4_still_writes(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "random", "--n", 14, "--p", 0.25, "--seed", 2)
    out = compile_graph(runner, tmp_path, graph, "--node-budget", 30, expect=4)
    art = json.loads(out.read_text())
    assert art["summary"]["heuristic"] is True


def test_compile_bad_hw_flag_is_usage_error(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "path", "--n", 5)
    hw = tmp_path / "hw.json"
    hw.write_text('{"max_catterpillar": 20}')  # typo must not be ignored
    result = runner.invoke(
        cli.main, ["compile", str(graph), "--hw", str(hw), "-o", str(tmp_path / "c.json")]
    )
    assert result.exit_code == 2


def simulate_csv(runner, tmp_path, art, *args, name="m.csv", expect=0):
    path = tmp_path / name
    invoke(runner, "simulate", art, *args, "-o", path, expect=expect)
    return path


def test_simulate_zero_noise_path(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "path", "--n", 5)
    art = compile_graph(runner, tmp_path, graph)
    csv_path = simulate_csv(runner, tmp_path, art, "--cycles", 100)
    header, rows = artifacts.read_csv(csv_path)
    assert header[: len(artifacts.RUN_FIELDS)] == list(artifacts.RUN_FIELDS)
    assert float(rows[0]["avg_exec_time"]) == 30.0
    assert rows[0]["shots_succeeded"] == "100"
    assert json.loads(rows[0]["config"])["cycles"] == 100


def test_simulate_identical_bytes_same_seed(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    art = compile_graph(runner, tmp_path, graph)
    common = ("--p-fail", 0.25, "--p-eras", 0.05, "--seed", 9, "--cycles", 400)
    a = simulate_csv(runner, tmp_path, art, *common, name="a.csv")
    b = simulate_csv(runner, tmp_path, art, *common, name="b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_simulate_tree_beats_rus_on_ring(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    rows = {}
    for kind in ("tree", "rus"):
        art = compile_graph(runner, tmp_path, graph, "--scheme", kind, name=f"{kind}.json")
        csv_path = simulate_csv(
            runner, tmp_path, art,
            "--p-fail", 0.25, "--p-eras", 0.05, "--cycles", 3000,
            name=f"{kind}.csv",
        )
        rows[kind] = artifacts.read_csv(csv_path)[1][0]
    assert float(rows["tree"]["avg_exec_time"]) < float(rows["rus"]["avg_exec_time"])


def test_simulate_no_shot_exit_5(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    art = compile_graph(runner, tmp_path, graph)
    csv_path = simulate_csv(
        runner, tmp_path, art,
        "--p-fail", 1.0, "--p-eras", 1.0, "--cycles", 40,
        expect=5,
    )
    _, rows = artifacts.read_csv(csv_path)
    assert rows[0]["no_shot"] == "True"
    assert rows[0]["avg_exec_time"] == ""


def test_simulate_trace_jsonl(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "path", "--n", 5)
    art = compile_graph(runner, tmp_path, graph)
    trace = tmp_path / "events.jsonl"
    quiet = simulate_csv(runner, tmp_path, art, "--cycles", 30, name="q.csv")
    traced = simulate_csv(
        runner, tmp_path, art, "--cycles", 30, "--trace", trace, name="t.csv"
    )
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert events and all("event" in e and "t" in e for e in events)
    assert quiet.read_bytes() == traced.read_bytes()


def write_grid(tmp_path, **overrides):
    grid = {
        "schemes": [{"kind": "tree", "b": 4}, {"kind": "redundant", "m": 5}],
        "p_fail": [0.0, 0.25],
        "p_eras": [0.0, 0.05],
        "trials": 200,
        "seed": 5,
    }
    grid.update(overrides)
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(grid))
    return path


def test_sweep_trivial_cell_rate_one(runner, tmp_path):
    grid = write_grid(
        tmp_path,
        schemes=[{"kind": "redundant", "m": 2}], p_fail=[0.0], p_eras=[0.0], trials=50,
    )
    out = tmp_path / "sweep.csv"
    invoke(runner, "sweep", grid, "-o", out)
    _, rows = artifacts.read_csv(out)
    assert len(rows) == 1
    assert float(rows[0]["success_rate"]) == 1.0


def test_sweep_rerun_and_parallel_identical(runner, tmp_path):
    grid = write_grid(tmp_path)
    outs = []
    for name, extra in (("a", []), ("b", []), ("c", ["--workers", "4"])):
        out = tmp_path / f"{name}.csv"
        invoke(runner, "sweep", grid, *extra, "-o", out)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_sweep_with_artifact_has_pipeline_columns(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "ring", "--n", 10)
    art = compile_graph(runner, tmp_path, graph)
    grid = write_grid(tmp_path, schemes=[{"kind": "tree", "b": 4}],
                      p_fail=[0.25], p_eras=[0.05], trials=50)
    out = tmp_path / "sweep.csv"
    invoke(runner, "sweep", grid, "--artifact", art, "--cycles", 200, "-o", out)
    header, rows = artifacts.read_csv(out)
    assert "avg_exec_time" in header
    assert int(rows[0]["shots_succeeded"]) > 0


def test_sweep_malformed_grid_is_usage_error(runner, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text('{"p_fail": [0.1]}')
    result = runner.invoke(cli.main, ["sweep", str(grid), "-o", str(tmp_path / "s.csv")])
    assert result.exit_code == 2


def test_report_merges_and_writes_summary(runner, tmp_path):
    graph = gen_graph(runner, tmp_path, "path", "--n", 5)
    art = compile_graph(runner, tmp_path, graph)
    a = simulate_csv(runner, tmp_path, art, "--cycles", 50, name="a.csv")
    b = simulate_csv(runner, tmp_path, art, "--cycles", 80, "--seed", 1, name="b.csv")
    merged = tmp_path / "merged.csv"
    summary = tmp_path / "summary.json"
    invoke(runner, "report", a, b, "-o", merged, "--summary", summary)
    header, rows = artifacts.read_csv(merged)
    assert len(rows) == 2
    stats = json.loads(summary.read_text())
    assert stats["shots_succeeded"]["count"] == 2
    assert stats["shots_succeeded"]["max"] == 80.0


def test_help_lists_all_verbs(runner):
    result = invoke(runner, "--help")
    for verb in ("gen", "compile", "simulate", "sweep", "report", "serve"):
        assert verb in result.output
