"""Service handlers and HTTP routes.

The handlers are pure functions, so most coverage goes through them
directly; a thinner set of route tests checks the HTTP wiring and
error mapping.
"""

import pytest
from fastapi.testclient import TestClient

from caterfuse import artifacts, service
from caterfuse.fusion import NoiseParams, TreeEncoded, sweep_success_rates
from caterfuse.graphstate import graph_to_doc
from caterfuse.generators import ring_graph
from caterfuse.partitioner import CapacityError, CutSolution, GenerationTree
from caterfuse.pipeline import HardwareConfig, run


def compile_ring(scheme_kind="tree", **scheme_kw):
    req = service.CompileRequest(
        graph=graph_to_doc(ring_graph(10)),
        scheme=service.SchemeModel(kind=scheme_kind, **scheme_kw),
    )
    return service.handle_compile(req)


def test_hardware_model_defaults_match_config():
    assert service.HardwareModel().to_hw() == HardwareConfig()


def test_gen_requires_family_params():
    with pytest.raises(ValueError, match="needs parameter 'cols'"):
        service.handle_gen(service.GenRequest(family="lattice", rows=3))


def test_gen_embeds_generator_config():
    resp = service.handle_gen(service.GenRequest(family="random", n=8, p=0.5, seed=3))
    assert resp.graph["generator"] == {"family": "random", "n": 8, "p": 0.5, "seed": 3}
    assert resp.graph["n"] == 8


def test_compile_artifact_docs_roundtrip():
    resp = compile_ring()
    cut = CutSolution.from_doc(resp.cut)
    tree = GenerationTree.from_doc(resp.tree)
    assert cut.K == resp.summary["K"] == 1
    assert tree.height == resp.summary["height"] == 0
    assert resp.kind == service.COMPILE_KIND
    assert resp.config["scheme"] == {"kind": "tree", "b": 4, "b_prep": 6}


def test_compile_reserves_capacity_for_scheme_size():
    # ring-10 with one cut edge: tree b=4 gives 10 + 2*4 = 18 qubits,
    # rus m=11 would need 32 and must be rejected
    resp = compile_ring()
    assert sorted(resp.plan["caterpillars"][0]["main_path"]) == list(range(10))
    with pytest.raises(CapacityError):
        compile_ring(scheme_kind="rus", m=11)


def test_simulate_matches_direct_run():
    art = compile_ring().model_dump()
    resp = service.handle_simulate(
        service.SimulateRequest(artifact=art, p_fail=0.25, p_eras=0.05,
                                seed=4, cycles=500)
    )
    metrics = run(
        GenerationTree.from_doc(art["tree"]),
        CutSolution.from_doc(art["cut"]),
        TreeEncoded(b=4, b_prep=6),
        NoiseParams(0.25, 0.05, rng_seed=4),
        cycles=500,
    )
    assert resp.metrics == metrics.to_doc()
    assert resp.config["noise"]["rng_seed"] == 4
    assert resp.config_hash == artifacts.config_hash(resp.config)


def test_simulate_trace_returned_only_on_request():
    art = compile_ring().model_dump()
    quiet = service.handle_simulate(service.SimulateRequest(artifact=art, cycles=20))
    traced = service.handle_simulate(
        service.SimulateRequest(artifact=art, cycles=20, trace=True)
    )
    assert quiet.trace is None
    assert traced.trace and all("event" in e for e in traced.trace)
    assert traced.metrics == quiet.metrics


def test_simulate_rejects_foreign_document():
    with pytest.raises(ValueError, match="not a compile artifact"):
        service.handle_simulate(service.SimulateRequest(artifact={"n": 3}))


def test_sweep_rows_match_fusion_table():
    req = service.SweepRequest(
        schemes=[service.SchemeModel(kind="tree"), service.SchemeModel(kind="rus")],
        p_fail=[0.0, 0.25],
        p_eras=[0.05],
        trials=200,
        seed=6,
    )
    resp = service.handle_sweep(req)
    expected = sweep_success_rates(
        [m.to_scheme() for m in req.schemes], [0.0, 0.25], [0.05], 200, 6
    )
    assert resp.rows == expected
    assert resp.fieldnames == list(artifacts.SWEEP_FIELDS)


def test_sweep_parallel_rows_identical():
    kw = dict(
        schemes=[service.SchemeModel(kind=k) for k in ("tree", "rus", "redundant")],
        p_fail=[0.1, 0.25],
        p_eras=[0.0, 0.1],
        trials=150,
        seed=2,
    )
    serial = service.handle_sweep(service.SweepRequest(**kw))
    parallel = service.handle_sweep(service.SweepRequest(**kw, workers=4))
    assert serial.rows == parallel.rows
    assert serial.config_hash == parallel.config_hash


def test_sweep_with_artifact_adds_pipeline_columns():
    art = compile_ring().model_dump()
    resp = service.handle_sweep(
        service.SweepRequest(
            schemes=[service.SchemeModel(kind="tree")],
            p_fail=[0.25],
            p_eras=[0.05],
            trials=50,
            artifact=art,
            cycles=200,
        )
    )
    assert resp.fieldnames == list(artifacts.SWEEP_FIELDS + artifacts.SWEEP_PIPELINE_FIELDS)
    row = resp.rows[0]
    assert row["shots_succeeded"] > 0
    assert 0.0 < row["f_fus"] <= 1.0
    assert resp.config["pipeline"] is True


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError, match="at least one scheme"):
        service.handle_sweep(
            service.SweepRequest(schemes=[], p_fail=[0.1], p_eras=[0.1])
        )


def test_report_merges_and_summarizes():
    a = artifacts.rows_to_csv([{"x": 1.0, "who": "a"}], ("x", "who"))
    b = artifacts.rows_to_csv([{"x": 3.0, "extra": 7}], ("x", "extra"))
    resp = service.handle_report(service.ReportRequest(csvs=[a, b]))
    header, rows = artifacts.parse_csv(resp.csv)
    assert header == ["x", "who", "extra"]
    assert len(rows) == 2
    assert resp.summary["x"]["mean"] == 2.0


# -- HTTP wiring -------------------------------------------------------------


@pytest.fixture(scope="module")
def client():
    return TestClient(service.app)


def test_http_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_http_gen_compile_simulate_chain(client):
    graph = client.post("/gen", json={"family": "ring", "n": 10}).json()["graph"]
    compiled = client.post("/compile", json={"graph": graph})
    assert compiled.status_code == 200
    art = compiled.json()
    sim = client.post("/simulate", json={"artifact": art, "cycles": 50})
    assert sim.status_code == 200
    assert sim.json()["metrics"]["shots_succeeded"] > 0


def test_http_value_errors_map_to_400(client):
    bad = client.post("/gen", json={"family": "lattice", "rows": 2})
    assert bad.status_code == 400
    assert "cols" in bad.json()["detail"]


def test_http_schema_errors_map_to_422(client):
    assert client.post("/gen", json={"family": "moebius"}).status_code == 422
    assert client.post("/compile", json={}).status_code == 422


def test_http_sweep_route(client):
    body = {
        "schemes": [{"kind": "redundant", "m": 2}],
        "p_fail": [0.0],
        "p_eras": [0.0],
        "trials": 20,
    }
    resp = client.post("/sweep", json=body)
    assert resp.status_code == 200
    assert resp.json()["rows"][0]["success_rate"] == 1.0
