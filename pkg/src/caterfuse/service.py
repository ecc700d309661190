"""HTTP service over the compiler and simulator.

The handler functions are plain request-model -> response-model
functions with no I/O; the FastAPI routes and the CLI both call them,
so the command line works without a running server and the server
returns exactly what the CLI would write to disk.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Literal

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import artifacts
from .fusion import NoiseParams, SchemeConfig, sweep_cell
from .generators import generate
from .graphstate import graph_from_doc, graph_to_doc
from .partitioner import (
    DEFAULT_NODE_BUDGET,
    CutSolution,
    GenerationTree,
    build_generation_tree,
    critical_path_cost,
    divide_linear,
)
from .pipeline import (
    DEFAULT_CYCLES,
    DEFAULT_TIME_CAP,
    HardwareConfig,
    plan_emissions,
    run,
)
from .seeding import derive_seed

COMPILE_KIND = "caterfuse/compile"


class SchemeModel(BaseModel):
    """Fusion scheme selector; ``b``/``b_prep`` apply to tree, ``m`` to the rest."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["tree", "rus", "redundant"] = "tree"
    b: int = 4
    b_prep: int = 6
    m: int = 6

    def to_scheme(self) -> SchemeConfig:
        doc = {"kind": self.kind, "b": self.b, "b_prep": self.b_prep, "m": self.m}
        return artifacts.scheme_from_doc(doc)


class HardwareModel(BaseModel):
    """Mirror of HardwareConfig with the same defaults."""

    model_config = ConfigDict(extra="forbid")

    t_init: float = 12.0
    t_emit_per_qubit: float = 0.6
    max_caterpillar: int = 30
    timestep: float = 30.0
    max_delay_layers: int = 32
    feedforward_latency: float = 5.0
    t2: float = 2340.0
    sigma_fus: float = 0.9975
    sigma_osrp: float = 0.99
    osrp_per_leaf_site: int = 1

    def to_hw(self) -> HardwareConfig:
        return HardwareConfig(**self.model_dump())


class GenRequest(BaseModel):
    family: Literal["path", "ring", "star", "lattice", "random", "caterpillar"]
    n: int | None = None
    rows: int | None = None
    cols: int | None = None
    p: float | None = None
    seed: int = 0
    spine: int | None = None
    leaves: int | None = None


class GenResponse(BaseModel):
    graph: dict


class CompileRequest(BaseModel):
    graph: dict
    scheme: SchemeModel = SchemeModel()
    hw: HardwareModel = HardwareModel()
    node_budget: int = DEFAULT_NODE_BUDGET


class CompileResponse(BaseModel):
    kind: str
    config: dict
    graph: dict
    cut: dict
    tree: dict
    plan: dict
    summary: dict


class SimulateRequest(BaseModel):
    artifact: dict
    p_fail: float = 0.0
    p_eras: float = 0.0
    seed: int = 0
    cycles: int = DEFAULT_CYCLES
    time_cap: float = DEFAULT_TIME_CAP
    trace: bool = False


class SimulateResponse(BaseModel):
    config: dict
    config_hash: str
    metrics: dict
    trace: list[dict] | None = None


class SweepRequest(BaseModel):
    schemes: list[SchemeModel]
    p_fail: list[float]
    p_eras: list[float]
    trials: int = 1000
    seed: int = 0
    workers: int = 1
    artifact: dict | None = None
    cycles: int = 2000
    time_cap: float = DEFAULT_TIME_CAP


class SweepResponse(BaseModel):
    config: dict
    config_hash: str
    fieldnames: list[str]
    rows: list[dict]


class ReportRequest(BaseModel):
    csvs: list[str]


class ReportResponse(BaseModel):
    csv: str
    summary: dict


class StatusResponse(BaseModel):
    status: str
    version: str


def _gen_params(req: GenRequest) -> dict:
    required = {
        "path": ("n",),
        "ring": ("n",),
        "star": ("n",),
        "lattice": ("rows", "cols"),
        "random": ("n", "p", "seed"),
        "caterpillar": ("spine", "leaves"),
    }[req.family]
    params = {}
    for name in required:
        value = getattr(req, name)
        if value is None:
            raise ValueError(f"family {req.family!r} needs parameter {name!r}")
        params[name] = value
    return params


def handle_gen(req: GenRequest) -> GenResponse:
    params = _gen_params(req)
    g = generate(req.family, **params)
    doc = graph_to_doc(g)
    doc["generator"] = {"family": req.family, **params}
    return GenResponse(graph=doc)


def handle_compile(req: CompileRequest) -> CompileResponse:
    g = graph_from_doc(req.graph)
    scheme = req.scheme.to_scheme()
    hw = req.hw.to_hw()
    cut = divide_linear(
        g,
        max_caterpillar=hw.max_caterpillar,
        encoding_overhead=scheme.size,
        node_budget=req.node_budget,
    )
    tree = build_generation_tree(cut, node_budget=req.node_budget)
    plan = plan_emissions(tree, cut, scheme, hw)
    config = {
        "scheme": artifacts.scheme_to_doc(scheme),
        "hw": hw.to_doc(),
        "node_budget": req.node_budget,
    }
    summary = {
        "vertices": len(g.vertices),
        "edges": len(g.edges()),
        "K": cut.K,
        "model_cuts": cut.model_cuts,
        "heuristic": cut.heuristic,
        "subgraphs": len(cut.subgraphs),
        "height": tree.height,
        "critical_path": critical_path_cost(tree),
        "photon_sources": plan.photon_sources,
        "photons_per_cycle": plan.photons_per_cycle,
        "osrp_sites": plan.osrp_sites,
    }
    return CompileResponse(
        kind=COMPILE_KIND,
        config=config,
        graph=req.graph,
        cut=cut.to_doc(),
        tree=tree.to_doc(),
        plan=plan.to_doc(),
        summary=summary,
    )


def _load_artifact(doc: dict) -> tuple[CutSolution, GenerationTree, SchemeConfig, HardwareConfig]:
    if doc.get("kind") != COMPILE_KIND:
        raise ValueError(f"not a compile artifact (kind must be {COMPILE_KIND!r})")
    try:
        cut = CutSolution.from_doc(doc["cut"])
        tree = GenerationTree.from_doc(doc["tree"])
        scheme = artifacts.scheme_from_doc(doc["config"]["scheme"])
        hw = HardwareConfig.from_doc(doc["config"]["hw"])
    except KeyError as exc:
        raise ValueError(f"compile artifact is missing field {exc}")
    return cut, tree, scheme, hw


def handle_simulate(req: SimulateRequest) -> SimulateResponse:
    cut, tree, scheme, hw = _load_artifact(req.artifact)
    noise = NoiseParams(p_fail=req.p_fail, p_eras=req.p_eras, rng_seed=req.seed)
    events: list[dict] | None = [] if req.trace else None
    metrics = run(
        tree,
        cut,
        scheme,
        noise,
        hw=hw,
        cycles=req.cycles,
        time_cap=req.time_cap,
        trace_sink=events.append if events is not None else None,
    )
    config = {
        "scheme": artifacts.scheme_to_doc(scheme),
        "hw": hw.to_doc(),
        "noise": artifacts.noise_to_doc(noise),
        "cycles": req.cycles,
        "time_cap": req.time_cap,
    }
    return SimulateResponse(
        config=config,
        config_hash=artifacts.config_hash(config),
        metrics=metrics.to_doc(),
        trace=events,
    )


def handle_sweep(req: SweepRequest) -> SweepResponse:
    if not req.schemes or not req.p_fail or not req.p_eras:
        raise ValueError("sweep grid needs at least one scheme, p_fail, and p_eras")
    if req.workers < 1:
        raise ValueError("workers must be at least 1")
    loaded = _load_artifact(req.artifact) if req.artifact is not None else None

    cells = [
        (model, pf, pe)
        for model in req.schemes
        for pf in req.p_fail
        for pe in req.p_eras
    ]

    def cell_row(cell: tuple[SchemeModel, float, float]) -> dict:
        model, pf, pe = cell
        scheme = model.to_scheme()
        row = sweep_cell(scheme, pf, pe, req.trials, req.seed)
        if loaded is not None:
            cut, tree, _, hw = loaded
            noise = NoiseParams(
                p_fail=pf,
                p_eras=pe,
                rng_seed=derive_seed(
                    "sweep-pipeline", req.seed, scheme.name, scheme.size,
                    float(pf), float(pe),
                ),
            )
            metrics = run(
                tree, cut, scheme, noise,
                hw=hw, cycles=req.cycles, time_cap=req.time_cap,
            )
            doc = metrics.to_doc()
            row.update({name: doc[name] for name in artifacts.SWEEP_PIPELINE_FIELDS})
        return row

    if req.workers == 1:
        rows = [cell_row(cell) for cell in cells]
    else:
        # cells are independently seeded, so thread fan-out cannot
        # change any row; map() preserves grid order
        with ThreadPoolExecutor(max_workers=req.workers) as pool:
            rows = list(pool.map(cell_row, cells))

    fieldnames = list(artifacts.SWEEP_FIELDS)
    if loaded is not None:
        fieldnames += list(artifacts.SWEEP_PIPELINE_FIELDS)
    config = {
        "schemes": [artifacts.scheme_to_doc(m.to_scheme()) for m in req.schemes],
        "p_fail": req.p_fail,
        "p_eras": req.p_eras,
        "trials": req.trials,
        "seed": req.seed,
        "pipeline": loaded is not None,
        "cycles": req.cycles if loaded is not None else None,
        "time_cap": req.time_cap if loaded is not None else None,
    }
    return SweepResponse(
        config=config,
        config_hash=artifacts.config_hash(config),
        fieldnames=fieldnames,
        rows=rows,
    )


def handle_report(req: ReportRequest) -> ReportResponse:
    if not req.csvs:
        raise ValueError("report needs at least one CSV")
    tables = [artifacts.parse_csv(text) for text in req.csvs]
    header, rows = artifacts.merge_rows(tables)
    return ReportResponse(
        csv=artifacts.rows_to_csv(rows, header),
        summary=artifacts.summarize_columns(header, rows),
    )


app = FastAPI(title="caterfuse")


@app.exception_handler(ValueError)
def _value_error(request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health", response_model=StatusResponse)
def health() -> StatusResponse:
    from . import __version__

    return StatusResponse(status="ok", version=__version__)


@app.post("/gen", response_model=GenResponse)
def gen(req: GenRequest) -> GenResponse:
    return handle_gen(req)


@app.post("/compile", response_model=CompileResponse)
def compile_(req: CompileRequest) -> CompileResponse:
    return handle_compile(req)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    return handle_simulate(req)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    return handle_sweep(req)


@app.post("/report", response_model=ReportResponse)
def report(req: ReportRequest) -> ReportResponse:
    return handle_report(req)
