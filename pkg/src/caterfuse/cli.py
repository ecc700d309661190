"""Command-line front end.

Each verb is a thin client over the service handlers in
:mod:`caterfuse.service`: it parses flags, reads input files, calls the
handler in process, and writes the response to disk.  ``serve`` exposes
the same handlers over HTTP.

Exit codes: 0 success, 2 usage error, 3 capacity violation,
4 compiled with heuristic fallback, 5 simulation produced no shot.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click
from pydantic import ValidationError

from . import __version__, artifacts, service
from .generators import FAMILIES
from .partitioner import DEFAULT_NODE_BUDGET, CapacityError
from .pipeline import DEFAULT_CYCLES, DEFAULT_TIME_CAP, METRIC_FIELDS

EXIT_CAPACITY = 3
EXIT_HEURISTIC = 4
EXIT_NO_SHOT = 5


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="caterfuse")
def main() -> None:
    """Compile graph states into caterpillar pipelines and simulate them."""


def _usage(exc: Exception) -> click.UsageError:
    return click.UsageError(str(exc))


@main.command()
@click.argument("family", type=click.Choice(FAMILIES))
@click.option("--n", type=int, help="Vertex count (path, ring, star, random).")
@click.option("--rows", type=int, help="Lattice rows.")
@click.option("--cols", type=int, help="Lattice columns.")
@click.option("--p", type=float, help="Edge probability (random).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--spine", type=int, help="Spine length (caterpillar).")
@click.option("--leaves", type=int, help="Leaves per spine vertex (caterpillar).")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def gen(family, n, rows, cols, p, seed, spine, leaves, out) -> None:
    """Write a benchmark graph file."""
    req = service.GenRequest(
        family=family, n=n, rows=rows, cols=cols, p=p,
        seed=seed, spine=spine, leaves=leaves,
    )
    try:
        resp = service.handle_gen(req)
    except ValueError as exc:
        raise _usage(exc)
    artifacts.write_json(out, resp.graph)
    click.echo(f"{out}: {family} graph, n={resp.graph['n']}, {len(resp.graph['edges'])} edges")


@main.command("compile")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", type=click.Choice(["tree", "rus", "redundant"]),
              default="tree", show_default=True)
@click.option("--b", type=int, default=4, show_default=True,
              help="Branch count for the tree scheme.")
@click.option("--b-prep", type=int, default=6, show_default=True,
              help="Branches prepared per tree endpoint.")
@click.option("--m", type=int, default=6, show_default=True,
              help="Arm count for rus/redundant schemes.")
@click.option("--hw", type=click.Path(exists=True, dir_okay=False),
              help="JSON file overriding hardware parameters.")
@click.option("--max-caterpillar", type=int, help="Emitter capacity override.")
@click.option("--node-budget", type=int, default=DEFAULT_NODE_BUDGET, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def compile_cmd(graph_path, scheme, b, b_prep, m, hw, max_caterpillar,
                node_budget, out) -> None:
    """Partition a graph and build its generation tree and emission plan."""
    hw_doc = artifacts.read_json(hw) if hw else {}
    if max_caterpillar is not None:
        hw_doc["max_caterpillar"] = max_caterpillar
    try:
        req = service.CompileRequest(
            graph=artifacts.read_json(graph_path),
            scheme=service.SchemeModel(kind=scheme, b=b, b_prep=b_prep, m=m),
            hw=service.HardwareModel(**hw_doc),
            node_budget=node_budget,
        )
    except ValidationError as exc:
        raise _usage(exc)
    started = time.perf_counter()
    try:
        resp = service.handle_compile(req)
    except CapacityError as exc:
        click.echo(f"capacity violation: {exc}", err=True)
        sys.exit(EXIT_CAPACITY)
    except ValueError as exc:
        raise _usage(exc)
    wall_ms = (time.perf_counter() - started) * 1e3
    artifacts.write_json(out, resp.model_dump())
    s = resp.summary
    click.echo(
        f"{out}: K={s['K']} subgraphs={s['subgraphs']} height={s['height']} "
        f"critical_path={s['critical_path']} photon_sources={s['photon_sources']}"
    )
    # wall time goes to the console only, never into the artifact
    click.echo(f"compile wall time {wall_ms:.1f} ms")
    if s["heuristic"]:
        click.echo("warning: cut search hit its node budget, result is heuristic",
                   err=True)
        sys.exit(EXIT_HEURISTIC)


def _run_row(resp: service.SimulateResponse) -> dict:
    scheme = resp.config["scheme"]
    noise = resp.config["noise"]
    row = {
        "scheme": scheme["kind"],
        "size": scheme["b"] if scheme["kind"] == "tree" else scheme["m"],
        "b_prep": scheme.get("b_prep"),
        "p_fail": noise["p_fail"],
        "p_eras": noise["p_eras"],
        "seed": noise["rng_seed"],
        "cycles": resp.config["cycles"],
        "time_cap": resp.config["time_cap"],
        "config_hash": resp.config_hash,
    }
    row.update(resp.metrics)
    row["config"] = artifacts.canonical_json(resp.config)
    return row


@main.command()
@click.argument("artifact_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--p-fail", type=float, default=0.0, show_default=True)
@click.option("--p-eras", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cycles", type=int, default=DEFAULT_CYCLES, show_default=True)
@click.option("--time-cap", type=float, default=DEFAULT_TIME_CAP, show_default=True,
              help="Simulated-time budget in ns.")
@click.option("--trace", type=click.Path(dir_okay=False),
              help="Also write a JSONL event trace here.")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def simulate(artifact_path, p_fail, p_eras, seed, cycles, time_cap, trace, out) -> None:
    """Run the timed pipeline on a compile artifact; write a metrics CSV."""
    req = service.SimulateRequest(
        artifact=artifacts.read_json(artifact_path),
        p_fail=p_fail, p_eras=p_eras, seed=seed,
        cycles=cycles, time_cap=time_cap, trace=trace is not None,
    )
    try:
        resp = service.handle_simulate(req)
    except ValueError as exc:
        raise _usage(exc)
    fields = artifacts.RUN_FIELDS + METRIC_FIELDS + ("config",)
    artifacts.write_csv(out, [_run_row(resp)], fields)
    if trace:
        lines = [artifacts.canonical_json(event) for event in resp.trace]
        Path(trace).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    m = resp.metrics
    avg = "n/a" if m["avg_exec_time"] is None else f"{m['avg_exec_time']:.3f} ns"
    click.echo(
        f"{out}: shots={m['shots_succeeded']}/{m['cycles_run']} cycles, "
        f"avg_exec_time={avg}"
    )
    if m["no_shot"]:
        click.echo("warning: no shot completed within the budget", err=True)
        sys.exit(EXIT_NO_SHOT)


@main.command()
@click.argument("grid_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads for sweep cells.")
@click.option("--artifact", type=click.Path(exists=True, dir_okay=False),
              help="Compile artifact: adds end-to-end pipeline columns per cell.")
@click.option("--cycles", type=int, default=2000, show_default=True,
              help="Pipeline cycles per cell (with --artifact).")
@click.option("--time-cap", type=float, default=DEFAULT_TIME_CAP, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def sweep(grid_path, workers, artifact, cycles, time_cap, out) -> None:
    """Monte Carlo success-rate table over a scheme/noise grid file."""
    grid = artifacts.read_json(grid_path)
    try:
        req = service.SweepRequest(
            schemes=[service.SchemeModel(**doc) for doc in grid["schemes"]],
            p_fail=grid["p_fail"],
            p_eras=grid["p_eras"],
            trials=grid.get("trials", 1000),
            seed=grid.get("seed", 0),
            workers=workers,
            artifact=artifacts.read_json(artifact) if artifact else None,
            cycles=cycles,
            time_cap=time_cap,
        )
    except (KeyError, TypeError, ValidationError) as exc:
        raise _usage(exc)
    try:
        resp = service.handle_sweep(req)
    except CapacityError as exc:
        click.echo(f"capacity violation: {exc}", err=True)
        sys.exit(EXIT_CAPACITY)
    except ValueError as exc:
        raise _usage(exc)
    fields = resp.fieldnames + ["config_hash", "config"]
    config_json = artifacts.canonical_json(resp.config)
    rows = [
        {**row, "config_hash": resp.config_hash, "config": config_json}
        for row in resp.rows
    ]
    artifacts.write_csv(out, rows, fields)
    click.echo(f"{out}: {len(rows)} cells")


@main.command()
@click.argument("csv_paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--summary", type=click.Path(dir_okay=False),
              help="Also write per-column summary statistics as JSON.")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def report(csv_paths, summary, out) -> None:
    """Merge metrics/sweep CSVs and print summary statistics."""
    texts = [Path(p).read_text(encoding="utf-8") for p in csv_paths]
    try:
        resp = service.handle_report(service.ReportRequest(csvs=texts))
    except ValueError as exc:
        raise _usage(exc)
    Path(out).write_text(resp.csv, encoding="utf-8")
    if summary:
        artifacts.write_json(summary, resp.summary)
    click.echo(f"{out}: merged {len(csv_paths)} files")
    for name, stats in resp.summary.items():
        click.echo(
            f"  {name}: mean={stats['mean']:.6g} min={stats['min']:.6g} "
            f"max={stats['max']:.6g} n={stats['count']}"
        )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(service.app, host=host, port=port)


if __name__ == "__main__":
    main()
