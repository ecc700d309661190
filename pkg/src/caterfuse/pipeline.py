"""Timed Monte Carlo simulation of the caterpillar generation pipeline.

The GenerationTree is run as a pipeline of stations.  Each leaf station
emits its subgraph's caterpillar once per timestep; each internal
station consumes its two children's outputs and attempts the logical
fusions assigned to that tree node, all of which must succeed in the
same timestep for the merge to happen.  Every station holds at most one
finished product, so a stalled parent back-pressures its whole subtree.

On a merge failure the fresher child's product is destroyed and that
child's subtree is flushed (regeneration restarts from the leaves,
which re-emit immediately), while the sibling's product waits in a
delay line.  Any product waiting longer than ``max_delay_layers``
timesteps is discarded.  All stages are fully pipelined: under zero
noise every station acts every timestep and one shot completes per
timestep once the warm-up of ``pipeline_depth`` timesteps has passed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fusion import NoiseParams, SchemeConfig, TreeEncoded, simulate_logical_fusion
from .graphstate import CaterpillarSpec
from .partitioner import CapacityError, CutSolution, GenerationTree, TreeNode

BRANCH_SEGMENT_PHOTONS = 5  # 4-qubit branch segment plus one cut photon

DEFAULT_CYCLES = 20_000
DEFAULT_TIME_CAP = 2.0e5
SCHEME_COMPARISON_TIME_CAP = 6.0e5


@dataclass(frozen=True)
class HardwareConfig:
    """Emitter and clock parameters of the photonic hardware.

    ``timestep`` must cover one full-size caterpillar emission
    (``t_init + t_emit_per_qubit * max_caterpillar``); feed-forward is
    absorbed inside the timestep and only bounded by it.  ``sigma_osrp``
    is charged ``osrp_per_leaf_site`` times per leaf-bearing main-path
    qubit of the emission plan.
    """

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

    def __post_init__(self):
        for name in ("t_init", "t_emit_per_qubit", "timestep", "feedforward_latency", "t2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_caterpillar < 1:
            raise ValueError("max_caterpillar must be at least 1")
        if self.max_delay_layers < 1:
            raise ValueError("max_delay_layers must be at least 1")
        full_emission = self.t_init + self.t_emit_per_qubit * self.max_caterpillar
        if self.timestep + 1e-9 < full_emission:
            raise ValueError("timestep too short for a full caterpillar emission")
        if self.feedforward_latency >= self.timestep:
            raise ValueError("feedforward_latency must stay below one timestep")
        for name in ("sigma_fus", "sigma_osrp"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.osrp_per_leaf_site < 0:
            raise ValueError("osrp_per_leaf_site must be non-negative")

    def to_doc(self) -> dict:
        return {
            "t_init": self.t_init,
            "t_emit_per_qubit": self.t_emit_per_qubit,
            "max_caterpillar": self.max_caterpillar,
            "timestep": self.timestep,
            "max_delay_layers": self.max_delay_layers,
            "feedforward_latency": self.feedforward_latency,
            "t2": self.t2,
            "sigma_fus": self.sigma_fus,
            "sigma_osrp": self.sigma_osrp,
            "osrp_per_leaf_site": self.osrp_per_leaf_site,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "HardwareConfig":
        return cls(**doc)


# -- emission planning ----------------------------------------------------------


@dataclass(frozen=True)
class EmissionSource:
    """One photon source firing every timestep.

    ``site`` is the main-path vertex a branch source feeds; caterpillar
    sources carry ``site=None``.
    """

    source_id: int
    kind: str
    subgraph: int
    site: int | None
    qubits: int
    emit_time: float

    def to_doc(self) -> dict:
        return {
            "source_id": self.source_id,
            "kind": self.kind,
            "subgraph": self.subgraph,
            "site": self.site,
            "qubits": self.qubits,
            "emit_time": self.emit_time,
        }


@dataclass(frozen=True)
class EmissionPlan:
    caterpillars: tuple[CaterpillarSpec, ...]
    sources: tuple[EmissionSource, ...]
    photon_sources: int
    photons_per_cycle: int
    osrp_sites: int

    def to_doc(self) -> dict:
        return {
            "caterpillars": [
                {
                    "main_path": list(cat.main_path),
                    "leaves": {str(v): list(ls) for v, ls in cat.leaves.items()},
                }
                for cat in self.caterpillars
            ],
            "sources": [s.to_doc() for s in self.sources],
            "photon_sources": self.photon_sources,
            "photons_per_cycle": self.photons_per_cycle,
            "osrp_sites": self.osrp_sites,
        }


def plan_emissions(
    tree: GenerationTree,
    cut: CutSolution,
    scheme: SchemeConfig,
    hw: HardwareConfig,
) -> EmissionPlan:
    """Lay out one caterpillar source per subgraph plus branch sources.

    Each cut-edge endpoint gets ``scheme.size`` leaves on its main-path
    vertex; a vertex incident to several cut edges gets that many leaf
    groups.  Tree-encoded fusions additionally need prepared branch
    states, emitted by chains of 5-photon segments: one endpoint needs
    ``ceil(b_prep * 5 / max_caterpillar)`` branch sources.  Rejects any
    caterpillar that outgrows the emitter.
    """
    del tree  # the plan depends only on the cut structure
    sg_of = {v: i for i, sub in enumerate(cut.subgraphs) for v in sub}
    incid = {v: 0 for v in sg_of}
    for u, v in cut.cut_edges:
        incid[u] += 1
        incid[v] += 1

    next_id = max(sg_of) + 1 if sg_of else 0
    cats = []
    for sub in cut.subgraphs:
        leaves = {}
        for v in sub:
            if incid[v]:
                k = scheme.size * incid[v]
                leaves[v] = tuple(range(next_id, next_id + k))
                next_id += k
        cat = CaterpillarSpec(main_path=sub, leaves=leaves)
        if cat.total_qubits > hw.max_caterpillar:
            raise CapacityError(
                f"subgraph starting at vertex {sub[0]} needs {cat.total_qubits} "
                f"qubits, over the {hw.max_caterpillar}-qubit emitter capacity"
            )
        cats.append(cat)

    sources = [
        EmissionSource(
            source_id=i,
            kind="caterpillar",
            subgraph=i,
            site=None,
            qubits=cat.total_qubits,
            emit_time=hw.t_init + hw.t_emit_per_qubit * cat.total_qubits,
        )
        for i, cat in enumerate(cats)
    ]
    if isinstance(scheme, TreeEncoded):
        if hw.max_caterpillar < BRANCH_SEGMENT_PHOTONS:
            raise CapacityError("emitter cannot hold a single branch segment")
        per_chain = hw.max_caterpillar // BRANCH_SEGMENT_PHOTONS
        for i, sub in enumerate(cut.subgraphs):
            for v in sub:
                for _ in range(incid[v]):
                    remaining = scheme.b_prep
                    while remaining > 0:
                        segments = min(remaining, per_chain)
                        q = segments * BRANCH_SEGMENT_PHOTONS
                        sources.append(
                            EmissionSource(
                                source_id=len(sources),
                                kind="branch",
                                subgraph=i,
                                site=v,
                                qubits=q,
                                emit_time=hw.t_init + hw.t_emit_per_qubit * q,
                            )
                        )
                        remaining -= segments

    osrp_sites = sum(
        1 for cat in cats for v in cat.main_path if cat.leaves.get(v)
    )
    return EmissionPlan(
        caterpillars=tuple(cats),
        sources=tuple(sources),
        photon_sources=len(sources),
        photons_per_cycle=sum(s.qubits for s in sources),
        osrp_sites=osrp_sites,
    )


# -- pipeline state machine ------------------------------------------------------


def pipeline_depth(tree: GenerationTree) -> int:
    """Warm-up timesteps before the first zero-noise shot completes.

    A leaf fills after one emission timestep, plus one more if it has
    self-fusions; an internal node fills one timestep after its slower
    child.
    """

    def fill(node: TreeNode) -> int:
        if node.is_leaf:
            return 1 + (1 if node.fusions else 0)
        return 1 + max(fill(c) for c in node.children)

    return fill(tree.root) - 1


@dataclass
class _Product:
    born: int  # timestep of the earliest emission among constituents
    created: int  # timestep the product became available
    delay: int = 0


class _Station:
    __slots__ = ("index", "node", "parent", "children", "end", "fusions", "photons")

    def __init__(self, index: int, node: TreeNode, parent: int):
        self.index = index
        self.node = node
        self.parent = parent
        self.children: list[int] = []
        self.end = index + 1
        self.fusions = node.fusions
        self.photons = 0


def _index_tree(tree: GenerationTree) -> list[_Station]:
    stations: list[_Station] = []

    def walk(node: TreeNode, parent: int) -> int:
        st = _Station(len(stations), node, parent)
        stations.append(st)
        for child in node.children:
            st.children.append(walk(child, st.index))
        st.end = len(stations)
        return st.index

    walk(tree.root, -1)
    return stations


class PipelineState:
    """Mutable per-run state: one slot and one raw buffer per station."""

    def __init__(
        self,
        tree: GenerationTree,
        cut: CutSolution,
        scheme: SchemeConfig,
        hw: HardwareConfig,
    ):
        self.hw = hw
        self.plan = plan_emissions(tree, cut, scheme, hw)
        self.stations = _index_tree(tree)
        sg_photons = {
            i: cat.total_qubits for i, cat in enumerate(self.plan.caterpillars)
        }
        for src in self.plan.sources:
            if src.kind == "branch":
                sg_photons[src.subgraph] += src.qubits
        for st in self.stations:
            if not st.children:
                st.photons = sg_photons[st.node.subgraph_ids[0]]
        n = len(self.stations)
        self.slot: list[_Product | None] = [None] * n
        self.raw: list[_Product | None] = [None] * n
        self.pending: list[_Product | None] = [None] * n
        self.busy_until = [-1] * n
        self.t = 0
        self.shots = 0
        self.makespan_steps = 0
        self.total_fusions = 0
        self.photons_emitted = 0
        self.discards = 0


def step(state, scheme, noise, rng, trace_sink=None) -> "PipelineState":
    """Advance the pipeline by one timestep.

    Order inside a timestep: internal merges root-first (a slot freed by
    the parent is refilled by its own station in the same pass), leaf
    self-fusion stages, fresh emissions, landing of in-flight merges,
    shot delivery, then delay aging and discards.
    """
    state.t += 1
    t = state.t
    stations = state.stations

    def note(**kw):
        if trace_sink is not None:
            trace_sink({"t": t, **kw})

    def flush(root_index: int):
        for i in range(root_index, stations[root_index].end):
            state.slot[i] = None
            state.raw[i] = None
            state.pending[i] = None
            state.busy_until[i] = -1

    def attempt(st, born: int) -> bool:
        results = [simulate_logical_fusion(scheme, noise, rng) for _ in st.fusions]
        state.total_fusions += sum(r.physical_fusions for r in results)
        duration = max((r.timesteps for r in results), default=1)
        success = all(r.success for r in results)
        state.busy_until[st.index] = t + duration - 1
        if success:
            state.pending[st.index] = _Product(born=born, created=t)
        note(
            node=st.index,
            event="merge",
            edges=[list(e) for e in st.fusions],
            success=success,
            duration=duration,
        )
        return success

    for st in stations:
        if not st.children:
            continue
        i = st.index
        if (
            state.slot[i] is not None
            or state.pending[i] is not None
            or state.busy_until[i] >= t
        ):
            continue
        li, ri = st.children
        left, right = state.slot[li], state.slot[ri]
        if left is None or right is None:
            continue
        state.slot[li] = None
        state.slot[ri] = None
        if not attempt(st, min(left.born, right.born)):
            # regenerate the fresher side, keep the other waiting
            if left.created >= right.created:
                failed, kept, kept_at = li, right, ri
            else:
                failed, kept, kept_at = ri, left, li
            flush(failed)
            state.slot[kept_at] = kept
            note(node=i, event="restart", child=failed)

    for st in stations:
        if st.children:
            continue
        i = st.index
        if st.fusions:
            if (
                state.raw[i] is not None
                and state.slot[i] is None
                and state.pending[i] is None
                and state.busy_until[i] < t
            ):
                raw = state.raw[i]
                state.raw[i] = None
                attempt(st, raw.born)
            if state.raw[i] is None:
                state.raw[i] = _Product(born=t, created=t)
                state.photons_emitted += st.photons
                note(node=i, event="emit", photons=st.photons)
        elif state.slot[i] is None:
            state.slot[i] = _Product(born=t, created=t)
            state.photons_emitted += st.photons
            note(node=i, event="emit", photons=st.photons)

    for st in stations:
        i = st.index
        if state.pending[i] is not None and state.busy_until[i] <= t:
            prod = state.pending[i]
            prod.created = t
            state.pending[i] = None
            state.slot[i] = prod
            note(node=i, event="ready")

    if state.slot[0] is not None:
        prod = state.slot[0]
        state.slot[0] = None
        state.shots += 1
        state.makespan_steps += t - prod.born + 1
        note(node=0, event="shot", makespan_steps=t - prod.born + 1)

    for st in stations:
        i = st.index
        for buf in (state.slot, state.raw):
            prod = buf[i]
            if prod is not None and prod.created < t:
                prod.delay += 1
                if prod.delay > state.hw.max_delay_layers:
                    buf[i] = None
                    state.discards += 1
                    note(node=i, event="discard", waited=prod.delay)
    return state


# -- metrics ----------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineMetrics:
    """Per-run aggregates; fidelities are nan when no shot completed."""

    cycles_run: int
    shots_succeeded: int
    avg_exec_time: float
    photon_sources: int
    total_fusions: int
    f_de: float
    f_fus: float
    f_osrp: float
    depth: int
    total_time: float
    photons_emitted: int
    avg_shot_makespan: float
    no_shot: bool
    truncated: bool

    def to_doc(self) -> dict:
        def jsonable(x):
            if isinstance(x, float) and math.isnan(x):
                return None
            return x

        return {name: jsonable(getattr(self, name)) for name in METRIC_FIELDS}


METRIC_FIELDS = (
    "cycles_run",
    "shots_succeeded",
    "avg_exec_time",
    "photon_sources",
    "total_fusions",
    "f_de",
    "f_fus",
    "f_osrp",
    "depth",
    "total_time",
    "photons_emitted",
    "avg_shot_makespan",
    "no_shot",
    "truncated",
)


def run(
    tree: GenerationTree,
    cut: CutSolution,
    scheme: SchemeConfig,
    noise: NoiseParams,
    hw: HardwareConfig | None = None,
    cycles: int = DEFAULT_CYCLES,
    time_cap: float = DEFAULT_TIME_CAP,
    trace_sink=None,
) -> PipelineMetrics:
    """Simulate ``cycles`` timesteps (or until ``time_cap`` ns elapse).

    ``avg_exec_time`` divides total simulated time by successful shots;
    F_de uses the plan's photon-source count and the mean per-shot
    makespan; F_fus uses the mean physical fusion count per shot.  The
    run is a pure function of its arguments (``noise.rng_seed`` included).
    """
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    if time_cap <= 0:
        raise ValueError("time_cap must be positive")
    hw = hw if hw is not None else HardwareConfig()
    state = PipelineState(tree, cut, scheme, hw)
    rng = noise.rng()
    budget = min(cycles, int(time_cap // hw.timestep))
    for _ in range(budget):
        step(state, scheme, noise, rng, trace_sink)

    total_time = budget * hw.timestep
    no_shot = state.shots == 0
    if no_shot:
        avg_exec = t_gen = f_de = f_fus = float("nan")
    else:
        avg_exec = total_time / state.shots
        t_gen = state.makespan_steps * hw.timestep / state.shots
        f_de = fidelity_decoherence(state.plan.photon_sources, t_gen, hw.t2)
        f_fus = fidelity_fusion(hw.sigma_fus, state.total_fusions / state.shots)
    f_osrp = hw.sigma_osrp ** (state.plan.osrp_sites * hw.osrp_per_leaf_site)
    return PipelineMetrics(
        cycles_run=budget,
        shots_succeeded=state.shots,
        avg_exec_time=avg_exec,
        photon_sources=state.plan.photon_sources,
        total_fusions=state.total_fusions,
        f_de=f_de,
        f_fus=f_fus,
        f_osrp=f_osrp,
        depth=pipeline_depth(tree),
        total_time=total_time,
        photons_emitted=state.photons_emitted,
        avg_shot_makespan=t_gen,
        no_shot=no_shot,
        truncated=budget < cycles,
    )


# -- fidelity models ---------------------------------------------------------------


def fidelity_decoherence(n_emitters: int, t_gen: float, t2: float) -> float:
    """Dephasing fidelity exp(-n_emitters * t_gen / t2)."""
    if n_emitters < 0:
        raise ValueError("n_emitters must be non-negative")
    if t_gen < 0:
        raise ValueError("t_gen must be non-negative")
    if t2 <= 0:
        raise ValueError("t2 must be positive")
    return math.exp(-n_emitters * t_gen / t2)


def t2_from_state_fidelity(n_qubits: int, t_gen: float, f_state: float) -> float:
    """Dephasing time that reproduces a measured state fidelity."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    if t_gen <= 0:
        raise ValueError("t_gen must be positive")
    if not 0.0 < f_state < 1.0:
        raise ValueError("f_state must lie strictly between 0 and 1")
    return -n_qubits * t_gen / math.log(f_state)


def fidelity_fusion(sigma: float, n: float) -> float:
    """Coherent fusion fidelity sigma**n; n may be a per-shot average."""
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    return sigma**n
