"""Boosted-fusion schemes: sampling, closed forms, and tree preparation.

Three ways to protect a fusion against failure and photon loss:

``Redundant``
    m fusions fired in parallel; one timestep.  Any lost photon erases
    the logical fusion, otherwise one physical success suffices.
``RepeatUntilSuccess``
    Sequential attempts, stop at the first non-failure, at most m
    attempts; attempt count equals the timestep count.
``TreeEncoded``
    b branch fusions in parallel on tree-encoded qubits.  A successful
    branch is spliced in with an X-pair measurement; a failed branch
    Z-measures its stem and banks the root-side qubit as a backup; an
    erased branch is absorbed by an indirect Z measurement.  When every
    branch fails or erases and at least one backup pair is banked, one
    extra timestep of bare backup fusions can still rescue the fusion.

The closed forms in :func:`analytic_success` use an additive
loss-plus-failure approximation for the tree scheme; they are exact at
zero erasure.  :func:`physical_success` gives the exact value of the
sampling model implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphstate import FusionOutcome
from .seeding import make_rng


@dataclass(frozen=True)
class NoiseParams:
    """Per-fusion failure probability and per-photon loss probability."""

    p_fail: float
    p_eras: float
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_fail", "p_eras"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    def rng(self) -> np.random.Generator:
        return make_rng("noise", self.rng_seed)


@dataclass(frozen=True)
class Redundant:
    m: int
    name = "redundant"

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("redundant scheme needs m >= 1")

    @property
    def size(self) -> int:
        return self.m


@dataclass(frozen=True)
class RepeatUntilSuccess:
    m: int
    name = "rus"

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("repeat-until-success scheme needs m >= 1")

    @property
    def size(self) -> int:
        return self.m


@dataclass(frozen=True)
class TreeEncoded:
    b: int
    b_prep: int = 6
    name = "tree"

    def __post_init__(self) -> None:
        if self.b < 1:
            raise ValueError("tree scheme needs b >= 1")
        if self.b_prep < self.b:
            raise ValueError("b_prep must be at least b")

    @property
    def size(self) -> int:
        return self.b


SchemeConfig = Redundant | RepeatUntilSuccess | TreeEncoded


@dataclass(frozen=True)
class LogicalFusionResult:
    """Outcome of one logical fusion attempt.

    ``success`` includes a tree-scheme backup-round rescue;
    ``primary_success`` counts only the main fusion round and is the
    quantity the closed-form success rates describe.  ``outcome_trace``
    lists ``(stage, index, outcome)`` triples, enough to replay the
    attempt on an explicit graph.
    """

    success: bool
    primary_success: bool
    erased: bool
    physical_fusions: int
    photons_consumed: int
    timesteps: int
    outcome_trace: tuple[tuple[str, int, FusionOutcome], ...]


@dataclass(frozen=True)
class PrepResult:
    """Tree-branch preparation bookkeeping for one logical qubit."""

    branches_ready: int
    timesteps: int
    photons: int
    overflow: bool


def sample_physical_fusion(noise: NoiseParams, rng: np.random.Generator) -> FusionOutcome:
    """One type-II fusion attempt: lose each photon, then draw failure.

    Both photons are lost independently with ``p_eras``; only when both
    are detected does the failure draw happen, with ``p_fail``.
    """
    lost_a = rng.random() < noise.p_eras
    lost_b = rng.random() < noise.p_eras
    if lost_a and lost_b:
        return FusionOutcome.ERASURE_BOTH
    if lost_a:
        return FusionOutcome.ERASURE_A
    if lost_b:
        return FusionOutcome.ERASURE_B
    if rng.random() < noise.p_fail:
        return FusionOutcome.FAILURE
    return FusionOutcome.SUCCESS


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def analytic_success(scheme: SchemeConfig, noise: NoiseParams) -> float:
    """Closed-form logical success rate of the main fusion round.

    Redundant is exact; repeat-until-success and tree use the additive
    approximation that treats per-attempt loss and failure as exclusive,
    so they are exact at ``p_eras = 0`` and optimistic-to-pessimistic by
    O(p_fail * p_eras) elsewhere.  Values are clamped to [0, 1].
    """
    f, e = noise.p_fail, noise.p_eras
    if isinstance(scheme, Redundant):
        s = (1.0 - f**scheme.m) * (1.0 - e) ** (2 * scheme.m)
    elif isinstance(scheme, RepeatUntilSuccess):
        s = 1.0 - sum(f**i * 2.0 * e for i in range(scheme.m)) - f**scheme.m
    elif isinstance(scheme, TreeEncoded):
        s = 1.0 - (1.0 - (1.0 - e) ** 2 + f) ** scheme.b
    else:
        raise TypeError(f"unknown scheme {scheme!r}")
    return _clamp(s)


def physical_success(scheme: SchemeConfig, noise: NoiseParams) -> float:
    """Exact main-round success rate of the sampling model."""
    f, e = noise.p_fail, noise.p_eras
    both = (1.0 - e) ** 2  # both photons of one attempt detected
    if isinstance(scheme, Redundant):
        return (1.0 - f**scheme.m) * (1.0 - e) ** (2 * scheme.m)
    if isinstance(scheme, RepeatUntilSuccess):
        return sum((both * f) ** i * both * (1.0 - f) for i in range(scheme.m))
    if isinstance(scheme, TreeEncoded):
        bad = (1.0 - both) + both * f
        return 1.0 - bad**scheme.b
    raise TypeError(f"unknown scheme {scheme!r}")


def simulate_logical_fusion(
    scheme: SchemeConfig, noise: NoiseParams, rng: np.random.Generator
) -> LogicalFusionResult:
    """Sample one logical fusion under the given scheme."""
    if isinstance(scheme, Redundant):
        return _simulate_redundant(scheme, noise, rng)
    if isinstance(scheme, RepeatUntilSuccess):
        return _simulate_rus(scheme, noise, rng)
    if isinstance(scheme, TreeEncoded):
        return _simulate_tree(scheme, noise, rng)
    raise TypeError(f"unknown scheme {scheme!r}")


def _simulate_redundant(
    scheme: Redundant, noise: NoiseParams, rng: np.random.Generator
) -> LogicalFusionResult:
    outcomes = [sample_physical_fusion(noise, rng) for _ in range(scheme.m)]
    erased = any(o.erased for o in outcomes)
    success = not erased and any(o is FusionOutcome.SUCCESS for o in outcomes)
    return LogicalFusionResult(
        success=success,
        primary_success=success,
        erased=erased,
        physical_fusions=scheme.m,
        photons_consumed=2 * scheme.m,
        timesteps=1,
        outcome_trace=tuple(("main", i, o) for i, o in enumerate(outcomes)),
    )


def _simulate_rus(
    scheme: RepeatUntilSuccess, noise: NoiseParams, rng: np.random.Generator
) -> LogicalFusionResult:
    trace: list[tuple[str, int, FusionOutcome]] = []
    success = False
    erased = False
    for i in range(scheme.m):
        outcome = sample_physical_fusion(noise, rng)
        trace.append(("main", i, outcome))
        if outcome is FusionOutcome.SUCCESS:
            success = True
            break
        if outcome.erased:
            erased = True
            break
    attempts = len(trace)
    return LogicalFusionResult(
        success=success,
        primary_success=success,
        erased=erased,
        physical_fusions=attempts,
        photons_consumed=2 * attempts,
        timesteps=attempts,
        outcome_trace=tuple(trace),
    )


def _simulate_tree(
    scheme: TreeEncoded, noise: NoiseParams, rng: np.random.Generator
) -> LogicalFusionResult:
    main = [sample_physical_fusion(noise, rng) for _ in range(scheme.b)]
    trace = [("main", i, o) for i, o in enumerate(main)]
    primary = any(o is FusionOutcome.SUCCESS for o in main)
    fusions = scheme.b
    photons = 2 * scheme.b
    timesteps = 1
    success = primary
    erased = False
    if not primary:
        # Backups exist only for failed branches; erased branches were
        # consumed by their own indirect-Z recovery.
        backups = [i for i, o in enumerate(main) if o is FusionOutcome.FAILURE]
        if backups:
            timesteps = 2
            fusions += len(backups)
            photons += 2 * len(backups)
            rescue = []
            for i in backups:
                outcome = sample_physical_fusion(noise, rng)
                trace.append(("backup", i, outcome))
                rescue.append(outcome)
            # A lost backup photon sits right next to the root qubit, so
            # any erasure here poisons the logical fusion outright.
            erased = any(o.erased for o in rescue)
            success = not erased and any(o is FusionOutcome.SUCCESS for o in rescue)
    return LogicalFusionResult(
        success=success,
        primary_success=primary,
        erased=erased,
        physical_fusions=fusions,
        photons_consumed=photons,
        timesteps=timesteps,
        outcome_trace=tuple(trace),
    )


def prepare_tree_logical(
    b: int,
    b_prep: int,
    noise: NoiseParams,
    rng: np.random.Generator,
    retry_cap: int = 10,
) -> PrepResult:
    """Attach branches to a logical qubit until ``b`` of them are ready.

    Each timestep fires ``b_prep`` parallel branch-attachment fusions
    (one 4-qubit segment each, plus the qubit sacrificed to cut the
    segment off its source chain: 5 photons per attempt).  Ready
    branches accumulate across timesteps; ``overflow`` reports hitting
    the retry cap before reaching ``b``.
    """
    if b < 1:
        raise ValueError("need b >= 1")
    if b_prep < b:
        raise ValueError("b_prep must be at least b")
    if retry_cap < 1:
        raise ValueError("retry_cap must be positive")
    ready = 0
    rounds = 0
    photons = 0
    while ready < b and rounds < retry_cap:
        rounds += 1
        photons += 5 * b_prep
        for _ in range(b_prep):
            if sample_physical_fusion(noise, rng) is FusionOutcome.SUCCESS:
                ready += 1
    return PrepResult(ready, rounds, photons, overflow=ready < b)


def sweep_cell(
    scheme: SchemeConfig,
    p_fail: float,
    p_eras: float,
    trials: int,
    seed: int,
) -> dict:
    """One Monte Carlo cell of the success-rate table.

    The cell seeds its own generator from the cell coordinates, so the
    result does not depend on which order cells are evaluated in (or on
    which thread evaluates them).
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    noise = NoiseParams(p_fail=p_fail, p_eras=p_eras)
    rng = make_rng(
        "sweep", seed, scheme.name, scheme.size,
        float(p_fail), float(p_eras), trials,
    )
    hits = 0
    timesteps = 0
    photons = 0
    for _ in range(trials):
        result = simulate_logical_fusion(scheme, noise, rng)
        hits += result.primary_success
        timesteps += result.timesteps
        photons += result.photons_consumed
    return {
        "scheme": scheme.name,
        "m_or_b": scheme.size,
        "p_fail": p_fail,
        "p_eras": p_eras,
        "trials": trials,
        "success_rate": hits / trials,
        "mean_timesteps": timesteps / trials,
        "mean_photons": photons / trials,
    }


def sweep_success_rates(
    schemes: list[SchemeConfig],
    p_fail_grid: list[float],
    p_eras_grid: list[float],
    trials: int,
    seed: int,
) -> list[dict]:
    """Monte Carlo success-rate table over a noise grid.

    One row per (scheme, p_fail, p_eras) cell.  ``success_rate`` counts
    main-round successes, matching what the closed forms describe; the
    backup round still shows up in ``mean_timesteps`` and
    ``mean_photons``.
    """
    return [
        sweep_cell(scheme, p_fail, p_eras, trials, seed)
        for scheme in schemes
        for p_fail in p_fail_grid
        for p_eras in p_eras_grid
    ]
