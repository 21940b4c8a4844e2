"""Compromise models, delivery reliability, and coordinated MITM outcomes.

A disjoint path is secure when none of its intermediate relays is
compromised. Key-exchange reliability over rho paths whose relays fail
independently with probability p is

    R = 1 - (1 - (1 - p)^de)^rho

and a coordinated substitution attack wins exactly when at least theta of
the rho paths carry a compromised relay, since that lets the attacker feed
theta mutually consistent forged shares to the destination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .netmodel import assign_keyrings, build_overlay
from .paths import Path, max_vertex_disjoint_paths
from .streams import child_seed, np_stream, stream

OBSERVE = "observe"
SUBSTITUTE_SHARES = "substitute-shares"


@dataclass(frozen=True)
class AdversarySpec:
    """Which nodes fall and what they may do. model "fraction" compromises
    each non-principal i.i.d.; model "count" picks exactly `count` of them."""
    model: str
    fraction: float = 0.0
    count: int = 0
    capabilities: frozenset = field(default_factory=lambda: frozenset({OBSERVE}))
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("fraction", "count"):
            raise ValueError("model must be 'fraction' or 'count'")
        if self.model == "fraction" and not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")
        if self.model == "count" and self.count < 0:
            raise ValueError("count must be non-negative")
        unknown = set(self.capabilities) - {OBSERVE, SUBSTITUTE_SHARES}
        if unknown:
            raise ValueError(f"unknown capabilities: {sorted(unknown)}")


def compromise(net, spec: AdversarySpec, exclude=()) -> frozenset[int]:
    """Deterministic compromised set for `spec.seed`. `exclude` carries
    the principals, which are never compromised."""
    n = net if isinstance(net, int) else net.n
    excluded = set(exclude)
    candidates = [v for v in range(n) if v not in excluded]
    rng = stream(spec.seed, "compromise")
    if spec.model == "fraction":
        return frozenset(v for v in candidates if rng.random() < spec.fraction)
    if spec.count > len(candidates):
        raise ValueError("cannot compromise more nodes than exist outside the principals")
    return frozenset(rng.sample(candidates, spec.count))


@dataclass(frozen=True)
class ReliabilityParams:
    p: float  # per-relay compromise probability
    de: int  # decrypt-encrypt relays per path
    rho: int  # disjoint paths

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.de < 0 or self.rho < 1:
            raise ValueError("de must be >= 0 and rho >= 1")


def reliability_analytic(params: ReliabilityParams) -> float:
    """Probability at least one of rho paths has all de relays honest."""
    per_path_clean = (1.0 - params.p) ** params.de
    return 1.0 - (1.0 - per_path_clean) ** params.rho


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int


def monte_carlo_reliability(params: ReliabilityParams, trials: int,
                            seed: int) -> MonteCarloEstimate:
    """Node-level simulation: rho independent paths of de relays each,
    compromised i.i.d. with probability p. Independent of the closed form."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np_stream(seed, "mc-reliability")
    successes = 0
    remaining = trials
    batch = max(1, min(trials, 200_000 // max(1, params.rho * max(params.de, 1))))
    while remaining > 0:
        m = min(batch, remaining)
        if params.de == 0:
            successes += m  # zero-relay paths cannot be compromised
        else:
            draws = rng.random((m, params.rho, params.de))
            clean_path = (draws >= params.p).all(axis=2)
            successes += int(clean_path.any(axis=1).sum())
        remaining -= m
    mean = successes / trials
    stderr = math.sqrt(mean * (1.0 - mean) / trials)
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=trials)


def count_secure_paths(paths, compromised) -> int:
    """Paths with no compromised intermediate; endpoints do not count."""
    bad = set(compromised)
    return sum(1 for p in paths if not bad.intersection(p.intermediates()))


def mitm_outcome(paths, compromised, theta: int) -> bool:
    """True when a coordinated attacker on the compromised nodes can hand
    the destination theta consistent forged shares, i.e. when at least
    theta paths carry a compromised relay. With theta = rho this is exactly
    "every path touched". Monotone in the compromised set."""
    if theta < 1 or theta > len(paths):
        raise ValueError("theta must lie in 1..len(paths)")
    return len(paths) - count_secure_paths(paths, compromised) >= theta


@dataclass(frozen=True)
class SweepRow:
    fraction: float
    trials: int
    mean_secure_paths: float
    std_secure_paths: float
    attack_success_rate: float


def _sweep_trial(n: int, k: int, rho: int, seed: int, trial: int,
                 pair_attempts: int = 64) -> tuple[list[Path], list[float]] | None:
    """One trial: fresh overlay, a pair with rho disjoint paths, and one
    uniform draw per node (thresholded later per fraction)."""
    overlay = build_overlay(assign_keyrings(n, k, child_seed(seed, "sweep-net", trial)))
    rng = stream(seed, "sweep-pair", trial)
    for _ in range(pair_attempts):
        s = rng.randrange(n)
        d = rng.randrange(n)
        if s == d:
            continue
        found = max_vertex_disjoint_paths(overlay, s, d)
        if len(found) >= rho:
            rng_u = stream(seed, "sweep-compromise", trial)
            uniforms = [rng_u.random() for _ in range(n)]
            uniforms[s] = uniforms[d] = 2.0  # principals never fall
            return found[:rho], uniforms
    return None


def attack_sweep(n: int, k: int, rho: int, theta: int, fractions, trials: int,
                 seed: int, jobs: int = 1) -> list[SweepRow]:
    """Secure-path counts and attacker success rate per compromise fraction.

    Each trial reuses one uniform draw per node across all fractions, so
    per-trial outcomes (and therefore the success rate) are exactly
    monotone in the fraction while each fraction still sees i.i.d.
    Bernoulli(fraction) compromise."""
    if not 1 <= theta <= rho:
        raise ValueError("need 1 <= theta <= rho")
    fractions = [float(f) for f in fractions]
    if any(not 0.0 <= f <= 1.0 for f in fractions):
        raise ValueError("fractions must lie in [0, 1]")
    outcomes = _map_trials(
        _sweep_trial, [(n, k, rho, seed, t) for t in range(trials)], jobs)
    rows = []
    for f in fractions:
        secure_counts = []
        successes = 0
        for outcome in outcomes:
            if outcome is None:
                continue
            found, uniforms = outcome
            compromised = {v for v in range(n) if uniforms[v] < f}
            secure = count_secure_paths(found, compromised)
            secure_counts.append(secure)
            if rho - secure >= theta:
                successes += 1
        kept = len(secure_counts)
        mean = sum(secure_counts) / kept if kept else 0.0
        var = sum((c - mean) ** 2 for c in secure_counts) / kept if kept else 0.0
        rows.append(SweepRow(
            fraction=f,
            trials=kept,
            mean_secure_paths=mean,
            std_secure_paths=math.sqrt(var),
            attack_success_rate=successes / kept if kept else 0.0,
        ))
    return rows


def _map_trials(fn, argtuples, jobs: int):
    if jobs <= 1:
        return [fn(*args) for args in argtuples]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *args) for args in argtuples]
        return [f.result() for f in futures]


def crossing_fraction(rows, level: float = 0.5) -> float | None:
    """Smallest swept fraction whose attacker success rate reaches `level`."""
    for row in sorted(rows, key=lambda r: r.fraction):
        if row.attack_success_rate >= level:
            return row.fraction
    return None


@dataclass(frozen=True)
class CensusResult:
    mean_de: float
    path_count: int
    pair_count: int
    skipped: int

    @property
    def skip_rate(self) -> float:
        total = self.pair_count + self.skipped
        return self.skipped / total if total else 0.0


def de_step_census(net, pairs, rho: int) -> CensusResult:
    """Mean decrypt-encrypt relays per disjoint path (overlay length - 1),
    over pairs that have at least rho disjoint paths; others are skipped."""
    overlay = getattr(net, "overlay", net)
    des = []
    kept = 0
    skipped = 0
    for s, d in pairs:
        # Full decomposition first: augmentation finds short paths first, so
        # capping at rho would bias the relay count low.
        found = max_vertex_disjoint_paths(overlay, s, d)
        if len(found) < rho:
            skipped += 1
            continue
        kept += 1
        des.extend(p.hops() - 1 for p in found[:rho])
    mean = sum(des) / len(des) if des else 0.0
    return CensusResult(mean_de=mean, path_count=len(des), pair_count=kept,
                        skipped=skipped)
