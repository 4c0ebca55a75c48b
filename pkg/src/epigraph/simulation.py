"""Event-driven simulation of the budget-cured SIS contact process.

Infection rate is 1 per infected neighbor (time is rescaled so the infection
rate constant is 1); each infected node is cured at the rate a policy assigns
it, subject to the instantaneous budget sum <= r. Between events all rates
are constant, so exact Gillespie sampling applies: draw an exponential
holding time at the total rate, then pick the event proportionally.

Policies are re-queried after every event. One-node built-ins expose a fast
``pick`` path the engine uses to skip per-event dict building; the general
``decide`` contract (arbitrary allocations, full history access) is always
available and is budget-checked at every event.

Reproducibility: the event stream is driven by a counter-based Philox
generator keyed by SeedSequence; replication i of a run with master seed s
uses SeedSequence((s, i)). Identical inputs and seed give byte-identical
traces.
"""

from __future__ import annotations

import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .crusade import ResilienceTable
from .graph import Graph, NodeSet, _mask_from, cut, cut_after_toggle

DEFAULT_MAX_TIME = 1e6
DEFAULT_MAX_EVENTS = 10**8

TRACE_CSV_HEADER = "time,kind,vertex"
ESTIMATE_CSV_HEADER = "graph,policy,r,reps,mean_tau,se,censored"


class PolicyFault(RuntimeError):
    """A policy broke its contract (budget violation, bad vertex, negative rate)."""


def _seed_entropy(seed) -> tuple[int, ...]:
    if isinstance(seed, (tuple, list)):
        parts = tuple(int(s) for s in seed)
    else:
        parts = (int(seed),)
    if any(s < 0 for s in parts):
        raise ValueError("seeds must be non-negative integers")
    return parts


def _mix(a: int, b: int, c: int) -> int:
    """splitmix64-style integer hash; stable across runs and platforms."""
    x = (a * 0x9E3779B97F4A7C15 + b * 0xBF58476D1CE4E5B9 + c + 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

class CuringPolicy:
    """Allocates curing rates to vertices, re-queried after every event.

    Subclasses implement :meth:`decide`; one-node policies may also set
    ``one_node = True`` and implement :meth:`pick` (return the single vertex
    to cure at full budget, or None) so the engine can skip dict building.
    ``decide`` must be deterministic given (t, infected, history) and the
    policy's own seed.
    """

    name = "abstract"
    one_node = False

    def prepare(self, graph: Graph, budget: float, context: Optional[ResilienceTable] = None) -> None:
        self.graph = graph
        self.budget = float(budget)
        self.context = context

    def decide(self, t, infected: NodeSet, graph: Graph, context=None, history=None) -> dict[int, float]:
        raise NotImplementedError

    def pick(self, t: float, mask: int, n_events: int) -> Optional[int]:
        raise NotImplementedError


class _OneNodePolicy(CuringPolicy):
    one_node = True

    def decide(self, t, infected, graph, context=None, history=None):
        if not hasattr(self, "budget"):
            raise PolicyFault(f"policy {self.name} used before prepare()")
        v = self.pick(t, int(infected), len(history) if history is not None else 0)
        return {} if v is None else {v: self.budget}


class NonePolicy(_OneNodePolicy):
    """Allocates nothing; the epidemic runs uncontrolled."""

    name = "none"

    def pick(self, t, mask, n_events):
        return None


class MaxDegreeInfected(_OneNodePolicy):
    """Full budget on the highest-degree infected vertex, lowest id on ties."""

    name = "max_degree_infected"

    def prepare(self, graph, budget, context=None):
        super().prepare(graph, budget, context)
        self._order = sorted(range(graph.n), key=lambda v: (-graph.deg[v], v))

    def pick(self, t, mask, n_events):
        if mask == 0:
            return None
        for v in self._order:
            if (mask >> v) & 1:
                return v
        return None


class RandomInfected(_OneNodePolicy):
    """Full budget on an infected vertex chosen by seeded hashing.

    The choice is a pure function of (seed, event index, infected set), so a
    trace is reproducible and replications with distinct seeds decouple.
    """

    name = "random_infected"

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def pick(self, t, mask, n_events):
        k = mask.bit_count()
        if k == 0:
            return None
        idx = _mix(self.seed, n_events, mask) % k
        m = mask
        for _ in range(idx):
            m ^= m & -m
        return (m & -m).bit_length() - 1


class DegreeProportional(CuringPolicy):
    """Budget split over infected vertices proportionally to their degrees."""

    name = "degree_proportional"

    def decide(self, t, infected, graph, context=None, history=None):
        mask = int(infected)
        if mask == 0:
            return {}
        budget = getattr(self, "budget", 0.0)
        vs = [v for v in range(graph.n) if (mask >> v) & 1]
        total = sum(graph.deg[v] for v in vs)
        if total == 0:
            return {}
        return {v: budget * graph.deg[v] / total for v in vs}


class MaxCutDrop(_OneNodePolicy):
    """Full budget on the infected vertex whose cure lowers the cut most."""

    name = "max_cut_drop"

    def pick(self, t, mask, n_events):
        if mask == 0:
            return None
        g = self.graph
        best = None
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            after = cut_after_toggle(g, mask, 0, v)  # offset-free: compare deltas only
            if best is None or after < best[0]:
                best = (after, v)
            m ^= low
        return best[1]


class ResilienceGreedy(_OneNodePolicy):
    """Full budget on the vertex whose removal minimizes the residual resilience.

    Follows an optimal crusade one removal at a time; needs the full gamma
    table (its own or a shared context one).
    """

    name = "resilience_greedy"

    def __init__(self, table: Optional[ResilienceTable] = None):
        self.table = table

    def prepare(self, graph, budget, context=None):
        super().prepare(graph, budget, context)
        table = self.table or context
        if table is None or table.gamma is None:
            raise PolicyFault("resilience_greedy needs a full resilience table")
        if table.graph != graph:
            raise PolicyFault("resilience table was built for a different graph")
        self._gamma = table.gamma

    def pick(self, t, mask, n_events):
        if mask == 0:
            return None
        gamma = self._gamma
        best = None
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            val = int(gamma[mask ^ low])
            if best is None or val < best[0]:
                best = (val, v)
            m ^= low
        return best[1]


BUILTIN_POLICIES = {
    "none": NonePolicy,
    "random_infected": RandomInfected,
    "max_degree_infected": MaxDegreeInfected,
    "degree_proportional": DegreeProportional,
    "max_cut_drop": MaxCutDrop,
    "resilience_greedy": ResilienceGreedy,
}


def builtin_policy(kind: str, *, seed: Optional[int] = None, table: Optional[ResilienceTable] = None) -> CuringPolicy:
    if kind not in BUILTIN_POLICIES:
        raise ValueError(f"unknown policy {kind!r}; expected one of {sorted(BUILTIN_POLICIES)}")
    if kind == "random_infected":
        return RandomInfected(seed=seed or 0)
    if kind == "resilience_greedy":
        return ResilienceGreedy(table=table)
    return BUILTIN_POLICIES[kind]()


# ---------------------------------------------------------------------------
# Traces and the engine
# ---------------------------------------------------------------------------

@dataclass
class EpidemicTrace:
    """One simulation run: the event log plus extinction/censoring outcome."""

    graph: Graph
    i0: NodeSet
    policy: str
    r: float
    seed: tuple[int, ...]
    events: tuple[tuple[float, int, str], ...]
    tau: Optional[float]
    censored: bool
    censor_reason: Optional[str]
    t_end: float
    n_events: int
    final_infected: NodeSet
    tau_star: Optional[float] = None
    band: Optional["BandReport"] = None

    def serialize(self) -> str:
        rows = [TRACE_CSV_HEADER]
        rows.extend(f"{t!r},{kind},{v}" for t, v, kind in self.events)
        return "\n".join(rows) + "\n"


class HistoryView:
    """Read-only window onto the running event log, handed to policies."""

    __slots__ = ("_events", "_count")

    def __init__(self, events: list, count_ref):
        self._events = events
        self._count = count_ref

    def __len__(self) -> int:
        return self._count[0]

    @property
    def events(self) -> tuple:
        return tuple(self._events)


def simulate(
    g: Graph,
    i0,
    policy: CuringPolicy,
    r: float,
    seed,
    *,
    max_time: float = DEFAULT_MAX_TIME,
    max_events: int = DEFAULT_MAX_EVENTS,
    record_events: bool = True,
    context: Optional[ResilienceTable] = None,
) -> EpidemicTrace:
    """Run one exact Gillespie trajectory until extinction or a cap.

    Hitting a cap censors the run (flagged on the trace, not raised). A
    policy that violates its budget raises :class:`PolicyFault`.
    """
    if r < 0:
        raise ValueError("curing budget r must be >= 0")
    seed_parts = _seed_entropy(seed)
    mask = _mask_from(i0, g.n)
    policy.prepare(g, r, context)
    n = g.n
    if mask == 0:
        return EpidemicTrace(
            graph=g, i0=NodeSet(0, n), policy=policy.name, r=r, seed=seed_parts,
            events=(), tau=0.0, censored=False, censor_reason=None,
            t_end=0.0, n_events=0, final_infected=NodeSet(0, n),
        )

    rng = Generator(Philox(SeedSequence(seed_parts)))
    deg = g.deg
    nbrs = [tuple(NodeSet(a, n)) for a in g.adj]
    cnt = [0] * n
    m = mask
    while m:
        low = m & -m
        for w in nbrs[low.bit_length() - 1]:
            cnt[w] += 1
        m ^= low
    cur_cut = float(cut(g, mask))

    events: list[tuple[float, int, str]] = []
    count_ref = [0]
    history = HistoryView(events, count_ref)
    one_node = policy.one_node
    budget = float(r)
    budget_tol = budget + 1e-9 * max(1.0, budget)
    pick = policy.pick
    log1p = math.log1p
    full = (1 << n) - 1
    # uniform buffer grows geometrically: short runs stay cheap, long runs amortize
    blen = 256
    buf = rng.random(blen).tolist()
    bi = 0

    t = 0.0
    tau = None
    censored = False
    reason = None
    nev = 0
    while True:
        # --- allocation for the current state
        if one_node:
            target = pick(t, mask, nev)
            cure_total = 0.0 if target is None else budget
            alloc_items = None
        else:
            alloc = policy.decide(t, NodeSet(mask, n), g, context, history)
            total_alloc = 0.0
            for v, rate in alloc.items():
                if not 0 <= v < n:
                    raise PolicyFault(f"allocation on nonexistent vertex {v}")
                if rate < 0:
                    raise PolicyFault(f"negative curing rate {rate} on vertex {v}")
                total_alloc += rate
            if total_alloc > budget_tol:
                raise PolicyFault(f"allocation sum {total_alloc} exceeds budget {budget}")
            # rates on healthy vertices are legal but produce no event
            alloc_items = sorted((v, rate) for v, rate in alloc.items() if rate > 0.0 and (mask >> v) & 1)
            cure_total = sum(rate for _, rate in alloc_items)

        total = cur_cut + cure_total
        if total <= 0.0:
            censored, reason = True, "max_time"
            t = max_time
            break

        if bi >= blen:
            if blen < 16384:
                blen *= 8
            buf = rng.random(blen).tolist()
            bi = 0
        u = buf[bi]
        bi += 1
        while u == 0.0:  # keep holding times strictly positive
            if bi >= blen:
                buf = rng.random(blen).tolist()
                bi = 0
            u = buf[bi]
            bi += 1
        t_next = t - log1p(-u) / total
        if t_next > max_time:
            censored, reason = True, "max_time"
            t = max_time
            break
        t = t_next

        if bi >= blen:
            if blen < 16384:
                blen *= 8
            buf = rng.random(blen).tolist()
            bi = 0
        x = buf[bi] * total
        bi += 1

        # --- event selection: healthy vertices ascending, then cures ascending
        if x < cur_cut:
            chosen = -1
            acc = 0.0
            h = full ^ mask
            while h:
                low = h & -h
                v = low.bit_length() - 1
                c = cnt[v]
                if c:
                    acc += c
                    chosen = v
                    if x < acc:
                        break
                h ^= low
            mask |= 1 << chosen
            cur_cut += deg[chosen] - 2 * cnt[chosen]
            for w in nbrs[chosen]:
                cnt[w] += 1
            kind = "infect"
        else:
            if alloc_items is None:
                chosen = target
            else:
                x -= cur_cut
                chosen = alloc_items[-1][0]
                for v, rate in alloc_items:
                    x -= rate
                    if x < 0.0:
                        chosen = v
                        break
            mask ^= 1 << chosen
            cur_cut += 2 * cnt[chosen] - deg[chosen]
            for w in nbrs[chosen]:
                cnt[w] -= 1
            kind = "cure"

        nev += 1
        if record_events:
            count_ref[0] = nev
            events.append((t, chosen, kind))
        elif not one_node:
            count_ref[0] = nev
        if mask == 0:
            tau = t
            break
        if nev >= max_events:
            censored, reason = True, "max_events"
            break

    return EpidemicTrace(
        graph=g, i0=g.nodeset(i0), policy=policy.name, r=r, seed=seed_parts,
        events=tuple(events), tau=tau, censored=censored, censor_reason=reason,
        t_end=t, n_events=nev, final_infected=NodeSet(mask, n),
    )


def validate_trace(trace: EpidemicTrace) -> None:
    """Replay the event log and raise AssertionError on any legality break.

    Times strictly increase; infections hit healthy vertices with at least
    one infected neighbor; cures hit infected vertices; tau matches the
    event that emptied the infected set.
    """
    g = trace.graph
    mask = int(trace.i0)
    last_t = 0.0
    for t, v, kind in trace.events:
        assert t > last_t, f"event time {t} does not increase past {last_t}"
        last_t = t
        bit = 1 << v
        if kind == "infect":
            assert not mask & bit, f"infection of already-infected vertex {v}"
            assert g.adj[v] & mask, f"infection of vertex {v} with no infected neighbor"
            mask |= bit
        elif kind == "cure":
            assert mask & bit, f"cure of healthy vertex {v}"
            mask ^= bit
        else:
            raise AssertionError(f"unknown event kind {kind!r}")
    assert mask == int(trace.final_infected), "final infected set does not match replay"
    if trace.tau is not None:
        assert mask == 0 and trace.tau == last_t, "tau must stamp the emptying event"


# ---------------------------------------------------------------------------
# Replicated estimation
# ---------------------------------------------------------------------------

@dataclass
class SimEstimate:
    graph_label: str
    policy: str
    r: float
    replications: int
    mean_tau: Optional[float]
    se: Optional[float]
    censored: int
    usable: bool
    runtime_s: float = 0.0
    taus: tuple[float, ...] = field(default_factory=tuple, repr=False)

    def csv_row(self) -> str:
        mean = "" if self.mean_tau is None else repr(self.mean_tau)
        se = "" if self.se is None else repr(self.se)
        return f"{self.graph_label},{self.policy},{self.r!r},{self.replications},{mean},{se},{self.censored}"


def _estimate_worker(args):
    g, i0_mask, policy, r, master_seed, idx, max_time, max_events, context = args
    tr = simulate(
        g, i0_mask, policy, r, (master_seed, idx),
        max_time=max_time, max_events=max_events, record_events=False, context=context,
    )
    return idx, tr.tau, tr.censored


def estimate_extinction(
    g: Graph,
    i0,
    policy: CuringPolicy,
    r: float,
    replications: int,
    seed: int,
    *,
    max_time: float = DEFAULT_MAX_TIME,
    max_events: int = DEFAULT_MAX_EVENTS,
    workers: Optional[int] = None,
    context: Optional[ResilienceTable] = None,
) -> SimEstimate:
    """Mean extinction time over independent replications.

    Replication i runs with seed (seed, i); results are aggregated by
    replication index, so worker scheduling cannot change the estimate.
    Censored runs are excluded from the mean but always reported.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    t0 = _time.perf_counter()
    i0_mask = _mask_from(i0, g.n)
    jobs = [
        (g, i0_mask, policy, r, int(seed), i, max_time, max_events, context)
        for i in range(replications)
    ]
    taus: list[Optional[float]] = [None] * replications
    if workers and workers > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, tau, was_censored in pool.map(_estimate_worker, jobs, chunksize=max(1, replications // (8 * workers))):
                taus[idx] = None if was_censored else tau
    else:
        for job in jobs:
            idx, tau, was_censored = _estimate_worker(job)
            taus[idx] = None if was_censored else tau
    good = [x for x in taus if x is not None]
    censored = replications - len(good)
    mean = float(np.mean(good)) if good else None
    se = float(np.std(good, ddof=1) / math.sqrt(len(good))) if len(good) >= 2 else None
    return SimEstimate(
        graph_label=g.label, policy=policy.name, r=float(r), replications=replications,
        mean_tau=mean, se=se, censored=censored, usable=bool(good),
        runtime_s=_time.perf_counter() - t0, taus=tuple(good),
    )


# ---------------------------------------------------------------------------
# Exact birth-death reduction for complete graphs
# ---------------------------------------------------------------------------

def exact_extinction_complete(n: int, r) -> Fraction:
    """Exact expected extinction time on K_n from full infection.

    On a complete graph the cut depends only on the infected count
    (k(n-k)), so every budget-exhausting policy induces the same birth-death
    chain: up-rate k(n-k), down-rate r. Solved by telescoping the expected
    one-step-down times d_k = (1 + k(n-k) d_{k+1}) / r from d_n = 1/r.
    Exact rationals throughout; the values grow explosively with n.
    """
    if n < 2:
        raise ValueError("exact_extinction_complete needs n >= 2")
    r = Fraction(r)
    if r <= 0:
        raise ValueError("curing budget r must be > 0")
    d = 1 / r
    total = d
    for k in range(n - 1, 0, -1):
        d = (1 + Fraction(k * (n - k)) * d) / r
        total += d
    return total


# ---------------------------------------------------------------------------
# Coupled-process instrumentation
# ---------------------------------------------------------------------------

@dataclass
class BandReport:
    """Occupancy of the infected-count band [floor(g0/3D), floor(2g0/3D)]."""

    band_lo: int
    band_hi: int
    tau_star: Optional[float]
    band_entered: bool
    band_dwell: float
    min_cut_in_band: Optional[int]
    top_dwell: float
    top_cure_events: int
    top_cure_rate: Optional[float]
    vacuous: bool
    drift_floor: Optional[float] = None
    drift_ok: Optional[bool] = None


def band_instrumentation(trace: EpidemicTrace, gamma0, delta: int, *, slack_e=None) -> BandReport:
    """Replay a trace and report how it moved through the coupling band.

    tau_star is the first time the infected count drops to floor(g0/(3*delta))
    or below (0 if it starts there). When ``slack_e`` is given, the report
    also checks the drift floor g0/3 - (3*E+4)*delta against the minimum cut
    seen in the band. A band with no positive level, or one the trace never
    enters, is reported vacuous, never as a failure.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    g = trace.graph
    lo = math.floor(Fraction(gamma0) / (3 * delta))
    hi = math.floor(2 * Fraction(gamma0) / (3 * delta))
    mask = int(trace.i0)
    size = mask.bit_count()
    cur_cut = cut(g, mask)

    tau_star = 0.0 if size <= lo else None
    band_entered = lo <= size <= hi
    band_dwell = 0.0
    top_dwell = 0.0
    top_cures = 0
    min_cut = cur_cut if band_entered else None
    t_prev = 0.0

    for t, v, kind in trace.events:
        span = t - t_prev
        if lo <= size <= hi:
            band_dwell += span
        if size == hi:
            top_dwell += span
            if kind == "cure":
                top_cures += 1
        t_prev = t
        cur_cut = cut_after_toggle(g, mask, cur_cut, v)
        if kind == "infect":
            mask |= 1 << v
            size += 1
        else:
            mask ^= 1 << v
            size -= 1
        if lo <= size <= hi:
            band_entered = True
            if min_cut is None or cur_cut < min_cut:
                min_cut = cur_cut
        if tau_star is None and size <= lo:
            tau_star = t
    if lo <= size <= hi:
        band_dwell += trace.t_end - t_prev
    if size == hi:
        top_dwell += trace.t_end - t_prev

    vacuous = hi < 1 or not band_entered
    report = BandReport(
        band_lo=lo, band_hi=hi, tau_star=tau_star, band_entered=band_entered,
        band_dwell=band_dwell, min_cut_in_band=min_cut,
        top_dwell=top_dwell, top_cure_events=top_cures,
        top_cure_rate=(top_cures / top_dwell) if top_dwell > 0 else None,
        vacuous=vacuous,
    )
    if slack_e is not None and not vacuous:
        floor_val = Fraction(gamma0) / 3 - (3 * Fraction(slack_e) + 4) * delta
        report.drift_floor = float(floor_val)
        report.drift_ok = min_cut is None or Fraction(min_cut) >= floor_val
    trace.tau_star = tau_star
    trace.band = report
    return report
