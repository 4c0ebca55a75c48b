"""Machine-checkable property suites for cuts, resilience, and walk formulas.

Each check returns a :class:`CheckResult` with counts and concrete
counterexamples on failure; suites aggregate over graph sets (exhaustive
small-n enumeration plus seeded random graphs). Premise-guarded checks count
bags that fall outside their premise as vacuous rather than passing or
failing them silently.

The ``cut_override`` hooks let tests inject a corrupted cut table and watch
the affected inequality fail with a printed bag, which keeps the harness
honest about its own sensitivity.
"""

from __future__ import annotations

import itertools
import math
import time as _time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .bounds import (
    BoundInputs,
    WalkParams,
    bound_from_walk,
    exact_hitting_time,
    extinction_lower_bound,
    gambler_up_probability,
    random_walk_lower_bound,
    walk_up_crossing_mc,
)
from .crusade import (
    ResilienceTable,
    improvement_mask,
    optimal_crusade,
    oracle_resilience_table,
    resilience,
    resilience_table,
)
from .graph import Graph, _is_connected, cut_table, generate, popcount_array

MAX_FAILURES_KEPT = 5


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    checked: int = 0
    vacuous: int = 0
    failures: list[str] = field(default_factory=list)

    def fail(self, message: str) -> None:
        self.passed = False
        if len(self.failures) < MAX_FAILURES_KEPT:
            self.failures.append(message)

    def merge(self, other: "CheckResult") -> None:
        assert self.name == other.name
        self.passed = self.passed and other.passed
        self.checked += other.checked
        self.vacuous += other.vacuous
        for f in other.failures:
            if len(self.failures) < MAX_FAILURES_KEPT:
                self.failures.append(f)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" vacuous={self.vacuous}" if self.vacuous else ""
        msg = f"{status} {self.name} checked={self.checked}{extra}"
        for f in self.failures:
            msg += f"\n  counterexample: {f}"
        return msg


def _bag_str(mask: int) -> str:
    return "{" + ",".join(str(v) for v in range(64) if (mask >> v) & 1) + "}"


# ---------------------------------------------------------------------------
# Graph sets
# ---------------------------------------------------------------------------

def enumerate_connected_graphs(n: int) -> Iterator[Graph]:
    """All labeled connected simple graphs on vertices 0..n-1."""
    pairs = list(itertools.combinations(range(n), 2))
    for picks in range(1 << len(pairs)):
        adj = [0] * n
        edges = []
        m = picks
        while m:
            low = m & -m
            u, v = pairs[low.bit_length() - 1]
            edges.append((u, v))
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            m ^= low
        if _is_connected(n, adj):
            yield Graph(n, edges, label=f"enum:{n}:{picks}")


def random_connected_graphs(ns: Iterable[int], count: int, seed: int) -> list[Graph]:
    """Seeded random connected graphs, cycling sizes and edge densities."""
    ns = list(ns)
    densities = (0.25, 0.35, 0.5, 0.7)
    out = []
    for i in range(count):
        n = ns[i % len(ns)]
        p = densities[(i // len(ns)) % len(densities)]
        out.append(generate("erdos_renyi", n, p=p, seed=seed * 1_000_003 + i))
    return out


def graph_set(
    max_n: int = 5,
    *,
    min_n: int = 2,
    rand_ns: Iterable[int] = (7, 8),
    rand_count: int = 0,
    seed: int = 42,
) -> Iterator[Graph]:
    """Exhaustive connected graphs for min_n..max_n, then random larger ones.

    Starts at 2 because the epidemic model assumes a positive max degree.
    """
    for n in range(min_n, max_n + 1):
        yield from enumerate_connected_graphs(n)
    if rand_count:
        yield from random_connected_graphs(rand_ns, rand_count, seed)


# ---------------------------------------------------------------------------
# Cut-function properties
# ---------------------------------------------------------------------------

def _sos_max_inplace(flat: np.ndarray, bits: int) -> None:
    """In place: flat[S] becomes max over subsets T of S of flat[T]."""
    for u in range(bits):
        width = 1 << u
        view = flat.reshape(-1, 2, width)
        np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])


def check_cut_properties(g: Graph, cuts: Optional[np.ndarray] = None) -> list[CheckResult]:
    """Superadditivity, submodularity, size bound, set-difference Lipschitz
    bound, and complement symmetry of the cut, exhaustively over all bags
    (and bag pairs) of one graph."""
    n = g.n
    size = 1 << n
    delta = g.max_degree
    c = (cut_table(g) if cuts is None else cuts).astype(np.int32)
    masks = np.arange(size, dtype=np.uint32)
    pc = popcount_array(masks).astype(np.int32)

    super_add = CheckResult("cut_superadditivity")
    A = masks[:, None]
    B = masks[None, :]
    lhs = c[A | B]
    rhs = c[A] + c[B]
    bad = np.argwhere(lhs > rhs)
    super_add.checked = size * size
    for i, j in bad[:MAX_FAILURES_KEPT]:
        super_add.fail(f"{g.label}: c(AuB)={lhs[i, j]} > c(A)+c(B)={rhs[i, j]} for A={_bag_str(int(i))} B={_bag_str(int(j))}")
    bad2 = np.argwhere(rhs > c[A] + delta * pc[B])
    for i, j in bad2[:MAX_FAILURES_KEPT]:
        super_add.fail(f"{g.label}: c(A)+c(B) > c(A)+delta*|B| for A={_bag_str(int(i))} B={_bag_str(int(j))}")

    submod = CheckResult("cut_submodularity")
    submod.checked = n * (size // 2)
    for v in range(n):
        width = 1 << v
        pair = c.reshape(-1, 2, width)
        removal_gain = (pair[:, 0, :] - pair[:, 1, :]).reshape(-1).copy()  # c(A-v)-c(A) on the with-v sublattice
        transformed = removal_gain.copy()
        _sos_max_inplace(transformed, n - 1)
        bad = np.flatnonzero(transformed > removal_gain)
        for j in bad[:2]:
            j = int(j)
            b_mask = ((j >> v) << (v + 1)) | (1 << v) | (j & (width - 1))
            submod.fail(f"{g.label}: removal gain of v={v} not monotone at B={_bag_str(b_mask)}")

    size_bound = CheckResult("cut_size_bound")
    size_bound.checked = size
    bad = np.flatnonzero(c > delta * np.minimum(pc, n - pc))
    for m in bad[:MAX_FAILURES_KEPT]:
        size_bound.fail(f"{g.label}: c={int(c[m])} exceeds min(|A|,n-|A|)*delta at A={_bag_str(int(m))}")

    lipschitz = CheckResult("cut_difference_lipschitz")
    lipschitz.checked = size * size
    gap = np.abs(c[A] - c[B])
    allowance = delta * pc[A ^ B]
    bad = np.argwhere(gap > allowance)
    for i, j in bad[:MAX_FAILURES_KEPT]:
        lipschitz.fail(f"{g.label}: |c(A)-c(B)|={gap[i, j]} > delta*|A xor B|={allowance[i, j]} at A={_bag_str(int(i))} B={_bag_str(int(j))}")

    symmetry = CheckResult("cut_complement_symmetry")
    symmetry.checked = size
    bad = np.flatnonzero(c != c[masks ^ np.uint32(size - 1)])
    for m in bad[:MAX_FAILURES_KEPT]:
        symmetry.fail(f"{g.label}: c(A) != c(complement) at A={_bag_str(int(m))}")

    return [super_add, submod, size_bound, lipschitz, symmetry]


# ---------------------------------------------------------------------------
# Resilience properties
# ---------------------------------------------------------------------------

def check_resilience_properties(
    g: Graph,
    tables: Optional[ResilienceTable] = None,
    cut_override: Optional[np.ndarray] = None,
) -> list[CheckResult]:
    """Monotonicity and one-vertex smoothness of gamma, the cut floors on
    improvement and high-resilience bags, the size/resilience admissible
    region, and one-step consistency of the gamma table.

    The region and high-resilience checks require W >= delta; bags outside a
    premise are counted vacuous. ``cut_override`` substitutes a (possibly
    corrupted) cut table in the inequality checks only.
    """
    tables = tables or resilience_table(g)
    n = g.n
    size = 1 << n
    delta = g.max_degree
    W = tables.W
    gamma = tables.gamma.astype(np.int32)
    cuts = (tables.cut if cut_override is None else cut_override).astype(np.int32)
    masks = np.arange(size, dtype=np.uint32)
    pc = popcount_array(masks).astype(np.int32)
    delta_e = (n + 2) * delta - 2 * W  # delta * E, an exact integer

    monotone = CheckResult("resilience_monotone")
    smooth = CheckResult("resilience_smoothness")
    consistency = CheckResult("resilience_one_step_consistency")
    monotone.checked = smooth.checked = n * (size // 2)
    consistency.checked = n * size
    for v in range(n):
        width = 1 << v
        gpair = gamma.reshape(-1, 2, width)
        without, with_v = gpair[:, 0, :], gpair[:, 1, :]
        bad = np.argwhere(without > with_v)
        for i, j in bad[:2]:
            a_mask = int((int(i) << (v + 1)) | int(j))
            monotone.fail(f"{g.label}: gamma(A) > gamma(A+{v}) at A={_bag_str(a_mask)}")
        bad = np.argwhere(with_v > without + delta)
        for i, j in bad[:2]:
            a_mask = int((int(i) << (v + 1)) | int(j))
            smooth.fail(f"{g.label}: gamma(A+{v}) > gamma(A)+delta at A={_bag_str(a_mask)}")
        # gamma(A) <= max(c(B), gamma(B)) for the single-move neighbors B
        cpair = cuts.reshape(-1, 2, width)
        step_up = np.maximum(cpair[:, 1, :], gpair[:, 1, :])
        step_down = np.maximum(cpair[:, 0, :], gpair[:, 0, :])
        bad = np.argwhere(without > step_up)
        for i, j in bad[:2]:
            a_mask = int((int(i) << (v + 1)) | int(j))
            consistency.fail(f"{g.label}: gamma(A) > max(c,gamma)(A+{v}) at A={_bag_str(a_mask)}")
        bad = np.argwhere(with_v > step_down)
        for i, j in bad[:2]:
            a_mask = int((int(i) << (v + 1)) | (1 << v) | int(j))
            consistency.fail(f"{g.label}: gamma(A) > max(c,gamma)(A-{v}) at A={_bag_str(a_mask)}")

    improvement_floor = CheckResult("improvement_bag_cut_floor")
    imp = improvement_mask(g, tables)
    improvement_floor.checked = int(imp.sum())
    bad = np.flatnonzero(imp & (cuts < gamma - delta))
    for m in bad[:MAX_FAILURES_KEPT]:
        improvement_floor.fail(
            f"{g.label}: improvement bag {_bag_str(int(m))} has c={int(cuts[m])} < gamma-delta={int(gamma[m]) - delta}"
        )

    region = CheckResult("resilience_size_region")
    high_floor = CheckResult("high_resilience_cut_floor")
    if W < delta:
        region.vacuous = size
        high_floor.vacuous = size
    else:
        region.checked = size
        bad = np.flatnonzero(gamma > pc * delta)
        for m in bad[:MAX_FAILURES_KEPT]:
            region.fail(f"{g.label}: gamma={int(gamma[m])} > |A|*delta at A={_bag_str(int(m))}")
        below = gamma < W
        region.vacuous = int((~below).sum())
        bad = np.flatnonzero(below & (W > (n - pc) * delta))
        for m in bad[:MAX_FAILURES_KEPT]:
            region.fail(f"{g.label}: W > (n-|A|)*delta with gamma<W at A={_bag_str(int(m))}")
        bad = np.flatnonzero(below & (gamma < pc * delta - delta_e))
        for m in bad[:MAX_FAILURES_KEPT]:
            region.fail(f"{g.label}: gamma={int(gamma[m])} < delta*(|A|-E) at A={_bag_str(int(m))}")

        sel = below & (gamma > 0)
        high_floor.checked = int(sel.sum())
        high_floor.vacuous = size - high_floor.checked
        floor = gamma - 2 * delta_e - 4 * delta  # gamma - 2(E+2)delta
        bad = np.flatnonzero(sel & (cuts < floor))
        for m in bad[:MAX_FAILURES_KEPT]:
            high_floor.fail(
                f"{g.label}: c={int(cuts[m])} < gamma-2(E+2)delta={int(floor[m])} at A={_bag_str(int(m))}"
            )

    return [monotone, smooth, consistency, improvement_floor, region, high_floor]


def check_oracle_agreement(g: Graph, tables: Optional[ResilienceTable] = None) -> list[CheckResult]:
    """The structured gamma algorithm against the unrestricted bottleneck
    search: equality on every bag, and at the full set against the monotone
    width (one-removal-at-a-time optimum)."""
    tables = tables or resilience_table(g)
    oracle = oracle_resilience_table(g, cuts=tables.cut)

    fullset = CheckResult("fullset_resilience_equals_cutwidth")
    fullset.checked = 1
    W = tables.W
    ov = int(oracle[g.full_mask])
    if ov != W:
        fullset.fail(f"{g.label}: oracle gamma(V)={ov} != monotone W={W}")

    agree = CheckResult("algorithm_matches_oracle")
    agree.checked = len(oracle)
    bad = np.flatnonzero(oracle != tables.gamma)
    for m in bad[:MAX_FAILURES_KEPT]:
        agree.fail(
            f"{g.label}: algorithm gamma={int(tables.gamma[m])} oracle={int(oracle[m])} at A={_bag_str(int(m))}"
        )
    return [fullset, agree]


def check_crusade_certificates(g: Graph, tables: ResilienceTable, bag_masks: Iterable[int]) -> CheckResult:
    """optimal_crusade returns a legal, width-achieving, eventually-nested crusade."""
    res = CheckResult("optimal_crusade_certificates")
    for mask in bag_masks:
        if mask == 0:
            continue
        res.checked += 1
        c = optimal_crusade(g, mask, tables)
        masks = [int(b) for b in c.bags]
        if c.width != int(tables.gamma[mask]):
            res.fail(f"{g.label}: certificate width {c.width} != gamma at A={_bag_str(mask)}")
        if masks[0] != mask or masks[-1] != 0:
            res.fail(f"{g.label}: certificate endpoints wrong at A={_bag_str(mask)}")
        for i in range(1, len(masks)):
            if masks[i] == masks[i - 1]:
                res.fail(f"{g.label}: repeated bag in certificate at A={_bag_str(mask)}")
            if i >= 2 and not (masks[i] & ~masks[i - 1]) == 0:
                res.fail(f"{g.label}: non-monotone tail step in certificate at A={_bag_str(mask)}")
    return res


def check_single_bag_route(g: Graph, tables: ResilienceTable, bag_masks: Iterable[int]) -> CheckResult:
    """Per-bag first-step enumeration agrees with the all-bags table sweep."""
    res = CheckResult("single_bag_route_agreement")
    for mask in bag_masks:
        res.checked += 1
        direct = resilience(g, mask, tables)
        if direct != int(tables.gamma[mask]):
            res.fail(f"{g.label}: enumeration {direct} != table {int(tables.gamma[mask])} at A={_bag_str(mask)}")
    return res


# ---------------------------------------------------------------------------
# Walk formula checks
# ---------------------------------------------------------------------------

def check_up_crossing_mc(seed: int = 42, runs: int = 10**5, max_level: int = 10) -> CheckResult:
    """Closed-form up-crossing probability vs Monte Carlo, 3 SE, over a
    (rate ratio, start, ceiling) grid including the symmetric limit."""
    res = CheckResult("up_crossing_probability_mc")
    rates = [(Fraction(1), Fraction(2)), (Fraction(1), Fraction(1)), (Fraction(2), Fraction(1))]
    cell = 0
    for lam, mu in rates:
        for L in range(2, max_level + 1):
            for M in range(1, L):
                w = WalkParams(lam=lam, mu=mu, L=L, M=M)
                p = gambler_up_probability(w)
                phat, _ = walk_up_crossing_mc(w, runs, seed + cell)
                # SE from the known p: stays positive even when phat lands on 0 or 1
                se = math.sqrt(float(p * (1 - p)) / runs)
                cell += 1
                res.checked += 1
                if abs(phat - float(p)) > 3 * se:
                    res.fail(f"lam={lam} mu={mu} M={M} L={L}: |{phat} - {float(p)}| > 3se={3 * se}")
    return res


def check_walk_bound_below_exact(levels: Iterable[int] = range(2, 21)) -> list[CheckResult]:
    """The closed-form reflecting-walk bound never exceeds the exact hitting
    time, over a rate grid and all ceilings in ``levels``; also checks the
    regeneration floor p/((1-p)lam) against the exact value."""
    res = CheckResult("walk_bound_below_exact")
    regen = CheckResult("regeneration_floor")
    lams = [Fraction(1, 4), Fraction(1, 2), Fraction(1)]
    mus = [Fraction(3, 2), Fraction(2), Fraction(4)]
    for lam in lams:
        for mu in mus:
            for L in levels:
                w = WalkParams(lam=lam, mu=mu, L=L, M=L - 1)
                bound = random_walk_lower_bound(w)
                exact = exact_hitting_time([mu] * (L - 1), [lam] * L, L - 1)
                res.checked += 1
                if bound > exact:
                    res.fail(f"lam={lam} mu={mu} L={L}: bound {bound} > exact {exact}")
                p = gambler_up_probability(w)
                regen.checked += 1
                floor = p / ((1 - p) * lam)
                if exact < floor:
                    regen.fail(f"lam={lam} mu={mu} L={L}: exact {exact} < regeneration floor {floor}")
    return [res, regen]


def check_bound_walk_identity(seed: int = 42, samples: int = 100) -> CheckResult:
    """Closed-form extinction bound == reflecting-walk bound, exactly, on
    random valid inputs with integral ceiling."""
    res = CheckResult("bound_walk_identity")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xB0))))
    produced = 0
    while produced < samples:
        delta = int(rng.integers(1, 7))
        L = int(rng.integers(2, 13))
        gamma0 = Fraction(3 * delta * L)
        e = 2 + Fraction(int(rng.integers(0, 22)), 7)
        r = Fraction(int(rng.integers(1, 6)))
        if gamma0 - (9 * e + 12) * delta <= 3 * r:
            continue
        produced += 1
        res.checked += 1
        b = BoundInputs(gamma0=gamma0, delta=delta, E=e, r=r)
        closed = extinction_lower_bound(b)
        walk = bound_from_walk(b)
        if closed.bound != walk:
            res.fail(f"delta={delta} L={L} E={e} r={r}: closed {closed.bound} != walk {walk}")
    return res


def check_walk_suite(seed: int = 42, runs: int = 10**5, max_level: int = 10) -> list[CheckResult]:
    return [
        check_up_crossing_mc(seed=seed, runs=runs, max_level=max_level),
        *check_walk_bound_below_exact(),
        check_bound_walk_identity(seed=seed),
    ]


# ---------------------------------------------------------------------------
# Scope runner
# ---------------------------------------------------------------------------

SCOPES = ("props", "lemmas", "oracle", "walk", "all")


@dataclass
class VerifyReport:
    scope: str
    results: list[CheckResult]
    graphs_checked: int
    elapsed_s: float

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = [r.line() for r in self.results]
        out.append(
            f"{'OK' if self.all_passed else 'FAILED'} scope={self.scope} graphs={self.graphs_checked} elapsed={self.elapsed_s:.1f}s"
        )
        return out


def run_scope(
    scope: str,
    *,
    max_n: int = 5,
    rand_ns: Iterable[int] = (7, 8),
    rand_count: int = 20,
    seed: int = 42,
    mc_runs: int = 20_000,
    mc_level: int = 10,
    certificate_bags: int = 8,
    progress: Optional[Callable[[str], None]] = None,
) -> VerifyReport:
    """Run one verification scope and aggregate results across the graph set.

    props: cut-function properties. lemmas: resilience properties, the
    full-set equality, and crusade certificates. oracle: structured
    algorithm vs unrestricted search on every bag. walk: the hitting-time
    formula suite (graph-free). all: everything.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    t0 = _time.perf_counter()
    merged: dict[str, CheckResult] = {}

    def absorb(results: Iterable[CheckResult]) -> None:
        for r in results:
            if r.name in merged:
                merged[r.name].merge(r)
            else:
                merged[r.name] = r

    graphs_checked = 0
    if scope in ("props", "lemmas", "oracle", "all"):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xCE))))
        for g in graph_set(max_n, rand_ns=rand_ns, rand_count=rand_count, seed=seed):
            graphs_checked += 1
            tables = None
            if scope in ("lemmas", "oracle", "all"):
                tables = resilience_table(g)
            if scope in ("props", "all"):
                absorb(check_cut_properties(g, cuts=tables.cut if tables else None))
            if scope in ("lemmas", "all"):
                absorb(check_resilience_properties(g, tables))
                size = 1 << g.n
                if size <= 16:
                    bags = range(1, size)
                else:
                    bags = [int(x) for x in rng.integers(1, size, size=certificate_bags)]
                absorb([check_crusade_certificates(g, tables, bags)])
                absorb([check_single_bag_route(g, tables, bags)])
            if scope in ("oracle", "lemmas", "all"):
                absorb(check_oracle_agreement(g, tables))
            if progress and graphs_checked % 2000 == 0:
                progress(f"...{graphs_checked} graphs")
    if scope in ("walk", "all"):
        absorb(check_walk_suite(seed=seed, runs=mc_runs, max_level=mc_level))

    return VerifyReport(
        scope=scope,
        results=list(merged.values()),
        graphs_checked=graphs_checked,
        elapsed_s=_time.perf_counter() - t0,
    )
