"""Exact CutWidth, resilience, and optimal crusades over subset tables.

A crusade from A to B is a bag sequence where each step may add any number
of vertices but remove at most one; its width is the max cut over the bags
after the first. Resilience gamma(A) minimizes width over all crusades from
A to the empty set; CutWidth W restricts to pure-removal (monotone) crusades
from the full vertex set and equals gamma(V).

The production gamma algorithm exploits the structure of optimal crusades:
one unrestricted first step, then a monotone tail. Its value on a bag A is

    min over B with |A \\ B| <= 1 of max(cut(B), g(B)),

where g is the monotone-tail table. An unrestricted bottleneck search over
the full 2^n crusade graph (:func:`oracle_resilience`) exists purely to
falsify that structure at small n if it were misread.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph import Graph, NodeSet, SizeCapError, _mask_from, cut, cut_table, popcount_array

INF16 = np.int16(32000)  # above any cut: n*Delta/2 <= 64*63/2 = 2016


class CrusadeStepError(ValueError):
    """A bag sequence removes more than one vertex in a single step."""


@dataclass(frozen=True)
class Crusade:
    """A validated crusade with its width precomputed."""

    bags: tuple[NodeSet, ...]
    width: int

    @classmethod
    def from_bags(cls, g: Graph, bags: Sequence) -> "Crusade":
        sets = tuple(g.nodeset(b) for b in bags)
        if not sets:
            raise CrusadeStepError("a crusade needs at least one bag")
        return cls(sets, crusade_width(g, sets))

    def __len__(self) -> int:
        return len(self.bags)

    def serialize(self) -> str:
        """One bag per line, sorted vertex ids in brackets."""
        return "\n".join("[" + ",".join(str(v) for v in sorted(b)) + "]" for b in self.bags) + "\n"


def crusade_width(g: Graph, bags: Sequence) -> int:
    """Max cut over bags after the first; raises on an illegal step."""
    masks = [_mask_from(b, g.n) for b in bags]
    for i in range(len(masks) - 1):
        dropped = (masks[i] & ~masks[i + 1]).bit_count()
        if dropped > 1:
            raise CrusadeStepError(
                f"step {i}->{i + 1} removes {dropped} vertices (at most one allowed)"
            )
    return max((cut(g, m) for m in masks[1:]), default=0)


# ---------------------------------------------------------------------------
# Monotone table and CutWidth
# ---------------------------------------------------------------------------

def monotone_table(g: Graph, *, max_n: int = 24, cuts: Optional[np.ndarray] = None) -> np.ndarray:
    """Width of the best pure-removal clearing of every subset (int16, 2^n).

    Recursion: g(empty)=0 and g(B) = min over v in B of
    max(cut(B-v), g(B-v)). Filled one cardinality layer at a time so every
    lookup hits the previous layers only.
    """
    if g.n > max_n:
        raise SizeCapError(f"monotone table for n={g.n} exceeds cap {max_n}")
    if not g.connected:
        raise ValueError("crusade tables require a connected graph")
    n = g.n
    size = 1 << n
    cuts = cut_table(g) if cuts is None else cuts
    table = np.full(size, INF16, dtype=np.int16)
    table[0] = 0
    all_masks = np.arange(size, dtype=np.uint32)
    pc = popcount_array(all_masks)
    for k in range(1, n + 1):
        layer = all_masks[pc == k]
        best = np.full(len(layer), INF16, dtype=np.int16)
        for v in range(n):
            bit = np.uint32(1 << v)
            sel = (layer & bit) != 0
            prev = layer[sel] ^ bit
            cand = np.maximum(cuts[prev], table[prev])
            best[sel] = np.minimum(best[sel], cand)
        table[layer] = best
    return table


def cutwidth(g: Graph, *, max_n: int = 24) -> int:
    """Minimum over removal orders of the maximum cut encountered."""
    return int(monotone_table(g, max_n=max_n)[g.full_mask])


# ---------------------------------------------------------------------------
# Resilience
# ---------------------------------------------------------------------------

@dataclass
class ResilienceTable:
    """All-subsets cut/monotone/resilience tables for one graph.

    ``gamma`` is None for a monotone-only context (:func:`monotone_context`),
    which is enough for CutWidth reports and crusade reconstruction at sizes
    where the full resilience sweep would not fit.
    """

    graph: Graph
    cut: np.ndarray
    g: np.ndarray
    gamma: Optional[np.ndarray]

    @property
    def W(self) -> int:
        return int(self.g[self.graph.full_mask])

    @property
    def slack(self) -> Fraction:
        from .bounds import slack_E

        return slack_E(self.graph.n, self.graph.max_degree, self.W)

    def gamma_of(self, bag) -> int:
        if self.gamma is None:
            raise ValueError("this table context has no resilience values; use resilience_table()")
        return int(self.gamma[_mask_from(bag, self.graph.n)])

    def to_csv(self) -> str:
        if self.gamma is None:
            raise ValueError("this table context has no resilience values; use resilience_table()")
        rows = ["bitmask,cardinality,cut,g,gamma"]
        pc = popcount_array(np.arange(len(self.cut), dtype=np.uint32))
        for m in range(len(self.cut)):
            rows.append(f"{m},{int(pc[m])},{int(self.cut[m])},{int(self.g[m])},{int(self.gamma[m])}")
        return "\n".join(rows) + "\n"


def monotone_context(g: Graph, *, max_n: int = 24) -> ResilienceTable:
    """Cut and monotone tables only; supports single-bag queries and
    crusade reconstruction without the 2^n resilience sweep."""
    cuts = cut_table(g, max_n=max_n)
    return ResilienceTable(graph=g, cut=cuts, g=monotone_table(g, max_n=max_n, cuts=cuts), gamma=None)


def resilience_table(g: Graph, *, max_n: int = 15) -> ResilienceTable:
    """Resilience of every subset via the one-free-step + monotone-tail rule.

    Let f(T) = max(cut(T), g(T)) be the width of starting a clear at T. A
    superset-min sweep turns f into best(S) = min over T >= S of f(T); the
    candidates for a bag A are then best(A) (no removal) and best(A - v)
    (remove v, possibly adding others). Identical values to enumerating
    first-step bags per bag, at O(n 2^n) total.
    """
    if g.n > max_n:
        raise SizeCapError(f"resilience table for n={g.n} exceeds cap {max_n}")
    cuts = cut_table(g)
    mono = monotone_table(g, cuts=cuts)
    n = g.n
    best = np.maximum(cuts, mono)
    for v in range(n):
        width = 1 << v
        view = best.reshape(-1, 2, width)
        np.minimum(view[:, 0, :], view[:, 1, :], out=view[:, 0, :])
    gamma = best.copy()
    for v in range(n):
        width = 1 << v
        gview = gamma.reshape(-1, 2, width)
        bview = best.reshape(-1, 2, width)
        np.minimum(gview[:, 1, :], bview[:, 0, :], out=gview[:, 1, :])
    return ResilienceTable(graph=g, cut=cuts, g=mono, gamma=gamma)


def _first_step_candidates(g: Graph, mask: int):
    """Yield (removed_vertex_or_None, base_mask) for each legal removal choice."""
    yield None, mask
    m = mask
    while m:
        low = m & -m
        yield low.bit_length() - 1, mask ^ low
        m ^= low


def resilience(g: Graph, bag, tables: Optional[ResilienceTable] = None, *, max_n: int = 15) -> int:
    """Resilience of one bag by direct first-step enumeration.

    Enumerates every legal first step B = (A u D) - v with D a subset of A's
    complement and v in A or absent, scoring max(cut(B), g(B)). The table
    route (:func:`resilience_table`) computes the same minimum for all bags
    at once; this form is kept for single queries and as a second route in
    tests.
    """
    mask = _mask_from(bag, g.n)
    if tables is None:
        tables = resilience_table(g, max_n=max_n)
    cuts, mono = tables.cut, tables.g
    comp_positions = [v for v in range(g.n) if not (mask >> v) & 1]
    subs = np.arange(1 << len(comp_positions), dtype=np.uint32)
    spread = np.zeros(len(subs), dtype=np.uint32)
    for j, pos in enumerate(comp_positions):
        spread |= ((subs >> j) & 1) << np.uint32(pos)
    value = INF16
    for _, base in _first_step_candidates(g, mask):
        cand_masks = spread | np.uint32(base)
        cand = np.maximum(cuts[cand_masks], mono[cand_masks])
        value = min(value, cand.min())
    return int(value)


def improvement_mask(g: Graph, tables: ResilienceTable) -> np.ndarray:
    """Boolean array over bitmasks: True where removing some vertex lowers gamma."""
    if tables.gamma is None:
        raise ValueError("improvement bags need the full resilience table")
    gamma = tables.gamma
    size = len(gamma)
    member = np.zeros(size, dtype=bool)
    masks = np.arange(size, dtype=np.uint32)
    for v in range(g.n):
        bit = np.uint32(1 << v)
        sel = (masks & bit) != 0
        member[sel] |= gamma[masks[sel] ^ bit] < gamma[sel]
    return member


def improvement_bags(g: Graph, tables: ResilienceTable) -> list[NodeSet]:
    """Bags A with some v in A such that gamma(A - v) < gamma(A)."""
    return [NodeSet(int(m), g.n) for m in np.flatnonzero(improvement_mask(g, tables))]


def optimal_crusade(g: Graph, bag, tables: Optional[ResilienceTable] = None) -> Crusade:
    """A witness crusade achieving gamma(A), deterministically tie-broken.

    First step: among bags B != A with |A \\ B| <= 1 minimizing
    max(cut(B), g(B)), prefer the lowest removed-vertex id (no removal sorts
    last), then the smallest bag bitmask. Tail: repeatedly remove the vertex
    minimizing max(cut(B-v), g(B-v)), lowest id on ties. The tail is strictly
    nested, so the result has distinct consecutive bags and pure removals
    from the second step on.
    """
    mask = _mask_from(bag, g.n)
    if mask == 0:
        raise ValueError("optimal_crusade needs a nonempty bag")
    if tables is None:
        tables = resilience_table(g)
    cuts, mono = tables.cut, tables.g
    comp_positions = [v for v in range(g.n) if not (mask >> v) & 1]
    subs = range(1 << len(comp_positions))
    best = None  # (value, removed_sort_key, bag_mask)
    for removed, base in _first_step_candidates(g, mask):
        rkey = g.n if removed is None else removed
        for s in subs:
            d = 0
            for j, pos in enumerate(comp_positions):
                if (s >> j) & 1:
                    d |= 1 << pos
            b = base | d
            if b == mask:
                continue  # a repeated bag never beats some pure removal
            value = max(int(cuts[b]), int(mono[b]))
            key = (value, rkey, b)
            if best is None or key < best:
                best = key
    assert best is not None
    bags = [mask, best[2]]
    cur = best[2]
    while cur:
        choice = None
        m = cur
        while m:
            low = m & -m
            v = low.bit_length() - 1
            prev = cur ^ low
            key = (max(int(cuts[prev]), int(mono[prev])), v)
            if choice is None or key < choice[0]:
                choice = (key, prev)
            m ^= low
        cur = choice[1]
        bags.append(cur)
    crusade = Crusade.from_bags(g, [NodeSet(b, g.n) for b in bags])
    assert crusade.width == best[0]
    if tables.gamma is not None:
        assert crusade.width == int(tables.gamma[mask])
    return crusade


# ---------------------------------------------------------------------------
# Unrestricted oracle: bottleneck search over the full crusade graph
# ---------------------------------------------------------------------------

def oracle_resilience(g: Graph, bag, *, max_n: int = 10) -> int:
    """gamma(A) with no structural assumptions: minimax Dijkstra from A.

    States are all 2^n bags; from S every B with |S \\ B| <= 1 is reachable
    in one step at cost cut(B); minimize the max cost along a path to the
    empty bag, the first bag excluded. Fan-out is 2^(n-|S|) * (|S|+1), hence
    the small-n cap.
    """
    if g.n > max_n:
        raise SizeCapError(f"oracle fan-out for n={g.n} exceeds cap {max_n}")
    start = _mask_from(bag, g.n)
    cuts = cut_table(g)
    n = g.n
    size = 1 << n
    dist = [None] * size
    dist[start] = 0
    heap = [(0, start)]
    while heap:
        d, s = heapq.heappop(heap)
        if s == 0:
            return d
        if d > dist[s]:
            continue
        comp_positions = [v for v in range(n) if not (s >> v) & 1]
        bases = [s]
        m = s
        while m:
            low = m & -m
            bases.append(s ^ low)
            m ^= low
        for base in bases:
            for sub in range(1 << len(comp_positions)):
                d_mask = 0
                for j, pos in enumerate(comp_positions):
                    if (sub >> j) & 1:
                        d_mask |= 1 << pos
                b = base | d_mask
                nd = max(d, int(cuts[b]))
                if dist[b] is None or nd < dist[b]:
                    dist[b] = nd
                    heapq.heappush(heap, (nd, b))
    raise AssertionError("empty bag unreachable")  # cannot happen: removals always allowed


def oracle_resilience_table(g: Graph, *, max_n: int = 12, cuts: Optional[np.ndarray] = None) -> np.ndarray:
    """gamma for every bag by one backward bottleneck sweep from the empty bag.

    Same crusade graph as :func:`oracle_resilience`, relaxed in reverse:
    popping B settles min-over-crusades width from B, and every predecessor A
    (a subset of B plus at most one outside vertex) is offered
    max(cut(B), dist(B)). Edge cost depends only on the head bag, so Dijkstra
    order is valid.
    """
    if g.n > max_n:
        raise SizeCapError(f"oracle table for n={g.n} exceeds cap {max_n}")
    n = g.n
    size = 1 << n
    cuts = cut_table(g) if cuts is None else cuts
    dist = [None] * size
    dist[0] = 0
    heap = [(0, 0)]
    settled = [False] * size
    while heap:
        d, b = heapq.heappop(heap)
        if settled[b]:
            continue
        settled[b] = True
        offer = max(d, int(cuts[b]))
        inside = [v for v in range(n) if (b >> v) & 1]
        outside_bits = [1 << v for v in range(n) if not (b >> v) & 1]
        # subsets of b, each optionally extended by one outside vertex
        subsets = [0]
        for v in inside:
            bit = 1 << v
            subsets.extend(s | bit for s in list(subsets))
        for s in subsets:
            for extra in [0] + outside_bits:
                a = s | extra
                if dist[a] is None or offer < dist[a]:
                    dist[a] = offer
                    heapq.heappush(heap, (offer, a))
    out = np.array(dist, dtype=np.int16)
    return out
