"""Equitable refinement with trace recording, quotients, and trace comparison.

The refinement worklist is seeded with every cell of the input partition
(in partition order) for the public entry point; refinement chains after an
individualization seed only the fresh singleton, which is equivalent on an
equitable parent and much cheaper.  Cells are split by neighbor counts
toward the splitter, fragments ordered by ascending count.

A refinement trace is the sequence of new 1-based positions created by
splits, in creation order.  Traces are compared component-wise; when one
trace is a proper prefix of the other, the longer one (finer partition)
orders first.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import ColoredGraph, OrderedPartition

__all__ = [
    "QuotientGraph",
    "TraceComparison",
    "BudgetedRefineResult",
    "refine",
    "refine_with_budget",
    "is_equitable",
    "quotient",
    "encode_quotient",
    "compare_traces",
    "trace_cmp",
]

Trace = tuple[int, ...]


class _WorseAbort(Exception):
    """Raised when an emerging trace exceeds its reference component-wise."""

    def __init__(self, index: int):
        self.index = index


class TraceSink:
    """Accumulates trace elements, optionally comparing against a reference.

    With ``abort_early`` the sink raises :class:`_WorseAbort` as soon as an
    element exceeds the reference; otherwise it records the divergence and
    keeps accumulating.  An emerging trace that outlives the reference is
    better (finer); one that stops short is worse.
    """

    __slots__ = ("elements", "reference", "abort_early", "better", "worse_at")

    def __init__(self, reference: Trace | None = None, abort_early: bool = True):
        self.elements: list[int] = []
        self.reference = reference
        self.abort_early = abort_early
        self.better = False
        self.worse_at: int | None = None

    def append(self, pos: int) -> None:
        i = len(self.elements)
        self.elements.append(pos)
        ref = self.reference
        if ref is None or self.better or self.worse_at is not None:
            return
        if i >= len(ref) or pos < ref[i]:
            self.better = True
        elif pos > ref[i]:
            self.worse_at = i
            if self.abort_early:
                raise _WorseAbort(i)

    def finish(self) -> None:
        """Apply the end-of-run length rule: stopping short of the reference is worse."""
        ref = self.reference
        if ref is None or self.better or self.worse_at is not None:
            return
        if len(self.elements) < len(ref):
            self.worse_at = len(self.elements)
            if self.abort_early:
                raise _WorseAbort(self.worse_at)

    def trace(self) -> Trace:
        return tuple(self.elements)


class PartState:
    """Mutable working form of an ordered partition (0-based, python lists)."""

    __slots__ = ("n", "order", "start_of", "clen", "where")

    def __init__(self, n: int, order: list[int], start_of: list[int],
                 clen: list[int], where: list[int]):
        self.n = n
        self.order = order
        self.start_of = start_of
        self.clen = clen
        self.where = where

    @classmethod
    def from_partition(cls, part: OrderedPartition) -> "PartState":
        n = part.n
        order = part._order.tolist()
        start_of = part._start_of.tolist()
        clen = [0] * n
        starts = part._starts
        bounds = starts.tolist() + [n]
        for k in range(len(starts)):
            clen[bounds[k]] = bounds[k + 1] - bounds[k]
        where = [0] * n
        for i, v in enumerate(order):
            where[v] = i
        return cls(n, order, start_of, clen, where)

    def copy(self) -> "PartState":
        return PartState(self.n, self.order[:], self.start_of[:],
                         self.clen[:], self.where[:])

    def starts(self) -> list[int]:
        out = []
        s = 0
        while s < self.n:
            out.append(s)
            s += self.clen[s]
        return out

    def is_discrete(self) -> bool:
        return all(l == 1 for l in self.clen)

    def num_cells(self) -> int:
        count = 0
        s = 0
        while s < self.n:
            count += 1
            s += self.clen[s]
        return count

    def individualize(self, v0: int, sink: TraceSink | None = None) -> int:
        """Split v0 out of its cell in place; returns the singleton's start."""
        s = self.start_of[v0]
        length = self.clen[s]
        if length <= 1:
            raise ValueError(f"vertex {v0 + 1} is in a singleton cell")
        order = self.order
        where = self.where
        i = where[v0]
        u = order[s]
        order[s], order[i] = v0, u
        where[v0], where[u] = s, i
        for j in range(s + 1, s + length):
            self.start_of[order[j]] = s + 1
        self.clen[s] = 1
        self.clen[s + 1] = length - 1
        if sink is not None:
            sink.append(s + 2)
        return s

    def to_partition(self) -> OrderedPartition:
        order = np.array(self.order, dtype=np.int32)
        start_of = np.array(self.start_of, dtype=np.int32)
        starts = np.array(self.starts(), dtype=np.int32)
        return OrderedPartition._from_arrays(order, start_of, starts)

    def positions_array(self) -> np.ndarray:
        return np.array(self.start_of, dtype=np.int32) + 1


def refine_state(graph, st: PartState, fresh: list[int] | None,
                 sink: TraceSink | None = None) -> None:
    """Refine ``st`` in place to an equitable partition.

    The worklist always holds every cell in partition order (FIFO); when a
    cell splits, every fragment except one largest is enqueued, and a cell
    that splits while still queued keeps its slot for the first fragment
    with the remaining fragments enqueued too.

    ``fresh`` is a pure optimization: when the partition is known to differ
    from an equitable one only at the listed cell starts, every other
    still-unsplit initial cell is provably a no-op splitter (cells only
    ever shrink inside the cells of the equitable ancestor, whose neighbor
    counts were already uniform) and its pass is skipped.  Passing None
    processes every cell.  The result is identical either way.
    """
    n = st.n
    adj = graph.adjacency()
    indptr = indices = None
    order = st.order
    start_of = st.start_of
    clen = st.clen
    starts = st.starts()
    queue = deque(starts)
    in_queue = [False] * n
    for s in starts:
        in_queue[s] = True
    if fresh is None:
        live = None
    else:
        live = [False] * n
        for s in fresh:
            live[s] = True
    cnt = [0] * n

    where = st.where
    while queue:
        s = queue.popleft()
        in_queue[s] = False
        if live is not None and not live[s]:
            continue
        length = clen[s]
        members = order[s:s + length]
        touched = []
        est = sum(len(adj[u]) for u in members) if length > 4 else 64
        if est >= 512:
            # Vectorized counting pass for heavy splitters.
            if indptr is None:
                indptr, indices = graph.csr()
            mem = np.fromiter(members, np.int32, length)
            cstarts = indptr[mem]
            lens = indptr[mem + 1] - cstarts
            total = int(lens.sum())
            if total:
                offs = np.zeros(length, dtype=np.int32)
                np.cumsum(lens[:-1], out=offs[1:])
                gather = np.arange(total, dtype=np.int32) + \
                    np.repeat(cstarts - offs, lens)
                counts = np.bincount(indices[gather], minlength=n)
                touched_np = np.nonzero(counts)[0]
                touched = touched_np.tolist()
                for w, c in zip(touched, counts[touched_np].tolist()):
                    cnt[w] = c
        else:
            for u in members:
                for w in adj[u]:
                    c = cnt[w]
                    if c == 0:
                        touched.append(w)
                    cnt[w] = c + 1
        by_cell: dict[int, list[int]] = {}
        for w in touched:
            cs = start_of[w]
            if clen[cs] > 1:
                lst = by_cell.get(cs)
                if lst is None:
                    by_cell[cs] = [w]
                else:
                    lst.append(w)
        for z in sorted(by_cell):
            tmem = by_cell[z]
            lz = clen[z]
            t = len(tmem)
            if t == lz:
                c0 = cnt[tmem[0]]
                if all(cnt[v] == c0 for v in tmem):
                    continue
            # Move the touched members to the cell's tail, grouped by
            # ascending count; untouched (count 0) members stay in front.
            tmem.sort(key=cnt.__getitem__)
            idx = z + lz - 1
            for v in reversed(tmem):
                pv = where[v]
                u = order[idx]
                order[idx] = v
                order[pv] = u
                where[v] = idx
                where[u] = pv
                idx -= 1
            frags = []
            fs = z
            if t < lz:
                frags.append((z, lz - t))
                fs = z + lz - t
            run = 0
            prev = cnt[tmem[0]]
            for v in tmem:
                c = cnt[v]
                if c != prev:
                    frags.append((fs, run))
                    fs += run
                    run = 0
                    prev = c
                run += 1
            frags.append((fs, run))
            was_queued = in_queue[z]
            for fstart, flen in frags:
                clen[fstart] = flen
                if live is not None:
                    live[fstart] = True
                if fstart != z:
                    for i in range(fstart, fstart + flen):
                        start_of[order[i]] = fstart
                    if sink is not None:
                        sink.append(fstart + 1)
            if was_queued:
                for fstart, _ in frags:
                    if not in_queue[fstart]:
                        queue.append(fstart)
                        in_queue[fstart] = True
            else:
                big = max(range(len(frags)),
                          key=lambda i: (frags[i][1], -frags[i][0]))
                for i, (fstart, _) in enumerate(frags):
                    if i != big and not in_queue[fstart]:
                        queue.append(fstart)
                        in_queue[fstart] = True
        for w in touched:
            cnt[w] = 0


def refine(g: ColoredGraph) -> tuple[ColoredGraph, Trace]:
    """Refine a colored graph to its coarsest equitable partition finer than
    the input, recording every split position in order."""
    st = PartState.from_partition(g.coloring)
    sink = TraceSink()
    refine_state(g, st, None, sink)
    return g.with_coloring(st.to_partition()), sink.trace()


@dataclass
class BudgetedRefineResult:
    status: str  # "completed" | "completed_better" | "aborted_worse"
    graph: ColoredGraph | None = None
    trace: Trace | None = None
    abort_index: int | None = None


def refine_with_budget(g: ColoredGraph, reference: Trace) -> BudgetedRefineResult:
    """Refine while comparing the emerging trace against a reference.

    Aborts as soon as the trace exceeds the reference component-wise;
    completes (and reports so) when it stays equal or becomes smaller.
    """
    st = PartState.from_partition(g.coloring)
    sink = TraceSink(tuple(reference), abort_early=True)
    try:
        refine_state(g, st, None, sink)
        sink.finish()
    except _WorseAbort as a:
        return BudgetedRefineResult("aborted_worse", abort_index=a.index)
    refined = g.with_coloring(st.to_partition())
    status = "completed_better" if sink.better else "completed"
    return BudgetedRefineResult(status, graph=refined, trace=sink.trace())


def is_equitable(g: ColoredGraph) -> bool:
    """True iff cellmates have equal neighbor counts into every cell."""
    adj = g.adjacency()
    st = PartState.from_partition(g.coloring)
    start_of = st.start_of
    s = 0
    while s < g.n:
        length = st.clen[s]
        if length > 1:
            ref = None
            for v0 in st.order[s:s + length]:
                d: dict[int, int] = {}
                for w in adj[v0]:
                    cs = start_of[w]
                    d[cs] = d.get(cs, 0) + 1
                sig = sorted(d.items())
                if ref is None:
                    ref = sig
                elif sig != ref:
                    return False
        s += length
    return g.n > 0


@dataclass(frozen=True)
class QuotientGraph:
    """Multigraph with loops on cell positions of an equitable graph."""

    vertices: tuple[int, ...]
    edge_multiset: dict[tuple[int, int], int] = field(hash=False)
    cell_sizes: dict[int, int] = field(hash=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuotientGraph):
            return NotImplemented
        return (self.vertices == other.vertices
                and self.edge_multiset == other.edge_multiset
                and self.cell_sizes == other.cell_sizes)


def quotient(g: ColoredGraph) -> QuotientGraph:
    """Quotient of an equitable colored graph on its cell positions."""
    if not is_equitable(g):
        raise ValueError("quotient requires an equitable graph")
    pos = g.coloring.positions()
    verts = tuple(int(pos[v - 1]) for cell in g.coloring.cells() for v in cell[:1])
    sizes = {int(pos[cell[0] - 1]): len(cell) for cell in g.coloring.cells()}
    mult: dict[tuple[int, int], int] = {}
    for u, v in g.edges:
        p, q = int(pos[u - 1]), int(pos[v - 1])
        if p > q:
            p, q = q, p
        mult[(p, q)] = mult.get((p, q), 0) + 1
    return QuotientGraph(tuple(sorted(verts)), mult, sizes)


def encode_quotient(q: QuotientGraph) -> bytes:
    """Deterministic injective byte encoding of a quotient graph.

    Layout (all fields 4-byte big-endian unsigned): vertex count, then cell
    sizes in position order, then one (min position, max position,
    multiplicity) triple per edge, sorted by position pair.
    """
    out = [len(q.vertices).to_bytes(4, "big")]
    for p in q.vertices:
        out.append(q.cell_sizes[p].to_bytes(4, "big"))
    for (p, r), m in sorted(q.edge_multiset.items()):
        out.append(p.to_bytes(4, "big"))
        out.append(r.to_bytes(4, "big"))
        out.append(m.to_bytes(4, "big"))
    return b"".join(out)


def quotient_key(g: ColoredGraph, st: PartState) -> bytes:
    """encode_quotient(quotient(...)) computed straight from a refine state.

    The state must already be equitable; this skips building the
    QuotientGraph object.
    """
    n = st.n
    dtype = np.int32 if n <= 46000 else np.int64
    start_np = np.asarray(st.start_of, dtype=dtype)
    sizes = np.bincount(start_np, minlength=n)
    sizes = sizes[sizes > 0]
    head = np.empty(1 + len(sizes), dtype=np.int64)
    head[0] = len(sizes)
    head[1:] = sizes
    eu, ev = g.edge_arrays()
    if len(eu):
        pu = start_np[eu]
        pv = start_np[ev]
        lo = np.minimum(pu, pv)
        hi = np.maximum(pu, pv)
        keys, counts = np.unique(lo * dtype(n + 1) + hi, return_counts=True)
        body = np.empty(3 * len(keys), dtype=np.int64)
        body[0::3] = keys // (n + 1) + 1
        body[1::3] = keys % (n + 1) + 1
        body[2::3] = counts
        data = np.concatenate([head, body])
    else:
        data = head
    return data.astype(">u4").tobytes()


_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MIX3 = np.uint64(0xFF51AFD7ED558CCD)
_MIX4 = np.uint64(0xC4CEB9FE1A85EC53)
_GOLD = np.uint64(0x9E3779B97F4A7C15)


def _mixsum(keys: np.ndarray, c1: np.uint64, c2: np.uint64) -> int:
    z = keys.astype(np.uint64) + _GOLD
    z ^= z >> np.uint64(30)
    z *= c1
    z ^= z >> np.uint64(27)
    z *= c2
    z ^= z >> np.uint64(31)
    return int(z.sum(dtype=np.uint64))


def quotient_hash(g: ColoredGraph, st: PartState) -> bytes:
    """128-bit multiset hash carrying the same information as quotient_key.

    Equal keys always hash equally; unequal keys collide with probability
    around 2^-128, so this is used for the scan-internal comparisons where
    only grouping and a fixed invariant order matter, while leaves and the
    public surface keep the exact byte encoding.
    """
    n = st.n
    dtype = np.int32 if n <= 46000 else np.int64
    start_np = np.asarray(st.start_of, dtype=dtype)
    counts = np.bincount(start_np, minlength=n)
    nz = np.nonzero(counts)[0]
    cells = nz.astype(np.int64) * (n + 2) + counts[nz]
    h1 = _mixsum(cells, _MIX1, _MIX2)
    h2 = _mixsum(cells, _MIX3, _MIX4)
    eu, ev = g.edge_arrays()
    if len(eu):
        pu = start_np[eu]
        pv = start_np[ev]
        lo = np.minimum(pu, pv)
        hi = np.maximum(pu, pv)
        keys = lo.astype(np.int64) * (n + 1) + hi
        h1 = (h1 + _mixsum(keys, _MIX2, _MIX3)) & 0xFFFFFFFFFFFFFFFF
        h2 = (h2 + _mixsum(keys, _MIX4, _MIX1)) & 0xFFFFFFFFFFFFFFFF
    return h1.to_bytes(8, "big") + h2.to_bytes(8, "big")


class TraceComparison(enum.Enum):
    EQUAL = "equal"
    FIRST_SMALLER = "first_smaller"
    SECOND_SMALLER = "second_smaller"
    FIRST_IS_PREFIX = "first_is_prefix"
    SECOND_IS_PREFIX = "second_is_prefix"


def compare_traces(t1: Trace, t2: Trace) -> TraceComparison:
    """Component-wise comparison at the first differing index; a proper
    prefix with no differing index is reported as such."""
    for a, b in zip(t1, t2):
        if a < b:
            return TraceComparison.FIRST_SMALLER
        if a > b:
            return TraceComparison.SECOND_SMALLER
    if len(t1) == len(t2):
        return TraceComparison.EQUAL
    if len(t1) < len(t2):
        return TraceComparison.FIRST_IS_PREFIX
    return TraceComparison.SECOND_IS_PREFIX


def trace_cmp(t1: Trace, t2: Trace) -> int:
    """Total order used by the search: component-wise first, and when one
    trace is a proper prefix of the other the longer (finer) one orders
    first.  Returns -1, 0, or 1."""
    c = compare_traces(t1, t2)
    if c is TraceComparison.EQUAL:
        return 0
    if c is TraceComparison.FIRST_SMALLER:
        return -1
    if c is TraceComparison.SECOND_SMALLER:
        return 1
    if c is TraceComparison.SECOND_IS_PREFIX:
        return -1
    return 1
