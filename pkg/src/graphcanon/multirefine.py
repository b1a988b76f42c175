"""Multi-refinement: refine, then split cells by the quotient graphs of
their members' individualization-refinements until stable.

For every non-trivial cell, one representative per orbit of the supplied
automorphism subgroup is individualized and refined; the resulting quotient
encodings either split the cell (members grouped by encoding, fragments in
ascending encoding order, then the partition is re-refined and the scan
restarts) or certify it.  When some child partition is discrete the scan
stops early: automorphisms are read off pairs of equal discrete children,
and the discrete child with the smallest encoding becomes the result.

The output partition therefore respects node individualizations: cellmates
always produce equal child quotient encodings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import ColoredGraph, OrderedPartition, Permutation, is_automorphism
from .permgroup import PermutationGroup, orbit_ids
from .refine import (
    PartState,
    TraceSink,
    Trace,
    _WorseAbort,
    quotient_key,
    refine_state,
)

__all__ = [
    "DiscreteShortcut",
    "MultiRefineResult",
    "multi_refine",
    "select_target_cell",
    "respects_individualizations",
]


@dataclass
class DiscreteShortcut:
    """Details of an early exit through a discrete child partition."""

    partition: OrderedPartition
    encoding: bytes
    vertex: int          # the individualized vertex that produced it
    cell_position: int   # 1-based position of the cell that fired
    rounds_before: int   # split rounds completed before the firing scan


@dataclass
class MultiRefineResult:
    graph: ColoredGraph | None
    trace: Trace = ()
    target_cell: int | None = None
    child_stats: dict[int, int] = field(default_factory=dict)
    discrete_shortcut: DiscreteShortcut | None = None
    new_automorphisms: list[Permutation] = field(default_factory=list)
    encoding: bytes = b""
    children_computed: int = 0
    rounds: int = 0
    aborted_worse: bool = False
    abort_index: int | None = None


def multi_refine(
    g: ColoredGraph,
    group: PermutationGroup | None = None,
    *,
    check_group: bool = False,
    _orbit_gens: Sequence[np.ndarray] | None = None,
    _budget: Trace | None = None,
    _abort_early: bool = True,
    _on_automorphism: Callable[[Permutation], None] | None = None,
    _leaf_sink: Callable[[OrderedPartition, Trace, bytes, int], bool] | None = None,
) -> MultiRefineResult:
    """Refine a colored graph so the result respects node individualizations.

    ``group`` must be a subgroup of the graph's automorphism group; only one
    representative per orbit is individualized during cell scans, and newly
    discovered automorphisms extend it.  The keyword-only parameters are
    search plumbing: a reference trace to abort against, an orbit-generator
    override, and callbacks receiving automorphisms and discrete children.
    """
    n = g.n
    if check_group and group is not None:
        for p in group.generators():
            if not is_automorphism(g, p):
                raise ValueError("group generator is not an automorphism")
    if _orbit_gens is not None:
        gen_arrays = list(_orbit_gens)
    elif group is not None:
        gen_arrays = [p._arr for p in group.generators()]
    else:
        gen_arrays = []

    autos: list[Permutation] = []

    def found_automorphism(arr: np.ndarray, node_graph: ColoredGraph) -> None:
        p = Permutation._from_array(arr)
        if not is_automorphism(node_graph, p):
            return
        autos.append(p)
        gen_arrays.append(p._arr)
        if _on_automorphism is not None:
            _on_automorphism(p)
        elif group is not None:
            group.extend(p)

    sink = TraceSink(_budget, abort_early=_abort_early and _budget is not None)
    st = PartState.from_partition(g.coloring)
    children_computed = 0
    rounds = 0
    try:
        refine_state(g, st, None, sink)
        child_stats: dict[int, int] = {}
        while True:
            ids = orbit_ids(n, gen_arrays)
            child_stats = {}
            split_done = False
            s = 0
            while s < n:
                length = st.clen[s]
                if length <= 1:
                    s += length
                    continue
                members = sorted(st.order[s:s + length])
                reps = []
                seen: set[int] = set()
                for v in members:
                    r = int(ids[v])
                    if r not in seen:
                        seen.add(r)
                        reps.append(v)
                entries = []  # (key, vertex0, state, trace, discrete)
                discrete_found = False
                stop_scan = False
                for v in reps:
                    child = st.copy()
                    csink = TraceSink()
                    active = child.individualize(v, csink)
                    refine_state(g, child, [active], csink)
                    children_computed += 1
                    key = quotient_key(g, child)
                    disc = child.is_discrete()
                    entries.append((key, v, child, csink.trace(), disc))
                    if disc:
                        discrete_found = True
                        if _leaf_sink is not None:
                            part = child.to_partition()
                            local = sink.trace() + csink.trace()
                            if not _leaf_sink(part, local, key, v + 1):
                                stop_scan = True
                                break
                if discrete_found:
                    disc_entries = [e for e in entries if e[4]]
                    node_graph = g.with_coloring(st.to_partition())
                    if _leaf_sink is None:
                        by_key: dict[bytes, list] = {}
                        for e in disc_entries:
                            by_key.setdefault(e[0], []).append(e)
                        for bucket in by_key.values():
                            base = bucket[0][2]
                            base_order = np.array(base.order, dtype=np.int32)
                            for other in bucket[1:]:
                                arr = np.empty(n, dtype=np.int32)
                                arr[base_order] = np.array(other[2].order,
                                                           dtype=np.int32)
                                found_automorphism(arr, node_graph)
                    key, v, child, ctrace, _ = min(
                        disc_entries, key=lambda e: (e[0], e[1]))
                    sink.append(st.start_of[v] + 2)
                    for el in ctrace:
                        sink.append(el)
                    sink.finish()
                    part = child.to_partition()
                    return MultiRefineResult(
                        graph=g.with_coloring(part),
                        trace=sink.trace(),
                        target_cell=None,
                        child_stats={},
                        discrete_shortcut=DiscreteShortcut(
                            part, key, v + 1, s + 1, rounds),
                        new_automorphisms=autos,
                        encoding=key,
                        children_computed=children_computed,
                        rounds=rounds,
                    )
                rep_key = {int(ids[e[1]]): e[0] for e in entries}
                keys = sorted(set(rep_key.values()))
                if len(keys) > 1:
                    members.sort(key=lambda v: rep_key[int(ids[v])])
                    order = st.order
                    order[s:s + length] = members
                    frag_starts = [s]
                    prev = rep_key[int(ids[members[0]])]
                    for i in range(1, length):
                        k = rep_key[int(ids[members[i]])]
                        if k != prev:
                            frag_starts.append(s + i)
                            prev = k
                    frag_starts.append(s + length)
                    for fi in range(len(frag_starts) - 1):
                        fs, fe = frag_starts[fi], frag_starts[fi + 1]
                        st.clen[fs] = fe - fs
                        if fi > 0:
                            for j in range(fs, fe):
                                st.start_of[order[j]] = fs
                            sink.append(fs + 1)
                    refine_state(g, st, frag_starts[:-1], sink)
                    rounds += 1
                    split_done = True
                    break
                child_stats[s + 1] = entries[0][2].num_cells()
                s += length
            if not split_done:
                break
        sink.finish()
        part = st.to_partition()
        target = None
        if child_stats:
            best = max(child_stats.values())
            target = min(p for p, c in child_stats.items() if c == best)
        return MultiRefineResult(
            graph=g.with_coloring(part),
            trace=sink.trace(),
            target_cell=target,
            child_stats=child_stats,
            new_automorphisms=autos,
            encoding=quotient_key(g, st),
            children_computed=children_computed,
            rounds=rounds,
        )
    except _WorseAbort as a:
        return MultiRefineResult(
            graph=None,
            trace=sink.trace(),
            new_automorphisms=autos,
            children_computed=children_computed,
            aborted_worse=True,
            abort_index=a.index,
        )


def select_target_cell(result: MultiRefineResult) -> int | None:
    """Leftmost cell whose representative's individualization-refinement
    reaches the partition with the most cells; None for discrete results."""
    if result.graph is None or result.graph.coloring.is_discrete():
        return None
    if not result.child_stats:
        return None
    best = max(result.child_stats.values())
    return min(p for p, c in result.child_stats.items() if c == best)


def respects_individualizations(g: ColoredGraph) -> bool:
    """Exhaustive oracle: cellmates must yield equal child quotient encodings."""
    st = PartState.from_partition(g.coloring)
    s = 0
    while s < g.n:
        length = st.clen[s]
        if length > 1:
            ref = None
            for v in st.order[s:s + length]:
                child = st.copy()
                active = child.individualize(v)
                refine_state(g, child, [active], None)
                key = quotient_key(g, child)
                if ref is None:
                    ref = key
                elif key != ref:
                    return False
        s += length
    return True
