"""Level-iteration search: canonical forms, automorphism groups, isomorphism.

The tree of individualization-refinements is visited level by level.  Every
surviving node at the current level is expanded (one child per orbit of the
known automorphism subgroup intersecting its target cell) and each fresh
child is driven straight down to one leaf.  Leaves are discrete partitions,
i.e. complete labelings; equal leaf certificates yield automorphisms, which
prune sibling subtrees through orbit filtering, and node certificates
(cumulative trace plus quotient encoding) prune whole subtrees, keeping
only the minimal certificate class at every level.

For group computation the final level is handled differently: the first
leaf-producing scan stores the labelings of all its discrete children, and
every later node at that level contributes a single probe leaf which is
matched against the store; unmatched probes are kept as residuals, and the
store doubles as the probe target for isomorphism testing of a second
graph.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .graph import (
    ColoredGraph,
    OrderedPartition,
    Permutation,
    apply_permutation,
    is_automorphism,
)
from .multirefine import multi_refine
from .permgroup import PermutationGroup, orbit_ids
from .refine import (
    PartState,
    Trace,
    TraceSink,
    _WorseAbort,
    quotient_key,
    refine_state,
    trace_cmp,
)

__all__ = [
    "CapacityError",
    "SearchStats",
    "CanonicalCandidate",
    "canonical_form",
    "canonical_certificate",
    "automorphism_group",
    "are_isomorphic",
    "brute_force_canonical",
]


class CapacityError(ValueError):
    """Raised when an input exceeds a hard implementation cap."""


@dataclass
class SearchStats:
    multirefine_calls: int = 0
    max_depth: int = 0
    generators_found: int = 0
    group_time: float = 0.0
    residual_count: int = 0


@dataclass
class CanonicalCandidate:
    discrete_partition: OrderedPartition
    labeling: Permutation
    encoding: bytes


class _WitnessFound(Exception):
    def __init__(self, perm: Permutation):
        self.perm = perm


def _inv_arr(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = np.arange(len(a), dtype=a.dtype)
    return out


def _key_cmp(a: tuple[Trace, bytes], b: tuple[Trace, bytes]) -> int:
    c = trace_cmp(a[0], b[0])
    if c:
        return c
    if a[1] < b[1]:
        return -1
    if a[1] > b[1]:
        return 1
    return 0


class _Node:
    __slots__ = ("prefix", "graph", "trace", "enc", "target_pos", "level",
                 "parent", "children", "expanded", "is_leaf", "shortcut",
                 "dead", "stamp", "ind_count", "sink_handled")

    def __init__(self, parent, prefix):
        self.parent = parent
        self.prefix = prefix
        self.level = 0 if parent is None else parent.level + 1
        self.children: dict[int, "_Node"] = {}
        self.expanded: list[int] = []
        self.dead = False
        self.sink_handled = False


class _Search:
    def __init__(self, g: ColoredGraph, mode: str, prune: bool = True,
                 trace_shortcut: bool = True,
                 foreign: tuple[dict, ColoredGraph] | None = None):
        self.g = g
        self.n = g.n
        self.mode = mode
        self.prune = prune
        self.trace_shortcut = trace_shortcut
        self.group = PermutationGroup(g.n)
        self.stats = SearchStats()
        self.refs: dict[int, tuple[Trace, bytes]] = {}
        self.stamps: dict[int, int] = {}
        self.best: tuple[tuple[Trace, bytes], np.ndarray, "_Node"] | None = None
        self.stored: dict[tuple[Trace, bytes], list[np.ndarray]] = {}
        self.stored_count = 0
        self.anchor_owner: object | None = None
        # Probe guide: per level, the reference path's target cell position
        # and whether that node's scan split nothing (plain refines suffice
        # to replay the layer); plus the reference leaf's cumulative trace.
        self.guide: dict[int, tuple[int, bool]] = {}
        self.guide_leaf_trace: Trace | None = None
        self.foreign = foreign

    # -- group bookkeeping ---------------------------------------------------

    def _timed_extend(self, p: Permutation) -> bool:
        t0 = time.perf_counter()
        new = self.group.extend(p)
        self.stats.group_time += time.perf_counter() - t0
        if new:
            self.stats.generators_found += 1
        return new

    def _register_auto(self, p: Permutation, verified: bool) -> bool:
        if not verified and not is_automorphism(self.g, p):
            return False
        return self._timed_extend(p)

    def _stab_arrays(self, prefix: tuple[int, ...]) -> list[np.ndarray]:
        t0 = time.perf_counter()
        arrs = self.group.fixing_generator_arrays(prefix)
        self.stats.group_time += time.perf_counter() - t0
        return arrs

    # -- reference / liveness ------------------------------------------------

    def _improve(self, level: int, key: tuple[Trace, bytes]) -> None:
        self.refs[level] = key
        self.stamps[level] = self.stamps.get(level, 0) + 1
        for l in [l for l in self.refs if l > level]:
            del self.refs[l]
            self.stamps[l] = self.stamps.get(l, 0) + 1
        self.best = None
        self.stored = {}
        self.stored_count = 0
        self.anchor_owner = None
        self.guide = {l: g for l, g in self.guide.items() if l < level}
        self.guide_leaf_trace = None

    def _alive(self, node: "_Node") -> bool:
        nd = node
        while nd is not None:
            if nd.dead or nd.stamp != self.stamps.get(nd.level, 0):
                node.dead = True
                return False
            nd = nd.parent
        return True

    def _sibling_pruned(self, nd: "_Node", cache: dict) -> bool:
        """True when a smaller expanded sibling lies in nd's orbit under the
        known stabilizer of the parent prefix: the subtrees are isomorphic
        and the earlier one stands for both."""
        if not self.prune or nd.parent is None:
            return False
        par = nd.parent
        key = id(par)
        hit = cache.get(key)
        if hit is None or hit[0] != self.stats.generators_found:
            ids = orbit_ids(self.n, self._stab_arrays(par.prefix))
            cache[key] = (self.stats.generators_found, ids, par)
            hit = cache[key]
        ids = hit[1]
        v = nd.prefix[-1]
        mine = int(ids[v - 1])
        for u in par.expanded:
            if u >= v:
                break
            if int(ids[u - 1]) == mine:
                nd.dead = True
                return True
        return False

    # -- leaf handling ---------------------------------------------------------

    def _labeling_of(self, partition: OrderedPartition) -> np.ndarray:
        return partition._start_of

    def _store_match(self, key: tuple[Trace, bytes], lab: np.ndarray,
                     store_always: bool) -> bool:
        if self.foreign is not None:
            fstored, g1 = self.foreign
            for other in fstored.get(key, ()):
                w = Permutation._from_array(_inv_arr(lab)[other])
                if apply_permutation(g1, w) == self.g:
                    raise _WitnessFound(w)
        matched = False
        bucket = self.stored.get(key)
        if bucket is not None:
            for other in bucket:
                if np.array_equal(other, lab):
                    matched = True
                    break
                p = Permutation._from_array(_inv_arr(other)[lab])
                if is_automorphism(self.g, p):
                    self._timed_extend(p)
                    matched = True
                    break
        if store_always or not matched:
            self.stored.setdefault(key, []).append(lab)
            self.stored_count += 1
        return matched

    def _handle_canon_leaf(self, node: "_Node") -> None:
        lab = self._labeling_of(node.graph.coloring)
        key = (node.trace, node.enc)
        if self.best is None:
            self.best = (key, lab, node)
            return
        c = _key_cmp(key, self.best[0])
        if c == 0:
            blab = self.best[1]
            if not np.array_equal(blab, lab):
                p = Permutation._from_array(_inv_arr(blab)[lab])
                self._register_auto(p, verified=False)
        elif c < 0:
            self.best = (key, lab, node)

    def _leaf_arrival(self, node: "_Node") -> None:
        if node.ind_count > self.stats.max_depth:
            self.stats.max_depth = node.ind_count
        if self.mode == "canon":
            lab = self._labeling_of(node.graph.coloring)
            self._store_match((node.trace, node.enc), lab, store_always=False)
            self._handle_canon_leaf(node)
        elif not node.sink_handled:
            lab = self._labeling_of(node.graph.coloring)
            self._store_match((node.trace, node.enc), lab, store_always=False)

    # -- node creation ---------------------------------------------------------

    def _make_sink(self, pre_trace: Trace):
        cell: dict = {}

        def sink(partition: OrderedPartition, local_trace: Trace,
                 key: bytes, vertex: int) -> bool:
            if self.anchor_owner is None:
                self.anchor_owner = cell
            is_anchor = self.anchor_owner is cell
            lab = self._labeling_of(partition)
            self._store_match((pre_trace + local_trace, key), lab,
                              store_always=is_anchor)
            return is_anchor

        return sink, cell

    def _make_node(self, parent: "_Node | None", v: int | None) -> "_Node | None":
        level = 0 if parent is None else parent.level + 1
        if parent is None:
            prefix: tuple[int, ...] = ()
            pre_trace: Trace = ()
            base = self.g
        else:
            prefix = parent.prefix + (v,)
            pre_trace = parent.trace + (parent.graph.coloring.position(v) + 1,)
            base = parent.graph.individualize(v)
        self.stats.multirefine_calls += 1
        self.group.prescribe_base(prefix)

        budget = None
        ref = self.refs.get(level)
        if ref is not None:
            rt = ref[0]
            k = len(pre_trace)
            if rt[:k] == pre_trace:
                budget = rt[k:]
            else:
                for i in range(min(k, len(rt))):
                    if pre_trace[i] > rt[i]:
                        return None
                    if pre_trace[i] < rt[i]:
                        break

        sink = None
        cell = None
        if self.mode == "aut":
            sink, cell = self._make_sink(pre_trace)
        res = multi_refine(
            base,
            _orbit_gens=self._stab_arrays(prefix),
            _budget=budget,
            _abort_early=self.trace_shortcut,
            _on_automorphism=lambda p: self._register_auto(p, verified=True),
            _leaf_sink=sink,
        )
        if res.aborted_worse:
            return None

        node = _Node(parent, prefix)
        node.graph = res.graph
        node.trace = pre_trace + res.trace
        node.enc = res.encoding
        node.target_pos = res.target_cell
        node.is_leaf = res.graph.coloring.is_discrete()
        node.shortcut = res.discrete_shortcut is not None
        node.ind_count = len(prefix) + (1 if node.shortcut else 0)
        node.sink_handled = self.mode == "aut" and node.shortcut

        if not (self.mode == "aut" and node.is_leaf):
            key = (node.trace, node.enc)
            ref = self.refs.get(level)
            if ref is None:
                self.refs[level] = key
            else:
                c = _key_cmp(key, ref)
                if c > 0:
                    return None
                if c < 0:
                    self._improve(level, key)
        self._update_guide(node, res)
        node.stamp = self.stamps.setdefault(level, 0)
        return node

    def _update_guide(self, node: "_Node", res) -> None:
        if node.is_leaf:
            if self.guide_leaf_trace is None:
                self.guide_leaf_trace = node.trace
                sc = res.discrete_shortcut
                if sc is not None:
                    self.guide[node.level] = (sc.cell_position,
                                              sc.rounds_before == 0)
        elif node.level not in self.guide:
            self.guide[node.level] = (node.target_pos, res.rounds == 0)

    def _probe_attempt(self, nd: "_Node", v: int) -> bool:
        """Replay the reference path below nd with plain refinements only,
        producing a single probe leaf matched against the stored labelings.

        A verified match prunes the sibling subtree rooted at v outright
        (it is the automorphic image of explored work).  Any structural
        mismatch, trace divergence, or failed match reports False and the
        caller falls back to the full expansion, so the probe is purely an
        accelerator.
        """
        glt = self.guide_leaf_trace
        if glt is None:
            return False
        k = len(nd.trace)
        if glt[:k] != nd.trace:
            return False
        reference = glt[k:]
        st = PartState.from_partition(nd.graph.coloring)
        level = nd.level + 1
        inds = len(nd.prefix)
        elements: list[int] = []
        candidates = [v - 1]
        while True:
            advanced = None
            for w0 in candidates:
                trial = st.copy()
                tsink = TraceSink(reference[len(elements):], abort_early=True)
                try:
                    active = trial.individualize(w0, tsink)
                    refine_state(self.g, trial, [active], tsink)
                except _WorseAbort:
                    continue
                if tsink.better or tsink.worse_at is not None:
                    continue
                advanced = (trial, tsink.elements, w0)
                break
            if advanced is None:
                return False
            st, got, w0 = advanced
            elements.extend(got)
            inds += 1
            if st.is_discrete():
                break
            info = self.guide.get(level)
            if info is None or not info[1]:
                return False
            cpos0 = info[0] - 1
            if not (0 <= cpos0 < self.n) or st.clen[cpos0] <= 1 \
                    or st.start_of[st.order[cpos0]] != cpos0:
                return False
            cell = sorted(st.order[cpos0:cpos0 + st.clen[cpos0]])
            later = [m for m in cell if m > w0]
            candidates = (later + cell)[:8]
            level += 1
        if len(elements) != len(reference):
            return False
        key = quotient_key(self.g, st)
        cum = nd.trace + tuple(elements)
        self.stats.multirefine_calls += 1
        if inds > self.stats.max_depth:
            self.stats.max_depth = inds
        lab = np.array(st.start_of, dtype=np.int32)
        return self._store_match((cum, key), lab, store_always=False)

    # -- expansion ----------------------------------------------------------------

    def _descend_choice(self, node: "_Node") -> int | None:
        """Pick the attempt's next vertex from the target cell.

        The flat partition order reflects the refinement history, so taking
        the first entry tends to pick structurally corresponding vertices
        across sibling subtrees, which makes leaf certificates collide and
        surface automorphisms early; preferring entries beyond the last
        individualized vertex additionally rotates through symmetric cells
        so the discovered generators have long cycles.  Any deterministic
        choice is admissible: this only affects pruning speed.
        """
        if node.target_pos is None:
            return None
        part = node.graph.coloring
        s0 = node.target_pos - 1
        flat = (part._order[s0:part._cell_end(s0)] + 1).tolist()
        last = node.prefix[-1] if node.prefix else 0
        for w in flat:
            if w > last:
                return w
        return flat[0]

    def _expand(self, nd: "_Node", out: list) -> None:
        if nd.target_pos is None:
            return
        members = nd.graph.coloring.cell_at_position(nd.target_pos)
        stab = self._stab_arrays(nd.prefix)
        ids = orbit_ids(self.n, stab)
        seen_gens = self.stats.generators_found
        expanded_ids = {int(ids[u - 1]) for u in nd.expanded}
        for v in members:
            if not self._alive(nd):
                break
            existing = nd.children.get(v)
            if existing is not None:
                if self._alive(existing):
                    out.append(existing)
                continue
            if self.stats.generators_found != seen_gens:
                stab = self._stab_arrays(nd.prefix)
                ids = orbit_ids(self.n, stab)
                seen_gens = self.stats.generators_found
                expanded_ids = {int(ids[u - 1]) for u in nd.expanded}
            if self.prune and int(ids[v - 1]) in expanded_ids:
                continue
            nd.expanded.append(v)
            expanded_ids.add(int(ids[v - 1]))
            if self.prune and self._probe_attempt(nd, v):
                continue
            child = self._make_node(nd, v)
            if child is None:
                continue
            nd.children[v] = child
            out.append(child)
            if child.is_leaf:
                self._leaf_arrival(child)
                continue
            cur = child
            while self._alive(cur) and not cur.is_leaf:
                w = self._descend_choice(cur)
                if w is None:
                    break
                cur.expanded.append(w)
                nxt = self._make_node(cur, w)
                if nxt is None:
                    break
                cur.children[w] = nxt
                cur = nxt
            if cur.is_leaf and self._alive(cur):
                self._leaf_arrival(cur)

    def run(self) -> None:
        root = self._make_node(None, None)
        if root.is_leaf:
            self._leaf_arrival(root)
            self.stats.residual_count = self.stored_count
            return
        frontier = [root]
        while True:
            cache: dict = {}
            alive = [nd for nd in frontier
                     if self._alive(nd) and not self._sibling_pruned(nd, cache)]
            if not any(not nd.is_leaf for nd in alive):
                break
            out: list[_Node] = []
            for nd in alive:
                if nd.is_leaf:
                    out.append(nd)
                elif self._alive(nd):
                    self._expand(nd, out)
            if not out:
                break
            frontier = out
        self.stats.residual_count = self.stored_count


def canonical_form(
    g: ColoredGraph, *, prune: bool = True, trace_shortcut: bool = True,
) -> tuple[ColoredGraph, Permutation, PermutationGroup, SearchStats]:
    """Canonical form of a colored graph.

    Returns the canonical relabeling of g, the labeling permutation
    (vertex to canonical position), the automorphism subgroup discovered
    along the way, and search statistics.  Isomorphic graphs map to equal
    canonical forms regardless of their labeling.
    """
    s = _Search(g, "canon", prune=prune, trace_shortcut=trace_shortcut)
    s.run()
    key, lab, _node = s.best
    labeling = Permutation._from_array(lab.astype(np.int32))
    canonical = apply_permutation(g, labeling)
    return canonical, labeling, s.group, s.stats


def canonical_certificate(
    g: ColoredGraph, *, prune: bool = True, trace_shortcut: bool = True,
) -> bytes:
    """Byte certificate of the canonical form: the surviving cumulative
    trace followed by the leaf quotient encoding.  Certificates of two
    colored graphs are equal iff the graphs are isomorphic."""
    s = _Search(g, "canon", prune=prune, trace_shortcut=trace_shortcut)
    s.run()
    (trace, enc), _, _ = s.best
    head = np.array([len(trace)] + list(trace), dtype=">u4").tobytes()
    return head + enc


def automorphism_group(
    g: ColoredGraph, *, prune: bool = True, trace_shortcut: bool = True,
) -> tuple[PermutationGroup, list[Permutation], SearchStats]:
    """Exact automorphism group of a colored graph.

    Returns the group (with exact big-integer order), the stored leaf
    permutations usable for isomorphism probes, and search statistics.
    """
    s = _Search(g, "aut", prune=prune, trace_shortcut=trace_shortcut)
    s.run()
    residuals = [Permutation._from_array(a.astype(np.int32))
                 for bucket in s.stored.values() for a in bucket]
    return s.group, residuals, s.stats


def are_isomorphic(g1: ColoredGraph, g2: ColoredGraph) -> Permutation | None:
    """An isomorphism witness mapping g1 onto g2, or None.

    Cheap invariants (vertex count, edge count, color class sizes) screen
    first; otherwise g1's group search stores its leaf permutations and
    g2's search probes one leaf per final-level node against that store.
    Any returned witness has been verified edge- and color-preserving.
    """
    if g1.n != g2.n or g1.m != g2.m:
        return None
    if sorted(len(c) for c in g1.coloring.cells()) != \
            sorted(len(c) for c in g2.coloring.cells()):
        return None
    s1 = _Search(g1, "aut")
    s1.run()
    s2 = _Search(g2, "aut", foreign=(s1.stored, g1))
    try:
        s2.run()
    except _WitnessFound as w:
        return w.perm
    return None


def brute_force_canonical(g: ColoredGraph) -> tuple[bytes, int]:
    """Independent factorial-enumeration oracle for graphs with at most 9
    vertices: minimal edge-list encoding over all color-preserving
    labelings, and the exact automorphism count."""
    n = g.n
    if n > 9:
        raise CapacityError("brute force oracle is capped at 9 vertices")
    cells = g.coloring.cells()
    sizes = [len(c) for c in cells]
    total = 1
    for s in sizes:
        total *= math.factorial(s)
    labels = np.zeros((total, n), dtype=np.int8)
    stride = total
    pos = 0
    for cell in cells:
        slots = list(range(pos, pos + len(cell)))
        pos += len(cell)
        perms = np.array(list(itertools.permutations(slots)), dtype=np.int8)
        stride //= len(perms)
        idx = (np.arange(total) // stride) % len(perms)
        labels[:, np.array(cell) - 1] = perms[idx]
    header = [n] + sizes
    eu, ev = g.edge_arrays()
    if len(eu) == 0:
        return np.array(header, dtype=">u4").tobytes(), total
    pu = labels[:, eu].astype(np.int16)
    pv = labels[:, ev].astype(np.int16)
    lo = np.minimum(pu, pv)
    hi = np.maximum(pu, pv)
    keys = lo * np.int16(n + 1) + hi
    keys.sort(axis=1)
    order = np.lexsort(keys.T[::-1])
    best = keys[order[0]]
    aut = int(np.all(keys == best, axis=1).sum())
    body: list[int] = []
    for k in best.tolist():
        body.append(k // (n + 1) + 1)
        body.append(k % (n + 1) + 1)
    enc = np.array(header + body, dtype=">u4").tobytes()
    return enc, aut
