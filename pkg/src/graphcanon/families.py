"""Benchmark graph generators: complete, cycle, grid, torus, rook's,
quadratic-residue, and gadget-replacement families."""

from __future__ import annotations

import itertools

from .graph import ColoredGraph

__all__ = [
    "complete_graph",
    "cycle_graph",
    "grid_graph",
    "torus_graph",
    "lattice_graph",
    "paley_graph",
    "cfi_graph",
    "generate",
]


def complete_graph(n: int) -> ColoredGraph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return ColoredGraph(n, itertools.combinations(range(1, n + 1), 2))


def cycle_graph(n: int) -> ColoredGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return ColoredGraph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def _hypercube_index(coords: tuple[int, ...], n: int) -> int:
    idx = 0
    for c in coords:
        idx = idx * n + c
    return idx + 1


def grid_graph(d: int, n: int) -> ColoredGraph:
    """d-dimensional grid on n^d vertices, nearest neighbors, no wrap."""
    if d < 1 or n < 2:
        raise ValueError("grid needs d >= 1 and n >= 2")
    edges = []
    for coords in itertools.product(range(n), repeat=d):
        u = _hypercube_index(coords, n)
        for k in range(d):
            if coords[k] + 1 < n:
                w = list(coords)
                w[k] += 1
                edges.append((u, _hypercube_index(tuple(w), n)))
    return ColoredGraph(n ** d, edges)


def torus_graph(d: int, n: int) -> ColoredGraph:
    """Wrapped d-dimensional grid on n^d vertices."""
    if d < 1 or n < 2:
        raise ValueError("torus needs d >= 1 and n >= 2")
    edges = set()
    for coords in itertools.product(range(n), repeat=d):
        u = _hypercube_index(coords, n)
        for k in range(d):
            w = list(coords)
            w[k] = (w[k] + 1) % n
            v = _hypercube_index(tuple(w), n)
            if u != v:
                edges.add((u, v) if u < v else (v, u))
    return ColoredGraph(n ** d, edges)


def lattice_graph(n: int) -> ColoredGraph:
    """Rook's graph on an n-by-n board: same row or same column."""
    if n < 2:
        raise ValueError("lattice needs n >= 2")
    edges = []
    for r in range(n):
        for c in range(n):
            u = r * n + c + 1
            for c2 in range(c + 1, n):
                edges.append((u, r * n + c2 + 1))
            for r2 in range(r + 1, n):
                edges.append((u, r2 * n + c + 1))
    return ColoredGraph(n * n, edges)


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def paley_graph(q: int) -> ColoredGraph:
    """Quadratic-residue graph on GF(q); q must be a prime with q = 1 mod 4."""
    if not _is_prime(q) or q % 4 != 1:
        raise ValueError("paley graph needs a prime q with q = 1 (mod 4)")
    residues = {(x * x) % q for x in range(1, q)}
    edges = [(a + 1, b + 1) for a in range(q) for b in range(a + 1, q)
             if (b - a) % q in residues]
    return ColoredGraph(q, edges)


def cfi_graph(base: ColoredGraph, twisted: bool = False) -> ColoredGraph:
    """Gadget replacement over a connected 3-regular base graph.

    Each base vertex becomes four inner vertices (one per even subset of
    its three incident edges) plus a pair of connector vertices per
    incident edge; an inner vertex joins connector 1 of the edges in its
    subset and connector 0 of the others.  Base edges link the connector
    pairs of their endpoints straight through, except that `twisted` swaps
    the two links of the lexicographically first base edge.  The twisted
    and untwisted results are never isomorphic.
    """
    adj = base.adjacency()
    if any(len(a) != 3 for a in adj):
        raise ValueError("base graph must be 3-regular")
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != base.n:
        raise ValueError("base graph must be connected")

    base_edges = sorted(base.edges)
    nxt = 1
    connector: dict[tuple[int, int, int], int] = {}
    inner: dict[tuple[int, int], int] = {}
    for u in range(1, base.n + 1):
        incident = [e for e in base_edges if u in e]
        for si, subset in enumerate(_even_subsets(3)):
            inner[(u, si)] = nxt
            nxt += 1
        for e in incident:
            ei = base_edges.index(e)
            for bit in (0, 1):
                connector[(u, ei, bit)] = nxt
                nxt += 1
    edges = []
    for u in range(1, base.n + 1):
        incident = [base_edges.index(e) for e in base_edges if u in e]
        for si, subset in enumerate(_even_subsets(3)):
            for slot, ei in enumerate(incident):
                bit = 1 if slot in subset else 0
                edges.append((inner[(u, si)], connector[(u, ei, bit)]))
    for ei, (u, v) in enumerate(base_edges):
        swap = twisted and ei == 0
        for bit in (0, 1):
            other = (1 - bit) if swap else bit
            edges.append((connector[(u, ei, bit)], connector[(v, ei, other)]))
    return ColoredGraph(nxt - 1, edges)


def _even_subsets(k: int) -> list[frozenset[int]]:
    out = []
    for r in range(0, k + 1, 2):
        for combo in itertools.combinations(range(k), r):
            out.append(frozenset(combo))
    return out


_FAMILIES = {
    "complete": (complete_graph, 1),
    "cycle": (cycle_graph, 1),
    "grid": (grid_graph, 2),
    "torus": (torus_graph, 2),
    "lattice": (lattice_graph, 1),
    "paley": (paley_graph, 1),
}


def generate(family: str, *params) -> ColoredGraph:
    """Build a named family instance, e.g. generate("grid", 3, 20).

    The cfi family takes a base ColoredGraph and an optional twist flag;
    all other families take integers.
    """
    if family == "cfi":
        if not params or not isinstance(params[0], ColoredGraph):
            raise ValueError("cfi needs a base graph")
        twisted = bool(params[1]) if len(params) > 1 else False
        return cfi_graph(params[0], twisted)
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    fn, arity = _FAMILIES[family]
    if len(params) != arity:
        raise ValueError(f"{family} takes {arity} parameter(s)")
    return fn(*[int(p) for p in params])
