"""Core domain types: colored graphs, ordered partitions, permutations.

Vertices are 1-based integers 1..n in every public interface.  Internally
arrays are 0-based numpy buffers; the translation happens at construction
and accessor boundaries only.

All three types are immutable after construction and safe to share across
threads for read-only use.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ColoredGraph",
    "OrderedPartition",
    "Permutation",
    "apply_permutation",
    "is_automorphism",
]


class OrderedPartition:
    """A sequence of disjoint non-empty cells whose union is 1..n.

    The cell order matters: it determines the position of every vertex
    (one plus the total size of all earlier cells) and therefore the color
    it represents.  Two partitions are equal when they have the same cell
    sequence with the same cell contents.
    """

    __slots__ = ("n", "_order", "_start_of", "_starts", "_cells")

    def __init__(self, cells: Iterable[Iterable[int]], n: int | None = None):
        cell_list = [sorted(c) for c in cells]
        total = sum(len(c) for c in cell_list)
        if n is None:
            n = total
        if total != n:
            raise ValueError(f"cells cover {total} vertices, expected {n}")
        seen = [False] * (n + 1)
        for c in cell_list:
            if not c:
                raise ValueError("empty cell")
            for v in c:
                if not (1 <= v <= n):
                    raise ValueError(f"vertex {v} out of range 1..{n}")
                if seen[v]:
                    raise ValueError(f"vertex {v} appears in two cells")
                seen[v] = True
        order = np.empty(n, dtype=np.int32)
        start_of = np.empty(n, dtype=np.int32)
        starts = np.empty(len(cell_list), dtype=np.int32)
        i = 0
        for k, c in enumerate(cell_list):
            starts[k] = i
            for v in c:
                order[i] = v - 1
                start_of[v - 1] = starts[k]
                i += 1
        self.n = n
        self._order = order
        self._start_of = start_of
        self._starts = starts
        self._cells: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def unit(cls, n: int) -> "OrderedPartition":
        """The single-cell partition ([n])."""
        return cls([range(1, n + 1)], n)

    @classmethod
    def discrete(cls, n: int) -> "OrderedPartition":
        return cls([[v] for v in range(1, n + 1)], n)

    @classmethod
    def _from_arrays(cls, order: np.ndarray, start_of: np.ndarray,
                     starts: np.ndarray) -> "OrderedPartition":
        # Trusted fast path used by the refinement engine.
        self = object.__new__(cls)
        self.n = len(order)
        self._order = order
        self._start_of = start_of
        self._starts = starts
        self._cells = None
        return self

    def cells(self) -> tuple[tuple[int, ...], ...]:
        """Cells in order, each as a sorted tuple of 1-based vertices."""
        if self._cells is None:
            out = []
            starts = self._starts
            bounds = list(starts) + [self.n]
            for k in range(len(starts)):
                members = self._order[bounds[k]:bounds[k + 1]] + 1
                out.append(tuple(sorted(members.tolist())))
            self._cells = tuple(out)
        return self._cells

    def num_cells(self) -> int:
        return len(self._starts)

    def is_discrete(self) -> bool:
        return len(self._starts) == self.n

    def is_unit(self) -> bool:
        return len(self._starts) == 1

    def cell_sizes(self) -> tuple[int, ...]:
        bounds = np.append(self._starts, self.n)
        return tuple(np.diff(bounds).tolist())

    def _check_vertex(self, v: int) -> None:
        if not (1 <= v <= self.n):
            raise ValueError(f"vertex {v} out of range 1..{self.n}")

    def position(self, v: int) -> int:
        """1 plus the total size of all cells before v's cell."""
        self._check_vertex(v)
        return int(self._start_of[v - 1]) + 1

    def index(self, v: int) -> int:
        """1-based index of the cell containing v."""
        self._check_vertex(v)
        return int(np.searchsorted(self._starts, self._start_of[v - 1])) + 1

    def cell_of(self, v: int) -> tuple[int, ...]:
        return self.cells()[self.index(v) - 1]

    def cell_at_position(self, pos: int) -> tuple[int, ...]:
        """Sorted members of the cell whose position is `pos`."""
        s = pos - 1
        e = self._cell_end(s)
        if not (0 <= s < self.n) or s not in self._starts:
            raise ValueError(f"{pos} is not a cell position")
        return tuple(sorted((self._order[s:e] + 1).tolist()))

    def individualize(self, v: int) -> "OrderedPartition":
        """Split v's cell into ({v}, cell - {v}), in place in the sequence.

        Vertices left behind in the cell shift one position right; every
        other vertex keeps its position.  v must lie in a non-trivial cell.
        """
        self._check_vertex(v)
        s = int(self._start_of[v - 1])
        e = self._cell_end(s)
        if e - s <= 1:
            raise ValueError(f"vertex {v} is in a singleton cell")
        order = self._order.copy()
        start_of = self._start_of.copy()
        seg = order[s:e]
        seg = np.concatenate(([v - 1], seg[seg != v - 1]))
        order[s:e] = seg
        start_of[seg[1:]] = s + 1
        k = int(np.searchsorted(self._starts, s))
        starts = np.insert(self._starts, k + 1, s + 1)
        return OrderedPartition._from_arrays(order, start_of, starts)

    def _cell_end(self, start: int) -> int:
        k = int(np.searchsorted(self._starts, start))
        if k + 1 < len(self._starts):
            return int(self._starts[k + 1])
        return self.n

    def is_finer_than(self, other: "OrderedPartition") -> bool:
        """True iff every vertex's position here is >= its position in other."""
        if self.n != other.n:
            raise ValueError("partitions have different vertex counts")
        return bool(np.all(self._start_of >= other._start_of))

    def positions(self) -> np.ndarray:
        """Position of every vertex as an array indexed by vertex-1."""
        return self._start_of + 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrderedPartition):
            return NotImplemented
        return self.n == other.n and self.cells() == other.cells()

    def __hash__(self) -> int:
        return hash((self.n, self.cells()))

    def __repr__(self) -> str:
        body = ",".join("{" + ",".join(map(str, c)) + "}" for c in self.cells())
        return f"OrderedPartition({body})"


def is_finer(pi1: OrderedPartition, pi2: OrderedPartition) -> bool:
    """True iff pi1 is finer than pi2 (positions only ever grow)."""
    return pi1.is_finer_than(pi2)


class Permutation:
    """A bijection on 1..n stored as the image sequence of 1..n."""

    __slots__ = ("_arr",)

    def __init__(self, images: Sequence[int]):
        arr = np.asarray(images, dtype=np.int32) - 1
        n = len(arr)
        if n == 0:
            raise ValueError("empty permutation")
        counts = np.bincount(arr, minlength=n) if arr.min() >= 0 else None
        if counts is None or arr.max() >= n or not np.all(counts == 1):
            raise ValueError("images are not a bijection on 1..n")
        self._arr = arr

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls._from_array(np.arange(n, dtype=np.int32))

    @classmethod
    def _from_array(cls, arr: np.ndarray) -> "Permutation":
        self = object.__new__(cls)
        self._arr = np.asarray(arr, dtype=np.int32)
        return self

    @classmethod
    def from_cycles(cls, text: str, n: int) -> "Permutation":
        """Parse disjoint-cycle notation, e.g. '(1 2)(5 6)'; '()' is the identity."""
        arr = np.arange(n, dtype=np.int32)
        body = text.strip()
        if body in ("", "()"):
            return cls._from_array(arr)
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"bad cycle notation: {text!r}")
        for chunk in body[1:-1].split(")("):
            pts = [int(t) for t in chunk.replace(",", " ").split()]
            if any(not (1 <= p <= n) for p in pts):
                raise ValueError(f"cycle point out of range in {text!r}")
            if len(set(pts)) != len(pts):
                raise ValueError(f"repeated point in {text!r}")
            for a, b in zip(pts, pts[1:] + pts[:1]):
                arr[a - 1] = b - 1
        perm = cls._from_array(arr)
        if np.bincount(perm._arr, minlength=n).max() > 1:
            raise ValueError(f"cycles are not disjoint in {text!r}")
        return perm

    @property
    def n(self) -> int:
        return len(self._arr)

    def __call__(self, v: int) -> int:
        if not (1 <= v <= self.n):
            raise ValueError(f"vertex {v} out of range 1..{self.n}")
        return int(self._arr[v - 1]) + 1

    def images(self) -> tuple[int, ...]:
        return tuple((self._arr + 1).tolist())

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition: (p * q)(v) = p(q(v))."""
        if self.n != other.n:
            raise ValueError("degree mismatch")
        return Permutation._from_array(self._arr[other._arr])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self._arr)
        inv[self._arr] = np.arange(self.n, dtype=np.int32)
        return Permutation._from_array(inv)

    def is_identity(self) -> bool:
        return bool(np.all(self._arr == np.arange(self.n, dtype=np.int32)))

    def cycles(self) -> str:
        """Disjoint-cycle string, smallest point first; identity is '()'."""
        arr = self._arr
        seen = [False] * self.n
        parts = []
        for i in range(self.n):
            if seen[i] or arr[i] == i:
                seen[i] = True
                continue
            cyc = [i]
            seen[i] = True
            j = int(arr[i])
            while j != i:
                cyc.append(j)
                seen[j] = True
                j = int(arr[j])
            parts.append("(" + " ".join(str(p + 1) for p in cyc) + ")")
        return "".join(parts) if parts else "()"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and bool(np.all(self._arr == other._arr))

    def __hash__(self) -> int:
        return hash(self._arr.tobytes())

    def __repr__(self) -> str:
        return f"Permutation{self.images()}"


class ColoredGraph:
    """An undirected simple graph on 1..n with an ordered partition as coloring."""

    __slots__ = ("n", "edges", "coloring", "_adj", "_csr", "_edge_arrays",
                 "_edge_key_bytes", "_sorted_cells")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 coloring: OrderedPartition | None = None):
        if n < 1:
            raise ValueError("need at least one vertex")
        norm = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) out of range 1..{n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise ValueError(f"duplicate edge {e}")
            norm.add(e)
        if coloring is None:
            coloring = OrderedPartition.unit(n)
        if coloring.n != n:
            raise ValueError("coloring does not cover 1..n")
        self.n = n
        self.edges = frozenset(norm)
        self.coloring = coloring
        self._adj = None
        self._csr = None
        self._edge_arrays = None
        self._edge_key_bytes = None
        self._sorted_cells = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex sorted neighbor tuples, 0-based, indexed by vertex-1."""
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges:
                adj[u - 1].append(v - 1)
                adj[v - 1].append(u - 1)
            self._adj = tuple(tuple(sorted(a)) for a in adj)
        return self._adj

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in compressed sparse row form (0-based int32 arrays)."""
        if self._csr is None:
            adj = self.adjacency()
            indptr = np.zeros(self.n + 1, dtype=np.int32)
            for v, nb in enumerate(adj):
                indptr[v + 1] = indptr[v] + len(nb)
            indices = np.empty(int(indptr[-1]), dtype=np.int32)
            for v, nb in enumerate(adj):
                indices[indptr[v]:indptr[v + 1]] = nb
            self._csr = (indptr, indices)
        return self._csr

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as two parallel 0-based int32 arrays (u < v)."""
        if self._edge_arrays is None:
            if self.edges:
                es = sorted(self.edges)
                eu = np.array([e[0] - 1 for e in es], dtype=np.int32)
                ev = np.array([e[1] - 1 for e in es], dtype=np.int32)
            else:
                eu = np.empty(0, dtype=np.int32)
                ev = np.empty(0, dtype=np.int32)
            self._edge_arrays = (eu, ev)
        return self._edge_arrays

    def _edge_keys_sorted(self) -> np.ndarray:
        if self._edge_key_bytes is None:
            eu, ev = self.edge_arrays()
            keys = eu.astype(np.int64) * (self.n + 1) + ev
            self._edge_key_bytes = np.sort(keys)
        return self._edge_key_bytes

    def with_coloring(self, coloring: OrderedPartition) -> "ColoredGraph":
        """Same edges, different coloring; shares cached adjacency."""
        g = object.__new__(ColoredGraph)
        g.n = self.n
        g.edges = self.edges
        g.coloring = coloring
        g._adj = self._adj
        g._csr = self._csr
        g._edge_arrays = self._edge_arrays
        g._edge_key_bytes = self._edge_key_bytes
        g._sorted_cells = None
        return g

    def individualize(self, v: int) -> "ColoredGraph":
        return self.with_coloring(self.coloring.individualize(v))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColoredGraph):
            return NotImplemented
        return (self.n == other.n and self.edges == other.edges
                and self.coloring == other.coloring)

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.coloring))

    def __repr__(self) -> str:
        return f"ColoredGraph(n={self.n}, m={self.m}, cells={self.coloring.num_cells()})"


def apply_permutation(g: ColoredGraph, p: Permutation) -> ColoredGraph:
    """Relabel a colored graph: edges map pointwise, cells map setwise in order."""
    if p.n != g.n:
        raise ValueError("degree mismatch")
    arr = p._arr
    eu, ev = g.edge_arrays()
    new_edges = zip((arr[eu] + 1).tolist(), (arr[ev] + 1).tolist())
    new_cells = [[int(arr[v - 1]) + 1 for v in cell] for cell in g.coloring.cells()]
    return ColoredGraph(g.n, new_edges, OrderedPartition(new_cells, g.n))


def is_automorphism(g: ColoredGraph, p: Permutation) -> bool:
    """True iff p preserves the edge set and every coloring cell setwise."""
    if p.n != g.n:
        return False
    arr = p._arr
    eu, ev = g.edge_arrays()
    pu = arr[eu].astype(np.int64)
    pv = arr[ev].astype(np.int64)
    lo = np.minimum(pu, pv)
    hi = np.maximum(pu, pv)
    keys = np.sort(lo * (g.n + 1) + hi)
    if not np.array_equal(keys, g._edge_keys_sorted()):
        return False
    if g._sorted_cells is None:
        g._sorted_cells = [np.array(c, dtype=np.int32) - 1 for c in g.coloring.cells()]
    for cell0 in g._sorted_cells:
        if not np.array_equal(np.sort(arr[cell0]), cell0):
            return False
    return True
