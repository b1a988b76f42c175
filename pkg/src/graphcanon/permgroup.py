"""Deterministic Schreier-Sims machinery with explicit transversals.

A group is represented by a base and strong generating set.  Each level i
holds a base point and the orbit of that point under the generators fixing
the first i base points, together with coset representative permutations
(cached as arrays while small, recomputed by tree walks when the orbit
gets large).  Every Schreier generator is sifted exactly once, so after
any extension the product of transversal sizes is the exact group order.

Internally permutations are 0-based int32 numpy arrays and the identity is
represented by None; the public surface speaks 1-based Permutation objects.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .graph import Permutation

__all__ = ["PermutationGroup", "group_new"]

# Above this many cached ints per level, coset representatives are rebuilt
# by walking the orbit tree instead of being stored.
_CACHE_LIMIT = 1 << 25


def _inv_into(a: np.ndarray, ident: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = ident
    return out


class _Level:
    __slots__ = ("point", "acting", "pts", "ptidx", "parent", "u_list",
                 "uinv_list", "cached", "done", "cursor", "n")

    def __init__(self, point: int, n: int):
        self.point = point
        self.n = n
        self.acting: list[int] = []       # generator ids valid at this level
        self.pts: list[int] = [point]     # orbit in discovery order
        self.ptidx: dict[int, int] = {point: 0}
        self.parent: list[tuple[int, int] | None] = [None]  # (gen id, parent idx)
        self.u_list: list[np.ndarray | None] | None = [None]
        self.uinv_list: list[np.ndarray | None] | None = [None]
        self.cached = True
        self.done: dict[int, int] = {}    # gen id -> orbit points processed
        self.cursor = 0                   # acting index before which all is done

    def add_acting(self, gid: int) -> None:
        self.acting.append(gid)
        self.done[gid] = 0

    def _maybe_uncache(self) -> None:
        if self.cached and len(self.pts) * self.n > _CACHE_LIMIT:
            self.cached = False
            self.u_list = None
            self.uinv_list = None

    def append_point(self, y: int, gid: int, parent_idx: int,
                     gen_arr: np.ndarray) -> None:
        self.ptidx[y] = len(self.pts)
        self.pts.append(y)
        self.parent.append((gid, parent_idx))
        if self.cached:
            up = self.u_list[parent_idx]
            self.u_list.append(gen_arr.copy() if up is None else gen_arr[up])
            self.uinv_list.append(None)
            self._maybe_uncache()

    def get_u(self, idx: int, gens: list[np.ndarray]) -> np.ndarray | None:
        """Coset representative mapping the base point to pts[idx]."""
        if self.cached:
            return self.u_list[idx]
        path = []
        i = idx
        while self.parent[i] is not None:
            gid, pidx = self.parent[i]
            path.append(gid)
            i = pidx
        u: np.ndarray | None = None
        for gid in reversed(path):
            arr = gens[gid]
            u = arr.copy() if u is None else arr[u]
        return u

    def get_uinv(self, idx: int, gens: list[np.ndarray],
                 ident: np.ndarray) -> np.ndarray | None:
        if self.cached:
            cached = self.uinv_list[idx]
            if cached is None and idx > 0:
                cached = _inv_into(self.u_list[idx], ident)
                self.uinv_list[idx] = cached
            return cached
        u = self.get_u(idx, gens)
        return None if u is None else _inv_into(u, ident)


class PermutationGroup:
    """A permutation group on 1..n held as a base and strong generating set."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("degree must be at least 1")
        self.n = n
        self._gens: list[np.ndarray] = []
        self._levels: list[_Level] = []
        self._id = np.arange(n, dtype=np.int32)

    # -- public queries ----------------------------------------------------

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(lv.point + 1 for lv in self._levels)

    @property
    def strong_generators(self) -> list[Permutation]:
        return [Permutation._from_array(a.copy()) for a in self._gens]

    def generators(self) -> list[Permutation]:
        return self.strong_generators

    def order(self) -> int:
        out = 1
        for lv in self._levels:
            out *= len(lv.pts)
        return out

    def membership(self, p: Permutation) -> bool:
        if p.n != self.n:
            raise ValueError("degree mismatch")
        res, _ = self._sift(p._arr, 0)
        return res is None

    def extend(self, p: Permutation) -> bool:
        """Add a permutation; returns True iff it was not already a member."""
        if p.n != self.n:
            raise ValueError("degree mismatch")
        return self._extend_array(p._arr)

    def orbits(self, points: Iterable[int]) -> list[list[int]]:
        """Partition the given vertices into orbits; each orbit is sorted so
        its first element is the representative."""
        pts = sorted({p for p in points})
        for p in pts:
            if not (1 <= p <= self.n):
                raise ValueError(f"point {p} out of range 1..{self.n}")
        ids = self.orbit_ids()
        buckets: dict[int, list[int]] = {}
        for p in pts:
            buckets.setdefault(int(ids[p - 1]), []).append(p)
        return [buckets[k] for k in sorted(buckets, key=lambda r: buckets[r][0])]

    def orbit_ids(self) -> np.ndarray:
        """0-based orbit representative (minimum member) for every vertex."""
        return orbit_ids(self.n, self._gens)

    def stabilizer(self, fixed: Sequence[int]) -> "PermutationGroup":
        """Exact pointwise stabilizer, via a rebuild with the fixed points as
        a base prefix."""
        pts = list(fixed)
        if len(set(pts)) != len(pts):
            raise ValueError("fixed points must be distinct")
        for p in pts:
            if not (1 <= p <= self.n):
                raise ValueError(f"point {p} out of range 1..{self.n}")
        rebuilt = PermutationGroup(self.n)
        rebuilt.prescribe_base(pts)
        for a in self._gens:
            rebuilt._extend_array(a)
        sub = PermutationGroup(self.n)
        for arr in rebuilt._gens:
            if all(arr[p - 1] == p - 1 for p in pts):
                sub._extend_array(arr)
        return sub

    # -- search-facing helpers ---------------------------------------------

    def prescribe_base(self, points: Sequence[int]) -> None:
        """Force the base to start with the given points.

        Only extends through levels that carry no generators yet; beyond
        that the request is ignored (callers fall back to generator
        filtering for orbit computations).
        """
        for j, p in enumerate(pt - 1 for pt in points):
            if j < len(self._levels):
                if self._levels[j].point != p:
                    return
                continue
            if any(self._gen_moves_level_prefix(a, j) for a in self._gens):
                return
            self._levels.append(_Level(p, self.n))

    def _gen_moves_level_prefix(self, arr: np.ndarray, j: int) -> bool:
        # True if arr belongs at a level deeper than j yet j has no slot for it.
        return all(arr[lv.point] == lv.point for lv in self._levels[:j]) and \
            bool(np.any(arr != self._id))

    def fixing_generator_arrays(self, points: Sequence[int]) -> list[np.ndarray]:
        """Generators of a subgroup of the pointwise stabilizer of `points`.

        When the point sequence is the image of a base prefix under some
        group element (found by walking the transversals), the result is
        the exact stabilizer within this group, obtained by conjugating the
        chain subgroup.  Otherwise the chain is walked as far as it matches
        and the remaining generators are filtered, which under-approximates
        but never overshoots the true stabilizer.
        """
        pts0 = [p - 1 for p in points]
        k = len(pts0)
        gamma: np.ndarray | None = None
        gamma_inv: np.ndarray | None = None
        j = 0
        ok = True
        while j < k and j < len(self._levels):
            lv = self._levels[j]
            target = pts0[j]
            x = target if gamma_inv is None else int(gamma_inv[target])
            if x != lv.point:
                idx = lv.ptidx.get(x)
                if idx is None:
                    ok = False
                    break
                u = lv.get_u(idx, self._gens)
                gamma = u.copy() if gamma is None else gamma[u]
                gamma_inv = _inv_into(gamma, self._id)
            j += 1
        if ok and j == min(k, len(self._levels)):
            if j >= len(self._levels):
                return []
            arrs = [self._gens[g] for g in self._levels[j].acting]
            if gamma is None:
                return arrs
            return [gamma[a[gamma_inv]] for a in arrs]
        return self._fixing_generators_filtered(pts0)

    def _fixing_generators_filtered(self, pts0: list[int]) -> list[np.ndarray]:
        i = 0
        while i < len(pts0) and i < len(self._levels) \
                and self._levels[i].point == pts0[i]:
            i += 1
        if i >= len(self._levels):
            return []
        arrs = [self._gens[g] for g in self._levels[i].acting]
        rest = pts0[i:]
        if rest:
            arrs = [a for a in arrs if all(a[p] == p for p in rest)]
        return arrs

    # -- core machinery ------------------------------------------------------

    def _sift(self, arr: np.ndarray, start: int) -> tuple[np.ndarray | None, int]:
        """Reduce arr through the transversals; returns (residue, drop level).
        A residue of None means membership."""
        cur = arr
        for i in range(start, len(self._levels)):
            lv = self._levels[i]
            x = int(cur[lv.point])
            if x == lv.point:
                continue
            idx = lv.ptidx.get(x)
            if idx is None:
                return cur, i
            uinv = lv.get_uinv(idx, self._gens, self._id)
            cur = uinv[cur]
        if (cur == self._id).all():
            return None, len(self._levels)
        return cur, len(self._levels)

    def _extend_array(self, arr: np.ndarray) -> bool:
        res, lvl = self._sift(np.asarray(arr, dtype=np.int32), 0)
        if res is None:
            return False
        self._insert(res, 0, lvl)
        self._verify_from(lvl)
        return True

    def _insert(self, arr: np.ndarray, first: int, lvl: int) -> None:
        # The generator acts at levels first..lvl only: below `first` it is
        # already a product of existing generators (it came from sifting
        # their Schreier generators), so orbits there cannot grow.
        if lvl == len(self._levels):
            moved = int(np.flatnonzero(arr != self._id)[0])
            self._levels.append(_Level(moved, self.n))
        gid = len(self._gens)
        self._gens.append(arr.astype(np.int32, copy=True))
        for i in range(first, lvl + 1):
            self._levels[i].add_acting(gid)

    def _verify_from(self, start: int) -> None:
        # Process pending (orbit point, generator) pairs bottom-up; each pair
        # either extends the orbit tree or yields a Schreier generator whose
        # sifted residue, if non-trivial, is inserted further down the chain.
        i = start
        while i >= 0:
            if i >= len(self._levels):
                i -= 1
                continue
            out = self._process_one(i)
            if out == "done":
                i -= 1
            elif out is not None:
                res, j = out
                self._insert(res, i + 1, j)
                i = j

    def _process_one(self, i: int):
        lv = self._levels[i]
        gens = self._gens
        while lv.cursor < len(lv.acting):
            gid = lv.acting[lv.cursor]
            k = lv.done[gid]
            if k >= len(lv.pts):
                lv.cursor += 1
                continue
            lv.done[gid] = k + 1
            x = lv.pts[k]
            s = gens[gid]
            y = int(s[x])
            if y not in lv.ptidx:
                lv.append_point(y, gid, k, s)
                lv.cursor = 0  # earlier generators have pending work again
                return None
            ux = lv.get_u(k, gens)
            t = s.copy() if ux is None else s[ux]
            uyinv = lv.get_uinv(lv.ptidx[y], gens, self._id)
            sg = t if uyinv is None else uyinv[t]
            if (sg == self._id).all():
                return None
            res, j = self._sift(sg, i + 1)
            if res is None:
                return None
            return res, j
        return "done"


def group_new(n: int) -> PermutationGroup:
    """The trivial group on 1..n."""
    return PermutationGroup(n)


def orbit_ids(n: int, gen_arrays: Sequence[np.ndarray]) -> np.ndarray:
    """0-based minimum-member orbit labels under a generator list."""
    ids = np.arange(n, dtype=np.int32)
    if not gen_arrays:
        return ids
    parent = list(range(n))

    def find(v: int) -> int:
        r = v
        while parent[r] != r:
            r = parent[r]
        while parent[v] != r:
            parent[v], v = r, parent[v]
        return r

    for arr in gen_arrays:
        lst = arr.tolist()
        for v in range(n):
            a, b = find(v), find(lst[v])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    for v in range(n):
        ids[v] = find(v)
    return ids
