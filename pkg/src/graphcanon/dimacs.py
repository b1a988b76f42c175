"""Reading and writing colored graphs in DIMACS-style text form.

Grammar: comment lines start with `c`; exactly one `p edge <n> <m>` problem
line; optional `n <vertex> <color>` lines with non-negative integer colors
(vertices sharing a color share a cell, cells ordered by ascending color,
unlisted vertices default to color 0); `e <u> <v>` edge lines.  Whitespace
is treated permissively.
"""

from __future__ import annotations

from .graph import ColoredGraph, OrderedPartition

__all__ = ["ParseError", "parse_graph", "write_graph"]


class ParseError(ValueError):
    """Malformed graph text; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_graph(text: str) -> ColoredGraph:
    n = m = None
    colors: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "p":
            if n is not None:
                raise ParseError(lineno, "duplicate problem line")
            if len(parts) != 4 or parts[1] != "edge":
                raise ParseError(lineno, "expected 'p edge <n> <m>'")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, "non-integer problem line") from None
            if n < 1 or m < 0:
                raise ParseError(lineno, "bad vertex or edge count")
        elif kind == "n":
            if n is None:
                raise ParseError(lineno, "color line before problem line")
            if len(parts) != 3:
                raise ParseError(lineno, "expected 'n <vertex> <color>'")
            try:
                v, color = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError(lineno, "non-integer color line") from None
            if not (1 <= v <= n):
                raise ParseError(lineno, f"vertex {v} out of range 1..{n}")
            if color < 0:
                raise ParseError(lineno, "colors must be non-negative")
            if v in colors:
                raise ParseError(lineno, f"vertex {v} colored twice")
            colors[v] = color
        elif kind == "e":
            if n is None:
                raise ParseError(lineno, "edge line before problem line")
            if len(parts) != 3:
                raise ParseError(lineno, "expected 'e <u> <v>'")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError(lineno, "non-integer edge line") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(lineno, f"edge endpoint out of range 1..{n}")
            if u == v:
                raise ParseError(lineno, f"loop at vertex {u}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise ParseError(lineno, f"duplicate edge {e}")
            seen.add(e)
            edges.append(e)
        else:
            raise ParseError(lineno, f"unrecognized line type {kind!r}")
    if n is None:
        raise ParseError(1, "missing problem line")
    if len(edges) != m:
        raise ParseError(1, f"problem line declares {m} edges, found {len(edges)}")
    groups: dict[int, list[int]] = {}
    for v in range(1, n + 1):
        groups.setdefault(colors.get(v, 0), []).append(v)
    cells = [groups[c] for c in sorted(groups)]
    return ColoredGraph(n, edges, OrderedPartition(cells, n))


def write_graph(g: ColoredGraph) -> str:
    """Inverse of parse_graph; output re-parses to an equal graph and is
    stable under a parse/write round trip."""
    lines = [f"p edge {g.n} {g.m}"]
    if not g.coloring.is_unit():
        color_of: dict[int, int] = {}
        for ci, cell in enumerate(g.coloring.cells()):
            for v in cell:
                color_of[v] = ci
        for v in range(1, g.n + 1):
            lines.append(f"n {v} {color_of[v]}")
    for u, v in sorted(g.edges):
        lines.append(f"e {u} {v}")
    return "\n".join(lines) + "\n"
