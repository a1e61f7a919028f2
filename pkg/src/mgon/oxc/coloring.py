"""Proper edge coloring of bipartite multigraphs with max-degree colors.

Classic alternating-path construction: to color edge (u, v), pick a color a
missing at u and b missing at v. If a is also missing at v use it; otherwise
swap a and b along the a/b alternating path that starts at v. In a bipartite
graph that path can never return to u, so a becomes free at v.
"""

from __future__ import annotations


def color_bipartite(
    edges: list[tuple[int, int]], n_left: int, n_right: int, colors: int | None = None
) -> list[int]:
    """Return a color in ``[0, colors)`` per edge (left vertex, right vertex)."""
    deg = [0] * (n_left + n_right)
    for u, v in edges:
        deg[u] += 1
        deg[n_left + v] += 1
    delta = max(deg, default=0)
    k = delta if colors is None else colors
    if k < delta:
        raise ValueError(f"{k} colors cannot color a graph of max degree {delta}")
    n = n_left + n_right
    # at[x][c] = edge index using color c at vertex x, or -1
    at = [[-1] * k for _ in range(n)]
    col = [-1] * len(edges)
    ends = [(u, n_left + v) for u, v in edges]

    def missing(x: int) -> int:
        row = at[x]
        for c in range(k):
            if row[c] < 0:
                return c
        raise AssertionError("vertex saturated")

    for e, (u, v) in enumerate(ends):
        a = missing(u)
        if at[v][a] >= 0:
            b = missing(v)
            # walk the path from v alternating a, b, ... and swap its colors
            path = []
            x, c = v, a
            while at[x][c] >= 0:
                f = at[x][c]
                path.append(f)
                p, q = ends[f]
                x = q if p == x else p
                c = b if c == a else a
            for f in path:
                p, q = ends[f]
                old = col[f]
                if at[p][old] == f:
                    at[p][old] = -1
                if at[q][old] == f:
                    at[q][old] = -1
            for f in path:
                p, q = ends[f]
                new = b if col[f] == a else a
                col[f] = new
                at[p][new] = f
                at[q][new] = f
        col[e] = a
        at[u][a] = e
        at[v][a] = e
    return col


def is_proper(edges: list[tuple[int, int]], colors: list[int], n_left: int) -> bool:
    seen: set[tuple[int, int]] = set()
    for (u, v), c in zip(edges, colors):
        for key in ((u, c), (n_left + v, c)):
            if key in seen:
                return False
            seen.add(key)
    return True
