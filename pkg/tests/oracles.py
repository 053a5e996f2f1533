"""Reference computations kept independent of the package internals."""

from __future__ import annotations

from collections import deque
from itertools import product


def brute_force_matching(w, wb) -> float:
    """Minimum total weight over every pairing of defects with each other or the boundary."""
    k = len(wb)

    def best(remaining: tuple[int, ...]) -> float:
        if not remaining:
            return 0.0
        i, rest = remaining[0], remaining[1:]
        result = wb[i] + best(rest)
        for j in rest:
            others = tuple(r for r in rest if r != j)
            result = min(result, w[i][j] + best(others))
        return result

    return best(tuple(range(k)))


def count_pairings(k: int) -> int:
    """Number of ways to pair k defects with each other or the boundary."""
    a, b = 1, 1  # T(0), T(1)
    if k == 0:
        return 1
    for n in range(2, k + 1):
        a, b = b, b + (n - 1) * a
    return b


def syndrome_by_anticommutation(stab_supports, error_sites: dict[int, str], detected_by: str) -> list[int]:
    """Bit per stabilizer: does a stabilizer of type ``detected_by`` anticommute with the error?

    A single-qubit Pauli anticommutes with a different non-identity Pauli.
    """
    bits = []
    for support in stab_supports:
        flips = 0
        for q in support:
            op = error_sites.get(q, "I")
            if op != "I" and op != detected_by:
                flips += 1
        bits.append(flips % 2)
    return bits


def bfs_distances(n_vertices: int, edges: list[tuple[int, int]], source: int) -> list[int]:
    adj = [[] for _ in range(n_vertices)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = [-1] * n_vertices
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def all_paulis(n: int):
    """Every n-qubit Pauli as a string over 'IXYZ'."""
    for ops in product("IXYZ", repeat=n):
        yield "".join(ops)
