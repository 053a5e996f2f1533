"""Exact minimum-weight perfect matching of defects with an open boundary.

Each defect is paired with another defect or with the boundary. This is the
boundary-augmented perfect matching problem (one boundary copy per defect,
zero-weight edges between copies) projected back onto the defects. Instances
up to ``MAX_DP_DEFECTS`` defects are solved exactly by dynamic programming
over defect subsets; larger ones go to a blossom solver on the augmented
graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from numba import njit

MAX_DP_DEFECTS = 22

BOUNDARY = None


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int | None], ...]  # (defect, defect) or (defect, None)
    weight: float

    def partner_of(self, defect: int) -> int | None:
        for a, b in self.pairs:
            if a == defect:
                return b
            if b == defect:
                return a
        raise KeyError(defect)


@njit(cache=True)
def _dp_partners(w, wb):
    """Optimal partner index per defect (-1 for boundary) and the total weight.

    Subsets are solved in increasing order; the lowest defect of a subset is
    matched to the boundary or to a higher defect. Ties keep the first option
    seen (boundary, then partners in increasing index order).
    """
    k = wb.shape[0]
    partner = np.full(k, -1, np.int64)
    if k == 0:
        return partner, 0.0
    size = 1 << k
    cost = np.empty(size, np.float64)
    choice = np.empty(size, np.int8)
    cost[0] = 0.0
    for mask in range(1, size):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        rest = mask ^ (1 << i)
        best = cost[rest] + wb[i]
        arg = -1
        for j in range(i + 1, k):
            if (rest >> j) & 1:
                c = cost[rest ^ (1 << j)] + w[i, j]
                if c < best:
                    best = c
                    arg = j
        cost[mask] = best
        choice[mask] = arg
    mask = size - 1
    while mask:
        i = 0
        while not (mask >> i) & 1:
            i += 1
        j = choice[mask]
        mask ^= 1 << i
        if j >= 0:
            partner[i] = j
            partner[j] = i
            mask ^= 1 << j
    return partner, cost[size - 1]


def _blossom_partners(w: np.ndarray, wb: np.ndarray) -> np.ndarray:
    k = len(wb)
    g = nx.Graph()
    big = float(np.max(w, initial=0.0) + np.max(wb, initial=0.0)) + 1.0
    for i in range(k):
        g.add_edge(i, k + i, weight=big - wb[i])
        for j in range(i + 1, k):
            g.add_edge(i, j, weight=big - w[i, j])
            g.add_edge(k + i, k + j, weight=big)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    partner = np.full(k, -1, np.int64)
    for a, b in mate:
        if a < k and b < k:
            partner[a], partner[b] = b, a
    return partner


def min_weight_perfect_matching(w, wb) -> Matching:
    """Match defects given pairwise weights ``w`` (k x k) and boundary weights ``wb``.

    Returned pairs refer to positions ``0..k-1``; the caller maps them back to
    vertex labels.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    wb = np.ascontiguousarray(wb, dtype=np.float64)
    k = len(wb)
    if w.shape != (k, k):
        raise ValueError(f"pairwise weights must be {k}x{k}, got {w.shape}")
    if k <= MAX_DP_DEFECTS:
        partner, _ = _dp_partners(w, wb)
    else:
        partner = _blossom_partners(w, wb)
    pairs = []
    total = 0.0
    for i in range(k):
        j = int(partner[i])
        if j < 0:
            pairs.append((i, BOUNDARY))
            total += wb[i]
        elif i < j:
            pairs.append((i, j))
            total += w[i, j]
    return Matching(tuple(pairs), float(total))
