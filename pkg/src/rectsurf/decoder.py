"""Decoding graphs and MWPM decoding for the code-capacity model.

Z stabilizers detect the X part of an error, so the Z graph produces the
X correction; the X graph produces the Z correction. Every data qubit is one
edge: between the two same-kind stabilizers that contain it, or from its
single stabilizer to the virtual boundary vertex.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import SurfaceCode
from .matching import MAX_DP_DEFECTS, Matching, _dp_partners, min_weight_perfect_matching
from .noise import ChannelParams, RngSeed, sample_error
from .pauli import (
    ContractError,
    PauliError,
    Syndrome,
    compose,
    logical_failure,
    measure_syndrome,
)

_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DecodingGraph:
    kind: str  # "X": vertices are X stabilizers, corrects Z errors; "Z": the reverse
    n_stabilizers: int
    edges: tuple[tuple[int, int], ...]  # edges[q] = (u, v); v == boundary for edge qubits
    weights: np.ndarray

    @property
    def boundary(self) -> int:
        return self.n_stabilizers

    @property
    def n_vertices(self) -> int:
        return self.n_stabilizers + 1

    @property
    def corrects(self) -> str:
        return "Z" if self.kind == "X" else "X"

    @functools.cached_property
    def _adjacency(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for q, (u, v) in enumerate(self.edges):
            adj[u].append((q, v))
            adj[v].append((q, u))
        for nbrs in adj:
            nbrs.sort()
        return adj

    @functools.cached_property
    def distances(self) -> np.ndarray:
        """All-pairs shortest-path lengths over every vertex, boundary included."""
        n = self.n_vertices
        d = np.full((n, n), np.inf)
        np.fill_diagonal(d, 0.0)
        for q, (u, v) in enumerate(self.edges):
            wq = self.weights[q]
            if wq < d[u, v]:
                d[u, v] = d[v, u] = wq
        for k in range(n):
            d = np.minimum(d, d[:, k, None] + d[None, k, :])
        if not np.isfinite(d).all():
            raise ContractError(f"{self.kind} decoding graph is disconnected")
        d.flags.writeable = False
        return d

    def path(self, u: int, v: int) -> tuple[int, ...]:
        """Shortest u->v path as qubit indices; lexicographically smallest on ties."""
        d = self.distances
        out = []
        cur = u
        while cur != v:
            for q, nxt in self._adjacency[cur]:
                if abs(self.weights[q] + d[nxt, v] - d[cur, v]) <= _TOL:
                    out.append(q)
                    cur = nxt
                    break
            else:  # pragma: no cover - distances guarantee a step exists
                raise ContractError(f"no shortest-path step from {cur} toward {v}")
        return tuple(out)

    @functools.cached_property
    def path_masks(self) -> np.ndarray:
        """Boolean (V, V, n_data) array of witness paths for every vertex pair."""
        n = self.n_vertices
        masks = np.zeros((n, n, len(self.edges)), dtype=bool)
        for u in range(n):
            for v in range(u + 1, n):
                qs = list(self.path(u, v))
                masks[u, v, qs] = True
                masks[v, u, qs] = True
        masks.flags.writeable = False
        return masks


def build_decoding_graph(code: SurfaceCode, kind: str, weights=None) -> DecodingGraph:
    stabs = code.stabilizers(kind)
    boundary = len(stabs)
    owners: list[list[int]] = [[] for _ in range(code.n_data)]
    for i, s in enumerate(stabs):
        for q in s.support:
            owners[q].append(i)
    edges = []
    for q, own in enumerate(owners):
        if len(own) == 2:
            edges.append((own[0], own[1]))
        elif len(own) == 1:
            edges.append((own[0], boundary))
        else:
            raise ContractError(f"qubit {q} lies in {len(own)} {kind} stabilizers")
    w = np.ones(code.n_data) if weights is None else np.asarray(weights, dtype=float).copy()
    if w.shape != (code.n_data,) or (w <= 0).any():
        raise ValueError("edge weights must be positive, one per data qubit")
    w.flags.writeable = False
    return DecodingGraph(kind, boundary, tuple(edges), w)


@dataclass(frozen=True)
class MatchingInstance:
    defects: tuple[int, ...]
    pair_distances: np.ndarray  # (k, k)
    boundary_distances: np.ndarray  # (k,)
    witnesses: dict  # (defect_u, defect_v or None) -> qubit path


def all_pairs_defect_distances(g: DecodingGraph, defects) -> MatchingInstance:
    defects = tuple(sorted(int(v) for v in defects))
    if any(not 0 <= v < g.n_stabilizers for v in defects):
        raise ValueError(f"defects must be stabilizer vertices of the {g.kind} graph")
    d = g.distances
    idx = list(defects)
    pair = np.array(d[np.ix_(idx, idx)], dtype=float).reshape(len(idx), len(idx))
    bnd = np.array(d[idx, g.boundary], dtype=float).reshape(len(idx))
    witnesses = {}
    for a, u in enumerate(defects):
        witnesses[(u, None)] = g.path(u, g.boundary)
        for v in defects[a + 1 :]:
            witnesses[(u, v)] = g.path(u, v)
    return MatchingInstance(defects, pair, bnd, witnesses)


def match_defects(inst: MatchingInstance) -> Matching:
    """Minimum-weight matching with pairs labelled by stabilizer index."""
    m = min_weight_perfect_matching(inst.pair_distances, inst.boundary_distances)
    labels = inst.defects
    pairs = tuple((labels[a], None if b is None else labels[b]) for a, b in m.pairs)
    return Matching(pairs, m.weight)


@dataclass(frozen=True)
class GraphDecoding:
    graph: DecodingGraph
    matching: Matching
    correction: np.ndarray  # qubit mask of the corrected Pauli species


def decode_graph(g: DecodingGraph, bits) -> GraphDecoding:
    bits = np.asarray(bits, dtype=bool)
    correction = np.zeros(len(g.edges), dtype=bool)
    defects = np.flatnonzero(bits)
    if defects.size == 0:
        return GraphDecoding(g, Matching((), 0.0), correction)
    inst = all_pairs_defect_distances(g, defects)
    matching = match_defects(inst)
    for pair in matching.pairs:
        correction[list(inst.witnesses[pair])] ^= True
    return GraphDecoding(g, matching, correction)


class Decoder:
    """Both decoding graphs of a code plus the batched fast path used in sweeps."""

    def __init__(self, code: SurfaceCode):
        self.code = code
        self.x_graph = build_decoding_graph(code, "X")
        self.z_graph = build_decoding_graph(code, "Z")
        self._fast = {
            "X": _ParityTable(self.x_graph, code.logical_x),
            "Z": _ParityTable(self.z_graph, code.logical_z),
        }

    def decode_verbose(self, s: Syndrome) -> tuple[GraphDecoding, GraphDecoding]:
        """Decode returning (z_graph result -> X correction, x_graph result -> Z correction)."""
        if len(s.x_bits) != self.x_graph.n_stabilizers or len(s.z_bits) != self.z_graph.n_stabilizers:
            raise ValueError("syndrome does not match the code")
        return decode_graph(self.z_graph, s.z_bits), decode_graph(self.x_graph, s.x_bits)

    def decode(self, s: Syndrome) -> PauliError:
        from_z, from_x = self.decode_verbose(s)
        return PauliError(from_z.correction, from_x.correction)

    def failures(self, ex: np.ndarray, ez: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised (x_fail, z_fail) for a batch of errors given as bool matrices."""
        code = self.code
        x_fail = self._fast["Z"].residual_parity(ex, code.hz)
        z_fail = self._fast["X"].residual_parity(ez, code.hx)
        return x_fail, z_fail


class _ParityTable:
    """Memoised map from a graph's syndrome to the logical parity of its correction.

    The correction is an XOR of witness paths, so its overlap parity with the
    logical representative is the XOR of per-pair path parities. The table is
    dense (one int8 per syndrome) while the stabilizer count is small enough.
    """

    DENSE_LIMIT = 26

    def __init__(self, g: DecodingGraph, logical: tuple[int, ...]):
        self.graph = g
        rep = np.zeros(len(g.edges), dtype=bool)
        rep[list(logical)] = True
        self.rep = rep
        self.dist = np.ascontiguousarray(g.distances, dtype=np.float64)
        self.parity = (g.path_masks[:, :, rep].sum(axis=2) % 2).astype(np.uint8)
        m = g.n_stabilizers
        self.powers = (1 << np.arange(m, dtype=np.int64)).astype(np.int64)
        self.table = np.full(1 << m, -1, dtype=np.int8) if m <= self.DENSE_LIMIT else None
        self._sparse: dict[int, int] = {}

    def lookup(self, synd: np.ndarray) -> np.ndarray:
        if self.table is not None:
            out = self.table[synd]
            missing = np.unique(synd[out < 0])
            if missing.size:
                self.table[missing] = self._solve(missing)
                out = self.table[synd]
            return out.astype(np.uint8)
        uniq, inverse = np.unique(synd, return_inverse=True)
        vals = np.empty(uniq.size, dtype=np.uint8)
        todo = [i for i, s in enumerate(uniq.tolist()) if s not in self._sparse]
        if todo:
            solved = self._solve(uniq[todo])
            for i, v in zip(todo, solved.tolist()):
                self._sparse[int(uniq[i])] = v
        for i, s in enumerate(uniq.tolist()):
            vals[i] = self._sparse[s]
        return vals[inverse]

    def _solve(self, synds: np.ndarray) -> np.ndarray:
        out, big = _batch_parities(synds.astype(np.int64), self.dist, self.parity, MAX_DP_DEFECTS)
        for i in np.flatnonzero(big):
            bits = (int(synds[i]) >> np.arange(self.graph.n_stabilizers)) & 1
            corr = decode_graph(self.graph, bits).correction
            out[i] = int(np.count_nonzero(corr & self.rep) % 2)
        return out.astype(np.int8)

    def residual_parity(self, err: np.ndarray, h: np.ndarray) -> np.ndarray:
        err = err.astype(np.uint8)
        synd = ((err @ h.T.astype(np.uint8)) % 2).astype(np.int64) @ self.powers
        raw = np.count_nonzero(err[:, self.rep], axis=1) % 2
        return (raw.astype(np.uint8) ^ self.lookup(synd)).astype(bool)


@njit(cache=True)
def _batch_parities(synds, dist, parity, max_k):
    n = synds.shape[0]
    boundary = dist.shape[0] - 1
    out = np.zeros(n, np.uint8)
    big = np.zeros(n, np.bool_)
    defects = np.empty(boundary, np.int64)
    for t in range(n):
        s = synds[t]
        k = 0
        for v in range(boundary):
            if (s >> v) & 1:
                defects[k] = v
                k += 1
        if k == 0:
            continue
        if k > max_k:
            big[t] = True
            continue
        w = np.empty((k, k), np.float64)
        wb = np.empty(k, np.float64)
        for a in range(k):
            wb[a] = dist[defects[a], boundary]
            for b in range(k):
                w[a, b] = dist[defects[a], defects[b]]
        partner, _ = _dp_partners(w, wb)
        acc = 0
        for a in range(k):
            b = partner[a]
            if b < 0:
                acc ^= parity[defects[a], boundary]
            elif a < b:
                acc ^= parity[defects[a], defects[b]]
        out[t] = acc
    return out, big


@functools.lru_cache(maxsize=64)
def get_decoder(code: SurfaceCode) -> Decoder:
    return Decoder(code)


def decode(code: SurfaceCode, s: Syndrome) -> PauliError:
    return get_decoder(code).decode(s)


@dataclass(frozen=True)
class TrialOutcome:
    error: PauliError
    syndrome: Syndrome
    correction: PauliError
    residual: PauliError
    x_fail: bool
    z_fail: bool

    @property
    def failed(self) -> bool:
        return self.x_fail or self.z_fail


def decode_error(code: SurfaceCode, error: PauliError) -> TrialOutcome:
    syndrome = measure_syndrome(code, error)
    correction = decode(code, syndrome)
    residual = compose(error, correction)
    if not measure_syndrome(code, residual).is_trivial():
        raise ContractError(f"correction {correction} does not clear syndrome of {error}")
    x_fail, z_fail = logical_failure(code, residual)
    return TrialOutcome(error, syndrome, correction, residual, x_fail, z_fail)


def run_single_decode(code: SurfaceCode, ch: ChannelParams, seed: RngSeed, trial: int) -> TrialOutcome:
    return decode_error(code, sample_error(code, ch, seed, trial))
