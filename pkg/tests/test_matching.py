import networkx as nx
import numpy as np
import pytest

from oracles import brute_force_matching, count_pairings
from rectsurf.matching import MAX_DP_DEFECTS, _blossom_partners, _dp_partners, min_weight_perfect_matching


def random_metric(rng, k, integer=True):
    """Shortest-path metric of a random weighted graph on k defects plus a boundary vertex."""
    g = nx.complete_graph(k + 1)
    for u, v in g.edges:
        g[u][v]["weight"] = int(rng.integers(1, 10)) if integer else float(rng.uniform(0.1, 5))
    d = dict(nx.all_pairs_dijkstra_path_length(g))
    w = np.array([[d[i][j] for j in range(k)] for i in range(k)], float).reshape(k, k)
    wb = np.array([d[i][k] for i in range(k)], float)
    return w, wb


def check_valid(m, k):
    seen = []
    for a, b in m.pairs:
        seen.append(a)
        if b is not None:
            seen.append(b)
    assert sorted(seen) == list(range(k))


def test_pairing_count_oracle():
    # telephone numbers: pairings of k labelled items with singletons allowed
    assert [count_pairings(k) for k in range(7)] == [1, 1, 2, 4, 10, 26, 76]


def test_optimal_on_random_instances():
    rng = np.random.default_rng(1234)
    instances = 0
    for trial in range(240):
        k = int(rng.integers(0, 13)) if trial >= 40 else 6
        w, wb = random_metric(rng, k, integer=bool(trial % 2))
        m = min_weight_perfect_matching(w, wb)
        check_valid(m, k)
        expected = brute_force_matching(w, wb)
        assert m.weight == pytest.approx(expected, abs=1e-9)
        total = sum(wb[a] if b is None else w[a, b] for a, b in m.pairs)
        assert total == pytest.approx(m.weight)
        instances += 1
    assert instances >= 200


def test_single_defect_goes_to_boundary():
    m = min_weight_perfect_matching(np.zeros((1, 1)), np.array([3.0]))
    assert m.pairs == ((0, None),)
    assert m.weight == 3.0


def test_two_defects_prefer_pair():
    w = np.array([[0, 2], [2, 0]], float)
    m = min_weight_perfect_matching(w, np.array([2.0, 2.0]))
    assert m.pairs == ((0, 1),)
    assert m.weight == 2.0
    assert m.partner_of(1) == 0


def test_empty_instance():
    m = min_weight_perfect_matching(np.zeros((0, 0)), np.zeros(0))
    assert m.pairs == () and m.weight == 0.0


def test_tie_prefers_boundary_for_lowest_defect():
    w = np.array([[0, 2], [2, 0]], float)
    m = min_weight_perfect_matching(w, np.array([1.0, 1.0]))
    assert m.pairs == ((0, None), (1, None))


def test_shape_checked():
    with pytest.raises(ValueError):
        min_weight_perfect_matching(np.zeros((2, 3)), np.zeros(2))


def test_blossom_agrees_with_subset_dp():
    rng = np.random.default_rng(77)
    for _ in range(60):
        k = int(rng.integers(1, 15))
        w, wb = random_metric(rng, k, integer=False)
        _, best = _dp_partners(w, wb)
        partner = _blossom_partners(w, wb)
        cost = sum(wb[i] if partner[i] < 0 else w[i, partner[i]] / 2 for i in range(k))
        assert cost == pytest.approx(best, abs=1e-9)


def test_large_instance_uses_blossom_and_stays_valid():
    rng = np.random.default_rng(5)
    k = MAX_DP_DEFECTS + 4
    w, wb = random_metric(rng, k, integer=False)
    m = min_weight_perfect_matching(w, wb)
    check_valid(m, k)
    assert m.weight <= wb.sum() + 1e-9


def test_large_chain_has_known_optimum():
    # defects on a line with a distant boundary: neighbours pair up
    k = MAX_DP_DEFECTS + 6
    pos = np.arange(k, dtype=float)
    w = np.abs(pos[:, None] - pos[None, :])
    m = min_weight_perfect_matching(w, np.full(k, 100.0))
    assert m.weight == k // 2
    assert all(b == a + 1 for a, b in m.pairs)
