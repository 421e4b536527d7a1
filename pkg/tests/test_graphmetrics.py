import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import make_net, random_weight_matrix, star
from signet.graphmetrics import (
    assortativity, avg_clustering, avg_path_length, components, local_clustering, network_metrics, node_metrics,
)
from signet.netbuild import SignedNetwork


def triangle(w=0.6):
    W = np.full((3, 3), w)
    np.fill_diagonal(W, 0)
    return W


def test_star_node_metrics():
    nm = node_metrics(make_net(star(5, 0.4)))
    assert nm.degree[0] == 5 and nm.strength[0] == pytest.approx(2.0)
    assert nm.degree[1] == 1 and nm.strength[1] == pytest.approx(0.4)


def test_node_metrics_vs_oracle(rng):
    for theta in (0.0, 0.3):
        W = random_weight_matrix(rng, 20)
        nm = node_metrics(make_net(W, theta=theta))
        k, s = oracles.degree_strength(W.tolist(), theta)
        assert nm.degree.tolist() == k
        assert np.max(np.abs(nm.strength - np.array(s))) <= 1e-12


def test_star_is_perfectly_disassortative():
    # exact rational evaluation of the formula gives -1
    assert assortativity(make_net(star(10, 0.4))) == pytest.approx(-1.0, abs=1e-12)


def test_two_disjoint_edges_assortative():
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 0.3
    W[2, 3] = W[3, 2] = 0.8
    assert assortativity(make_net(W)) == pytest.approx(1.0, abs=1e-12)


def test_regular_ring_undefined():
    n = 8
    W = np.zeros((n, n))
    for i in range(n):
        W[i, (i + 1) % n] = W[(i + 1) % n, i] = 0.3
    assert assortativity(make_net(W)) is None


def test_single_edge_assortativity_undefined():
    assert assortativity(make_net(triangle()[:2, :2])) is None


def test_triangle_clustering():
    net = make_net(triangle(0.37))
    assert np.allclose(local_clustering(net), 1.0, atol=1e-15)
    assert avg_clustering(net) == pytest.approx(1.0, abs=1e-15)


def test_star_clustering():
    assert avg_clustering(make_net(star(6))) == 0.0


@pytest.mark.parametrize("density", [0.2, 0.5, 0.9])
def test_clustering_vs_oracle(rng, density):
    W = random_weight_matrix(rng, 15, density)
    got = local_clustering(make_net(W))
    assert np.max(np.abs(got - np.array(oracles.clustering_loops(W.tolist())))) <= 1e-12


def test_uniform_weights_reduce_to_binary(rng):
    A = random_weight_matrix(rng, 18, 0.4) > 0
    W = np.where(A, 0.55, 0.0)
    got = local_clustering(make_net(W))
    assert np.allclose(got, oracles.binary_clustering(A.tolist()), atol=1e-12)


def test_components_examples():
    W = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        W[a, b] = W[b, a] = 0.5
    comps = components(make_net(W))
    assert [c.tolist() for c in comps] == [[0, 1, 2], [3, 4, 5]]
    assert len(components(make_net(triangle()))) == 1


def test_components_large_vs_union_find(rng):
    n = 1000
    W = np.zeros((n, n))
    edges = rng.integers(0, n, (900, 2))
    for a, b in edges:
        if a != b:
            W[a, b] = W[b, a] = rng.uniform(0.01, 1)
    got = [c.tolist() for c in components(make_net(W))]
    assert got == oracles.components_uf((W > 0).tolist())


def test_single_edge_unit_weight_path_length():
    W = np.array([[0, 1.0], [1.0, 0]])
    assert avg_path_length(make_net(W)) == 0.0


def test_path_graph_hand_value():
    W = np.zeros((3, 3))
    W[0, 1] = W[1, 0] = W[1, 2] = W[2, 1] = 0.5
    assert avg_path_length(make_net(W)) == pytest.approx(4 / 3, abs=1e-15)


def test_path_length_singleton_lcc():
    assert avg_path_length(SignedNetwork("anti", ("A",), np.zeros((1, 1)))) is None


@pytest.mark.parametrize("density", [0.05, 0.1, 0.3])
def test_path_length_vs_floyd_warshall(rng, density):
    W = random_weight_matrix(rng, 40, density)
    want = oracles.avg_path_length_fw(W.tolist())
    assert avg_path_length(make_net(W)) == pytest.approx(want, abs=1e-9)


def test_triangle_inequality_on_results(rng):
    from scipy.sparse.csgraph import dijkstra
    from signet.graphmetrics import edge_distances
    net = make_net(random_weight_matrix(rng, 30, 0.3))
    lcc = components(net)[0]
    D = dijkstra(edge_distances(net.csr[lcc][:, lcc].tocsr()), directed=False)
    for i, j, k in itertools.islice(itertools.permutations(range(len(lcc)), 3), 3000):
        assert D[i, j] <= D[i, k] + D[k, j] + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metrics_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    W = random_weight_matrix(rng, 14, 0.4)
    p = rng.permutation(14)
    a = network_metrics(make_net(W))
    b = network_metrics(make_net(W[np.ix_(p, p)]))
    for name in ("assortativity", "avg_clustering", "avg_path_len"):
        x, y = getattr(a, name), getattr(b, name)
        assert (x is None and y is None) or x == pytest.approx(y, abs=1e-12)
    assert a.lcc_size == b.lcc_size and a.n_components == b.n_components


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.5))
def test_metric_bounds(seed, theta):
    rng = np.random.default_rng(seed)
    net = make_net(random_weight_matrix(rng, 12, 0.5), theta=theta)
    nm = network_metrics(net)
    keep = net.degrees > 0
    assert np.all(net.strengths[keep] > theta * net.degrees[keep])
    assert np.all(net.strengths <= net.degrees + 1e-12)
    if nm.assortativity is not None:
        assert -1 - 1e-9 <= nm.assortativity <= 1 + 1e-9
    assert 0 <= nm.avg_clustering <= 1 + 1e-12
    if nm.avg_path_len is not None:
        assert nm.avg_path_len >= 0


def test_network_metrics_sentinels():
    nm = network_metrics(make_net(triangle()[:2, :2]))
    assert nm.assortativity is None and "assortativity" in nm.undefined
    assert nm.avg_path_len is not None


def test_dense_and_sparse_clustering_agree(rng, monkeypatch):
    import signet.graphmetrics as gm
    W = random_weight_matrix(rng, 25, 0.3)
    dense = local_clustering(make_net(W))
    monkeypatch.setattr(gm, "_DENSE_CLUSTERING_DENSITY", 2.0)
    sparse = local_clustering(make_net(W))
    assert np.allclose(dense, sparse, atol=1e-14)
