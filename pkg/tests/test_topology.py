import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzgossip.acceptance import path_with_byzantine, random_topology
from byzgossip.topology import (
    Topology,
    TopologyError,
    build_complete,
    build_two_worlds,
    complete_graph_bound,
    delta_infty_sample_lower_bound,
    directed_incidence,
    gossip_from_laplacian,
    incidence,
    spectral_summary,
)

K3 = Topology(3, ((0, 1), (0, 2), (1, 2)))


def delta_oracle(topo):
    """Robustness constant straight from numpy's SVD pseudo-inverse."""
    inc = incidence(topo)
    if topo.n_edges_b == 0:
        return 0.0
    M = np.linalg.pinv(inc.C_h.astype(float)) @ inc.C_b
    return float(np.abs(M).sum(axis=1).max())


def test_two_worlds_edge_count():
    topo = build_two_worlds(32, 16, 3)
    assert topo.n_h == 64
    assert topo.n_edges_h == 2 * (32 * 31 // 2) + 32 * 16 == 1504
    assert topo.n_edges_b == 192
    assert np.all(topo.byz_count() == 3)


def test_two_worlds_tiny_is_disconnected():
    with pytest.raises(TopologyError, match="disconnected"):
        build_two_worlds(2, 0, 0)


@pytest.mark.parametrize("n_h,nb,E_h,E_b", [(3, 0, 3, 0), (4, 1, 6, 4), (64, 3, 2016, 192)])
def test_complete_counts(n_h, nb, E_h, E_b):
    topo = build_complete(n_h, nb)
    assert (topo.n_edges_h, topo.n_edges_b) == (E_h, E_b)


@pytest.mark.parametrize("kwargs", [
    dict(n_h=1, honest_edges=()),
    dict(n_h=3, honest_edges=((0, 0), (1, 2))),
    dict(n_h=3, honest_edges=((0, 1), (1, 0), (1, 2))),
    dict(n_h=3, honest_edges=((0, 1), (1, 5))),
    dict(n_h=3, honest_edges=((0, 1), (1, 2)), byz_edges=((7, 0),)),
    dict(n_h=3, honest_edges=((0, 1), (1, 2)), byz_edges=((0, 0), (0, 0))),
])
def test_topology_validation(kwargs):
    with pytest.raises(TopologyError):
        Topology(**kwargs)


def test_edges_are_normalized():
    topo = Topology(3, ((2, 1), (1, 0)))
    assert topo.honest_edges == ((0, 1), (1, 2))


def test_json_round_trip(tmp_path):
    topo = build_two_worlds(4, 2, 1)
    p = tmp_path / "g.json"
    p.write_text(topo.dumps())
    assert Topology.load(p) == topo
    assert json.loads(topo.dumps())["n_h"] == 8
    with pytest.raises(TopologyError):
        Topology.from_dict({"honest_edges": []})


def test_k3_laplacian():
    np.testing.assert_array_equal(incidence(K3).L_h, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_path_incidence_orientation():
    inc = incidence(path_with_byzantine())
    np.testing.assert_array_equal(inc.C_h, [[-1], [1]])
    np.testing.assert_array_equal(inc.C_b, [[-1], [0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_incidence_identities(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    topo = random_topology(rng, n, int(rng.integers(0, 2 * n)), int(rng.integers(0, 6)))
    inc, dinc = incidence(topo), directed_incidence(topo)
    assert np.all(inc.C_h.sum(axis=0) == 0)
    np.testing.assert_array_equal(inc.C_h @ inc.C_h.T, inc.L_h)
    h = dinc.n_honest_dir
    np.testing.assert_array_equal(dinc.B[:, :h] @ dinc.C_dir[:, :h].T, inc.L_h)
    assert np.all(dinc.B.sum(axis=0) == 1)
    assert h == 2 * topo.n_edges_h
    assert len(dinc.src) == h + topo.n_edges_b


def test_directed_incidence_on_path():
    dinc = directed_incidence(Topology(2, ((0, 1),)))
    assert list(zip(dinc.src, dinc.dst)) == [(0, 1), (1, 0)]
    np.testing.assert_array_equal(dinc.B @ dinc.C_dir.T, [[1, -1], [-1, 1]])


def test_incidence_arrays_are_read_only():
    inc = incidence(K3)
    with pytest.raises(ValueError):
        inc.L_h[0, 0] = 7


def test_gossip_matrix_k3():
    W, gamma = gossip_from_laplacian(incidence(K3).L_h, 1 / 3)
    np.testing.assert_allclose(np.linalg.eigvalsh(W), [0, 0, 1], atol=1e-12)
    assert gamma == pytest.approx(1.0, abs=1e-12)
    W, gamma = gossip_from_laplacian(incidence(K3).L_h, 0.0)
    assert np.array_equal(W, np.eye(3)) and gamma == 0.0
    with pytest.raises(ValueError):
        gossip_from_laplacian(incidence(K3).L_h, 1.0)


def test_connected_graph_has_positive_gap():
    topo = build_two_worlds(8, 2, 0)
    L = incidence(topo).L_h
    _, gamma = gossip_from_laplacian(L, 1 / spectral_summary(topo).mu_max_Lh)
    assert gamma > 0


def test_two_worlds_spectrum():
    topo = build_two_worlds(32, 16, 0)
    spec = spectral_summary(topo)
    w = np.linalg.eigvalsh(incidence(topo).L_h.astype(float))
    assert spec.mu_max_Lh == pytest.approx(w[-1], rel=1e-12)
    assert spec.mu_min_plus_Lh == pytest.approx(32.0, rel=1e-12)
    assert spec.mu_max_Lh == pytest.approx(58.2023, abs=1e-4)
    side = np.sign(spec.fiedler)
    assert len(set(side[:32])) == 1 and len(set(side[32:])) == 1 and side[0] != side[32]


def test_jacobi_and_lapack_summaries_agree():
    topo = build_two_worlds(6, 3, 2)
    a = spectral_summary(topo, "lapack")
    b = spectral_summary(topo, "jacobi")
    assert a.delta_infty == pytest.approx(b.delta_infty, abs=1e-10)
    assert a.mu_max_Lh == pytest.approx(b.mu_max_Lh, abs=1e-10)
    np.testing.assert_allclose(a.Lh_pinv, b.Lh_pinv, atol=1e-10)


def test_delta_infty_examples():
    assert spectral_summary(build_two_worlds(32, 16, 0)).delta_infty == 0.0
    assert spectral_summary(path_with_byzantine()).delta_infty == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("nb", [1, 3, 8])
def test_two_worlds_delta_grows_linearly(nb):
    topo = build_two_worlds(32, 16, nb)
    got = spectral_summary(topo).delta_infty
    assert got == pytest.approx(delta_oracle(topo), abs=1e-10)
    assert got == pytest.approx(nb / 16, abs=1e-12)


def test_delta_infty_reaches_one_at_sixteen():
    assert spectral_summary(build_two_worlds(32, 16, 16)).delta_infty == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n_h,nb", [(4, 1), (8, 1), (8, 2), (64, 3)])
def test_complete_graph_bound_holds(n_h, nb):
    topo = build_complete(n_h, nb)
    delta = spectral_summary(topo).delta_infty
    assert delta == pytest.approx(delta_oracle(topo), abs=1e-10)
    for d in (1, 5):
        assert delta <= complete_graph_bound(n_h, nb, d) + 1e-12


def test_complete_graph_bound_value():
    assert complete_graph_bound(64, 3, 5) == pytest.approx(6 / 64 * np.sqrt(5))


def test_sampled_lower_bound():
    topo = path_with_byzantine()
    inc, spec = incidence(topo), spectral_summary(topo)
    assert delta_infty_sample_lower_bound(inc, spec, 1, 3, rng_seed=0) == pytest.approx(0.5, abs=1e-12)
    topo = build_complete(4, 1)
    inc, spec = incidence(topo), spectral_summary(topo)
    lb = delta_infty_sample_lower_bound(inc, spec, 1000, 1, rng_seed=1)
    assert lb <= spec.delta_infty + 1e-12
    k3 = incidence(K3), spectral_summary(K3)
    assert delta_infty_sample_lower_bound(*k3, 10, 2) == 0.0
    with pytest.raises(ValueError):
        delta_infty_sample_lower_bound(inc, spec, 0, 1)


def test_spectral_summary_rejects_disconnected_laplacian():
    # Topology itself refuses disconnected graphs, so the spectral guard is a second line.
    with pytest.raises(TopologyError):
        Topology(4, ((0, 1), (2, 3)))
