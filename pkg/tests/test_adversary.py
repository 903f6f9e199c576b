import numpy as np
import pytest

from byzgossip.acceptance import path_with_byzantine
from byzgossip.adversary import (
    ATTACKS,
    DEFAULT_EPS,
    AttackModel,
    adapt_scale_for_trimming,
    attack_alie,
    attack_dissensus,
    attack_foe,
    attack_spectral,
    dissensus_direction,
    spectral_direction,
)
from byzgossip.thresholds import Gcr, LocalClip, LocalTrim
from byzgossip.topology import Topology, build_two_worlds, incidence, spectral_summary

PATH = Topology(2, ((0, 1),), ((0, 0), (1, 1)))


def test_alie_examples():
    X = np.array([[0.0], [2.0]])
    np.testing.assert_allclose(attack_alie(X, 3.0, [0, 1]), [[3.0], [5.0]])
    same = np.ones((3, 2))
    np.testing.assert_array_equal(attack_alie(same, 5.0, [0, 2]), same[[0, 2]])
    np.testing.assert_array_equal(attack_alie(X, 0.0, [1]), X[[1]])


def test_foe_examples():
    X = np.array([[0.0], [2.0]])
    np.testing.assert_allclose(attack_foe(X, 1.0, [0]), [[1.0]])
    centred = np.array([[1.0], [-1.0]])
    np.testing.assert_array_equal(attack_foe(centred, 7.0, [0, 1]), centred)


def test_dissensus_examples():
    X = np.array([[0.0], [1.0]])
    assert dissensus_direction(X, PATH)[0, 0] == -1.0
    np.testing.assert_array_equal(attack_dissensus(X, PATH, 0.0), X)
    consensus = np.full((2, 3), 4.0)
    assert not dissensus_direction(consensus, PATH).any()


def test_spectral_examples():
    e = np.array([1 / np.sqrt(2), -1 / np.sqrt(2)])
    X = np.array([[1.0], [-1.0]])
    assert spectral_direction(X, e)[0, 0] == pytest.approx(1.0, abs=1e-15)
    orth = np.array([[1.0], [1.0]])
    assert np.allclose(attack_spectral(orth, e, 10.0, [0, 1]), orth)


def test_adapted_scale_examples():
    a = np.array([[2.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    eps = adapt_scale_for_trimming(a, [4.0, 4.0, np.inf])
    assert eps[0] == pytest.approx(2 * (1 - 1e-6), rel=1e-15)
    assert eps[1] == 0.0
    assert eps[2] == DEFAULT_EPS


def test_declaration_shape_and_purity(rng):
    topo = build_two_worlds(6, 3, 2)
    X = rng.standard_normal((12, 4))
    before = X.copy()
    for variant in ATTACKS:
        out = AttackModel(variant).declare(X, topo)
        assert out.shape == (topo.n_edges_b, 4)
        assert np.array_equal(X, before)
    none = AttackModel("none").declare(X, topo)
    np.testing.assert_array_equal(none, X[incidence(topo).byz_node])
    assert AttackModel("foe").declare(X, topo.without_byzantine()).shape == (0, 4)


def test_attack_model_validation():
    with pytest.raises(ValueError):
        AttackModel("median")
    with pytest.raises(ValueError):
        AttackModel("alie", eps=-1.0)


def test_scale_only_adapts_against_trimming(rng):
    topo = build_two_worlds(6, 3, 1)
    X = rng.standard_normal((12, 2))
    model = AttackModel("foe")
    nodes = incidence(topo).byz_node
    a = X.mean(axis=0)
    for defense in (None, Gcr(), LocalClip(1)):
        np.testing.assert_allclose(model.declare(X, topo, defense), X[nodes] + DEFAULT_EPS * a)
    trim = LocalTrim(1)
    dev = model.declare(X, topo, trim) - X[nodes]
    cut = trim.cut_norms(X, topo)
    assert np.all(np.linalg.norm(dev, axis=1) < cut[nodes])


def test_trimming_scale_survives_the_trim(rng):
    # the adapted declaration is strictly below the 2b-th largest honest norm
    topo = build_two_worlds(6, 3, 1)
    X = rng.standard_normal((12, 2))
    trim = LocalTrim(1)
    declared = AttackModel("alie").declare(X, topo, trim)
    from byzgossip.thresholds import StepView
    from byzgossip.topology import directed_incidence

    view = StepView(X, declared, topo, incidence(topo), directed_incidence(topo),
                    spectral_summary(topo), 0.01)
    taus = trim.thresholds(view).taus
    byz = directed_incidence(topo).src < 0
    assert np.all(np.isinf(taus[byz]))


def test_fiedler_separates_cliques():
    e = spectral_summary(build_two_worlds(8, 2, 0)).fiedler
    assert np.all(np.sign(e[:8]) == np.sign(e[0]))
    assert np.all(np.sign(e[8:]) == -np.sign(e[0]))


def test_single_byzantine_edge_path():
    X = np.array([[0.0], [1.0]])
    out = AttackModel("dissensus", eps=2.0).declare(X, path_with_byzantine())
    np.testing.assert_allclose(out, [[-2.0]])
