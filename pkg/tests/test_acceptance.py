"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a PASS/FAIL line; ``conftest.py`` repeats them in the
terminal summary so they are visible without ``-s``.
"""

import pytest

from byzgossip import acceptance

RESULTS = []


def _check(fn):
    res = fn()
    RESULTS.append(res.line())
    print(res.line())
    assert res.passed, res.detail


def test_criterion_01_descent_certificate_under_gcr():
    _check(acceptance.criterion_1)


def test_criterion_02_gossip_contraction_bound():
    _check(acceptance.criterion_2)


def test_criterion_03_mean_preservation():
    _check(acceptance.criterion_3)


def test_criterion_04_fixed_threshold_equivalence():
    _check(acceptance.criterion_4)


def test_criterion_05_directed_undirected_equivalence():
    _check(acceptance.criterion_5)


def test_criterion_06_robustness_constant():
    _check(acceptance.criterion_6)


def test_criterion_07_simplified_rule_implies_full_rule():
    _check(acceptance.criterion_7)


def test_criterion_08_plain_gossip_vulnerability():
    _check(acceptance.criterion_8)


def test_criterion_09_byzantine_count_sweep():
    _check(acceptance.criterion_9)


def test_criterion_10_variance_versus_consensus():
    _check(acceptance.criterion_10)


def test_criterion_11_oracle_thresholds():
    _check(acceptance.criterion_11)


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_every_criterion_is_covered(fn):
    assert f"test_criterion_{int(fn.__name__.split('_')[1]):02d}" in "".join(
        name for name in globals() if name.startswith("test_criterion_"))
