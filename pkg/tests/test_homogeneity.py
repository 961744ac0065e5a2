import math

import numpy as np
import pytest

from conelab.constructions import constant_binomial_tree
from conelab.homogeneity import (dimension_bound, doubling_constant,
                                 doubling_frequency, hom_estimate,
                                 large_child_frequency, order_children)
from conelab.measure import lebesgue_tree


def test_order_children_binomial():
    tree = constant_binomial_tree(0.25)
    fan = order_children(tree, ())
    assert fan.order == (1, 0)  # light right child first
    assert fan.masses[0] == pytest.approx(0.25)
    idx, mass, region = fan.child(1)
    assert idx == 1 and mass == pytest.approx(0.25)
    with pytest.raises(IndexError):
        fan.child(3)


def test_order_children_tie_is_lexicographic():
    tree = lebesgue_tree(2)
    fan = order_children(tree, (0,))
    assert fan.order == (0, 1, 2, 3)


def test_hom_partials_lebesgue():
    tree = lebesgue_tree(2)
    est = hom_estimate(tree, 1, 6)
    for a in est.partials:
        assert a == pytest.approx(1.0, abs=1e-12)
    assert est.limsup_proxy == pytest.approx(1.0, abs=1e-12)


def test_hom_partials_constant_binomial():
    q = 0.25
    tree = constant_binomial_tree(q)
    est = hom_estimate(tree, 1, 12)
    for a in est.partials:
        assert a == pytest.approx(2.0 * q, abs=1e-12)


def test_hom_guard_and_validation():
    tree = lebesgue_tree(2)
    with pytest.raises(ValueError):
        hom_estimate(tree, 0, 4)
    tree.level_homogeneous = False  # force the full traversal path
    with pytest.raises(ValueError):
        hom_estimate(tree, 1, 20)  # node explosion guard


def test_hom_fast_path_matches_traversal():
    fast = constant_binomial_tree(0.3)
    slow = constant_binomial_tree(0.3)
    slow.level_homogeneous = False
    a = hom_estimate(fast, 1, 8).partials
    b = hom_estimate(slow, 1, 8).partials
    assert a == pytest.approx(b, abs=1e-12)


def test_dimension_bound_values():
    # entropy form at k=2, n=1, i=1
    for q in (0.125, 0.25, 0.375):
        want = -(q * math.log(q) + (1 - q) * math.log(1 - q)) / math.log(2)
        assert dimension_bound(2, 1, 1, q) == pytest.approx(want, abs=1e-9)
    assert dimension_bound(2, 1, 1, 0.25) == pytest.approx(0.811278, abs=1e-6)
    assert dimension_bound(2, 1, 1, 0.5) == pytest.approx(1.0)
    assert dimension_bound(2, 1, 1, 0.0) == 0.0
    assert dimension_bound(3, 1, 1, 0.0) == pytest.approx(math.log(2) / math.log(3))


def test_dimension_bound_validation():
    with pytest.raises(ValueError):
        dimension_bound(2, 1, 2, 0.1)
    with pytest.raises(ValueError):
        dimension_bound(2, 1, 1, 0.6)


def test_doubling_constant():
    assert doubling_constant(1, 2, 0.5) == pytest.approx(1.0 / 16.0)
    with pytest.raises(ValueError):
        doubling_constant(1, 2, 1.0)


def test_doubling_frequency_lebesgue():
    tree = lebesgue_tree(1)
    stats = doubling_frequency(tree, np.array([0.4]), 1.0, 2,
                               doubling_constant(1, 2, 0.5), 20, 35)
    assert stats.frequency == 1.0
    assert stats.undecided == ()


def test_doubling_frequency_counts_certified_only():
    tree = lebesgue_tree(1)
    # shallow budget cannot certify deep scales; they must appear undecided
    stats = doubling_frequency(tree, np.array([0.4]), 1.0, 2, 0.0625, 20, 8)
    assert stats.count < 20
    assert len(stats.undecided) > 0


def test_large_child_frequency_lebesgue():
    tree = lebesgue_tree(1, k=3)
    # ordered index 3^1 - 1*3^0 = 2, tiny threshold: always counts
    freq = large_child_frequency(tree, np.array([0.37]), 0, 1, 1e-6, 3.0, 5)
    assert freq == 1.0
    with pytest.raises(ValueError):
        large_child_frequency(tree, np.array([0.37]), 0, 3, 1e-6, 3.0, 5)
