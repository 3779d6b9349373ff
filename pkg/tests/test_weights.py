import math

import numpy as np
import pytest

from hardytree.exceptions import DomainError, UnsupportedExponentError, WeightError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import Location, MetricTree, RootedTree, precedes
from hardytree.weights import (
    PNorm,
    StepProfile,
    StepWeight,
    descendant_mass,
    integral_product,
    interval_profile,
    local_ess_sup,
    lp_norm,
    mu,
    primitive_U,
    rearrangement,
    sup_rearranged_product,
)


@pytest.fixture
def unit():
    tree = MetricTree(["0", "1"], [("e", "0", "1", 1.0)])
    return tree, Subtree.whole(RootedTree(tree, "0"))


def test_pnorm_parsing():
    assert PNorm.parse("inf").conjugate == 1.0
    assert PNorm.parse(1).conjugate == math.inf
    assert PNorm.parse(3).conjugate == pytest.approx(1.5)
    assert str(PNorm.parse("2")) == "2"
    with pytest.raises(DomainError):
        PNorm(0.5)


def test_pieces_must_sum_to_the_edge_length(unit):
    tree, _ = unit
    with pytest.raises(WeightError) as error:
        StepWeight(tree, {"e": [(0.5, 1.0), (0.25, 2.0)]})
    assert error.value.edge == "e"
    assert "edge e" in str(error.value)


def test_negative_values_are_rejected(unit):
    tree, _ = unit
    with pytest.raises(WeightError):
        StepWeight(tree, {"e": [(1.0, -1.0)]})


def test_exact_norms(unit):
    tree, K = unit
    w = StepWeight(tree, {"e": [(0.5, 1.0), (0.5, 3.0)]})
    assert lp_norm(w, 2, K) == pytest.approx(math.sqrt(5.0))
    assert lp_norm(w, 1, K) == pytest.approx(2.0)
    assert lp_norm(w, "inf", K) == 3.0
    assert mu(K, w, 2) == pytest.approx(5.0)
    assert mu(K, w, "inf") == pytest.approx(2.0)


def test_integral_product_on_the_common_refinement(unit):
    tree, K = unit
    u = StepWeight(tree, {"e": [(0.5, 1.0), (0.5, 3.0)]})
    v = StepWeight(tree, {"e": [(0.25, 2.0), (0.75, 1.0)]})
    # 0.25*1*2 + 0.25*1*1 + 0.5*3*1
    assert integral_product(u, v, K) == pytest.approx(2.25)
    assert integral_product(u, v, K, pu=2.0) == pytest.approx(0.25 * 2 + 0.25 + 0.5 * 9)


def test_combine_refines_both_profiles():
    a = StepProfile([0.5, 0.5], [1.0, 3.0])
    b = StepProfile([0.25, 0.75], [2.0, 1.0])
    joint = a.combine(b, lambda x, y: x + y)
    assert joint.lengths.tolist() == pytest.approx([0.25, 0.25, 0.5])
    assert joint.values.tolist() == pytest.approx([3.0, 2.0, 4.0])


def test_primitive_U_along_the_path():
    tree = MetricTree(["0", "4"], [("e", "0", "4", 4.0)])
    rooted = RootedTree(tree, "0")
    u = StepWeight(tree, {"e": [(2.0, 1.0), (2.0, 2.0)]})
    assert primitive_U(rooted, u, 2, Location(vertex="4")) == pytest.approx(2.0 + 2.0 * 4.0)
    assert primitive_U(rooted, u, 2, tree.location("e", 1.0)) == pytest.approx(1.0)
    with pytest.raises(UnsupportedExponentError):
        primitive_U(rooted, u, 1, Location(vertex="4"))


def test_descendant_mass_at_the_branch_point():
    tree = MetricTree(["a", "c", "b", "d"], [("ac", "a", "c", 1.0), ("cb", "c", "b", 1.0), ("cd", "c", "d", 1.0)])
    K = Subtree.whole(RootedTree(tree, "a"))
    v = StepWeight.constant(tree, 1.0)
    assert descendant_mass(K, v, 1.0, Location(vertex="c")) == pytest.approx(2.0)
    assert descendant_mass(K, v, 1.0, tree.location("ac", 0.5)) == pytest.approx(2.5)
    assert descendant_mass(K, v, 1.0, Location(vertex="a")) == pytest.approx(3.0)


def test_local_ess_sup_takes_the_larger_germ(unit):
    tree, _ = unit
    w = StepWeight(tree, {"e": [(0.5, 1.0), (0.5, 3.0)]})
    assert local_ess_sup(w, tree.location("e", 0.5)) == 3.0
    assert local_ess_sup(w, tree.location("e", 0.25)) == 1.0
    assert local_ess_sup(w, Location(vertex="1")) == 3.0


def test_rearrangement_is_nonincreasing(unit):
    tree, K = unit
    w = StepWeight(tree, {"e": [(0.25, 1.0), (0.25, 4.0), (0.5, 2.0)]})
    star = rearrangement(w, K)
    assert star.values.tolist() == [4.0, 2.0, 1.0]
    assert star.lengths.tolist() == pytest.approx([0.25, 0.5, 0.25])
    assert star.distribution(1.5) == pytest.approx(interval_profile(w, K).distribution(1.5))
    # max(4 * 0.25, 2 * 0.75, 1 * 1)
    assert sup_rearranged_product(interval_profile(w, K)) == pytest.approx(1.5)


def test_scaled_and_zero_weights(unit):
    tree, K = unit
    w = StepWeight(tree, {"e": [(0.5, 1.0), (0.5, 3.0)]})
    assert lp_norm(w.scaled(2.0), 1, K) == pytest.approx(4.0)
    assert StepWeight.constant(tree, 0.0).is_zero()
    assert not w.is_zero()


@pytest.fixture
def y_tree():
    tree = MetricTree(["a", "c", "b", "d"], [("ac", "a", "c", 1.0), ("cb", "c", "b", 1.0), ("cd", "c", "d", 1.0)])
    return RootedTree(tree, "a")


def random_weight(tree, rng, pieces=4):
    profiles = {}
    for edge_id, edge in tree.edges.items():
        lengths = rng.dirichlet(np.ones(pieces)) * edge.length
        lengths[-1] = edge.length - float(np.sum(lengths[:-1]))
        profiles[edge_id] = [(float(a), float(b)) for a, b in zip(lengths, rng.uniform(0.1, 3.0, pieces))]
    return StepWeight(tree, profiles)


def test_rearrangement_is_equimeasurable(unit, rng):
    tree, K = unit
    for _ in range(5):
        w = random_weight(tree, rng, pieces=6)
        star = rearrangement(w, K)
        profile = interval_profile(w, K)
        assert np.all(np.diff(star.values) <= 0)
        for t in np.quantile(profile.values, [0.0, 0.3, 0.7]) - 1e-9:
            assert star.distribution(t) == pytest.approx(profile.distribution(t))
        assert star.integral(2.0) == pytest.approx(profile.integral(2.0))


def test_primitive_U_grows_along_the_order(y_tree, rng):
    u = random_weight(y_tree.tree, rng)
    points = [
        y_tree.location("ac", 0.3),
        Location(vertex="c"),
        y_tree.location("cb", 0.5),
        Location(vertex="b"),
        y_tree.location("cd", 0.2),
    ]
    pairs = [(x, y) for x in points for y in points if x != y and precedes(y_tree, x, y)]
    assert len(pairs) >= 5
    for x, y in pairs:
        assert primitive_U(y_tree, u, 2, x) <= primitive_U(y_tree, u, 2, y) + 1e-12


def test_mu_adds_over_disjoint_subtrees(y_tree, rng):
    v = random_weight(y_tree.tree, rng)
    whole = Subtree.whole(y_tree)
    trunk = Subtree.from_segments(y_tree, [("ac", 0.0, 1.0), ("cb", 0.0, 1.0)])
    branch = Subtree.from_segments(y_tree, [("cd", 0.0, 1.0)])
    for p in (2, 3, "inf"):
        assert mu(trunk, v, p) + mu(branch, v, p) == pytest.approx(mu(whole, v, p))


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_hoelder_inequality(y_tree, rng, p):
    K = Subtree.whole(y_tree)
    for _ in range(5):
        u, v = random_weight(y_tree.tree, rng), random_weight(y_tree.tree, rng)
        dual = PNorm.parse(p).conjugate
        assert integral_product(u, v, K) <= lp_norm(u, p, K) * lp_norm(v, dual, K) * (1 + 1e-12)
