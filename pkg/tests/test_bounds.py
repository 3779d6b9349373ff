import math

import allure
import pytest

from hardytree.asymptotics import (
    alpha_K,
    boundedness_check,
    candidate_family,
    lq_bound_checks,
    norm_lower_bound,
    p1_inf_bounds,
    sigma_table,
)
from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import Cut, Subtree
from hardytree.geometry.tree import MetricTree, RootedTree, root_at
from hardytree.operators import DiscretizedOperator, approx_numbers_p2
from hardytree.weights import StepWeight


def rooted_subtree(host, *cuts):
    return Subtree(host, host.root_location, frozenset(Cut(host.location(edge, offset)) for edge, offset in cuts))


@allure.feature("bounds")
class TestAlphaK:
    def test_single_boundary_point(self):
        tree = MetricTree(["0", "2"], [("e", "0", "2", 2.0)])
        host = RootedTree(tree, "0")
        K = rooted_subtree(host, ("e", 1.0))
        assert alpha_K(K, StepWeight.constant(tree, 1.0), 2) == pytest.approx(1.0)

    def test_two_disjoint_paths(self):
        tree = MetricTree(["0", "4"], [("e", "0", "4", 4.0)])
        host = root_at(tree, tree.location("e", 2.0))
        K = rooted_subtree(host, ("e.a", 1.0), ("e.b", 1.0))
        assert alpha_K(K, StepWeight.constant(host.tree, 1.0), 2) == pytest.approx(math.sqrt(2.0), rel=1e-6)

    def test_shared_trunk(self, fixture_tree):
        # Mass 0.8 on the trunk and 0.2 on each branch is optimal.
        data = fixture_tree("y-tree")
        _, u, _ = data.problem
        K = rooted_subtree(data.host, ("cb", 0.5), ("cd", 0.5))
        assert alpha_K(K, u, 2) == pytest.approx(math.sqrt(0.8), rel=1e-6)

    def test_needs_the_root(self, fixture_tree):
        data = fixture_tree("y-tree")
        _, u, _ = data.problem
        with pytest.raises(DomainError):
            alpha_K(Subtree.from_segments(data.host, [("cb", 0.0, 1.0)]), u, 2)

    def test_needs_a_maximal_boundary(self, fixture_tree):
        data = fixture_tree("y-tree")
        _, u, _ = data.problem
        K = Subtree.from_segments(data.host, [("ac", 0.0, 1.0), ("cb", 0.0, 0.5)])
        with pytest.raises(DomainError):
            alpha_K(K, u, 2)


@allure.feature("bounds")
class TestBoundedness:
    def test_two_factor_lower_bound(self, fixture_tree):
        K, u, v = fixture_tree("unit-interval").problem
        assert norm_lower_bound(K, u, v, 2) == pytest.approx(0.5)

    def test_family_contains_the_root(self, fixture_tree):
        K, u, _ = fixture_tree("y-tree").problem
        family = candidate_family(K, u, 2)
        assert family
        assert all(member.contains_root() and member.is_maximal() for member in family)

    def test_boundedness_on_the_unit_interval(self, fixture_tree, config):
        K, u, v = fixture_tree("unit-interval").problem
        report = boundedness_check(K, u, v, 2, grid=config.grid, seed=config.seed)
        assert report.passed, report.failures
        assert report.checks[0].value == pytest.approx(0.5, rel=1e-2)

    def test_empty_family(self, fixture_tree, config):
        K, u, v = fixture_tree("unit-interval").problem
        with pytest.raises(DomainError):
            boundedness_check(K, u, v, 2, family=[], grid=config.grid)


@allure.feature("bounds")
class TestSequenceBounds:
    @pytest.fixture
    def path_case(self, fixture_tree, config):
        K, u, v = fixture_tree("path-0-4").problem
        spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, 2, config.grid))
        return spectrum, sigma_table(K, u, v, 2)

    @pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
    def test_bounds_hold_on_a_path(self, path_case, q):
        spectrum, table = path_case
        report = lq_bound_checks(spectrum, table, q)
        assert report.passed, report.failures

    def test_q_below_one(self, path_case):
        spectrum, table = path_case
        with pytest.raises(DomainError):
            lq_bound_checks(spectrum, table, 0.5)

    def test_table_must_be_for_p_2(self, path_case, fixture_tree):
        spectrum, _ = path_case
        K, u, v = fixture_tree("path-0-4").problem
        with pytest.raises(UnsupportedExponentError):
            lq_bound_checks(spectrum, sigma_table(K, u, v, 3), 2.0)


@allure.feature("bounds")
class TestIntervalBounds:
    @pytest.fixture
    def interval(self, fixture_tree):
        data = fixture_tree("unit-interval")
        K, _, _ = data.problem
        tree = data.host.tree
        return K, StepWeight.constant(tree, 1.0), StepWeight(tree, {"e": [(0.5, 0.5), (0.5, 2.0)]})

    def test_p_inf_with_constant_u(self, interval, config):
        K, constant, varying = interval
        report = p1_inf_bounds(K, constant, varying, "pinf", grid=config.grid, seed=config.seed)
        assert report.passed, report.failures
        # Every root gives ||T_b|| >= 1/2 here, which is also the rearrangement bound.
        lower = next(check for check in report.checks if "||g* t||" in check.name)
        assert lower.bound == pytest.approx(0.5, abs=1e-4)
        assert lower.value == pytest.approx(0.5, rel=1e-6)
        assert report.checks[-1].note.startswith("int |u||v_s| = 1.25")

    def test_p_1_with_constant_v(self, interval, config):
        K, constant, varying = interval
        report = p1_inf_bounds(K, varying, constant, "p1", grid=config.grid, seed=config.seed)
        assert report.passed, report.failures
        # The point mass sits on the heavy half: 2 * min(1/2, 1/2).
        assert report.checks[0].value == pytest.approx(1.0)

    def test_constant_weight_is_required(self, interval, config):
        K, _, varying = interval
        with pytest.raises(DomainError):
            p1_inf_bounds(K, varying, varying, "pinf", grid=config.grid)
        with pytest.raises(DomainError):
            p1_inf_bounds(K, varying, varying, "p2", grid=config.grid)
