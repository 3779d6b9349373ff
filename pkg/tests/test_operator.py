import math

import allure
import numpy as np
import pytest

from hardytree.exceptions import DomainError, ShapeError, UnsupportedExponentError
from hardytree.geometry.subtree import Partition, Subtree
from hardytree.operators import (
    A_value,
    DiscretizedOperator,
    apply,
    approx_numbers_p2,
    argmin_shift,
    finite_rank_approximant,
    grid_refinement,
    op_norm,
    part_errors,
)
from hardytree.operators.quotient import golden_refine
from hardytree.weights import StepWeight, lp_norm


@pytest.fixture
def unit(fixture_tree):
    return fixture_tree("unit-interval").problem


@allure.feature("operator")
class TestDiscretization:
    def test_constant_function_is_integrated_exactly(self, unit, config):
        K, u, v = unit
        T = DiscretizedOperator(K, u, v, 2, config.grid)
        assert np.allclose(apply(T, np.ones(T.size)), T.x)

    def test_wrong_shape_is_rejected(self, unit, config):
        K, u, v = unit
        T = DiscretizedOperator(K, u, v, 2, config.grid)
        with pytest.raises(ShapeError):
            apply(T, np.ones(T.size + 1))

    def test_root_outside_the_subtree(self, fixture_tree, config):
        data = fixture_tree("y-tree")
        K, u, v = data.problem
        part = Subtree.from_segments(data.host, [("cb", 0.0, 1.0)])
        with pytest.raises(DomainError):
            DiscretizedOperator(part, u, v, 2, config.grid, root=data.host.location("ac", 0.5))


@allure.feature("operator")
class TestNorms:
    def test_volterra_singular_values(self, unit):
        K, u, v = unit
        spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, 2, 256), 5)
        for n in range(1, 6):
            exact = 2.0 / ((2 * n - 1) * math.pi)
            assert spectrum.a(n) == pytest.approx(exact, rel=1e-3)
        assert op_norm(DiscretizedOperator(K, u, v, 2, 256)).value == pytest.approx(2.0 / math.pi, rel=1e-4)

    def test_spectrum_needs_p_2(self, unit, config):
        K, u, v = unit
        with pytest.raises(UnsupportedExponentError):
            approx_numbers_p2(DiscretizedOperator(K, u, v, 3, config.grid))

    def test_spectrum_indexing(self, unit, config):
        K, u, v = unit
        spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, 2, config.grid))
        assert spectrum.a(spectrum.nodes + 1) == 0.0
        with pytest.raises(DomainError):
            spectrum.a(0)

    @pytest.mark.parametrize("p", [1, "inf"])
    def test_closed_form_norms(self, unit, config, p):
        K, u, v = unit
        estimate = op_norm(DiscretizedOperator(K, u, v, p, config.grid))
        assert estimate.method == "closed-form"
        assert estimate.value == pytest.approx(1.0)

    def test_norm_ascent_for_p_3(self, unit, config):
        K, u, v = unit
        three = op_norm(DiscretizedOperator(K, u, v, 3, config.grid), seed=config.seed).value
        # ||T||_p lies between the p = 2 value and the p = 1, inf value on the unit interval.
        assert 2.0 / math.pi - 1e-2 < three < 1.0

    def test_grid_refinement_extrapolates(self):
        result = grid_refinement(lambda n: 1.0 + 1.0 / n ** 2, grids=(64, 128, 256))
        assert result.estimate == pytest.approx(1.0, abs=1e-6)
        assert result.error < 1e-4


@allure.feature("quotient")
class TestQuotient:
    def test_alpha_2_on_the_unit_interval(self, unit):
        K, u, v = unit
        assert A_value(K, u, v, 2, 256).value == pytest.approx(1.0 / math.pi, rel=5e-3)

    @pytest.mark.parametrize("p", [1, "inf"])
    def test_alpha_one_half(self, unit, config, p):
        K, u, v = unit
        result = A_value(K, u, v, p, config.grid)
        assert result.value == pytest.approx(0.5, abs=1e-5)

    def test_point_mass_is_not_certified(self, unit, config):
        K, u, v = unit
        result = A_value(K, u, v, 1, config.grid)
        assert result.method == "point-mass"
        assert not result.certified

    def test_projection_is_root_invariant(self, fixture_tree, config):
        data = fixture_tree("y-tree")
        K, u, v = data.problem
        other = data.host.location("cb", 0.5)
        at_anchor = A_value(K, u, v, 2, config.grid).value
        at_other = A_value(K, u, v, 2, config.grid, root=other, method="projection").value
        assert at_other == pytest.approx(at_anchor, rel=1e-6)

    def test_projection_matches_min_over_roots(self, unit, config):
        K, u, v = unit
        projection = A_value(K, u, v, 2, config.grid, method="projection").value
        roots = A_value(K, u, v, 2, config.grid, method="roots").value
        assert roots == pytest.approx(projection, rel=1e-4)

    def test_A_never_exceeds_the_norm(self, fixture_tree, config):
        K, u, v = fixture_tree("binary-depth3").problem
        T = DiscretizedOperator(K, u, v, 2, config.grid)
        assert A_value(K, u, v, 2, config.grid).value <= op_norm(T).value * (1 + 1e-9)

    def test_wrong_method(self, unit, config):
        K, u, v = unit
        with pytest.raises(UnsupportedExponentError):
            A_value(K, u, v, 3, config.grid, method="projection")
        with pytest.raises(DomainError):
            A_value(K, u, v, 2, config.grid, method="guess")

    def test_A_is_monotone_in_K(self, fixture_tree, config):
        data = fixture_tree("y-tree")
        K, u, v = data.problem
        inner = Subtree.from_segments(data.host, [("ac", 0.0, 1.0), ("cb", 0.0, 0.5)])
        assert A_value(inner, u, v, 2, config.grid).value <= A_value(K, u, v, 2, config.grid).value * (1 + 1e-9)

    @pytest.mark.parametrize("c", [0.5, 3.0])
    def test_A_is_homogeneous(self, fixture_tree, config, c):
        K, u, v = fixture_tree("y-tree").problem
        base = A_value(K, u, v, 2, config.grid).value
        assert A_value(K, u.scaled(c), v, 2, config.grid).value == pytest.approx(c * base, rel=1e-8)
        assert A_value(K, u, v.scaled(-c), 2, config.grid).value == pytest.approx(c * base, rel=1e-8)

    def test_A_is_lipschitz_in_both_weights(self, fixture_tree, config, rng):
        K, u, v = fixture_tree("y-tree").problem
        tree = K.host.tree
        base = A_value(K, u, v, 2, config.grid).value
        for trial in range(4):
            other = StepWeight(
                tree, {e: [(edge.length, float(rng.uniform(0.5, 1.5)))] for e, edge in tree.edges.items()}
            )
            if trial % 2 == 0:
                moved = A_value(K, other, v, 2, config.grid).value
                bound = lp_norm(v, 2, K) * lp_norm(u.combine(other, lambda a, b: abs(a - b)), 2, K)
            else:
                moved = A_value(K, u, other, 2, config.grid).value
                bound = 2.0 * lp_norm(u, 2, K) * lp_norm(v.combine(other, lambda a, b: abs(a - b)), 2, K)
            assert abs(base - moved) <= bound + 1e-6 * max(base, moved)

    def test_optimal_shift_for_p_2(self, unit, config):
        K, u, v = unit
        T = DiscretizedOperator(K, u, v, 2, config.grid)
        shift = argmin_shift(T, np.ones(T.size))
        # Tf = x, best constant is the mean 1/2.
        assert shift.c == pytest.approx(0.5, rel=1e-9)
        assert shift.residual == pytest.approx(math.sqrt(1.0 / 12.0), rel=1e-3)
        with pytest.raises(UnsupportedExponentError):
            argmin_shift(DiscretizedOperator(K, u, v, 1, config.grid), np.ones(T.size))

    def test_optimal_shift_for_p_3_matches_a_dense_scan(self, unit, config, rng):
        K, u, v = unit
        T = DiscretizedOperator(K, u, v, 3, config.grid)
        f = rng.standard_normal(T.size)
        shift = argmin_shift(T, f)
        g = apply(T, f)
        lo, hi = float(np.min(g / T.v)), float(np.max(g / T.v))
        grid = np.linspace(lo, hi, 2001)
        residuals = np.array([T.norm_of(g - c * T.v) for c in grid])
        assert shift.residual <= residuals.min() + 1e-12
        assert shift.residual == pytest.approx(T.norm_of(g - shift.c * T.v), rel=1e-12)
        assert abs(shift.c - grid[np.argmin(residuals)]) <= 3 * (hi - lo) / 2000

    def test_golden_refinement_needs_a_bracket(self):
        assert golden_refine(lambda x: x, 0.0, 1.0, 2.0) is None
        assert golden_refine(lambda x: (x - 1.0) ** 2, 2.0, 1.0, 0.0) is None
        x, value = golden_refine(lambda x: (x - 0.3) ** 2, 0.0, 0.5, 1.0)
        assert x == pytest.approx(0.3, abs=1e-6)
        assert value == pytest.approx(0.0, abs=1e-12)


@allure.feature("approximant")
class TestApproximant:
    def test_error_is_the_largest_part_value(self, fixture_tree, config):
        data = fixture_tree("unit-interval")
        K, u, v = data.problem
        halves = (
            Subtree.from_segments(data.host, [("e", 0.0, 0.5)]),
            Subtree.from_segments(data.host, [("e", 0.5, 1.0)]),
        )
        approximant = finite_rank_approximant(Partition(K, halves), u, v, 2, config.grid)
        assert approximant.rank <= 2
        largest = max(A_value(part, u, v, 2, config.grid).value for part in halves)
        assert approximant.error_norm().value == pytest.approx(largest, rel=1e-4)
        assert [index for index, _ in part_errors(approximant)] == [0, 1]

    def test_p_1_has_no_approximant(self, fixture_tree, config):
        data = fixture_tree("unit-interval")
        K, u, v = data.problem
        with pytest.raises(UnsupportedExponentError):
            finite_rank_approximant(Partition(K, (K,)), u, v, 1, config.grid)
