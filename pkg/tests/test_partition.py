import math

import allure
import pytest

from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import validate_partition
from hardytree.operators.norms import SingularSpectrum
from hardytree.partition import (
    asymptotic_scan,
    compute_M,
    compute_N,
    eps_schedule,
    gamma_p,
    packing_spectrum,
    sandwich_check,
    spectrum_scan,
)


def volterra_spectrum(count=100):
    values = tuple(2.0 / ((2 * n - 1) * math.pi) for n in range(1, count + 1))
    return SingularSpectrum(values, grid=count, nodes=count)


@pytest.fixture
def unit(fixture_tree):
    return fixture_tree("unit-interval").problem


@pytest.fixture
def branching(fixture_tree):
    return fixture_tree("y-tree").problem


@allure.feature("partition")
class TestCovering:
    # On (0, 1) with u = v = 1 a subinterval of length L has A = L / pi.
    @pytest.mark.parametrize("eps, count", [(0.2, 2), (0.1, 4)])
    def test_greedy_count_on_the_unit_interval(self, unit, config, eps, count):
        K, u, v = unit
        result = compute_N(K, u, v, 2, eps, config.grid)
        assert result.count == count
        assert result.mode == "exact"
        assert all(value <= eps * (1 + 1e-6) for value in result.values)
        assert validate_partition(result.partition).valid

    def test_whole_subtree_is_one_part(self, unit, config):
        K, u, v = unit
        result = compute_N(K, u, v, 2, 0.5, config.grid)
        assert result.count == 1
        assert result.cut_offsets == {}

    def test_exact_oracle_agrees(self, unit, config):
        K, u, v = unit
        result = compute_N(K, u, v, 2, 0.2, config.grid, exact=True)
        assert result.exact_count == 2
        assert result.exact_count <= result.count

    @pytest.mark.parametrize("eps", [0.0, -1.0])
    def test_eps_must_be_positive(self, unit, config, eps):
        K, u, v = unit
        with pytest.raises(DomainError):
            compute_N(K, u, v, 2, eps, config.grid)
        with pytest.raises(DomainError):
            compute_M(K, u, v, 2, eps, config.grid)

    def test_p_1_is_a_two_sided_estimate(self, unit, config):
        K, u, v = unit
        assert compute_N(K, u, v, 1, 0.2, config.grid).mode == "two-sided-estimate"

    @pytest.mark.parametrize("eps", [0.2, 0.1])
    def test_parts_stay_below_eps_on_a_branching_tree(self, branching, config, eps):
        K, u, v = branching
        result = compute_N(K, u, v, 2, eps, config.grid)
        assert all(value <= eps * (1 + 1e-6) + 1e-9 for value in result.values)
        assert validate_partition(result.partition).valid


@allure.feature("partition")
class TestPacking:
    def test_packing_on_the_unit_interval(self, unit, config):
        K, u, v = unit
        result = compute_M(K, u, v, 2, 0.2, config.grid)
        assert result.count == 1
        assert all(value > 0.2 for value in result.values)

    def test_nothing_to_pack_above_the_whole_value(self, unit, config):
        K, u, v = unit
        result = compute_M(K, u, v, 2, 0.5, config.grid)
        assert result.count == 0
        assert result.min_part_length == 0.0

    @pytest.mark.parametrize("eps", [0.2, 0.1])
    def test_parts_stay_above_eps_on_a_branching_tree(self, branching, config, eps):
        K, u, v = branching
        result = compute_M(K, u, v, 2, eps, config.grid)
        assert result.count >= 1
        assert all(value > eps * (1 - 1e-6) - 1e-9 for value in result.values)

    def test_counts_grow_as_eps_shrinks(self, branching, config):
        K, u, v = branching
        schedule = (0.4, 0.2, 0.1)
        covers = [compute_N(K, u, v, 2, eps, config.grid).count for eps in schedule]
        packs = [compute_M(K, u, v, 2, eps, config.grid).count for eps in schedule]
        assert covers == sorted(covers)
        assert packs == sorted(packs)
        assert covers[-1] > covers[0]


@allure.feature("scan")
class TestScans:
    def test_schedule(self):
        assert eps_schedule(0.4, 0.5, 3) == pytest.approx((0.4, 0.2, 0.1))

    @pytest.mark.parametrize("start, factor, count", [(0.0, 0.5, 3), (0.4, 1.0, 3), (0.4, 0.5, 0)])
    def test_bad_schedule(self, start, factor, count):
        with pytest.raises(DomainError):
            eps_schedule(start, factor, count)

    def test_gamma(self):
        assert gamma_p(2) == 1.0
        assert gamma_p("inf") == 2.0

    def test_spectrum_table_approaches_the_limit(self):
        table = spectrum_scan(volterra_spectrum(), 1.0 / math.pi, n_min=10, n_max=60)
        assert table.rows[0].n == 10
        assert table.rows[-1].n == 60
        # n * a_n = 2n / ((2n - 1) pi) decreases to 1 / pi.
        assert table.shrinking
        assert table.rows[-1].deviation == pytest.approx(1.0 / 119.0)

    def test_sandwich_on_the_unit_interval(self, unit, config):
        K, u, v = unit
        N = compute_N(K, u, v, 2, 0.2, config.grid)
        M = compute_M(K, u, v, 2, 0.2, config.grid)
        report = sandwich_check(N, M, volterra_spectrum(), edges=1)
        assert report.passed, report.failures

    def test_sandwich_on_a_branching_tree(self, branching, config):
        K, u, v = branching
        N = compute_N(K, u, v, 2, 0.1, config.grid)
        M = compute_M(K, u, v, 2, 0.1, config.grid)
        spectrum, resolved = packing_spectrum(K, u, v, M, config.grid)
        assert resolved
        report = sandwich_check(N, M, spectrum, edges=len(K.segments), resolved=resolved)
        assert report.passed, report.failures
        a_M = next(check for check in report.checks if check.name == "a_M >= eps")
        assert a_M.asserted

    def test_capped_spectrum_only_reports_a_M(self, branching, config):
        K, u, v = branching
        N = compute_N(K, u, v, 2, 0.1, config.grid)
        M = compute_M(K, u, v, 2, 0.1, config.grid)
        spectrum, resolved = packing_spectrum(K, u, v, M, config.grid, max_nodes=M.count + 3)
        assert not resolved
        report = sandwich_check(N, M, spectrum, resolved=resolved)
        a_M = next(check for check in report.checks if check.name == "a_M >= eps")
        assert not a_M.asserted
        assert a_M.note

    def test_sandwich_needs_the_same_eps(self, unit, config):
        K, u, v = unit
        N = compute_N(K, u, v, 2, 0.2, config.grid)
        M = compute_M(K, u, v, 2, 0.1, config.grid)
        with pytest.raises(DomainError):
            sandwich_check(N, M, volterra_spectrum())
        with pytest.raises(UnsupportedExponentError):
            sandwich_check(N, M, volterra_spectrum(), p=1)

    def test_asymptotic_scan_is_monotone(self, unit, config):
        K, u, v = unit
        table = asymptotic_scan(K, u, v, 2, (0.2, 0.1), config.grid, workers=2)
        assert [row.N for row in table.rows] == [2, 4]
        assert table.monotone
        assert table.target == pytest.approx(1.0 / math.pi)
        assert table.rows[1].epsN == pytest.approx(0.4)

    def test_scan_schedule_must_decrease(self, unit, config):
        K, u, v = unit
        with pytest.raises(DomainError):
            asymptotic_scan(K, u, v, 2, (0.1, 0.2), config.grid)
