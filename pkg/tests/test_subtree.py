import allure
import pytest

from hardytree.exceptions import DomainError, PartitionError, TreeStructureError
from hardytree.geometry.subtree import (
    Cut,
    Partition,
    Subtree,
    components_after_removal,
    validate_partition,
)
from hardytree.geometry.tree import Location, MetricTree, RootedTree


@pytest.fixture
def y_host():
    tree = MetricTree(["a", "c", "b", "d"], [("ac", "a", "c", 1.0), ("cb", "c", "b", 1.0), ("cd", "c", "d", 1.0)])
    return RootedTree(tree, "a")


@pytest.fixture
def unit_host():
    return RootedTree(MetricTree(["0", "1"], [("e", "0", "1", 1.0)]), "0")


@allure.feature("subtree")
class TestSubtree:
    def test_whole_tree(self, y_host):
        K = Subtree.whole(y_host)
        assert K.length() == pytest.approx(3.0)
        assert K.contains_root()
        assert K.cut_points() == []
        assert sorted(loc.vertex for loc in K.ends()) == ["b", "d"]
        assert not K.is_interval()

    def test_cut_below_the_branch_point(self, y_host):
        K = Subtree.from_segments(y_host, [("ac", 0.0, 1.0), ("cb", 0.0, 0.5)])
        assert K.length() == pytest.approx(1.5)
        assert K.contains(y_host.location("cb", 0.25))
        assert not K.contains(y_host.location("cd", 0.25))
        assert set(K.cut_points()) == {Location(vertex="c"), y_host.location("cb", 0.5)}
        assert not K.is_maximal()
        assert K.is_interval()
        assert [piece[0] for piece in K.chain()] == ["ac", "cb"]

    def test_disconnected_segments(self, y_host):
        with pytest.raises(TreeStructureError):
            Subtree.from_segments(y_host, [("ac", 0.0, 0.5), ("cb", 0.5, 1.0)])

    def test_cut_above_the_anchor(self, y_host):
        with pytest.raises(TreeStructureError):
            Subtree(y_host, y_host.location("cb", 0.5), frozenset([Cut(y_host.location("ac", 0.5))]))

    def test_components_after_removal_cover_the_tree(self, y_host):
        components = components_after_removal(y_host, Location(vertex="c"))
        assert len(components) == 3
        assert sum(K.length() for K in components) == pytest.approx(3.0)

    def test_components_after_removing_an_edge_point(self, y_host):
        components = components_after_removal(y_host, y_host.location("cd", 0.25))
        assert len(components) == 2
        assert sorted(K.length() for K in components) == pytest.approx([0.75, 2.25])

    def test_local_tree_makes_boundary_points_vertices(self, y_host):
        K = Subtree.from_segments(y_host, [("cb", 0.25, 0.75)])
        local = K.local_tree
        assert local.total_length() == pytest.approx(0.5)
        assert len(local.vertices) == 2
        rooted = K.as_rooted(y_host.location("cb", 0.5))
        assert rooted.tree.total_length() == pytest.approx(0.5)

    def test_point_subtree_has_no_local_tree(self, y_host):
        K = Subtree(y_host, Location(vertex="b"))
        assert K.is_point()
        with pytest.raises(DomainError):
            K.local_tree


@allure.feature("subtree")
class TestPartition:
    def test_halves_partition_the_interval(self, unit_host):
        whole = Subtree.whole(unit_host)
        halves = (
            Subtree.from_segments(unit_host, [("e", 0.0, 0.5)]),
            Subtree.from_segments(unit_host, [("e", 0.5, 1.0)]),
        )
        report = validate_partition(Partition(whole, halves))
        assert report.valid
        assert report.parts_length == pytest.approx(report.parent_length)

    def test_gap_and_overlap_are_reported(self, unit_host):
        whole = Subtree.whole(unit_host)
        gap = validate_partition(Partition(whole, (Subtree.from_segments(unit_host, [("e", 0.0, 0.5)]),)))
        assert not gap.valid and gap.gaps
        overlap = validate_partition(
            Partition(
                whole,
                (
                    Subtree.from_segments(unit_host, [("e", 0.0, 0.6)]),
                    Subtree.from_segments(unit_host, [("e", 0.4, 1.0)]),
                ),
            )
        )
        assert not overlap.valid and overlap.overlaps

    def test_invalid_partition_raises_on_request(self, unit_host):
        whole = Subtree.whole(unit_host)
        part = Subtree.from_segments(unit_host, [("e", 0.0, 0.5)])
        with pytest.raises(PartitionError) as error:
            validate_partition(Partition(whole, (part,)), raise_on_error=True)
        assert error.value.report is not None
