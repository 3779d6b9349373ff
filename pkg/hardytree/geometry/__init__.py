from .subtree import (
    Cut,
    Partition,
    PartitionReport,
    Segment,
    Subtree,
    components_after_removal,
    validate_partition,
)
from .tree import Edge, Location, MetricTree, PathStep, RootedTree, distance, path, precedes, root_at
