from ddos_analysis.select.heuristics import (
    SelectionKind,
    SelectionMethod,
    all_nodes,
    group_selection,
    nearest_neighbors,
    partition_groups,
    pearson_scores,
    pearson_top,
    random_select,
    select_nodes,
)
from ddos_analysis.select.persist import load_selection, save_selection

__all__ = [
    "SelectionKind",
    "SelectionMethod",
    "all_nodes",
    "group_selection",
    "load_selection",
    "nearest_neighbors",
    "partition_groups",
    "pearson_scores",
    "pearson_top",
    "random_select",
    "save_selection",
    "select_nodes",
]
