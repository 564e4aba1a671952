"""Shared fixtures: transcribed reference diagrams and brute-force helpers."""

import itertools

import numpy as np
import pytest

from lineagelab.diagrams import DescendancyDiagram


@pytest.fixture(scope="session")
def small_diagram() -> DescendancyDiagram:
    """Width 4, four districts; the top level holds a node with 3 of the 4
    final plans below it."""
    parents = np.array(
        [
            [0, 0, 1, 2],
            [0, 0, 1, 3],
        ]
    )
    return DescendancyDiagram(width=4, districts=4, parents=parents)


@pytest.fixture(scope="session")
def wide_diagram() -> DescendancyDiagram:
    """Width 10, six districts, exactly two surviving ancestors."""
    parents = np.array(
        [
            [0, 0, 0, 1, 1, 1, 2, 2, 3, 4],
            [0, 0, 1, 1, 2, 5, 6, 7, 8, 9],
            [0, 0, 1, 3, 4, 5, 6, 7, 8, 9],
            [2, 7, 2, 3, 4, 5, 6, 7, 8, 9],
        ]
    )
    return DescendancyDiagram(width=10, districts=6, parents=parents)


@pytest.fixture(scope="session")
def tall_diagram() -> DescendancyDiagram:
    """Width 12, eleven districts; two surviving ancestors, a 3-district
    block shared by 11 of 12 plans, and a 7-district block shared by 8."""
    identity = list(range(12))
    parents = np.array(
        [
            [0, 0, 0, 1, 1, 1, 2, 2, 3, 3, 4, 11],
            [0, 0, 1, 2, 3, 5, 6, 7, 8, 9, 10, 11],
            [0, 0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11],
            [0, 1, 1, 3, 4, 5, 6, 7, 8, 9, 10, 11],
            identity,
            identity,
            [0, 0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
            identity,
            identity,
        ]
    )
    return DescendancyDiagram(width=12, districts=11, parents=parents)


def brute_force_spanning_trees(num_nodes, edges):
    """Every spanning tree of a small graph, by trying all edge subsets."""
    trees = []
    for subset in itertools.combinations(edges, num_nodes - 1):
        parent = list(range(num_nodes))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for u, v in subset:
            ru, rv = find(u), find(v)
            if ru == rv:
                acyclic = False
                break
            parent[ru] = rv
        if acyclic:
            trees.append(tuple(sorted((min(u, v), max(u, v)) for u, v in subset)))
    return trees
