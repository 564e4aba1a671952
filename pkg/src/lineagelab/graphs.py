"""Node-weighted graphs, uniform spanning trees, and spanning-tree counts.

Graphs are simple and undirected, with positive integer node weights
(think population).  Most partition operations work on node subsets of one
fixed graph rather than materialized subgraphs, so the helpers here accept
an optional ``nodes`` argument restricting attention to an induced region.

Spanning-tree counts come from the reduced-Laplacian determinant: exact big
integers via fraction-free (Bareiss) elimination for small regions, and a
log-space float via slogdet otherwise.  Uniform spanning trees are drawn
with loop-erased random walks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightedGraph",
    "grid_graph",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "read_edge_list",
    "write_edge_list",
    "read_node_weights",
    "is_connected",
    "random_spanning_tree",
    "spanning_tree_count",
    "log_spanning_tree_count",
    "EXACT_COUNT_NODE_LIMIT",
]

EXACT_COUNT_NODE_LIMIT = 64


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph with positive integer node weights."""

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    node_weights: np.ndarray
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, num_nodes: int, edges, node_weights=None) -> "WeightedGraph":
        if num_nodes < 1:
            raise ValueError(f"graph needs at least one node, got {num_nodes}")
        seen = set()
        norm = []
        adj: list[list[int]] = [[] for _ in range(num_nodes)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise ValueError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
            adj[u].append(v)
            adj[v].append(u)
        if node_weights is None:
            weights = np.ones(num_nodes, dtype=np.int64)
        else:
            weights = np.asarray(node_weights, dtype=np.int64)
            if weights.shape != (num_nodes,):
                raise ValueError("node weights must give one value per node")
            if (weights <= 0).any():
                raise ValueError("node weights must be positive")
        return cls(
            num_nodes=num_nodes,
            edges=tuple(sorted(norm)),
            node_weights=weights,
            adjacency=tuple(tuple(sorted(a)) for a in adj),
        )

    @property
    def total_weight(self) -> int:
        return int(self.node_weights.sum())

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])


def grid_graph(rows: int, cols: int, node_weights=None) -> WeightedGraph:
    """rows x cols grid with 4-neighbor adjacency; node id = r*cols + c."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return WeightedGraph.from_edges(rows * cols, edges, node_weights)


def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n)]
    )


def read_edge_list(path, weights_path=None) -> WeightedGraph:
    """Read a graph from 'u v' lines; node count is 1 + max index seen.

    The optional weights file holds 'node weight' lines; omitted nodes
    default to weight 1.
    """
    edges = []
    max_node = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line: {line!r}")
            u, v = int(parts[0]), int(parts[1])
            edges.append((u, v))
            max_node = max(max_node, u, v)
    n = max_node + 1
    weights = None
    if weights_path is not None:
        weights = np.ones(n, dtype=np.int64)
        with open(weights_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"bad weight line: {line!r}")
                weights[int(parts[0])] = int(parts[1])
    return WeightedGraph.from_edges(n, edges, weights)


def write_edge_list(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_node_weights(path, n: int) -> np.ndarray:
    weights = np.ones(n, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            u, w = line.split()
            weights[int(u)] = int(w)
    return weights


def _node_list(g: WeightedGraph, nodes) -> list[int]:
    if nodes is None:
        return list(range(g.num_nodes))
    return sorted(int(u) for u in nodes)


def is_connected(g: WeightedGraph, nodes=None) -> bool:
    """Whether the induced region (default: whole graph) is connected."""
    region = _node_list(g, nodes)
    if not region:
        return False
    member = np.zeros(g.num_nodes, dtype=bool)
    member[region] = True
    seen = {region[0]}
    stack = [region[0]]
    while stack:
        u = stack.pop()
        for v in g.adjacency[u]:
            if member[v] and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(region)


def random_spanning_tree(
    g: WeightedGraph, seed, nodes=None
) -> list[tuple[int, int]]:
    """Uniformly random spanning tree of the induced region (Wilson's walk).

    Returns the tree's edges.  Raises on a disconnected region, where no
    spanning tree exists (and the walk would never terminate).
    """
    region = _node_list(g, nodes)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if len(region) == 1:
        return []
    if not is_connected(g, region):
        raise ValueError("region is disconnected: no spanning tree exists")
    member = np.zeros(g.num_nodes, dtype=bool)
    member[region] = True
    # per-node neighbor lists restricted to the region
    local_adj = {u: [v for v in g.adjacency[u] if member[v]] for u in region}

    in_tree = np.zeros(g.num_nodes, dtype=bool)
    successor = {}
    root = region[0]
    in_tree[root] = True
    for start in region[1:]:
        if in_tree[start]:
            continue
        u = start
        # random walk, remembering only the latest exit from each node:
        # overwriting successors erases loops implicitly
        while not in_tree[u]:
            nbrs = local_adj[u]
            u_next = nbrs[rng.integers(0, len(nbrs))]
            successor[u] = u_next
            u = u_next
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = successor[u]
    tree = [(min(u, successor[u]), max(u, successor[u])) for u in region if u != root]
    tree.sort()
    return tree


def _int_determinant(mat: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (Bareiss fraction-free)."""
    n = len(mat)
    if n == 0:
        return 1
    m = [row[:] for row in mat]
    sign = 1
    prev = 1
    for col in range(n - 1):
        if m[col][col] == 0:
            pivot = next((r for r in range(col + 1, n) if m[r][col] != 0), None)
            if pivot is None:
                return 0
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        for r in range(col + 1, n):
            for c in range(col + 1, n):
                m[r][c] = (m[r][c] * m[col][col] - m[r][col] * m[col][c]) // prev
            m[r][col] = 0
        prev = m[col][col]
    return sign * m[n - 1][n - 1]


def _reduced_laplacian(g: WeightedGraph, region: list[int]) -> list[list[int]]:
    index = {u: i for i, u in enumerate(region)}
    n = len(region)
    L = [[0] * n for _ in range(n)]
    for u in region:
        i = index[u]
        for v in g.adjacency[u]:
            j = index.get(v)
            if j is not None:
                L[i][i] += 1
                L[i][j] -= 1
    # drop the last row and column
    return [row[:-1] for row in L[:-1]]


def spanning_tree_count(g: WeightedGraph, nodes=None) -> int:
    """Exact number of spanning trees of the induced region.

    Matrix-tree: determinant of the Laplacian with one row/column removed,
    taken over exact integers.  Returns 0 for a disconnected region.
    Limited to regions of at most ``EXACT_COUNT_NODE_LIMIT`` nodes; use
    :func:`log_spanning_tree_count` beyond that.
    """
    region = _node_list(g, nodes)
    if len(region) > EXACT_COUNT_NODE_LIMIT:
        raise ValueError(
            f"exact count limited to {EXACT_COUNT_NODE_LIMIT} nodes, "
            f"got {len(region)}; use log_spanning_tree_count"
        )
    if len(region) == 1:
        return 1
    det = _int_determinant(_reduced_laplacian(g, region))
    return int(det)


def log_spanning_tree_count(g: WeightedGraph, nodes=None) -> float:
    """Natural log of the spanning-tree count; -inf for disconnected regions."""
    region = _node_list(g, nodes)
    if len(region) == 1:
        return 0.0
    L = np.asarray(_reduced_laplacian(g, region), dtype=float)
    sign, logdet = np.linalg.slogdet(L)
    if sign <= 0:
        return float("-inf")
    return float(logdet)
