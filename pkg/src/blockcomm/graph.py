"""Immutable undirected simple graphs and community sufficient statistics.

Node ids from input files are compacted to dense 0-based indices at load
time; every other module works in the dense index space and only the I/O
layer translates back to external labels.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np


class Graph:
    """Undirected simple graph with per-node sorted neighbor arrays.

    Immutable after construction and safe to share across worker threads.

    Attributes:
        node_count: number of nodes N.
        edge_count: number of edges M (each edge counted once).
        adjacency: list of sorted int64 arrays, adjacency[i] = neighbors of i.
        node_labels: dict external id -> dense internal index (identity-free
            graphs built in memory use i -> i).
        external_ids: list, inverse of node_labels.
        dropped_duplicates / dropped_self_loops: counts of input lines that
            were ignored to keep the graph simple.
    """

    __slots__ = ("node_count", "edge_count", "adjacency", "node_labels",
                 "external_ids", "degrees", "dropped_duplicates", "dropped_self_loops")

    def __init__(self, node_count, adjacency, node_labels=None, external_ids=None,
                 dropped_duplicates=0, dropped_self_loops=0):
        self.node_count = node_count
        # Freeze neighbor arrays so the graph is safely shareable.
        adjacency = [np.asarray(a, dtype=np.int64) for a in adjacency]
        for arr in adjacency:
            arr.setflags(write=False)
        self.adjacency = adjacency
        self.degrees = np.array([len(a) for a in adjacency], dtype=np.int64)
        total = int(self.degrees.sum())
        if total % 2 != 0:
            raise ValueError("adjacency lists do not describe an undirected graph")
        self.edge_count = total // 2
        if external_ids is None:
            external_ids = list(range(node_count))
        if node_labels is None:
            node_labels = {ext: i for i, ext in enumerate(external_ids)}
        self.node_labels = node_labels
        self.external_ids = external_ids
        self.dropped_duplicates = dropped_duplicates
        self.dropped_self_loops = dropped_self_loops

    def neighbors(self, i):
        """Sorted neighbor array of node i (dense index)."""
        return self.adjacency[i]

    def degree(self, i):
        return int(self.degrees[i])

    @staticmethod
    def from_edges(node_count, edges, node_labels=None, external_ids=None,
                   dropped_duplicates=0, dropped_self_loops=0):
        """Build a Graph from an iterable of (i, j) dense-index pairs.

        The pairs must already be deduplicated and self-loop free.
        """
        adj = [[] for _ in range(node_count)]
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
        adjacency = [np.array(sorted(a), dtype=np.int64) for a in adj]
        return Graph(node_count, adjacency, node_labels, external_ids,
                     dropped_duplicates, dropped_self_loops)


@dataclass(frozen=True)
class CommunityStats:
    """Sufficient statistics of one candidate community.

    n: node count; w: within edges (counted once); v: volume (degree sum);
    sumsq_alpha_d: sum over members of (alpha - 1 + deg)^2 for the Gamma
    shape alpha the stats were computed with.
    """

    n: int
    w: int
    v: int
    sumsq_alpha_d: float


def load_edge_list(stream):
    """Parse a whitespace-delimited edge list into a Graph.

    Lines starting with '#' and blank lines are ignored. Duplicate edges
    (either orientation) and self-loops are dropped; their counts end up on
    the returned Graph and trigger one summary warning.

    Args:
        stream: iterable of text lines (open file, list of strings, ...).

    Returns:
        Graph with dense node indices and the external-id label map.

    Raises:
        ValueError: on a malformed line (with its line number) or empty input.
    """
    labels = {}
    external_ids = []
    edges = set()
    dup = 0
    loops = 0
    saw_data = False
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two node ids, got {len(parts)} fields")
        try:
            u_ext, v_ext = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {parts!r}") from None
        saw_data = True
        for ext in (u_ext, v_ext):
            if ext not in labels:
                labels[ext] = len(external_ids)
                external_ids.append(ext)
        u, v = labels[u_ext], labels[v_ext]
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in edges:
            dup += 1
            continue
        edges.add(key)
    if not saw_data:
        raise ValueError("empty edge list: no edges found in input")
    if dup or loops:
        warnings.warn(f"dropped {dup} duplicate edge(s) and {loops} self-loop(s)")
    return Graph.from_edges(len(external_ids), sorted(edges), labels, external_ids,
                            dropped_duplicates=dup, dropped_self_loops=loops)


def load_communities(stream, graph, min_size=3):
    """Parse ground-truth communities (one whitespace-separated line each).

    Ids are translated through graph.node_labels; communities smaller than
    min_size are filtered out.

    Raises:
        ValueError: if a community references an id absent from the graph.
    """
    out = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        members = set()
        for tok in line.split():
            ext = int(tok)
            if ext not in graph.node_labels:
                raise ValueError(f"line {lineno}: node id {ext} not present in the graph")
            members.add(graph.node_labels[ext])
        if len(members) >= min_size:
            out.append(members)
    return out


def write_edge_list(graph, stream):
    """Write the graph in the format load_edge_list reads (external ids)."""
    ext = graph.external_ids
    for i in range(graph.node_count):
        for j in graph.adjacency[i]:
            if i < j:
                stream.write(f"{ext[i]} {ext[j]}\n")


def write_communities(communities, graph, stream):
    """Write communities one per line using external ids, members sorted."""
    ext = graph.external_ids
    for members in communities:
        stream.write(" ".join(str(x) for x in sorted(ext[i] for i in members)) + "\n")


def community_stats(graph, members, alpha=1.0):
    """Sufficient statistics (n, w, v, sum of (alpha-1+deg)^2) of a node set.

    Raises:
        ValueError: on an empty member set or alpha <= 0.
    """
    if not members:
        raise ValueError("community_stats requires a non-empty member set")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    member_set = members if isinstance(members, (set, frozenset)) else set(members)
    n = len(member_set)
    v = 0
    twice_w = 0
    sumsq = 0.0
    for i in member_set:
        deg = graph.degree(i)
        v += deg
        sumsq += (alpha - 1.0 + deg) ** 2
        for j in graph.neighbors(i):
            if j in member_set:
                twice_w += 1
    return CommunityStats(n=n, w=twice_w // 2, v=v, sumsq_alpha_d=sumsq)


def add_node_delta(stats, graph, u, members, alpha=1.0):
    """Stats of members + {u}, computed incrementally in O(deg(u)).

    Equals community_stats recomputed from scratch on the grown set; the
    greedy search leans on this to stay local.

    Raises:
        ValueError: if u is already a member.
    """
    if u in members:
        raise ValueError(f"node {u} is already a community member")
    deg = graph.degree(u)
    dw = 0
    for j in graph.neighbors(u):
        if j in members:
            dw += 1
    return CommunityStats(
        n=stats.n + 1,
        w=stats.w + dw,
        v=stats.v + deg,
        sumsq_alpha_d=stats.sumsq_alpha_d + (alpha - 1.0 + deg) ** 2,
    )


def singleton_stats(graph, u, alpha=1.0):
    """Stats of the single-node community {u}."""
    deg = graph.degree(u)
    return CommunityStats(n=1, w=0, v=deg, sumsq_alpha_d=(alpha - 1.0 + deg) ** 2)
