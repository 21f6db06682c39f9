"""Shared fixtures and brute-force oracles for the test suite."""

import io
import itertools

import numpy as np

from blockcomm.graph import community_stats, load_edge_list


def graph_from_edges(edges):
    text = "\n".join(f"{a} {b}" for a, b in edges)
    return load_edge_list(io.StringIO(text))


def clique_edges(nodes):
    return list(itertools.combinations(nodes, 2))


def disjoint_cliques(k, m):
    edges = []
    for c in range(k):
        edges.extend(clique_edges(range(c * m, (c + 1) * m)))
    return graph_from_edges(edges)


def bridge_graph():
    """Two 4-cliques {0..3}, {4..7} joined by the single edge (3, 4)."""
    return graph_from_edges(clique_edges(range(4)) + clique_edges(range(4, 8))
                            + [(3, 4)])


def set_partitions(items):
    """Every set partition of a list (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def random_gnp(rng, n, p):
    """G(n, p) edge list; redraws until at least one edge exists."""
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < p]
        if edges:
            return edges


def brute_force_best_subset(graph, seed, scorer, alpha=1.0):
    """Argmax of scorer over every node subset containing the seed."""
    others = [u for u in range(graph.node_count) if u != seed]
    best_set, best_score = None, -np.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            members = {seed, *extra}
            score = scorer(community_stats(graph, members, alpha))
            if score > best_score:
                best_set, best_score = members, score
    return best_set, best_score


def plain_f1(a, b):
    if not a and not b:
        return 0.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def partition_f1(truths, found_sets):
    """Mean over planted communities of the best-matching F1."""
    return float(np.mean([max(plain_f1(t, f) for f in found_sets)
                          for t in truths]))


def assignment_of(communities, n):
    arr = np.zeros(n, dtype=np.int64)
    for ci, members in enumerate(communities):
        for u in members:
            arr[u] = ci
    return arr


def quadrature_likelihood(counts, priors, nodes=64):
    """Marginal likelihood by tensor-product Gauss-Legendre quadrature.

    Integrates p(A | partition, rate_in, rate_out) against the two Beta
    priors over the unit square. Exact for integer counts because the
    integrand is polynomial of degree well below 2*nodes.
    """
    from scipy.special import betaln as _betaln

    x, wts = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)   # map [-1, 1] -> [0, 1]
    wts = 0.5 * wts
    ap, am = priors.alpha_plus, priors.alpha_minus
    prior_pdf = (
        t ** (ap - 1.0) * (1.0 - t) ** (am - 1.0) / np.exp(_betaln(ap, am))
    )
    f_in = t ** counts.ai_plus * (1.0 - t) ** counts.ai_minus * prior_pdf
    f_out = t ** counts.ab_plus * (1.0 - t) ** counts.ab_minus * prior_pdf
    grid = np.outer(f_in, f_out)
    return float((wts[:, None] * wts[None, :] * grid).sum())
