"""Two-rate stochastic block model: exact marginal likelihood and the local
approximation score (aSBM).

Edges appear with probability lambda_in inside communities and lambda_out
between them; Beta priors on both rates integrate out exactly, leaving a
likelihood that depends on the partition only through four edge/non-edge
counts. The local score replaces the global counts with extrapolations from
one candidate community under the assumption that the rest of the graph is
tiled by k = N/n identical copies of it.
"""

import math
from dataclasses import dataclass

from .distributions import BetaParams, log_beta


@dataclass(frozen=True)
class SbmPriors:
    """Beta(alpha_plus, alpha_minus) rate priors and power-law exponent."""

    alpha_plus: float = 1.0
    alpha_minus: float = 1.0
    gamma_exp: float = 2.0

    def __post_init__(self):
        if not self.alpha_plus > 0.0 or not self.alpha_minus > 0.0:
            raise ValueError("Beta prior parameters must be positive")
        if not self.gamma_exp > 1.0:
            raise ValueError(f"gamma_exp must exceed 1, got {self.gamma_exp}")


@dataclass(frozen=True)
class EdgeCounts:
    """Within/between edge and non-edge totals.

    ai_plus: within edges; ai_minus: within non-edges; ab_plus: between
    edges; ab_minus: between non-edges. degenerate marks counts that had to
    be clamped up to zero and therefore describe no realizable graph.
    """

    ai_plus: float
    ai_minus: float
    ab_plus: float
    ab_minus: float
    degenerate: bool = False


def exact_edge_counts(graph, partition):
    """Exact EdgeCounts of a full partition.

    Args:
        graph: Graph.
        partition: per-node community id, indexable by dense node index
            (dict, list, or array). Every node must be covered.

    Returns:
        Integer-valued EdgeCounts satisfying
        ai+ + ai- + ab+ + ab- = N(N-1)/2 and ai+ + ab+ = M.
    """
    n = graph.node_count
    sizes = {}
    for i in range(n):
        try:
            c = partition[i]
        except (KeyError, IndexError):
            raise ValueError(f"partition does not cover node {i}") from None
        if c is None:
            raise ValueError(f"partition does not cover node {i}")
        sizes[c] = sizes.get(c, 0) + 1
    within_edges = 0
    for i in range(n):
        ci = partition[i]
        for j in graph.neighbors(i):
            if i < j and partition[j] == ci:
                within_edges += 1
    within_pairs = sum(s * (s - 1) // 2 for s in sizes.values())
    total_pairs = n * (n - 1) // 2
    ai_plus = within_edges
    ai_minus = within_pairs - within_edges
    ab_plus = graph.edge_count - within_edges
    ab_minus = total_pairs - within_pairs - ab_plus
    return EdgeCounts(ai_plus, ai_minus, ab_plus, ab_minus)


def sbm_log_likelihood(counts, priors):
    """Log marginal likelihood of a graph given the partition's EdgeCounts.

    log B(a+ + ai+, a- + ai-) + log B(a+ + ab+, a- + ab-) - 2 log B(a+, a-).
    """
    ap, am = priors.alpha_plus, priors.alpha_minus
    return (
        log_beta(BetaParams(ap + counts.ai_plus, am + counts.ai_minus))
        + log_beta(BetaParams(ap + counts.ab_plus, am + counts.ab_minus))
        - 2.0 * log_beta(BetaParams(ap, am))
    )


def log_partition_prior(community_sizes, gamma_exp):
    """Log of the power-law partition prior, in product form.

    Each community of size s contributes log(gamma-1) - gamma * log(s);
    the overall normalization over partitions is unknown and dropped, so
    values are only comparable across partitions of the same graph.
    """
    if not gamma_exp > 1.0:
        raise ValueError(f"gamma_exp must exceed 1, got {gamma_exp}")
    total = 0.0
    log_gm1 = math.log(gamma_exp - 1.0)
    for s in community_sizes:
        if s < 1:
            raise ValueError(f"community sizes must be >= 1, got {s}")
        total += log_gm1 - gamma_exp * math.log(s)
    return total


def asbm_tilde_counts(stats, N, M):
    """Approximate global EdgeCounts from one community's statistics.

    Assumes the graph is tiled by k = N/n communities that all look like the
    candidate. Negative extrapolated counts (possible for ab+ when k*w > M)
    are clamped to zero and the result flagged degenerate.

    Returns:
        (EdgeCounts, k).
    """
    n, w = stats.n, stats.w
    if n < 1:
        raise ValueError("community must have at least one node")
    if n > N:
        raise ValueError(f"community size {n} exceeds total node count {N}")
    if w > M:
        raise ValueError(f"community edge count {w} exceeds total edge count {M}")
    k = N / n
    ai_plus = k * w
    ai_minus = k * n * (n - 1) / 2.0 - ai_plus
    ab_plus = M - ai_plus
    ab_minus = N * (N - 1) / 2.0 - ai_plus - ai_minus - ab_plus
    degenerate = False
    clamped = []
    for value in (ai_plus, ai_minus, ab_plus, ab_minus):
        if value < 0.0:
            degenerate = True
            clamped.append(0.0)
        else:
            clamped.append(value)
    return EdgeCounts(*clamped, degenerate=degenerate), k


def asbm_log_score(stats, N, M, priors):
    """Local SBM log score of one candidate community.

    k log(gamma-1) - k gamma log(n) plus the marginal likelihood of the
    tilde counts. Degenerate tilde counts (the community is denser than the
    uniform tiling allows) score -inf so they can never win an argmax.
    """
    counts, k = asbm_tilde_counts(stats, N, M)
    if counts.degenerate:
        return float("-inf")
    g = priors.gamma_exp
    prior_part = k * math.log(g - 1.0) - k * g * math.log(stats.n)
    return prior_part + sbm_log_likelihood(counts, priors)
