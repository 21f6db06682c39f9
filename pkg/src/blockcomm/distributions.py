"""Special functions and divergences shared by both model likelihoods.

Everything is evaluated in natural-log space; the counts fed into log_beta
reach 1e8 and beyond, so linear-space Beta/Gamma values would overflow long
before the scores become interesting.
"""

import math
from dataclasses import dataclass

# Lanczos coefficients, g = 7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GammaParams:
    """Shape/scale parameters of a Gamma distribution."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0.0 and math.isfinite(self.shape)):
            raise ValueError(f"Gamma shape must be positive and finite, got {self.shape}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"Gamma scale must be positive and finite, got {self.scale}")

    @property
    def mean(self):
        return self.shape * self.scale

    @property
    def mean_log(self):
        """E[log X] for X ~ Gamma(shape, scale)."""
        return digamma(self.shape) + math.log(self.scale)


@dataclass(frozen=True)
class BetaParams:
    """Parameters of a Beta distribution (or arguments of the Beta function)."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"Beta parameter a must be positive and finite, got {self.a}")
        if not (self.b > 0.0 and math.isfinite(self.b)):
            raise ValueError(f"Beta parameter b must be positive and finite, got {self.b}")


def log_gamma(x):
    """Natural log of the Gamma function for x > 0.

    Lanczos approximation (g=7, 9 coefficients); arguments below 0.5 go
    through the reflection formula so the series is only ever evaluated
    where it converges fast.
    """
    if not (x > 0.0):
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        # log Gamma(x) = log(pi / sin(pi x)) - log Gamma(1 - x)
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def digamma(x):
    """Digamma psi(x) for x > 0.

    Upward recurrence psi(x) = psi(x+1) - 1/x shifts the argument to >= 6,
    where the asymptotic series is accurate to well below 1e-14.
    """
    if not (x > 0.0):
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    # Bernoulli-number series: log x - 1/(2x) - sum B_2n / (2n x^2n).
    series = (
        math.log(x)
        - 0.5 * inv
        - inv2 * (1.0 / 12.0
                  - inv2 * (1.0 / 120.0
                            - inv2 * (1.0 / 252.0
                                      - inv2 * (1.0 / 240.0
                                                - inv2 * (1.0 / 132.0
                                                          - inv2 * 691.0 / 32760.0)))))
    )
    return acc + series


def log_beta(p):
    """log B(a, b) for a BetaParams bundle."""
    return log_gamma(p.a) + log_gamma(p.b) - log_gamma(p.a + p.b)


def gamma_kl(p, q):
    """KL divergence between Gamma distributions, KL(p || q).

    Closed form in shape/scale parametrization:
    (a_p - a_q) psi(a_p) - log Gamma(a_p) + log Gamma(a_q)
      + a_q (log s_q - log s_p) + a_p (s_p / s_q - 1).
    Non-negative for all valid parameters, zero iff p == q.
    """
    return (
        (p.shape - q.shape) * digamma(p.shape)
        - log_gamma(p.shape)
        + log_gamma(q.shape)
        + q.shape * (math.log(q.scale) - math.log(p.scale))
        + p.shape * (p.scale / q.scale - 1.0)
    )
