"""Closed-form collapsed quantities and distribution helpers.

Everything here is pure.  Likelihood arithmetic runs in log space via
log-gamma: pair counts reach 1e5 at desk scale and raw Beta-function values
underflow long before that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .hierarchy import Hierarchy, PathSpec, ROOT_ID

__all__ = [
    "Schedule",
    "Hyperparameters",
    "log_beta_fn",
    "bernoulli_pmf",
    "beta_log_pdf",
    "multinomial_pmf",
    "beta_posterior",
    "path_log_likelihood_delta",
    "level_likelihood",
    "stick_level_prior",
    "dirichlet_level_prior",
    "ncrp_path_prior",
]


@dataclass(frozen=True)
class Schedule:
    """Sampler schedule: total iterations, burn-in, lag and sample targets."""

    iterations: int
    burn_in: int
    lag: int
    final_samples: int
    chains: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.iterations < 0:
            raise ValueError("schedule.iterations must be >= 0")
        if self.burn_in < 0:
            raise ValueError("schedule.burn_in must be >= 0")
        if self.lag < 1:
            raise ValueError("schedule.lag must be >= 1")
        if self.final_samples < 1:
            raise ValueError("schedule.final_samples must be >= 1")
        if self.chains < 1:
            raise ValueError("schedule.chains must be >= 1")
        if self.burn_in + self.lag * self.final_samples > self.iterations:
            raise ValueError(
                "schedule.burn_in + schedule.lag * schedule.final_samples must not exceed "
                f"schedule.iterations ({self.burn_in} + {self.lag}*{self.final_samples} > {self.iterations})"
            )
        if not isinstance(self.seed, int):
            raise ValueError("schedule.seed must be an integer (wall-clock seeding is not allowed)")


@dataclass(frozen=True)
class Hyperparameters:
    """Model hyperparameters plus the optional sampler schedule.

    ``gamma`` is the tree concentration, ``mu``/``sigma`` parameterize the
    level prior, ``lam``/``eta`` the Beta prior on relation degrees, ``depth``
    the fixed tree depth.  ``level_prior_mode`` selects the stick-breaking
    level prior or its finite Dirichlet variant (which requires ``alpha``).
    """

    gamma: float
    mu: float
    sigma: float
    lam: float
    eta: float
    depth: int
    level_prior_mode: str = "stick"
    alpha: tuple[float, ...] | None = None
    schedule: Schedule | None = None

    def validate(self) -> None:
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not 0 < self.mu < 1:
            raise ValueError("mu must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.lam > 0:
            raise ValueError("lam must be > 0")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.level_prior_mode not in ("stick", "dirichlet"):
            raise ValueError("level_prior_mode must be 'stick' or 'dirichlet'")
        if self.level_prior_mode == "dirichlet":
            if self.alpha is None or len(self.alpha) != self.depth:
                raise ValueError("alpha must provide one positive value per level in dirichlet mode")
            if any(a <= 0 for a in self.alpha):
                raise ValueError("alpha entries must be > 0")
        if self.schedule is not None:
            self.schedule.validate()


def log_beta_fn(a: float, b: float) -> float:
    """log B(a, b) via log-gamma."""
    if a <= 0 or b <= 0:
        raise ValueError("Beta function arguments must be > 0")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def bernoulli_pmf(p: float, x: int) -> float:
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    return p if x == 1 else 1.0 - p


def beta_log_pdf(x: float, a: float, b: float) -> float:
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be > 0")
    return (a - 1) * math.log(x) + (b - 1) * math.log(1 - x) - log_beta_fn(a, b)


def multinomial_pmf(counts: Sequence[int], probs: Sequence[float]) -> float:
    if len(counts) != len(probs):
        raise ValueError("counts and probs must have equal length")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be >= 0")
    if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
        raise ValueError("probs must be non-negative and sum to 1")
    n = sum(counts)
    log_coeff = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)
    log_prob = 0.0
    for c, p in zip(counts, probs):
        if c > 0:
            if p == 0:
                return 0.0
            log_prob += c * math.log(p)
    return math.exp(log_coeff + log_prob)


def beta_posterior(ones: int, zeros: int, lam: float, eta: float) -> tuple[float, float]:
    """Posterior Beta shapes for a relation degree given its routed pair counts."""
    if ones < 0 or zeros < 0:
        raise ValueError("counts must be >= 0")
    if lam <= 0 or eta <= 0:
        raise ValueError("lam and eta must be > 0")
    return (ones + lam, zeros + eta)


def path_log_likelihood_delta(
    base: Mapping[tuple, tuple[int, int]],
    contrib: Mapping[tuple, tuple[int, int]],
    lam: float,
    eta: float,
) -> float:
    """Log marginal-likelihood change from adding one entity's pair counts.

    ``base`` holds (ones, zeros) per sibling key with the entity removed;
    ``contrib`` holds the entity's own counts routed under a candidate
    assignment.  Keys absent from ``base`` count as (0, 0).
    """
    total = 0.0
    for key, (c1, c0) in contrib.items():
        b1, b0 = base.get(key, (0, 0))
        total += log_beta_fn(b1 + c1 + lam, b0 + c0 + eta) - log_beta_fn(b1 + lam, b0 + eta)
    return total


def level_likelihood(
    g_values: Sequence[int],
    counts_minus: Sequence[tuple[int, int]],
    lam: float,
    eta: float,
) -> float:
    """Predictive probability of one pair's per-predicate values at their routed keys.

    Uses the gamma-free simplification of the collapsed Bernoulli-Beta ratio:
    for each predicate the factor is (ones+lam)/(ones+zeros+lam+eta) when the
    value is one and (zeros+eta)/(ones+zeros+lam+eta) when it is zero.
    """
    if len(g_values) != len(counts_minus):
        raise ValueError("g_values and counts_minus must align")
    out = 1.0
    for g, (ones, zeros) in zip(g_values, counts_minus):
        if ones < 0 or zeros < 0:
            raise ValueError("counts must be >= 0")
        num = ones + lam if g else zeros + eta
        out *= num / (ones + zeros + lam + eta)
    return out


def _stick_level_weights(hist: Sequence[int], mu: float, sigma: float) -> list[float]:
    """Unvalidated fast path for :func:`stick_level_prior`; returns a plain list."""
    depth = len(hist)
    ms = mu * sigma
    rs = (1.0 - mu) * sigma
    deeper = [0] * depth  # deeper[l-1] = number of indicators strictly below level l
    acc = 0
    for l in range(depth - 1, -1, -1):
        deeper[l] = acc
        acc += hist[l]
    raw = [0.0] * depth
    carry = 1.0
    for l in range(depth):
        n_l, m_l = hist[l], deeper[l]
        denom = sigma + n_l + m_l
        raw[l] = carry * (ms + n_l) / denom
        carry *= (rs + m_l) / denom
    total = sum(raw)
    return [w / total for w in raw]


def stick_level_prior(hist: Sequence[int], mu: float, sigma: float) -> np.ndarray:
    """Posterior-predictive level distribution under the stick-breaking prior.

    ``hist[l-1]`` counts indicators at level ``l`` among the conditioning set
    (the indicator being resampled excluded).  The infinite predictive is
    truncated to ``len(hist)`` levels and renormalized.
    """
    if not 0 < mu < 1 or sigma <= 0:
        raise ValueError("mu must lie in (0,1) and sigma must be > 0")
    if len(hist) < 1:
        raise ValueError("histogram must cover at least one level")
    if any(h < 0 for h in hist):
        raise ValueError("histogram counts must be >= 0")
    return np.asarray(_stick_level_weights(hist, mu, sigma))


def dirichlet_level_prior(hist: Sequence[int], alpha: Sequence[float]) -> np.ndarray:
    """Posterior-predictive level distribution under a finite Dirichlet prior."""
    if len(hist) != len(alpha):
        raise ValueError("histogram and alpha must align")
    if any(a <= 0 for a in alpha):
        raise ValueError("alpha entries must be > 0")
    if any(h < 0 for h in hist):
        raise ValueError("histogram counts must be >= 0")
    post = np.asarray(alpha, dtype=np.float64) + np.asarray(hist, dtype=np.float64)
    return post / post.sum()


def ncrp_path_prior(h: Hierarchy, gamma: float) -> dict[PathSpec, float]:
    """Prior probability of every candidate path through the current tree.

    Candidates are all existing full paths plus a "branch new" option beneath
    the root and every internal community.  A fresh branch continues to the
    bottom with probability one (a new community has no competing children),
    so the returned probabilities sum to one.
    """
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    depth = h.depth
    out: dict[PathSpec, float] = {}

    def descend(node_id: int, prefix: tuple, prob: float) -> None:
        level = len(prefix)
        if level == depth:
            out[prefix] = prob
            return
        denom = h.pass_count(node_id) + gamma
        for child in h.children_of(node_id):
            descend(child, prefix + (child,), prob * h.pass_count(child) / denom)
        out[prefix + (None,) * (depth - level)] = prob * gamma / denom

    descend(ROOT_ID, (), 1.0)
    return out
