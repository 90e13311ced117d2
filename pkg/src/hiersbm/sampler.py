"""Collapsed Gibbs engine: chain state, resampling moves, schedule, aggregation.

The chain state keeps incremental sufficient statistics: pair counts per
sibling key and level-indicator histograms.  Every move removes the affected
contributions, scores candidates against the remainder, then reinstates the
chosen configuration; ``audit_counts`` compares the incremental statistics
against a from-scratch recount.  Candidate scoring runs in log space with
log-sum-exp normalization, since candidate likelihood spreads exceed float
range on dense graphs.

One chain owns one state exclusively; the full conditionals are sequential,
so there is no intra-chain parallelism.  Independent chains run concurrently
with distinct seeds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, logsumexp

from . import stats, synth
from .hierarchy import Hierarchy, Path, PathSpec, coarsen
from .kgraph import DegreeTable, KnowledgeGraph, degree_table
from .stats import Hyperparameters

__all__ = [
    "SamplerState",
    "PosteriorSample",
    "AuditReport",
    "Trace",
    "init_state",
    "sample_level_indicator",
    "sample_path",
    "level_conditional",
    "path_conditional",
    "gibbs_iteration",
    "complete_log_likelihood",
    "run",
    "take_sample",
    "aggregate",
    "recover_community_relations",
    "relations_from_sample",
    "predicted_edge_probabilities",
    "entity_level_mode",
    "audit_counts",
    "write_trace_csv",
    "write_sample_json",
    "load_sample_json",
    "sample_to_dict",
]

Trace = list  # list of (iteration, complete log-likelihood) pairs

SENDER = 0
RECEIVER = 1


@dataclass(frozen=True)
class PosteriorSample:
    """Immutable snapshot of one retained Gibbs sample.

    ``indicators`` carries the live level-indicator tensor for in-process
    readouts; it is not part of the serialized form and samples loaded from
    disk fall back to per-entity level modes.
    """

    iteration: int
    log_likelihood: float
    tree: dict
    entity_labels: list[str]
    paths: list[Path]
    levels: list[int]
    indicators: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    message: str = ""


class SamplerState:
    """Mutable Markov-chain state over entity paths and level indicators."""

    def __init__(self, kg: KnowledgeGraph, hyper: Hyperparameters, rng: np.random.Generator):
        hyper.validate()
        if kg.num_entities < 1:
            raise ValueError("graph must have at least one entity")
        if kg.num_predicates < 1:
            raise ValueError("graph must have at least one predicate")
        self.kg = kg
        self.hyper = hyper
        self.rng = rng
        self.E = kg.num_entities
        self.R = kg.num_predicates
        self.L = hyper.depth
        self.G = kg.dense_tensor()

        # Paths from the bare tree prior, entities seated in id order.
        self.h = Hierarchy(self.L)
        self.P = np.empty((self.E, self.L), dtype=np.int64)
        for i in range(self.E):
            self.P[i] = synth.sample_ncrp_path(self.h, hyper.gamma, rng)
        self.D = np.empty((self.E, self.E), dtype=np.int64)
        for i in range(self.E):
            self._refresh_divergence_row(i)

        # Indicators i.i.d. from the zero-count level prior.
        cum = np.cumsum(self._zero_count_level_prior())
        self.Z = (np.searchsorted(cum, self.rng.random((self.E, self.E, 2))) + 1).astype(np.int64)
        np.clip(self.Z, 1, self.L, out=self.Z)

        self.rel: dict[tuple[int, int, int], list[int]] = {}
        self._recount_relations_into(self.rel)
        self.ghist = [0] * (self.L + 1)
        self.ehist = np.zeros((self.E, self.L + 1), dtype=np.int64)
        self._recount_level_hists_into(self.ghist, self.ehist)

        self.iteration = 0
        self.trace: Trace = []
        self.path_resamples = np.zeros(self.E, dtype=np.int64)

    # -- routing ---------------------------------------------------------

    def _zero_count_level_prior(self) -> np.ndarray:
        if self.hyper.level_prior_mode == "stick":
            return stats.stick_level_prior([0] * self.L, self.hyper.mu, self.hyper.sigma)
        return stats.dirichlet_level_prior([0] * self.L, self.hyper.alpha)

    def _level_prior(self) -> list[float]:
        hist = self.ghist[1:]
        if self.hyper.level_prior_mode == "stick":
            return stats._stick_level_weights(hist, self.hyper.mu, self.hyper.sigma)
        alpha = self.hyper.alpha
        post = [a + h for a, h in zip(alpha, hist)]
        total = sum(post)
        return [p / total for p in post]

    def _refresh_divergence_row(self, i: int) -> None:
        neq = self.P != self.P[i][None, :]
        anym = neq.any(axis=1)
        d = np.where(anym, neq.argmax(axis=1) + 1, self.L + 1)
        self.D[i, :] = d
        self.D[:, i] = d
        self.D[i, i] = self.L + 1

    def _route(self, i: int, j: int, zi: int, zj: int) -> tuple[int, int]:
        """Sibling-key community pair for one interaction; mirrors ``coarsen``."""
        d = self.D[i, j]
        if zi == zj:
            if d > zi - 1:
                return int(self.P[i, zi - 1]), int(self.P[j, zj - 1])
            lvl = int(d)
        elif d <= self.L:
            lvl = int(d)
        else:
            lvl = zi if zi < zj else zj
        return int(self.P[i, lvl - 1]), int(self.P[j, lvl - 1])

    # -- incremental counts ----------------------------------------------

    def _pair_apply(self, x: int, y: int, sign: int) -> None:
        """Add or remove the (x, y) pair's per-predicate counts at its current route."""
        zi = int(self.Z[x, y, SENDER])
        zj = int(self.Z[x, y, RECEIVER])
        a, b = self._route(x, y, zi, zj)
        rel = self.rel
        g_row = self.G[x, y]
        for r in range(self.R):
            key = (a, b, r)
            entry = rel.get(key)
            if entry is None:
                entry = rel[key] = [0, 0]
            entry[0 if g_row[r] else 1] += sign
            if entry[0] == 0 and entry[1] == 0:
                del rel[key]

    def _entity_pairs_apply(self, i: int, sign: int) -> None:
        for j in range(self.E):
            self._pair_apply(i, j, sign)
            if j != i:
                self._pair_apply(j, i, sign)

    def _hist_apply(self, i: int, j: int, level: int, sign: int) -> None:
        self.ghist[level] += sign
        self.ehist[i, level] += sign
        if i != j:
            self.ehist[j, level] += sign

    # -- from-scratch recounts (init and audits) ---------------------------

    def _recount_relations_into(self, out: dict) -> None:
        out.clear()
        paths = [tuple(int(c) for c in row) for row in self.P]
        for i in range(self.E):
            for j in range(self.E):
                zi = int(self.Z[i, j, SENDER])
                zj = int(self.Z[i, j, RECEIVER])
                a, b, _ = coarsen(paths[i], zi, paths[j], zj, 0)
                g_row = self.G[i, j]
                for r in range(self.R):
                    entry = out.setdefault((a, b, r), [0, 0])
                    entry[0 if g_row[r] else 1] += 1

    def _recount_level_hists_into(self, ghist: list, ehist: np.ndarray) -> None:
        for l in range(self.L + 1):
            ghist[l] = 0
        values, counts = np.unique(self.Z, return_counts=True)
        for v, c in zip(values, counts):
            ghist[int(v)] = int(c)
        ehist[:] = 0
        idx = np.arange(self.E)
        for l in range(1, self.L + 1):
            mask = self.Z == l
            row = mask.sum(axis=(1, 2))
            col = mask.sum(axis=(0, 2))
            diag = mask[idx, idx, :].sum(axis=1)
            ehist[:, l] = row + col - diag

    # -- conditional distributions ----------------------------------------

    def _level_log_weights_pair_removed(self, i: int, j: int, direction: int) -> list[float]:
        """Log posterior weights over levels, pair (i, j) already removed from counts."""
        zi = int(self.Z[i, j, SENDER])
        zj = int(self.Z[i, j, RECEIVER])
        prior = self._level_prior()
        lam, eta = self.hyper.lam, self.hyper.eta
        g_row = self.G[i, j]
        rel = self.rel
        log = math.log
        logw = [0.0] * self.L
        for l in range(1, self.L + 1):
            if direction == SENDER:
                a, b = self._route(i, j, l, zj)
            else:
                a, b = self._route(i, j, zi, l)
            acc = log(prior[l - 1])
            for r in range(self.R):
                entry = rel.get((a, b, r))
                ones, zeros = entry if entry is not None else (0, 0)
                num = (ones + lam) if g_row[r] else (zeros + eta)
                acc += log(num / (ones + zeros + lam + eta))
            logw[l - 1] = acc
        return logw

    def _score_path_candidates(self, i: int) -> tuple[list[PathSpec], np.ndarray]:
        """Log posterior weights for every candidate path of entity i.

        Entity i's pair contributions and path must already be removed.  All
        of the entity's interactions (both directions, all predicates, the
        self-pair once) are routed under each candidate with the current
        indicators; fresh communities are encoded as negative sentinels and
        contribute zero base counts.
        """
        E, L, R = self.E, self.L, self.R
        prior = stats.ncrp_path_prior(self.h, self.hyper.gamma)
        specs = list(prior)
        lam, eta = self.hyper.lam, self.hyper.eta
        P = self.P
        rows = np.arange(E)
        z_out_s = self.Z[i, :, SENDER].astype(np.int64)
        z_out_r = self.Z[i, :, RECEIVER].astype(np.int64)
        z_in_s = self.Z[:, i, SENDER].astype(np.int64)
        z_in_r = self.Z[:, i, RECEIVER].astype(np.int64)
        g_out = self.G[i, :, :].astype(np.float64)
        g_in = self.G[:, i, :].astype(np.float64)
        keep_in = rows != i
        r_offsets = np.arange(R, dtype=np.int64)
        off = L + 2
        mod = self.h.next_id + off + L + 2
        logw = np.empty(len(specs))
        for idx, spec in enumerate(specs):
            cpath = np.array(
                [-(lvl + 2) if c is None else c for lvl, c in enumerate(spec)], dtype=np.int64
            )
            neq = P != cpath[None, :]
            anym = neq.any(axis=1)
            div = np.where(anym, neq.argmax(axis=1) + 1, L + 1)
            div[i] = L + 1  # the self pair compares the candidate with itself

            # pairs (i, j): sender path is the candidate, receiver path is P[j]
            ls, lr = _effective_levels(z_out_s, z_out_r, div, L)
            a_out = cpath[ls - 1]
            b_out = P[rows, lr - 1]
            b_out[i] = cpath[lr[i] - 1]

            # pairs (j, i): sender path is P[j], receiver path is the candidate
            ls2, lr2 = _effective_levels(z_in_s, z_in_r, div, L)
            a_in = P[rows, ls2 - 1]
            b_in = cpath[lr2 - 1]

            a = np.concatenate([a_out, a_in[keep_in]])
            b = np.concatenate([b_out, b_in[keep_in]])
            g = np.concatenate([g_out, g_in[keep_in]], axis=0)
            pair_code = (a + off) * mod + (b + off)
            codes = (pair_code[:, None] * R + r_offsets[None, :]).ravel()
            uq, inv = np.unique(codes, return_inverse=True)
            c1 = np.bincount(inv, weights=g.ravel())
            ct = np.bincount(inv).astype(np.float64)
            c0 = ct - c1
            b1 = np.empty(len(uq))
            b0 = np.empty(len(uq))
            for k, code in enumerate(uq.tolist()):
                r = code % R
                pc = code // R
                entry = self.rel.get((pc // mod - off, pc % mod - off, r))
                b1[k], b0[k] = entry if entry is not None else (0, 0)
            delta = float(np.sum(betaln(b1 + c1 + lam, b0 + c0 + eta) - betaln(b1 + lam, b0 + eta)))
            logw[idx] = math.log(prior[spec]) + delta
        return specs, logw


def _effective_levels(zs: np.ndarray, zr: np.ndarray, div: np.ndarray, depth: int):
    """Vectorized coarsening levels for sender/receiver indicator arrays."""
    direct = (zs == zr) & (div > zs - 1)
    fallback = np.where(div <= depth, div, np.minimum(zs, zr))
    return np.where(direct, zs, fallback), np.where(direct, zr, fallback)


def _categorical(rng: np.random.Generator, probs) -> int:
    u = rng.random()
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    return len(probs) - 1


def _categorical_from_logs(rng: np.random.Generator, logw) -> int:
    m = max(logw)
    w = [math.exp(v - m) for v in logw]
    u = rng.random() * sum(w)
    acc = 0.0
    for k, v in enumerate(w):
        acc += v
        if u < acc:
            return k
    return len(w) - 1


# -- public operations -----------------------------------------------------


def init_state(kg: KnowledgeGraph, hyper: Hyperparameters, rng: np.random.Generator) -> SamplerState:
    """Draw paths and indicators from their priors and build counts from scratch."""
    return SamplerState(kg, hyper, rng)


def sample_level_indicator(state: SamplerState, i: int, j: int, direction: int) -> None:
    """Resample one level indicator of the ordered pair (i, j) in place.

    ``direction`` 0 resamples the sender's level, 1 the receiver's.  The
    indicator's pair contribution and histogram entry are removed, a level is
    drawn from prior times predictive likelihood, and counts are reinstated.
    """
    if state.L == 1:
        return
    cur = int(state.Z[i, j, direction])
    state._pair_apply(i, j, -1)
    state._hist_apply(i, j, cur, -1)
    logw = state._level_log_weights_pair_removed(i, j, direction)
    new = _categorical_from_logs(state.rng, logw) + 1
    state.Z[i, j, direction] = new
    state._hist_apply(i, j, new, +1)
    state._pair_apply(i, j, +1)


def level_conditional(state: SamplerState, i: int, j: int, direction: int) -> np.ndarray:
    """Exact conditional distribution of one indicator; state is left unchanged."""
    if state.L == 1:
        return np.ones(1)
    cur = int(state.Z[i, j, direction])
    state._pair_apply(i, j, -1)
    state._hist_apply(i, j, cur, -1)
    logw = np.asarray(state._level_log_weights_pair_removed(i, j, direction))
    state._hist_apply(i, j, cur, +1)
    state._pair_apply(i, j, +1)
    w = np.exp(logw - logsumexp(logw))
    return w / w.sum()


def sample_path(state: SamplerState, i: int) -> None:
    """Resample entity i's path in place.

    The entity's pair contributions and path are removed (pruning emptied
    communities), every candidate continuation of the remaining tree is scored
    by prior times collapsed likelihood, and the chosen path is materialized
    with fresh ids for any new branch.
    """
    original = tuple(int(c) for c in state.P[i])
    state._entity_pairs_apply(i, -1)
    state.h.remove_path(original)
    specs, logw = state._score_path_candidates(i)
    choice = _categorical_from_logs(state.rng, logw)
    state.P[i] = state.h.add_path(specs[choice])
    state._refresh_divergence_row(i)
    state._entity_pairs_apply(i, +1)
    state.path_resamples[i] += 1


def path_conditional(state: SamplerState, i: int) -> tuple[list[PathSpec], np.ndarray]:
    """Candidate path specs and their exact conditional probabilities.

    The state is probed (removal, scoring) and restored exactly, including
    pruned community ids.
    """
    original = tuple(int(c) for c in state.P[i])
    state._entity_pairs_apply(i, -1)
    state.h.remove_path(original)
    specs, logw = state._score_path_candidates(i)
    state.h.revive_path(original)
    state._entity_pairs_apply(i, +1)
    w = np.exp(logw - logsumexp(logw))
    return specs, w / w.sum()


def gibbs_iteration(state: SamplerState, degrees: DegreeTable) -> None:
    """One sweep: degree-gated indicator updates, then degree-gated path updates.

    For each ordered pair (i, j) the sender indicator is resampled with
    probability ``s_i`` and the receiver indicator with ``s_j``; each entity's
    path is then resampled with probability ``s_i``.  Appends one trace entry.
    """
    E = state.E
    s = degrees.sampling_prob
    gates = state.rng.random((E, E, 2))
    for i in range(E):
        s_i = s[i]
        gate_row = gates[i]
        for j in range(E):
            if gate_row[j, 0] < s_i:
                sample_level_indicator(state, i, j, SENDER)
            if gate_row[j, 1] < s[j]:
                sample_level_indicator(state, i, j, RECEIVER)
    path_gates = state.rng.random(E)
    for i in range(E):
        if path_gates[i] < s[i]:
            sample_path(state, i)
    state.iteration += 1
    state.trace.append((state.iteration, complete_log_likelihood(state)))


def complete_log_likelihood(state: SamplerState) -> float:
    """Joint log density of the graph and the uncollapsed latents.

    Three terms: the collapsed Bernoulli-Beta evidence of all routed pair
    counts, the sequential tree-construction probability of the paths, and the
    collapsed level-indicator marginal (pooled over the indicator histogram;
    exactly zero when the tree has a single level).  All three are functions
    of counts only, so the value is invariant to entity and id relabeling.
    """
    hyper = state.hyper
    lam, eta = hyper.lam, hyper.eta
    base = stats.log_beta_fn(lam, eta)
    total = 0.0
    for ones, zeros in state.rel.values():
        total += stats.log_beta_fn(ones + lam, zeros + eta) - base

    gamma = hyper.gamma
    counts: dict[int, int] = {}
    for e in range(state.E):
        parent_n = e
        for l in range(state.L):
            c = int(state.P[e, l])
            nc = counts.get(c, 0)
            total += math.log((nc if nc else gamma) / (parent_n + gamma))
            counts[c] = nc + 1
            parent_n = nc

    total += _level_log_marginal(state)
    return total


def _level_log_marginal(state: SamplerState) -> float:
    if state.L == 1:
        return 0.0
    hist = state.ghist
    if state.hyper.level_prior_mode == "stick":
        ms = state.hyper.mu * state.hyper.sigma
        rs = (1.0 - state.hyper.mu) * state.hyper.sigma
        base = stats.log_beta_fn(ms, rs)
        out = 0.0
        deeper = 0
        for l in range(state.L, 0, -1):
            n_l = hist[l]
            if n_l or deeper:
                out += stats.log_beta_fn(ms + n_l, rs + deeper) - base
            deeper += n_l
        return out
    alpha = state.hyper.alpha
    total_alpha = float(sum(alpha))
    n = sum(hist[1:])
    out = math.lgamma(total_alpha) - math.lgamma(total_alpha + n)
    for l in range(1, state.L + 1):
        out += math.lgamma(alpha[l - 1] + hist[l]) - math.lgamma(alpha[l - 1])
    return out


def run(kg: KnowledgeGraph, hyper: Hyperparameters) -> tuple[list[PosteriorSample], Trace]:
    """Run one chain: init, burn-in, then collect lagged samples.

    The trace records the initialization value at iteration 0 plus one entry
    per completed iteration.  Samples are collected after ``burn_in`` at every
    ``lag``-th iteration until ``final_samples`` snapshots are stored.
    """
    hyper.validate()
    if hyper.schedule is None:
        raise ValueError("hyperparameters must carry a schedule")
    sched = hyper.schedule
    rng = np.random.default_rng(sched.seed)
    state = init_state(kg, hyper, rng)
    degrees = degree_table(kg)
    state.trace.append((0, complete_log_likelihood(state)))
    samples: list[PosteriorSample] = []
    while state.iteration < sched.iterations:
        gibbs_iteration(state, degrees)
        done = state.iteration - sched.burn_in
        if done > 0 and done % sched.lag == 0 and len(samples) < sched.final_samples:
            samples.append(take_sample(state))
    return samples, state.trace


def take_sample(state: SamplerState) -> PosteriorSample:
    ll = state.trace[-1][1] if state.trace else complete_log_likelihood(state)
    return PosteriorSample(
        iteration=state.iteration,
        log_likelihood=float(ll),
        tree=state.h.to_dict(),
        entity_labels=list(state.kg.entity_labels),
        paths=[tuple(int(c) for c in row) for row in state.P],
        levels=[entity_level_mode(state, i) for i in range(state.E)],
        indicators=state.Z.copy(),
    )


def aggregate(samples: list[PosteriorSample]) -> tuple[PosteriorSample, np.ndarray]:
    """Maximum-likelihood point estimate plus per-level co-clustering consensus.

    ``consensus[l-1, i, j]`` is the fraction of samples in which entities i
    and j share their path prefix down to level l; unlike community ids, this
    statistic is comparable across samples with different trees.
    """
    if not samples:
        raise ValueError("aggregate requires at least one sample")
    best = max(samples, key=lambda s: s.log_likelihood)
    n = len(samples[0].entity_labels)
    depth = len(samples[0].paths[0]) if n else 0
    consensus = np.zeros((depth, n, n))
    for s in samples:
        paths = np.asarray(s.paths, dtype=np.int64)
        for l in range(depth):
            lab = paths[:, l]
            consensus[l] += lab[:, None] == lab[None, :]
    consensus /= len(samples)
    return best, consensus


def recover_community_relations(state: SamplerState, lam: float, eta: float) -> dict:
    """Posterior-mean relation degree for every occupied sibling key."""
    return {
        key: (ones + lam) / (ones + zeros + lam + eta)
        for key, (ones, zeros) in state.rel.items()
    }


def entity_level_mode(state: SamplerState, i: int) -> int:
    """Mode of entity i's incident level indicators, ties toward the shallower level."""
    return int(np.argmax(state.ehist[i, 1:])) + 1


def audit_counts(state: SamplerState) -> AuditReport:
    """Compare incremental statistics against a from-scratch recount."""
    fresh: dict = {}
    state._recount_relations_into(fresh)
    for key in sorted(set(fresh) | set(state.rel)):
        want = fresh.get(key, [0, 0])
        have = state.rel.get(key, [0, 0])
        if want != have:
            return AuditReport(False, f"relation counts differ at key {key}: recount {want}, incremental {have}")
    ghist = [0] * (state.L + 1)
    ehist = np.zeros_like(state.ehist)
    state._recount_level_hists_into(ghist, ehist)
    if ghist != state.ghist:
        return AuditReport(False, f"global level histogram differs: recount {ghist}, incremental {state.ghist}")
    if not np.array_equal(ehist, state.ehist):
        i = int(np.nonzero((ehist != state.ehist).any(axis=1))[0][0])
        return AuditReport(
            False,
            f"entity {i} level histogram differs: recount {ehist[i].tolist()}, incremental {state.ehist[i].tolist()}",
        )
    return AuditReport(True)


# -- sample readouts ---------------------------------------------------------


def _sample_kg_index(sample: PosteriorSample, kg: KnowledgeGraph) -> list[int]:
    missing = [lab for lab in sample.entity_labels if lab not in kg.entities]
    if missing:
        raise ValueError(f"sample entities missing from the graph: {missing}")
    return [kg.entities[lab] for lab in sample.entity_labels]


def _pair_levels(sample: PosteriorSample, i: int, j: int) -> tuple[int, int]:
    if sample.indicators is not None:
        return int(sample.indicators[i, j, 0]), int(sample.indicators[i, j, 1])
    return sample.levels[i], sample.levels[j]


def relations_from_sample(sample: PosteriorSample, kg: KnowledgeGraph, lam: float, eta: float) -> dict:
    """Posterior-mean relation degrees reconstructed from a stored sample.

    Every ordered pair is routed through the sample's paths at its recorded
    level indicators (falling back to per-entity level modes for samples
    loaded from disk); counts come from the graph.
    """
    n = len(sample.entity_labels)
    gid = _sample_kg_index(sample, kg)
    counts: dict[tuple[int, int, int], list[int]] = {}
    for i in range(n):
        pi = sample.paths[i]
        for j in range(n):
            zi, zj = _pair_levels(sample, i, j)
            a, b, _ = coarsen(pi, zi, sample.paths[j], zj, 0)
            for r in range(kg.num_predicates):
                entry = counts.setdefault((a, b, r), [0, 0])
                entry[0 if (gid[i], gid[j], r) in kg.triples else 1] += 1
    return {
        key: (ones + lam) / (ones + zeros + lam + eta)
        for key, (ones, zeros) in counts.items()
    }


def predicted_edge_probabilities(
    sample: PosteriorSample, kg: KnowledgeGraph, lam: float, eta: float
) -> np.ndarray:
    """Posterior-mean edge probability for every (i, j, r), routed as above."""
    means = relations_from_sample(sample, kg, lam, eta)
    n = len(sample.entity_labels)
    out = np.empty((n, n, kg.num_predicates))
    for i in range(n):
        pi = sample.paths[i]
        for j in range(n):
            zi, zj = _pair_levels(sample, i, j)
            a, b, _ = coarsen(pi, zi, sample.paths[j], zj, 0)
            for r in range(kg.num_predicates):
                out[i, j, r] = means[(a, b, r)]
    return out


# -- persistence -------------------------------------------------------------


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,log_likelihood\n")
        for it, ll in trace:
            fh.write(f"{it},{ll!r}\n")


def sample_to_dict(sample: PosteriorSample) -> dict:
    return {
        "iteration": sample.iteration,
        "log_likelihood": sample.log_likelihood,
        "tree": sample.tree,
        "entities": [
            {"label": lab, "path": list(path), "level": level}
            for lab, path, level in zip(sample.entity_labels, sample.paths, sample.levels)
        ],
    }


def write_sample_json(sample: PosteriorSample, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sample_to_dict(sample), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sample_json(path) -> PosteriorSample:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entities = doc["entities"]
    return PosteriorSample(
        iteration=int(doc["iteration"]),
        log_likelihood=float(doc["log_likelihood"]),
        tree=doc["tree"],
        entity_labels=[e["label"] for e in entities],
        paths=[tuple(e["path"]) for e in entities],
        levels=[int(e["level"]) for e in entities],
    )
