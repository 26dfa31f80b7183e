"""Verification experiments: exact oracles plus seeded Monte Carlo trials.

The quantity every trial records is the mass of the region where the
trained rule disagrees with the Bayes rule, Pr_X(predicted != Bayes).
For finite-atomic families that mass is an exact atom sum; for the 1-D
continuous families it is an exact integral read off the sorted-window
prediction table, so each trial contributes a closed-form number and the
only randomness is the training draw itself.  For label-deterministic
families (frequencies 0 or 1 everywhere) it coincides with the overall
label mistake probability.

Reproducibility contract: every trial's generator seed is a documented
64-bit mix of (master_seed, n, trial_index), with a fourth component
tagging auxiliary streams (query draws).  Trials are therefore
order-independent: the harness produces bitwise-identical results for any
worker count, and growing a trial budget never changes earlier trials.
Aggregation always reduces in trial order.

Worker count is capped by the NNRATES_WORKERS environment variable
(default: available parallelism).  Work is dealt in fixed-size chunks of
trial indices, so scheduling cannot reorder results.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._rng import mix64
from .boundary import boundary_measure, high_error_measure
from .bounds import lower_bound_constants, upper_bound_params, zero_bayes_params
from .classifier import _window_structure, fit_arrays, predict_batch
from .distributions import FiniteAtomic
from .errors import ResourceLimitError

__all__ = [
    "ConsistencySweep",
    "ExcessEstimate",
    "ExperimentConfig",
    "KRule",
    "LowerBoundCheck",
    "RateSweep",
    "SweepRow",
    "TrialReport",
    "consistency_sweep",
    "estimate_expected_excess",
    "exact_expected_mistake",
    "mc_expected_mistake",
    "rate_sweep",
    "run_lower_bound_trials",
    "run_upper_bound_trials",
    "wilson_interval",
]

_WILSON_Z = 1.959963984540054  # two-sided 95% normal quantile
_CHUNK = 512
_ENUMERATION_LIMIT = 1_000_000


@dataclass(frozen=True)
class KRule:
    """Neighbor-count schedule: how k is chosen from n.

    kind 'fixed' uses ``k`` as given; 'power' uses ceil(n**exponent);
    'sqrt' uses ceil(sqrt(n)); 'rate_optimal' uses the margin-rate
    schedule k_scale * n**(2a/(2a+1)) (times ln(1/delta)**(1/(2a+1)) when
    delta is set), rounded to the nearest integer.
    """

    kind: str
    k: int = 0
    exponent: float = 0.5
    k_scale: float = 1.0
    alpha: float = 1.0
    delta: Optional[float] = None

    def k_for(self, n: int) -> int:
        if self.kind == "fixed":
            k = self.k
        elif self.kind == "power":
            k = math.ceil(n**self.exponent)
        elif self.kind == "sqrt":
            k = math.ceil(math.sqrt(n))
        elif self.kind == "rate_optimal":
            denom = 2.0 * self.alpha + 1.0
            k = self.k_scale * n ** (2.0 * self.alpha / denom)
            if self.delta is not None:
                k *= math.log(1.0 / self.delta) ** (1.0 / denom)
            k = max(1, round(k))
        else:
            raise ValueError(f"unknown k rule kind {self.kind!r}")
        if not 1 <= k < n:
            raise ValueError(f"k rule yields k={k} outside [1, n) for n={n}")
        return int(k)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment block: the distribution plus sampling parameters."""

    dist: object
    n_values: tuple[int, ...]
    k_rule: KRule
    delta: float = 0.1
    trials: int = 400
    mc_points: int = 2000
    master_seed: int = 0


@dataclass
class TrialReport:
    n: int
    k: int
    delta: float
    bound: float
    boundary_mass: float
    schedule: str
    mistake_probs: list[float]
    violated: list[int]
    violation_frequency: float = field(init=False)
    wilson_low: float = field(init=False)
    wilson_high: float = field(init=False)

    def __post_init__(self):
        freq = sum(self.violated) / len(self.violated)
        self.violation_frequency = freq
        self.wilson_low, self.wilson_high = wilson_interval(sum(self.violated), len(self.violated))


@dataclass(frozen=True)
class LowerBoundCheck:
    n: int
    k: int
    lhs: float
    rhs: float
    stderr: float
    trials_used: int
    passed: bool
    high_error_mass: float
    constant: float


@dataclass(frozen=True)
class ExcessEstimate:
    n: int
    k: int
    mean: float
    stderr: float
    per_trial: tuple[float, ...]


@dataclass(frozen=True)
class SweepRow:
    n: int
    k: int
    mean_excess: float
    stderr: float
    median_excess: float


@dataclass(frozen=True)
class RateSweep:
    rows: tuple[SweepRow, ...]
    slope: float
    intercept: float
    excluded: tuple[int, ...]  # n values dropped for nonpositive means


@dataclass(frozen=True)
class ConsistencySweep:
    rows: tuple[SweepRow, ...]
    spearman: float


def wilson_interval(successes: int, total: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if total < 1:
        raise ValueError("total must be positive")
    phat = successes / total
    z2 = _WILSON_Z * _WILSON_Z
    denom = 1.0 + z2 / total
    center = (phat + z2 / (2.0 * total)) / denom
    half = _WILSON_Z * math.sqrt(phat * (1.0 - phat) / total + z2 / (4.0 * total * total)) / denom
    # the ends are exactly 0 and 1 at the empty and full counts; keep them
    # free of cancellation dust
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == total else min(1.0, center + half)
    return (low, high)


def _worker_count() -> int:
    env = os.environ.get("NNRATES_WORKERS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


def _indexed_map(fn: Callable[[int], object], start: int, stop: int) -> list:
    """Evaluate fn over [start, stop) in index order, in fixed-size chunks.

    Results are concatenated in chunk order, so output is identical for
    any worker count.
    """
    count = stop - start
    if count <= 0:
        return []
    workers = _worker_count()
    spans = [(i, min(i + _CHUNK, stop)) for i in range(start, stop, _CHUNK)]
    if workers <= 1 or len(spans) == 1:
        return [fn(i) for i in range(start, stop)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda span: [fn(i) for i in range(span[0], span[1])], spans)
        return [item for part in parts for item in part]


# -- per-trial statistics ------------------------------------------------------


def _bayes_disagreement_atomic(dist: FiniteAtomic, model) -> float:
    atoms = np.arange(dist.space.size)
    preds = predict_batch(model, atoms)
    bayes = dist.etas >= 0.5
    return float(dist.masses[preds != bayes].sum())


def _bayes_disagreement_1d(dist, model) -> float:
    switches, preds = _window_structure(model)
    edges = np.empty(switches.size + 2)
    edges[0] = 0.0
    edges[1:-1] = np.clip(switches, 0.0, 1.0)
    edges[-1] = 1.0
    mass = np.diff(dist.cdf_array(edges))
    ones_mass = np.diff(dist.bayes_one_cdf_array(edges))
    return float(np.where(preds == 1, mass - ones_mass, ones_mass).sum())


def _trial_disagreement(dist, n: int, k: int, seed: int) -> float:
    """Exact Bayes-disagreement mass of one freshly trained rule."""
    xs, zs, ys = dist.sample_arrays(seed, n)
    model = fit_arrays(dist.space, xs, zs, ys, k)
    if isinstance(dist, FiniteAtomic):
        return _bayes_disagreement_atomic(dist, model)
    return _bayes_disagreement_1d(dist, model)


# -- exact oracle --------------------------------------------------------------


def _binom_pmf(m: int, eta: float) -> np.ndarray:
    js = np.arange(m + 1)
    combs = np.array([math.comb(m, int(j)) for j in js], dtype=float)
    return combs * eta**js * (1.0 - eta) ** (m - js)


def _compositions(total: int, caps: Sequence[int]):
    """All ways to split `total` into len(caps) parts with part i <= caps[i]."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first, *rest)


def _vote_pmf_for_occupancy(dist: FiniteAtomic, query: int, counts: Sequence[int], k: int) -> np.ndarray:
    """pmf of the k nearest neighbors' label sum, given per-atom counts.

    Atoms are consumed in distance order from the query.  Which points of
    an atom enter the neighbor set is decided by tie-break draws, but
    labels within an atom are exchangeable, so only the number taken
    matters: a fully consumed atom contributes Bin(count, eta); a distance
    group that overflows the remaining slots contributes a uniformly
    random split (multivariate hypergeometric) across its atoms.
    """
    row = dist.space.matrix[query]
    order = np.argsort(row, kind="stable")
    pmf = np.ones(1)
    remaining = k
    i = 0
    while remaining > 0 and i < order.size:
        group = [int(order[i])]
        while i + 1 < order.size and row[order[i + 1]] == row[group[0]]:
            i += 1
            group.append(int(order[i]))
        i += 1
        available = [counts[a] for a in group]
        total = sum(available)
        if total == 0:
            continue
        if total <= remaining:
            for atom, have in zip(group, available):
                if have > 0:
                    pmf = np.convolve(pmf, _binom_pmf(have, float(dist.etas[atom])))
            remaining -= total
        else:
            mix = np.zeros(remaining + pmf.size)
            denom = math.comb(total, remaining)
            for taken in _compositions(remaining, available):
                weight = 1.0
                for have, t in zip(available, taken):
                    weight *= math.comb(have, t)
                branch = pmf
                for atom, t in zip(group, taken):
                    if t > 0:
                        branch = np.convolve(branch, _binom_pmf(t, float(dist.etas[atom])))
                padded = np.zeros(mix.size)
                padded[: branch.size] = branch
                mix += (weight / denom) * padded
            pmf = mix
            remaining = 0
    return pmf


def exact_expected_mistake(dist: FiniteAtomic, n: int, k: int) -> float:
    """Exact expected Bayes-disagreement mass over all training draws.

    Enumerates atom occupancy vectors with multinomial weights; for each
    query atom the neighbor-label sum is an exact convolution, so the
    result involves no sampling at all.  Raises ResourceLimitError when
    the occupancy enumeration would exceed a million vectors.
    """
    if not isinstance(dist, FiniteAtomic):
        raise ValueError("the exact oracle requires a finite-atomic distribution")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    m = dist.space.size
    count = math.comb(n + m - 1, m - 1)
    if count > _ENUMERATION_LIMIT:
        raise ResourceLimitError(
            f"occupancy enumeration needs {count} vectors (limit {_ENUMERATION_LIMIT})"
        )
    log_masses = [math.log(v) if v > 0.0 else -math.inf for v in dist.masses]
    threshold = (k + 1) // 2
    bayes = dist.etas >= 0.5
    total = 0.0
    for counts in _compositions(n, [n] * m):
        log_w = math.lgamma(n + 1)
        ok = True
        for h, lm in zip(counts, log_masses):
            if h > 0:
                if lm == -math.inf:
                    ok = False
                    break
                log_w += h * lm - math.lgamma(h + 1)
        if not ok:
            continue
        weight = math.exp(log_w)
        for query in range(m):
            if dist.masses[query] <= 0.0:
                continue
            pmf = _vote_pmf_for_occupancy(dist, query, counts, k)
            predict_one = float(pmf[threshold:].sum())
            p_disagree = 1.0 - predict_one if bayes[query] else predict_one
            total += weight * float(dist.masses[query]) * p_disagree
    return total


def mc_expected_mistake(
    dist, n: int, k: int, trials: int, master_seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo mean of the per-trial disagreement mass, with its stderr."""
    if trials < 1:
        raise ValueError("trials must be positive")
    values = _indexed_map(lambda t: _trial_disagreement(dist, n, k, mix64(master_seed, n, t)), 0, trials)
    mean = math.fsum(values) / trials
    if trials == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
    return mean, math.sqrt(var / trials)


# -- experiment runners --------------------------------------------------------


def run_upper_bound_trials(
    dist,
    n: int,
    k: int,
    delta: float,
    trials: int,
    master_seed: int = 0,
    schedule: str = "confidence",
) -> TrialReport:
    """Repeated-trial check of the high-probability disagreement bound.

    schedule 'confidence' uses the (mass_level, band) pair derived from
    (n, k, delta); schedule 'zero_bayes' uses the zero-noise mass level
    with the band pinned at 1/2.  Each trial compares its exact
    disagreement mass against delta + boundary mass and flags violations;
    the report aggregates the violation frequency with a Wilson 95%
    interval.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if schedule == "confidence":
        params = upper_bound_params(n, k, delta)
        level, band = min(1.0, params.mass_level), params.band
    elif schedule == "zero_bayes":
        level, band = min(1.0, zero_bayes_params(n, k, delta)), 0.5
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    term = boundary_measure(dist, level, band)
    bound = delta + term.value
    cutoff = bound + term.error_bound
    probs = _indexed_map(lambda t: _trial_disagreement(dist, n, k, mix64(master_seed, n, t)), 0, trials)
    flags = [int(p > cutoff) for p in probs]
    return TrialReport(n, int(k), float(delta), bound, term.value, schedule, probs, flags)


def run_lower_bound_trials(
    dist,
    n: int,
    k: int,
    trials: Optional[int] = None,
    master_seed: int = 0,
) -> LowerBoundCheck:
    """Check the expected-disagreement lower bound constant * high-error mass.

    Finite-atomic distributions use the exact oracle (stderr 0).  The 1-D
    families run seeded trials: a pilot batch sizes the run so the
    standard error lands under rhs/10, then the budget extends
    deterministically (earlier trials never change).  ``trials`` caps the
    total; the default cap is 600000.
    """
    constants = lower_bound_constants(k)
    mass = high_error_measure(dist, n, k)
    rhs = constants.product * mass.value
    if isinstance(dist, FiniteAtomic):
        lhs = exact_expected_mistake(dist, n, k)
        return LowerBoundCheck(n, k, lhs, rhs, 0.0, 0, lhs >= rhs, mass.value, constants.product)
    cap = trials if trials is not None else 600_000
    pilot = min(2000, cap)
    values = _indexed_map(lambda t: _trial_disagreement(dist, n, k, mix64(master_seed, n, t)), 0, pilot)
    used = pilot
    if rhs > 0.0 and pilot >= 2:
        mean = math.fsum(values) / used
        var = math.fsum((v - mean) ** 2 for v in values) / (used - 1)
        needed = math.ceil(var / (rhs / 10.0) ** 2 * 1.1)
        target = min(cap, max(pilot, needed))
        if target > used:
            values += _indexed_map(
                lambda t: _trial_disagreement(dist, n, k, mix64(master_seed, n, t)), used, target
            )
            used = target
    lhs = math.fsum(values) / used
    stderr = 0.0
    if used >= 2:
        var = math.fsum((v - lhs) ** 2 for v in values) / (used - 1)
        stderr = math.sqrt(var / used)
    return LowerBoundCheck(
        n, k, lhs, rhs, stderr, used, lhs >= rhs - 3.0 * stderr, mass.value, constants.product
    )


def _trial_excess(dist, n: int, k: int, mc_points: int, master_seed: int, t: int) -> float:
    xs, zs, ys = dist.sample_arrays(mix64(master_seed, n, t), n)
    model = fit_arrays(dist.space, xs, zs, ys, k)
    xq, _, _ = dist.sample_arrays(mix64(master_seed, n, t, 1), mc_points)
    preds = predict_batch(model, xq)
    etas = dist.eta_values(xq)
    disagree = preds != (etas >= 0.5)
    return float(np.mean(np.abs(1.0 - 2.0 * etas) * disagree))


def estimate_expected_excess(
    dist, n: int, k: int, trials: int, mc_points: int, master_seed: int = 0
) -> ExcessEstimate:
    """Excess risk over the Bayes rule, averaged across training draws.

    Each trial integrates the exact pointwise excess |1 - 2 eta| over the
    disagreement region using mc_points query samples; no labels are
    drawn at query time, and the pointwise Bayes risk is subtracted
    exactly, sample by sample, before averaging.
    """
    if trials < 1 or mc_points < 1:
        raise ValueError("trials and mc_points must be positive")
    values = _indexed_map(lambda t: _trial_excess(dist, n, k, mc_points, master_seed, t), 0, trials)
    mean = math.fsum(values) / trials
    stderr = 0.0
    if trials >= 2:
        var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
        stderr = math.sqrt(var / trials)
    return ExcessEstimate(n, k, mean, stderr, tuple(values))


def _sweep_rows(dist, n_grid, k_rule: KRule, trials: int, mc_points: int, master_seed: int):
    rows = []
    for n in n_grid:
        k = k_rule.k_for(n)
        est = estimate_expected_excess(dist, n, k, trials, mc_points, master_seed)
        rows.append(
            SweepRow(n, k, est.mean, est.stderr, float(np.median(np.asarray(est.per_trial))))
        )
    return rows


def rate_sweep(
    dist,
    n_grid: Sequence[int],
    k_rule: KRule,
    trials: int,
    mc_points: int = 2000,
    master_seed: int = 0,
) -> RateSweep:
    """Log-log rate fit of mean excess risk against sample size.

    Requires at least 4 increasing sample sizes.  Rows with nonpositive
    mean excess carry no log and are excluded from the fit but flagged in
    the result.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("rate sweeps need at least 4 strictly increasing sample sizes")
    rows = _sweep_rows(dist, n_grid, k_rule, trials, mc_points, master_seed)
    included = [(math.log(r.n), math.log(r.mean_excess)) for r in rows if r.mean_excess > 0.0]
    excluded = tuple(r.n for r in rows if r.mean_excess <= 0.0)
    if len(included) < 2:
        return RateSweep(tuple(rows), math.nan, math.nan, excluded)
    xbar = math.fsum(x for x, _ in included) / len(included)
    ybar = math.fsum(y for _, y in included) / len(included)
    sxx = math.fsum((x - xbar) ** 2 for x, _ in included)
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in included)
    slope = sxy / sxx
    return RateSweep(tuple(rows), slope, ybar - slope * xbar, excluded)


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def consistency_sweep(
    dist,
    n_grid: Sequence[int],
    k_rule: Optional[KRule] = None,
    trials: int = 100,
    mc_points: int = 2000,
    master_seed: int = 0,
) -> ConsistencySweep:
    """Median excess risk across a growing-sample schedule, plus its trend.

    The default k rule is ceil(sqrt(n)), which grows without bound while
    k/n vanishes.  The trend statistic is the Spearman rank correlation
    between the per-n median excess and n (strict decay gives -1).
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 2 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("consistency sweeps need at least 2 strictly increasing sample sizes")
    rows = _sweep_rows(dist, n_grid, k_rule or KRule("sqrt"), trials, mc_points, master_seed)
    med_ranks = _average_ranks([r.median_excess for r in rows])
    n_ranks = _average_ranks([float(r.n) for r in rows])
    mbar = sum(med_ranks) / len(med_ranks)
    nbar = sum(n_ranks) / len(n_ranks)
    denom = math.sqrt(
        sum((a - mbar) ** 2 for a in med_ranks) * sum((b - nbar) ** 2 for b in n_ranks)
    )
    if denom == 0.0:
        spearman = 0.0
    else:
        spearman = sum((a - mbar) * (b - nbar) for a, b in zip(med_ranks, n_ranks)) / denom
    return ConsistencySweep(tuple(rows), spearman)
