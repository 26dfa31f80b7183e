"""Synthetic labeled distributions with exact measure and radius queries.

Three families, each with closed-form answers to every query the analysis
needs: ball masses (open and closed), probability radii, pointwise and
ball-averaged label frequencies, margin masses, and Bayes risk.

* :class:`FiniteAtomic` - atoms of a finite metric space carrying point
  masses and per-atom label frequencies.
* :class:`PiecewiseUniform1D` - two class-conditional piecewise-constant
  densities on [0, 1] mixed by class priors.
* :class:`PowerMargin1D` - uniform marginal on [0, 1] whose regression
  function leaves 1/2 at a controlled polynomial speed, eta(x) =
  1/2 + (1/2) * sign(2x - 1) * |2x - 1|**gamma.

Sampling is reproducible: a seed fully determines the draws, which are made
in a fixed order (locations, then tie-break draws, then labels, one array
each).  Tie-break draws are uniform doubles in [0, 1).

The ball-average of the label frequency over a set A of positive mass is
written eta(A) = (1/mu(A)) * integral of eta over A.  For an augmented ball
(closed ball B, open ball Bo, sphere cutoff nu in [0, 1]) the average mixes
the open-ball and closed-ball values through the product measure:

    eta(A) = (nu * S(B) + (1 - nu) * S(Bo)) / (nu * mu(B) + (1 - nu) * mu(Bo))

where S(.) denotes the unnormalized integral of eta.  Both families of
1-D queries reduce to prefix integrals that are piecewise linear or
piecewise power functions of the interval endpoints, so every value here
is exact up to float rounding; ``MassQueryResult.error_bound`` is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._rng import generator
from .errors import DomainError, UnsupportedMethodError, ZeroMassError
from .metric import FiniteMetric, IntervalMetric, MetricSpace, load_finite_metric

__all__ = [
    "AugmentedSample",
    "FiniteAtomic",
    "MassQueryResult",
    "PiecewiseUniform1D",
    "PowerMargin1D",
    "ball_mass",
    "bayes_risk",
    "eta_ball",
    "eta_point",
    "in_support",
    "load_distribution",
    "prob_radius",
    "sample_labeled",
    "support_mass",
]

_BALL_KINDS = ("open", "closed", "augmented")


class AugmentedSample(NamedTuple):
    """One labeled training point: location, tie-break draw, label, index."""

    x: object
    z: float
    y: int
    index: int


@dataclass(frozen=True)
class MassQueryResult:
    """A measure-valued answer together with a rigorous error bound.

    Closed-form queries report ``error_bound == 0.0``.  Numeric enclosures
    (interval bisection, Monte Carlo) report the width of their guarantee.
    """

    value: float
    error_bound: float = 0.0


def _check_radius(r: float) -> None:
    if not (np.isfinite(r) and r >= 0.0):
        raise ValueError(f"radius must be finite and nonnegative, got {r}")


def _check_prob(p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability level must lie in [0, 1], got {p}")


class FiniteAtomic:
    """Point masses on the atoms of a finite metric space.

    Parameters
    ----------
    space : FiniteMetric
        The atom set and its distance matrix.
    masses : sequence of float
        Nonnegative atom probabilities summing to one (within 1e-12).
    etas : sequence of float
        Per-atom label frequencies in [0, 1].
    """

    def __init__(self, space: FiniteMetric, masses: Sequence[float], etas: Sequence[float]):
        if not isinstance(space, FiniteMetric):
            raise TypeError("FiniteAtomic requires a FiniteMetric space")
        m = np.asarray(masses, dtype=float)
        e = np.asarray(etas, dtype=float)
        if m.shape != (space.size,) or e.shape != (space.size,):
            raise ValueError("masses and etas must have one entry per atom")
        if np.any(m < 0.0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be nonnegative and finite")
        if abs(m.sum() - 1.0) > 1e-12:
            raise ValueError(f"masses must sum to 1, got {m.sum()!r}")
        if np.any((e < 0.0) | (e > 1.0)):
            raise ValueError("etas must lie in [0, 1]")
        self.space = space
        self.masses = m
        self.etas = e
        self._cum = np.cumsum(m)

    # -- sampling ---------------------------------------------------------

    def sample_arrays(self, seed: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rng = generator(seed)
        u = rng.random(n)
        xs = np.minimum(np.searchsorted(self._cum, u, side="right"), self.space.size - 1)
        zs = rng.random(n)
        ys = (rng.random(n) < self.etas[xs]).astype(np.int8)
        return xs.astype(np.intp), zs, ys

    def point_value(self, x: np.ndarray) -> object:
        return int(x)

    # -- measures ---------------------------------------------------------

    def ball_mass_value(self, x: int, r: float, kind: str) -> float:
        row = self.space.matrix[int(x)]
        mask = row < r if kind == "open" else row <= r
        return float(self.masses[mask].sum())

    def _eta_sum(self, x: int, r: float, kind: str) -> tuple[float, float]:
        row = self.space.matrix[int(x)]
        mask = row < r if kind == "open" else row <= r
        return float(self.masses[mask].sum()), float((self.masses[mask] * self.etas[mask]).sum())

    def prob_radius_value(self, x: int, p: float) -> float:
        if p <= 0.0:
            return 0.0
        row = self.space.matrix[int(x)]
        order = np.argsort(row, kind="stable")
        cum = 0.0
        last_d = None
        for i in order:
            d = row[i]
            if last_d is not None and d > last_d and cum >= p:
                return float(last_d)
            cum += self.masses[i]
            last_d = d
        if cum >= p:
            return float(last_d)
        return float(last_d)  # full support reached; p exceeds total only by rounding

    def eta_point_value(self, x: int) -> float:
        return float(self.etas[int(x)])

    def eta_values(self, xs: np.ndarray) -> np.ndarray:
        return self.etas[np.asarray(xs, dtype=np.intp)]

    def in_support_value(self, x: int) -> bool:
        return bool(self.masses[int(x)] > 0.0)

    def bayes_risk_value(self) -> float:
        return float((self.masses * np.minimum(self.etas, 1.0 - self.etas)).sum())

    def support_mass_value(self) -> float:
        return float(self.masses[self.masses > 0.0].sum())

    def margin_mass_value(self, t: float) -> float:
        mask = np.abs(self.etas - 0.5) <= t
        return float(self.masses[mask].sum())

    # -- radius structure for extremal scans ------------------------------

    def radius_breakpoints(self, x: int) -> np.ndarray:
        vals = np.unique(self.space.matrix[int(x)])
        return vals[vals > 0.0]

    def eta_closed(self, x: int, r: float) -> float:
        mass, s = self._eta_sum(x, r, "closed")
        if mass <= 0.0:
            raise ZeroMassError(f"closed ball of radius {r} at atom {x} has zero mass")
        return s / mass

    def eta_small_radius_limit(self, x: int) -> float:
        return self.eta_point_value(x)


class _Interval1D:
    """Shared plumbing for the two families supported on [0, 1]."""

    space: IntervalMetric

    def cdf(self, t: float) -> float:
        raise NotImplementedError

    def eta_prefix(self, t: float) -> float:
        """Integral of eta(s) * density(s) over [0, t]."""
        raise NotImplementedError

    def density_at(self, t: float) -> float:
        raise NotImplementedError

    def x_breakpoints(self) -> np.ndarray:
        """Locations where the density or eta formula changes."""
        raise NotImplementedError

    def _interval(self, x: float, r: float) -> tuple[float, float]:
        return max(0.0, x - r), min(1.0, x + r)

    def ball_mass_value(self, x: float, r: float, kind: str) -> float:
        lo, hi = self._interval(x, r)
        if hi <= lo:
            return 0.0
        return self.cdf(hi) - self.cdf(lo)

    def prob_radius_value(self, x: float, p: float) -> float:
        if p <= 0.0:
            return 0.0
        r_max = max(x - 0.0, 1.0 - x)
        crits = [0.0]
        for b in self.x_breakpoints():
            d = abs(x - float(b))
            if 0.0 < d < r_max:
                crits.append(d)
        crits.append(r_max)
        crits = sorted(set(crits))
        for r_a, r_b in zip(crits, crits[1:]):
            m_a = self.ball_mass_value(x, r_a, "closed")
            if m_a >= p:
                return r_a
            m_b = self.ball_mass_value(x, r_b, "closed")
            if m_b >= p:
                # mass is linear in r on this piece
                return r_a + (p - m_a) * (r_b - r_a) / (m_b - m_a)
        return r_max

    def eta_closed(self, x: float, r: float) -> float:
        lo, hi = self._interval(x, r)
        mass = self.cdf(hi) - self.cdf(lo) if hi > lo else 0.0
        if mass <= 0.0:
            raise ZeroMassError(f"ball of radius {r} at {x} has zero mass")
        return (self.eta_prefix(hi) - self.eta_prefix(lo)) / mass

    def radius_breakpoints(self, x: float) -> np.ndarray:
        ds = np.abs(np.asarray(self.x_breakpoints(), dtype=float) - x)
        ds = np.unique(ds)
        return ds[ds > 0.0]


class PiecewiseUniform1D(_Interval1D):
    """Two piecewise-constant class densities on [0, 1] mixed by priors.

    Parameters
    ----------
    priors : (float, float)
        Class prior probabilities (label 0, label 1); nonnegative, sum 1.
    class0, class1 : (breaks, densities)
        Each class density is given by its breakpoints (starting at 0.0,
        ending at 1.0, strictly increasing) and one density value per
        segment.  Each class density must integrate to 1 (within 1e-12).

    The constructor refines both break lists to a common grid.  On a
    segment with total density f > 0 the label frequency is the constant
    eta = prior1 * f1 / f; segments with f == 0 carry no mass and are
    excluded from the support.  At a point of zero density, eta is reported
    from the nearest positive-density segment (ties resolved to the left),
    and such points are flagged as outside the support.
    """

    def __init__(
        self,
        priors: Sequence[float],
        class0: tuple[Sequence[float], Sequence[float]],
        class1: tuple[Sequence[float], Sequence[float]],
    ):
        p0, p1 = float(priors[0]), float(priors[1])
        if p0 < 0.0 or p1 < 0.0 or abs(p0 + p1 - 1.0) > 1e-12:
            raise ValueError("priors must be nonnegative and sum to 1")
        b0, d0 = self._check_class(class0)
        b1, d1 = self._check_class(class1)
        breaks = np.unique(np.concatenate([b0, b1]))
        f0 = self._lookup(b0, d0, breaks)
        f1 = self._lookup(b1, d1, breaks)
        self.priors = (p0, p1)
        self.breaks = breaks
        self.widths = np.diff(breaks)
        self.f = p0 * f0 + p1 * f1           # total density per segment
        self.g = p1 * f1                     # eta * density per segment
        self._mass_prefix = np.concatenate([[0.0], np.cumsum(self.f * self.widths)])
        self._eta_mass_prefix = np.concatenate([[0.0], np.cumsum(self.g * self.widths)])
        with np.errstate(invalid="ignore", divide="ignore"):
            self.seg_eta = np.where(self.f > 0.0, self.g / np.where(self.f > 0.0, self.f, 1.0), np.nan)
        self._filled_eta = self._fill_gap_etas()
        self._bayes_one_prefix = self._restricted_prefix()
        self.space = IntervalMetric(0.0, 1.0)

    @staticmethod
    def _check_class(spec: tuple[Sequence[float], Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
        breaks = np.asarray(spec[0], dtype=float)
        dens = np.asarray(spec[1], dtype=float)
        if breaks.ndim != 1 or breaks.size < 2 or dens.shape != (breaks.size - 1,):
            raise ValueError("class density needs k+1 breakpoints and k segment densities")
        if breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0.0):
            raise ValueError("breakpoints must increase strictly from 0.0 to 1.0")
        if np.any(dens < 0.0) or not np.all(np.isfinite(dens)):
            raise ValueError("densities must be nonnegative and finite")
        total = float((dens * np.diff(breaks)).sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"class density must integrate to 1, got {total!r}")
        return breaks, dens

    @staticmethod
    def _lookup(breaks: np.ndarray, dens: np.ndarray, grid: np.ndarray) -> np.ndarray:
        mids = (grid[:-1] + grid[1:]) / 2.0
        idx = np.clip(np.searchsorted(breaks, mids, side="right") - 1, 0, dens.size - 1)
        return dens[idx]

    def _fill_gap_etas(self) -> np.ndarray:
        # per-segment eta with zero-density gaps filled from the nearer
        # positive neighbor (segment midpoints decide; exact per-point
        # reporting lives in eta_point_value)
        filled = self.seg_eta.copy()
        pos = np.where(self.f > 0.0)[0]
        for j in np.where(self.f == 0.0)[0]:
            left = pos[pos < j]
            right = pos[pos > j]
            mid = (self.breaks[j] + self.breaks[j + 1]) / 2.0
            dl = mid - self.breaks[left[-1] + 1] if left.size else math.inf
            dr = self.breaks[right[0]] - mid if right.size else math.inf
            src = left[-1] if dl <= dr else right[0]
            filled[j] = self.seg_eta[src]
        return filled

    def _restricted_prefix(self) -> np.ndarray:
        counted = (self.f > 0.0) & (self.seg_eta >= 0.5)
        inc = np.where(counted, self.f * self.widths, 0.0)
        return np.concatenate([[0.0], np.cumsum(inc)])

    # -- segment lookup ----------------------------------------------------

    def _seg(self, x: float) -> int:
        j = int(np.searchsorted(self.breaks, x, side="right")) - 1
        return min(max(j, 0), self.f.size - 1)

    def _segs(self, xs: np.ndarray) -> np.ndarray:
        j = np.searchsorted(self.breaks, xs, side="right") - 1
        return np.clip(j, 0, self.f.size - 1)

    # -- distribution interface --------------------------------------------

    def sample_arrays(self, seed: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rng = generator(seed)
        u = rng.random(n)
        j = np.minimum(np.searchsorted(self._mass_prefix, u, side="right"), self.f.size) - 1
        xs = self.breaks[j] + (u - self._mass_prefix[j]) / self.f[j]
        zs = rng.random(n)
        ys = (rng.random(n) < self._filled_eta[j]).astype(np.int8)
        return xs, zs, ys

    def point_value(self, x: np.ndarray) -> object:
        return float(x)

    def cdf(self, t: float) -> float:
        t = min(max(t, 0.0), 1.0)
        j = self._seg(t)
        return float(self._mass_prefix[j] + self.f[j] * (t - self.breaks[j]))

    def eta_prefix(self, t: float) -> float:
        t = min(max(t, 0.0), 1.0)
        j = self._seg(t)
        return float(self._eta_mass_prefix[j] + self.g[j] * (t - self.breaks[j]))

    def bayes_one_cdf(self, t: float) -> float:
        t = min(max(t, 0.0), 1.0)
        j = self._seg(t)
        base = self._bayes_one_prefix[j]
        if self.f[j] > 0.0 and self.seg_eta[j] >= 0.5:
            base = base + self.f[j] * (t - self.breaks[j])
        return float(base)

    def bayes_one_cdf_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.clip(ts, 0.0, 1.0)
        j = self._segs(ts)
        counted = (self.f[j] > 0.0) & (np.nan_to_num(self.seg_eta[j], nan=0.0) >= 0.5)
        return self._bayes_one_prefix[j] + np.where(counted, self.f[j] * (ts - self.breaks[j]), 0.0)

    def cdf_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.clip(ts, 0.0, 1.0)
        j = self._segs(ts)
        return self._mass_prefix[j] + self.f[j] * (ts - self.breaks[j])

    def eta_prefix_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.clip(ts, 0.0, 1.0)
        j = self._segs(ts)
        return self._eta_mass_prefix[j] + self.g[j] * (ts - self.breaks[j])

    def density_at(self, t: float) -> float:
        if t < 0.0 or t > 1.0:
            return 0.0
        return float(self.f[self._seg(t)])

    def x_breakpoints(self) -> np.ndarray:
        return self.breaks

    def eta_point_value(self, x: float) -> float:
        j = self._seg(x)
        if self.f[j] > 0.0:
            return float(self.seg_eta[j])
        # zero-density point: report the nearest positive segment, left on ties
        pos = np.where(self.f > 0.0)[0]
        best = None
        best_d = math.inf
        for i in pos:
            lo, hi = self.breaks[i], self.breaks[i + 1]
            d = max(lo - x, x - hi, 0.0)
            if d < best_d:
                best_d, best = d, i
        if best is None:
            raise ZeroMassError("distribution has no positive-density segment")
        return float(self.seg_eta[best])

    def eta_values(self, xs: np.ndarray) -> np.ndarray:
        return self._filled_eta[self._segs(xs)]

    def in_support_value(self, x: float) -> bool:
        j = self._seg(x)
        if self.f[j] > 0.0:
            return True
        # a gap's left edge touches the previous segment
        return x == self.breaks[j] and j >= 1 and self.f[j - 1] > 0.0

    def bayes_risk_value(self) -> float:
        risk = np.minimum(self.g, self.f - self.g) * self.widths
        return float(risk[self.f > 0.0].sum())

    def support_mass_value(self) -> float:
        return float((self.f * self.widths)[self.f > 0.0].sum())

    def margin_mass_value(self, t: float) -> float:
        mask = (self.f > 0.0) & (np.abs(np.nan_to_num(self.seg_eta, nan=2.0) - 0.5) <= t)
        return float((self.f * self.widths)[mask].sum())

    def eta_small_radius_limit(self, x: float) -> float:
        jr = self._seg(x)
        f_r = self.f[jr] if x < 1.0 else 0.0
        g_r = self.g[jr] if x < 1.0 else 0.0
        if x > 0.0:
            jl = jr - 1 if (x == self.breaks[jr] and jr >= 1) else jr
            if x == 1.0:
                jl = self.f.size - 1
            f_l, g_l = self.f[jl], self.g[jl]
        else:
            f_l = g_l = 0.0
        denom = f_l + f_r
        if denom <= 0.0:
            raise ZeroMassError(f"no mass adjacent to {x}")
        return float((g_l + g_r) / denom)


class PowerMargin1D(_Interval1D):
    """Uniform marginal on [0, 1] with a polynomial exit from eta = 1/2.

    eta(x) = 1/2 + (1/2) * sign(2x - 1) * |2x - 1|**gamma for gamma > 0.
    Small gamma snaps eta away from 1/2 quickly (easy problems); large
    gamma keeps a wide ambiguous band around x = 1/2.
    """

    def __init__(self, gamma: float):
        if not (np.isfinite(gamma) and gamma > 0.0):
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.gamma = float(gamma)
        self.space = IntervalMetric(0.0, 1.0)

    def sample_arrays(self, seed: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rng = generator(seed)
        xs = rng.random(n)
        zs = rng.random(n)
        ys = (rng.random(n) < self.eta_values(xs)).astype(np.int8)
        return xs, zs, ys

    def point_value(self, x: np.ndarray) -> object:
        return float(x)

    def cdf(self, t: float) -> float:
        return min(max(t, 0.0), 1.0)

    def cdf_array(self, ts: np.ndarray) -> np.ndarray:
        return np.clip(ts, 0.0, 1.0)

    def _odd_antideriv(self, t: float) -> float:
        # antiderivative of sign(2s - 1) * |2s - 1|**gamma
        return abs(2.0 * t - 1.0) ** (self.gamma + 1.0) / (2.0 * (self.gamma + 1.0))

    def eta_prefix(self, t: float) -> float:
        t = min(max(t, 0.0), 1.0)
        return 0.5 * t + 0.5 * (self._odd_antideriv(t) - self._odd_antideriv(0.0))

    def eta_prefix_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.clip(ts, 0.0, 1.0)
        odd = np.abs(2.0 * ts - 1.0) ** (self.gamma + 1.0) / (2.0 * (self.gamma + 1.0))
        return 0.5 * ts + 0.5 * (odd - self._odd_antideriv(0.0))

    def bayes_one_cdf(self, t: float) -> float:
        return max(0.0, min(t, 1.0) - 0.5)

    def bayes_one_cdf_array(self, ts: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.clip(ts, 0.0, 1.0) - 0.5)

    def density_at(self, t: float) -> float:
        return 1.0 if 0.0 <= t <= 1.0 else 0.0

    def x_breakpoints(self) -> np.ndarray:
        return np.array([0.0, 0.5, 1.0])

    def eta_point_value(self, x: float) -> float:
        s = 2.0 * x - 1.0
        return 0.5 + 0.5 * math.copysign(abs(s) ** self.gamma, s) if s != 0.0 else 0.5

    def eta_values(self, xs: np.ndarray) -> np.ndarray:
        s = 2.0 * np.asarray(xs, dtype=float) - 1.0
        return 0.5 + 0.5 * np.sign(s) * np.abs(s) ** self.gamma

    def in_support_value(self, x: float) -> bool:
        return True

    def bayes_risk_value(self) -> float:
        return 0.5 - 0.5 / (self.gamma + 1.0)

    def support_mass_value(self) -> float:
        return 1.0

    def margin_mass_value(self, t: float) -> float:
        if t >= 0.5:
            return 1.0
        return min(1.0, (2.0 * t) ** (1.0 / self.gamma))

    def eta_small_radius_limit(self, x: float) -> float:
        return self.eta_point_value(x)


Distribution = FiniteAtomic | PiecewiseUniform1D | PowerMargin1D


# -- public query layer ------------------------------------------------------


def sample_labeled(dist: Distribution, seed: int, n: int) -> list[AugmentedSample]:
    """Draw n labeled augmented samples; the seed fixes the output exactly."""
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    xs, zs, ys = dist.sample_arrays(seed, n)
    return [
        AugmentedSample(dist.point_value(xs[i]), float(zs[i]), int(ys[i]), i)
        for i in range(n)
    ]


def ball_mass(dist: Distribution, x, r: float, kind: str = "closed") -> MassQueryResult:
    """Exact mass of the open or closed ball around a domain point."""
    if kind not in ("open", "closed"):
        raise ValueError(f"kind must be 'open' or 'closed', got {kind!r}")
    dist.space.check_point(x)
    _check_radius(r)
    return MassQueryResult(dist.ball_mass_value(x, r, kind), 0.0)


def prob_radius(dist: Distribution, x, p: float) -> float:
    """Smallest radius whose closed ball reaches mass p (infimum convention)."""
    dist.space.check_point(x)
    _check_prob(p)
    return float(dist.prob_radius_value(x, p))


def eta_point(dist: Distribution, x) -> float:
    """Pointwise label frequency; off-support points report the nearest value."""
    dist.space.check_point(x)
    return float(dist.eta_point_value(x))


def eta_ball(
    dist: Distribution, x, r: float, kind: str = "closed", z_cut: float | None = None
) -> MassQueryResult:
    """Average label frequency over an open, closed, or augmented ball.

    ``kind='augmented'`` requires ``z_cut`` in [0, 1] and mixes the open and
    closed ball averages through the sphere cutoff.  A query over zero mass
    raises :class:`ZeroMassError`.
    """
    if kind not in _BALL_KINDS:
        raise ValueError(f"kind must be one of {_BALL_KINDS}, got {kind!r}")
    dist.space.check_point(x)
    _check_radius(r)
    if kind == "augmented":
        if z_cut is None or not 0.0 <= z_cut <= 1.0:
            raise ValueError("augmented queries need z_cut in [0, 1]")
    elif z_cut is not None:
        raise ValueError("z_cut only applies to augmented queries")

    if isinstance(dist, FiniteAtomic):
        m_closed, s_closed = dist._eta_sum(x, r, "closed")
        m_open, s_open = dist._eta_sum(x, r, "open")
    else:
        lo, hi = dist._interval(x, r)
        m_closed = dist.cdf(hi) - dist.cdf(lo) if hi > lo else 0.0
        s_closed = dist.eta_prefix(hi) - dist.eta_prefix(lo) if hi > lo else 0.0
        m_open, s_open = m_closed, s_closed  # no atoms: spheres carry no mass

    if kind == "closed":
        mass, total = m_closed, s_closed
    elif kind == "open":
        mass, total = m_open, s_open
    else:
        mass = z_cut * m_closed + (1.0 - z_cut) * m_open
        total = z_cut * s_closed + (1.0 - z_cut) * s_open
    if mass <= 0.0:
        raise ZeroMassError(f"{kind} ball of radius {r} at {x} has zero mass")
    return MassQueryResult(total / mass, 0.0)


def in_support(dist: Distribution, x) -> bool:
    """True when every ball around x, however small, has positive mass."""
    dist.space.check_point(x)
    return bool(dist.in_support_value(x))


def bayes_risk(dist: Distribution) -> float:
    """Exact integral of min(eta, 1 - eta) against the marginal."""
    return float(dist.bayes_risk_value())


def support_mass(dist: Distribution) -> float:
    """Mass of the support; exactly 1 for every valid instance."""
    return float(dist.support_mass_value())


def load_distribution(config: dict, base_dir: str = ".") -> Distribution:
    """Build a distribution from its configuration dictionary.

    The ``family`` tag picks the class; remaining keys are family-specific.
    FiniteAtomic instances reference their metric through ``metric_file``
    (resolved against ``base_dir``).
    """
    import os

    if not isinstance(config, dict) or "family" not in config:
        raise ValueError("distribution config must be a dict with a 'family' tag")
    family = config["family"]
    try:
        if family == "finite_atomic":
            path = config["metric_file"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            space = load_finite_metric(path)
            return FiniteAtomic(space, config["masses"], config["etas"])
        if family == "piecewise_uniform_1d":
            return PiecewiseUniform1D(
                config["priors"],
                (config["class0"]["breaks"], config["class0"]["densities"]),
                (config["class1"]["breaks"], config["class1"]["densities"]),
            )
        if family == "power_margin_1d":
            return PowerMargin1D(config["gamma"])
    except KeyError as exc:
        raise ValueError(f"distribution config missing field {exc}") from exc
    raise UnsupportedMethodError(f"unknown distribution family {family!r}")
