"""Monte Carlo simulation of outage sample paths.

Failure times are drawn by thinning a dominating homogeneous process (the
dominating constant is the peak knot intensity; the homogeneous candidates
are generated through the order-statistics representation, which is
distributionally equivalent and fully vectorized).  Durations come from the
duration model by exact Weibull inverse-cdf sampling.  Every replica gets
its own generator derived from the root seed and the replica index, so
results do not depend on thread count or completion order.
"""

from dataclasses import dataclass

import numpy as np

from .parallel import max_threads, run_indexed
from .rates import RateFunction
from .weibull import DurationModel

__all__ = [
    "OutageEvent",
    "SamplePath",
    "MonteCarloRates",
    "replica_rng",
    "max_threads",
    "sample_nhpp",
    "sample_durations",
    "simulate_events",
    "build_path",
    "monte_carlo_recovery_rate",
    "mean_paths",
]


@dataclass(frozen=True)
class OutageEvent:
    """One outage: failure time and restoration duration, both in hours."""

    time: float
    duration: float

    @property
    def recovery_time(self) -> float:
        return self.time + self.duration


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Generator for one replica, split off the root seed by index."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(replica,))
    return np.random.default_rng(ss)


def sample_nhpp(rate: RateFunction, rng: np.random.Generator) -> np.ndarray:
    """Failure times on [0, horizon] by thinning; strictly increasing."""
    peak = rate.peak
    if peak == 0.0:
        return np.empty(0)
    n_cand = rng.poisson(peak * rate.horizon)
    if n_cand == 0:
        return np.empty(0)
    times = np.sort(rng.random(n_cand)) * rate.horizon
    keep = rng.random(n_cand) * peak < rate.value(times)
    out = times[keep]
    if len(out) > 1:
        # float ties are measure-zero but would break the strictly
        # increasing contract, so drop exact duplicates
        out = out[np.concatenate(([True], np.diff(out) > 0.0))]
    return out


def sample_durations(
    times, model: DurationModel, rng: np.random.Generator
) -> np.ndarray:
    """One duration per failure time, from that time's interval mixture.

    Uniform draws are taken in event order before any grouping, so the
    result is independent of how events split across intervals.
    """
    t = np.asarray(times, dtype=float)
    n = len(t)
    if n == 0:
        return np.empty(0)
    u_comp = rng.random(n)
    u_dur = rng.random(n)
    idx = model.interval_index(t)
    out = np.empty(n)
    for i in np.unique(idx):
        m = idx == i
        mix = model.mixtures[i]
        edges = np.cumsum(mix.weights)
        comp = np.searchsorted(edges, u_comp[m], side="right")
        comp = np.clip(comp, 0, mix.n_components - 1)
        out[m] = mix.scales[comp] * (-np.log1p(-u_dur[m])) ** (1.0 / mix.shapes[comp])
    return out


def simulate_events(
    rate: RateFunction,
    model: DurationModel,
    seed: int,
    replica: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """(failure_times, durations) for one replica."""
    rng = replica_rng(seed, replica)
    times = sample_nhpp(rate, rng)
    durations = sample_durations(times, model, rng)
    return times, durations


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Counting processes of one replica.

    n_failed / n_recovered / n_out are right-continuous step functions; a
    jump at exactly t is included in the value at t.  n_out is the exact
    integer difference of the other two at every point.
    """

    failure_times: np.ndarray
    recovery_times: np.ndarray

    def __post_init__(self):
        f = np.sort(np.asarray(self.failure_times, dtype=float))
        r = np.sort(np.asarray(self.recovery_times, dtype=float))
        if len(f) != len(r):
            raise ValueError("every failure needs a recovery time")
        object.__setattr__(self, "failure_times", f)
        object.__setattr__(self, "recovery_times", r)

    def n_failed(self, t):
        return np.searchsorted(self.failure_times, np.asarray(t, dtype=float), side="right")

    def n_recovered(self, t):
        return np.searchsorted(self.recovery_times, np.asarray(t, dtype=float), side="right")

    def n_out(self, t):
        return self.n_failed(t) - self.n_recovered(t)

    @property
    def jump_times(self) -> np.ndarray:
        return np.sort(np.concatenate([self.failure_times, self.recovery_times]))


def build_path(times, durations) -> SamplePath:
    t = np.asarray(times, dtype=float)
    d = np.asarray(durations, dtype=float)
    if t.shape != d.shape:
        raise ValueError("times and durations must have matching lengths")
    if np.any(d < 0.0):
        raise ValueError("durations must be >= 0")
    return SamplePath(failure_times=t, recovery_times=t + d)


@dataclass(frozen=True, eq=False)
class MonteCarloRates:
    """Binned recovery-rate estimates across replicas."""

    edges: np.ndarray
    mean_rate: np.ndarray
    se_rate: np.ndarray
    replicas: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def monte_carlo_recovery_rate(
    rate: RateFunction,
    model: DurationModel,
    edges,
    replicas: int,
    seed: int,
    threads: int | None = None,
) -> MonteCarloRates:
    """Empirical recovery intensity, binned on `edges`, across replicas.

    At least 100 replicas are required for the standard errors to mean
    anything.  Aggregation runs in replica-index order regardless of the
    thread count, so output is reproducible bit for bit.
    """
    edges = np.asarray(edges, dtype=float)
    if len(edges) < 2 or np.any(np.diff(edges) <= 0.0):
        raise ValueError("edges must be increasing with at least one bin")
    if replicas < 100:
        raise ValueError("need at least 100 replicas")
    threads = max_threads() if threads is None else threads

    def one(i: int) -> np.ndarray:
        times, durations = simulate_events(rate, model, seed, i)
        counts, _ = np.histogram(times + durations, bins=edges)
        return counts.astype(float)

    rows = run_indexed(replicas, one, threads)
    counts = np.vstack(rows)
    widths = np.diff(edges)
    mean = counts.mean(axis=0) / widths
    se = counts.std(axis=0, ddof=1) / np.sqrt(replicas) / widths
    return MonteCarloRates(edges=edges, mean_rate=mean, se_rate=se, replicas=replicas)


def mean_paths(
    rate: RateFunction,
    model: DurationModel,
    grid,
    replicas: int,
    seed: int,
    threads: int | None = None,
) -> dict[str, np.ndarray]:
    """Mean and standard error of N_f, N_r, N over replicas at grid times."""
    grid = np.asarray(grid, dtype=float)
    if replicas < 1:
        raise ValueError("need at least one replica")
    threads = max_threads() if threads is None else threads

    def one(i: int) -> np.ndarray:
        times, durations = simulate_events(rate, model, seed, i)
        path = build_path(times, durations)
        return np.vstack([path.n_failed(grid), path.n_recovered(grid)]).astype(float)

    rows = run_indexed(replicas, one, threads)
    stack = np.stack(rows)  # (replicas, 2, grid)
    nf, nr = stack[:, 0, :], stack[:, 1, :]
    n = nf - nr
    denom = np.sqrt(replicas)
    ddof = 1 if replicas > 1 else 0

    def se(a):
        return a.std(axis=0, ddof=ddof) / denom

    return {
        "grid": grid,
        "nf_mean": nf.mean(axis=0), "nf_se": se(nf),
        "nr_mean": nr.mean(axis=0), "nr_se": se(nr),
        "n_mean": n.mean(axis=0), "n_se": se(n),
    }
