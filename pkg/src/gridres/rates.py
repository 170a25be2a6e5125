"""Piecewise-linear intensity functions on a finite horizon.

An intensity is defined by knots (time, events/hour) joined linearly,
with constant extrapolation from the first knot back to t=0 and from the
last knot out to the horizon.  All times are hours since the study origin.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RateFunction", "failure_time_pdf"]


@dataclass(frozen=True, eq=False)
class RateFunction:
    """Nonnegative piecewise-linear intensity on [0, horizon].

    Parameters
    ----------
    knots : tuple of (time, intensity) pairs
        Times strictly increasing, intensities >= 0.
    horizon : float
        End of the definition domain, >= the last knot time.
    """

    knots: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self):
        if len(self.knots) == 0:
            raise ValueError("at least one knot is required")
        t = np.asarray([k[0] for k in self.knots], dtype=float)
        v = np.asarray([k[1] for k in self.knots], dtype=float)
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
            raise ValueError("knots must be finite")
        if np.any(t < 0.0):
            raise ValueError("knot times must be >= 0")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("knot times must be strictly increasing")
        if np.any(v < 0.0):
            raise ValueError("intensities must be >= 0")
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon <= 0.0:
            raise ValueError("horizon must be positive and finite")
        if horizon < t[-1]:
            raise ValueError("horizon must cover the last knot")
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_v", v)
        # breakpoints with 0 and horizon folded in; cumulative integral is
        # exact there because the function is linear between breakpoints
        bt = np.concatenate(([0.0], t, [horizon]))
        bt = np.unique(bt)
        bv = np.interp(bt, t, v)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (bv[1:] + bv[:-1]) * np.diff(bt))))
        object.__setattr__(self, "_bt", bt)
        object.__setattr__(self, "_bv", bv)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def constant(cls, level: float, horizon: float) -> "RateFunction":
        return cls(knots=((0.0, float(level)),), horizon=horizon)

    def _check_domain(self, t: np.ndarray) -> None:
        if np.any(t < -1e-12) or np.any(t > self.horizon + 1e-9):
            raise ValueError(f"time outside [0, {self.horizon}]")

    def value(self, t):
        """Intensity at time(s) t, constant-extrapolated at both ends."""
        arr = np.asarray(t, dtype=float)
        self._check_domain(arr)
        out = np.interp(arr, self._t, self._v)
        return float(out) if np.isscalar(t) else out

    def cumulative(self, t):
        """Exact integral of the intensity from 0 to t."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        self._check_domain(arr)
        clipped = np.clip(arr, 0.0, self.horizon)
        idx = np.clip(np.searchsorted(self._bt, clipped, side="right") - 1, 0, len(self._bt) - 2)
        left = self._bt[idx]
        seg = (clipped - left) * 0.5 * (self._bv[idx] + np.interp(clipped, self._t, self._v))
        out = self._cum[idx] + seg
        return float(out[0]) if np.isscalar(t) else out

    def integral(self, a: float, b: float) -> float:
        """Exact integral of the intensity over [a, b]."""
        if b < a:
            raise ValueError("integration bounds out of order")
        return float(self.cumulative(b) - self.cumulative(a))

    @property
    def total(self) -> float:
        """Integral over the whole [0, horizon] domain."""
        return float(self._cum[-1])

    @property
    def peak(self) -> float:
        """Upper bound of the intensity; attained at a knot."""
        return float(self._v.max())

    def scaled(self, factor: float) -> "RateFunction":
        if factor < 0.0:
            raise ValueError("scale factor must be >= 0")
        return RateFunction(
            knots=tuple((float(t), float(v * factor)) for t, v in zip(self._t, self._v)),
            horizon=self.horizon,
        )


def failure_time_pdf(rate: RateFunction) -> RateFunction:
    """Normalize an intensity into the failure-time density on [0, horizon].

    The density of a single failure time is the intensity divided by its
    integral over the horizon.  Raises on a degenerate (identically zero)
    intensity.
    """
    total = rate.total
    if total <= 0.0:
        raise ValueError("degenerate intensity: integral over the horizon is zero")
    return rate.scaled(1.0 / total)
