"""Relaxation time series and piecewise log-linear rate extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitWindowError

LN2 = math.log(2.0)
SIGNAL_FLOOR_LOG = math.log(1e-300)

STATUS_COMPLETED = "completed"
STATUS_SIGNAL_FLOOR = "signal_floor"
STATUS_TRUNCATION_FLOOR = "truncation_floor"


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as sign and natural log of its magnitude."""

    sign: int
    log_abs: float

    @classmethod
    def from_value(cls, value: float, log_shift: float = 0.0) -> "SignedLog":
        if value == 0.0:
            return cls(0, -math.inf)
        return cls(1 if value > 0 else -1, math.log(abs(value)) + log_shift)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)


@dataclass
class RelaxationSeries:
    """|quantity(t) - quantity(inf)| in log form, with signs and diagnostics."""

    t: np.ndarray
    log_abs: np.ndarray  # natural log of the magnitude
    sign: np.ndarray
    trunc_err: np.ndarray
    status: str = STATUS_COMPLETED
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.log_abs = np.asarray(self.log_abs, dtype=float)
        self.sign = np.asarray(self.sign, dtype=int)
        self.trunc_err = np.asarray(self.trunc_err, dtype=float)
        if not np.all(np.diff(self.t) > 0):
            raise ValueError("series times must be strictly increasing")

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class TwoStageFit:
    """Fitted early/late decay rates in units of ln 2 per time unit."""

    r1: float
    r2: float
    window1: tuple[float, float]
    window2: tuple[float, float]
    residual1: float
    residual2: float
    breakpoint: float


def _window_fit(series: RelaxationSeries, lo: float, hi: float, label: str,
                min_points: int):
    mask = (series.t > lo) & (series.t <= hi) & np.isfinite(series.log_abs)
    n = int(np.sum(mask))
    if n < min_points:
        needed = math.ceil(lo + min_points)
        raise FitWindowError(
            f"{label} window ({lo:g}, {hi:g}] holds {n} points, needs "
            f">= {min_points}; run to at least T ~ {needed}"
        )
    t = series.t[mask]
    y = series.log_abs[mask]
    coeffs, residuals, *_ = np.polyfit(t, y, 1, full=True)
    slope = coeffs[0]
    rms = float(np.sqrt(residuals[0] / n)) if len(residuals) else 0.0
    return -slope / LN2, rms


def fit_two_stage(series: RelaxationSeries, L: int, bc: str, x_w: int | None = None,
                  margin: float = 3.0, c: float | None = None,
                  min_points: int = 10) -> TwoStageFit:
    """Least-squares rates on the two stages of a relaxation series.

    The first window runs from just past the probe site to the breakpoint
    c*L (c = 2 open, 1 periodic); the second from just past the breakpoint
    to the end of the series.  ``margin`` skips the breakpoint discontinuity.
    """
    bc = bc.lower()
    if c is None:
        c = 2.0 if bc == "obc" else 1.0
    if x_w is None:
        x_w = int(series.meta.get("x_w", 4))
    t_break = c * L
    t_end = float(series.t[np.isfinite(series.log_abs)].max())
    w1 = (x_w + margin, t_break)
    w2 = (t_break + margin, t_end)
    r1, res1 = _window_fit(series, w1[0], w1[1], "first-stage", min_points)
    r2, res2 = _window_fit(series, w2[0], w2[1], "second-stage", min_points)
    return TwoStageFit(
        r1=r1, r2=r2, window1=w1, window2=w2,
        residual1=res1, residual2=res2, breakpoint=t_break,
    )
