"""Spin-basis OTOC boundary conditions, evolution driver, and rate fits.

The correlator reduces to a weighted amplitude of the averaged Markov
process: start from the product top state (one ``-`` at the V site, ``+``
elsewhere, the constant all-``+`` piece of the dual state dropped), evolve
under the two-site transition matrix, and contract with a product bottom bra
that pins ``+`` at the W site and rewards each ``-`` by a factor q.  The two
sink states are removed and the state renormalized at every time unit, so
the recorded series is directly |OTOC(t) - OTOC(inf)| up to constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import DenseState, TensorTrainState
from .errors import InvalidParameterError, TruncationCeilingError
from .gates import GateParams, param_transition
from .schedule import LayerSchedule, build_schedule
from .series import (
    STATUS_COMPLETED,
    STATUS_SIGNAL_FLOOR,
    STATUS_TRUNCATION_FLOOR,
    SIGNAL_FLOOR_LOG,
    RelaxationSeries,
    SignedLog,
    fit_two_stage,  # noqa: F401  (re-exported: fits live next to the runs)
)

DEFAULT_TRUNC_CEILING = 1e-6


@dataclass(frozen=True)
class OtocConfig:
    """Everything needed to reproduce one spin-basis OTOC run."""

    params: GateParams
    geometry: str = "bw"
    bc: str = "obc"
    L: int = 20
    T: int = 60
    x_v: int = 0
    x_w: int = 4
    chi: int = engine.DEFAULT_CHI
    cutoff: float = engine.DEFAULT_CUTOFF
    trunc_ceiling: float = DEFAULT_TRUNC_CEILING
    dense: bool = False

    def __post_init__(self):
        if not (0 <= self.x_v < self.L and 0 <= self.x_w < self.L):
            raise InvalidParameterError(
                f"operator sites must lie in [0, L), got x_v={self.x_v}, x_w={self.x_w}"
            )
        if self.x_v == self.x_w:
            raise InvalidParameterError("x_v and x_w must differ")

    def schedule(self) -> LayerSchedule:
        return build_schedule(self.geometry, self.bc, self.L, self.T)


def spin_sinks(L: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The two Markov fixed points: all-+ and all-- product states."""
    return (tuple([0] * L), tuple([1] * L))


def top_state(L: int, x_v: int, chi: int = engine.DEFAULT_CHI,
              cutoff: float = engine.DEFAULT_CUTOFF, dense: bool = False):
    """Product state with ``-`` at the V site and ``+`` elsewhere."""
    if not 0 <= x_v < L:
        raise InvalidParameterError(f"x_v={x_v} out of range for L={L}")
    bits = [0] * L
    bits[x_v] = 1
    cls = DenseState if dense else TensorTrainState
    return cls.from_product(bits, chi_max=chi, cutoff=cutoff, sinks=spin_sinks(L))


def bottom_vectors(L: int, x_w: int, q: int) -> list[np.ndarray]:
    """Per-site bra factors: (1, 0) pins + at the W site, (1, q) elsewhere."""
    w = [np.array([1.0, float(q)])] * L
    w[x_w] = np.array([1.0, 0.0])
    return w


def bottom_overlap(state, L: int, x_w: int, q: int) -> SignedLog:
    """Signed log of the weighted sum sum_z C_z q^{n_-} over z with + at x_w."""
    raw = state.overlap_product(bottom_vectors(L, x_w, q))
    return SignedLog.from_value(raw, log_shift=state.log_norm)


def run_weighted_series(state, schedule: LayerSchedule, matrix, bottom,
                        trunc_ceiling: float = DEFAULT_TRUNC_CEILING,
                        meta: dict | None = None) -> RelaxationSeries:
    """Evolve, subtract sinks, renormalize, and record the bottom overlap.

    Shared by the spin and cluster pipelines; ``bottom`` is the list of
    per-site bra factors.  Stops early (with a status) when the tracked
    log-value falls below the representable floor or under the accumulated
    truncation noise; raises TruncationCeilingError past the hard ceiling.
    """
    kernel = matrix.site_kernel()
    times = [0.0]
    state.subtract_components()
    state.renormalize()
    first = SignedLog.from_value(state.overlap_product(bottom), state.log_norm)
    logs = [first.log_abs]
    signs = [first.sign]
    errs = [state.trunc_err]
    status = STATUS_COMPLETED
    for t, bonds in schedule.unit_steps():
        for (i, j) in bonds:
            state.apply_bond(i, j, kernel)
        state.subtract_components()
        state.renormalize()
        if state.trunc_err > trunc_ceiling:
            raise TruncationCeilingError(t, state.trunc_err, trunc_ceiling)
        val = SignedLog.from_value(state.overlap_product(bottom), state.log_norm)
        times.append(float(t))
        logs.append(val.log_abs)
        signs.append(val.sign)
        errs.append(state.trunc_err)
        if val.log_abs < SIGNAL_FLOOR_LOG:
            status = STATUS_SIGNAL_FLOOR
            break
        if state.trunc_err > 0 and val.log_abs - state.log_norm < math.log(state.trunc_err):
            status = STATUS_TRUNCATION_FLOOR
            break
    return RelaxationSeries(
        t=np.array(times), log_abs=np.array(logs), sign=np.array(signs),
        trunc_err=np.array(errs), status=status, meta=dict(meta or {}),
    )


def run_otoc(config: OtocConfig) -> RelaxationSeries:
    """Sink-subtracted OTOC relaxation series for one configuration."""
    matrix = param_transition(config.params)
    state = top_state(config.L, config.x_v, chi=config.chi, cutoff=config.cutoff,
                      dense=config.dense)
    meta = {
        "kind": "spin-otoc",
        "geometry": config.geometry,
        "bc": config.bc,
        "L": config.L,
        "T": config.T,
        "x_v": config.x_v,
        "x_w": config.x_w,
        "a_x": config.params.a_x,
        "a_y": config.params.a_y,
        "a_z": config.params.a_z,
        "q": config.params.q,
        "chi": config.chi,
        "cutoff": config.cutoff,
    }
    return run_weighted_series(
        state, config.schedule(), matrix,
        bottom_vectors(config.L, config.x_w, config.params.q),
        trunc_ceiling=config.trunc_ceiling, meta=meta,
    )
