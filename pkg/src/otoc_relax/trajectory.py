"""Dominant states, dominant trajectories, and magnetization heatmaps.

The configuration contributing most to the weighted partition sum is found
by evolving the top state with the minus-count-tracking modified matrix and
maximizing the bookkeeping amplitude over configurations carrying ``+`` at
the probe site.  Heatmaps contract a forward-evolved ket (checkpointed every
time unit) against a backward-evolved bra, with a single-site polarization
operator inserted, normalized so that inserting the identity gives exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import DenseState, TensorTrainState
from .errors import DegenerateNormalizationError, InvalidParameterError
from .gates import modified_transition, param_transition
from .otoc import OtocConfig, spin_sinks, top_state
from .series import SignedLog

EXACT_ARGMAX_MAX_SITES = 14
SIGMA_Z = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class DominantState:
    """Configuration maximizing the weighted contribution, with its score."""

    bits: tuple[int, ...]  # 0 = '+', 1 = '-'
    score: SignedLog
    exact: bool

    @property
    def symbols(self) -> str:
        return "".join("-" if b else "+" for b in self.bits)


@dataclass
class MagnetizationGrid:
    """Polarization values on the (site, intermediate time) plane."""

    values: np.ndarray  # (L, t+1)
    taus: np.ndarray
    meta: dict = field(default_factory=dict)
    dominant: DominantState | None = None


def _evolve_with_checkpoints(state, unit_groups, kernel, subtract=True):
    """Apply bond groups unit by unit; return state copies per integer time."""
    checkpoints = [state.copy()]
    for bonds in unit_groups:
        for (i, j) in bonds:
            state.apply_bond(i, j, kernel)
        if subtract:
            state.subtract_components()
        state.renormalize()
        checkpoints.append(state.copy())
    return checkpoints


def _unit_groups(config: OtocConfig, t: int):
    groups = [bonds for _, bonds in config.schedule().unit_steps()]
    if len(groups) < t:
        raise InvalidParameterError(f"config covers {len(groups)} units, need t={t}")
    return groups[:t]


def dominant_state(config: OtocConfig, t: int) -> DominantState:
    """Most contributing configuration at time t under modified dynamics.

    Exact 2^L argmax for L <= 14; otherwise a greedy conditional sweep
    (three passes, probe site pinned to ``+``) labeled approximate.
    """
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    matrix = modified_transition(config.params)
    kernel = matrix.site_kernel()
    exact = config.L <= EXACT_ARGMAX_MAX_SITES
    state = top_state(config.L, config.x_v, chi=config.chi, cutoff=config.cutoff,
                      dense=exact)
    for bonds in _unit_groups(config, t):
        for (i, j) in bonds:
            state.apply_bond(i, j, kernel)
        state.subtract_components()
        state.renormalize()

    if exact:
        weights = state.to_dense().reshape([2] * config.L)
        plus_slice = np.take(weights, 0, axis=config.x_w)
        flat = int(np.argmax(np.abs(plus_slice.reshape(-1))))
        rest = [(flat >> (config.L - 2 - k)) & 1 for k in range(config.L - 1)]
        bits = rest[: config.x_w] + [0] + rest[config.x_w:]
        amp = float(plus_slice.reshape(-1)[flat])
        return DominantState(tuple(bits), SignedLog.from_value(amp, state.log_norm), True)

    bits = [1] * config.L
    bits[config.x_w] = 0
    for _ in range(3):
        for s in range(config.L):
            if s == config.x_w:
                continue
            trial = list(bits)
            trial[s] = 0
            a0 = abs(state.amplitude(trial))
            trial[s] = 1
            a1 = abs(state.amplitude(trial))
            bits[s] = 0 if a0 >= a1 else 1
    amp = state.amplitude(bits)
    return DominantState(tuple(bits), SignedLog.from_value(amp, state.log_norm), False)


def forward_backward_grid(schedule_groups, kernel, forward_state, backward_state,
                          site_operator=None) -> np.ndarray:
    """Grid of single-site insertions between forward and backward sweeps.

    ``backward_state`` encodes the bottom bra in bookkeeping coordinates; it
    is evolved with the transposed kernel through the reversed gate sequence.
    Values are normalized by the full boundary-to-boundary contraction, so an
    identity insertion returns 1 everywhere (up to truncation noise).
    """
    if site_operator is None:
        site_operator = SIGMA_Z
    L = forward_state.L
    t = len(schedule_groups)
    fwd = _evolve_with_checkpoints(forward_state, schedule_groups, kernel,
                                   subtract=True)
    reversed_groups = [tuple(reversed(g)) for g in reversed(schedule_groups)]
    bwd = _evolve_with_checkpoints(backward_state, reversed_groups, kernel.T,
                                   subtract=False)
    bwd = bwd[::-1]  # bwd[tau] now pairs with fwd[tau]

    base0 = bwd[0].overlap(fwd[0])
    lam0 = bwd[0].log_norm + fwd[0].log_norm
    if base0 == 0.0:
        raise DegenerateNormalizationError("boundary-to-boundary contraction vanished")
    grid = np.empty((L, t + 1))
    for tau in range(t + 1):
        lam = bwd[tau].log_norm + fwd[tau].log_norm
        scale = np.exp(lam - lam0) / base0
        for x in range(L):
            grid[x, tau] = bwd[tau].overlap(fwd[tau], site_op=site_operator, site=x) * scale
    return grid


def magnetization_grid(config: OtocConfig, t: int, site_operator=None,
                       dominant: DominantState | None = None) -> MagnetizationGrid:
    """Averaged polarization of the trajectories ending in the dominant state.

    Uses the unmodified transition matrix (the minus-count reweighting only
    changes a global constant once the final configuration is fixed).
    """
    if t < 2:
        raise InvalidParameterError("grid needs t >= 2")
    if dominant is None:
        dominant = dominant_state(config, t)
    groups = _unit_groups(config, t)
    kernel = param_transition(config.params).site_kernel()
    fwd = top_state(config.L, config.x_v, chi=config.chi, cutoff=config.cutoff,
                    dense=config.dense)
    cls = DenseState if config.dense else TensorTrainState
    bwd = cls.from_product(dominant.bits, chi_max=config.chi, cutoff=config.cutoff)
    values = forward_backward_grid(groups, kernel, fwd, bwd,
                                   site_operator=site_operator)
    meta = {"kind": "magnetization", "geometry": config.geometry, "bc": config.bc,
            "L": config.L, "t": t, "x_v": config.x_v, "x_w": config.x_w,
            "a_z": config.params.a_z, "dominant": dominant.symbols,
            "dominant_exact": dominant.exact}
    return MagnetizationGrid(values=values, taus=np.arange(t + 1), meta=meta,
                             dominant=dominant)


def dominant_trajectory(config: OtocConfig, t: int) -> list[tuple[int, ...]]:
    """Most likely history ending in the dominant state (exact, L <= 14).

    For each intermediate time the returned configuration maximizes
    forward weight times backward weight under the modified dynamics.
    """
    if config.L > EXACT_ARGMAX_MAX_SITES:
        raise InvalidParameterError(
            f"exact trajectory limited to L <= {EXACT_ARGMAX_MAX_SITES}; "
            "use magnetization_grid for larger systems"
        )
    dom = dominant_state(config, t)
    groups = _unit_groups(config, t)
    kernel = modified_transition(config.params).site_kernel()
    fwd_state = top_state(config.L, config.x_v, dense=True)
    fwd = _evolve_with_checkpoints(fwd_state, groups, kernel, subtract=False)
    bwd_state = DenseState.from_product(dom.bits)
    reversed_groups = [tuple(reversed(g)) for g in reversed(groups)]
    bwd = _evolve_with_checkpoints(bwd_state, reversed_groups, kernel.T,
                                   subtract=False)
    bwd = bwd[::-1]
    history = []
    for tau in range(t + 1):
        scores = np.abs(bwd[tau].vector * fwd[tau].vector)
        best = int(np.argmax(scores))
        bits = tuple((best >> (config.L - 1 - k)) & 1 for k in range(config.L))
        history.append(bits)
    return history
