"""Occupied/unoccupied cluster-basis dynamics.

Pauli-string weight dynamics reduces, after on-site averaging, to a
column-stochastic two-site transfer matrix over per-site occupation flags
(``o`` unoccupied, ``b`` occupied by any traceless operator).  This module
evolves that chain for the one-point-function squared and for the OTOC, and
produces the occupation heatmap.  Only the all-unoccupied configuration is a
fixed point, so it is the single sink subtracted during evolution.
"""

from __future__ import annotations

import numpy as np

from . import engine
from .engine import DenseState, TensorTrainState
from .errors import InvalidParameterError
from .gates import cluster_transfer
from .otoc import DEFAULT_TRUNC_CEILING, run_weighted_series
from .schedule import build_schedule
from .series import RelaxationSeries
from .trajectory import MagnetizationGrid, forward_backward_grid


def cluster_sinks(L: int) -> tuple[tuple[int, ...]]:
    """All-unoccupied is the only fixed point of the cluster transfer matrix."""
    return (tuple([0] * L),)


def cluster_top_state(L: int, x: int = 0, chi: int = engine.DEFAULT_CHI,
                      cutoff: float = engine.DEFAULT_CUTOFF, dense: bool = False):
    """Single occupied site at ``x``: the initial size-1 operator cluster."""
    if not 0 <= x < L:
        raise InvalidParameterError(f"site {x} out of range for L={L}")
    bits = [0] * L
    bits[x] = 1
    cls = DenseState if dense else TensorTrainState
    return cls.from_product(bits, chi_max=chi, cutoff=cutoff, sinks=cluster_sinks(L))


def one_point_bottom(L: int, q: int = 2) -> list[np.ndarray]:
    """Product-state bra: occupied sites are discouraged by 1/(q+1)."""
    return [np.array([1.0, 1.0 / (q + 1.0)])] * L


def otoc_cluster_bottom(L: int, x_w: int, q: int = 2) -> list[np.ndarray]:
    """OTOC bra: (1/2, 1/2) at the - sites, (1/q, -1/(q(q+1))) at the W site."""
    w = [np.array([0.5, 0.5])] * L
    w[x_w] = np.array([1.0 / q, -1.0 / (q * (q + 1.0))])
    return w


def one_point_sq(a_z: float, L: int, T: int, geometry: str = "bw", bc: str = "obc",
                 chi: int = engine.DEFAULT_CHI, cutoff: float = engine.DEFAULT_CUTOFF,
                 dense: bool = False,
                 trunc_ceiling: float = DEFAULT_TRUNC_CEILING) -> RelaxationSeries:
    """Averaged squared one-point function of an initially local operator."""
    q = 2
    state = cluster_top_state(L, 0, chi=chi, cutoff=cutoff, dense=dense)
    meta = {"kind": "one-point", "geometry": geometry, "bc": bc, "L": L, "T": T,
            "a_z": a_z, "q": q, "x_w": 0, "chi": chi, "cutoff": cutoff}
    return run_weighted_series(
        state, build_schedule(geometry, bc, L, T), cluster_transfer(a_z),
        one_point_bottom(L, q), trunc_ceiling=trunc_ceiling, meta=meta,
    )


def otoc_cluster(a_z: float, L: int, T: int, x_w: int = 4, geometry: str = "bw",
                 bc: str = "obc", chi: int = engine.DEFAULT_CHI,
                 cutoff: float = engine.DEFAULT_CUTOFF, dense: bool = False,
                 trunc_ceiling: float = DEFAULT_TRUNC_CEILING) -> RelaxationSeries:
    """OTOC relaxation computed in the cluster basis (signed series)."""
    q = 2
    if not 0 <= x_w < L:
        raise InvalidParameterError(f"x_w={x_w} out of range for L={L}")
    state = cluster_top_state(L, 0, chi=chi, cutoff=cutoff, dense=dense)
    meta = {"kind": "cluster-otoc", "geometry": geometry, "bc": bc, "L": L, "T": T,
            "a_z": a_z, "q": q, "x_w": x_w, "chi": chi, "cutoff": cutoff}
    return run_weighted_series(
        state, build_schedule(geometry, bc, L, T), cluster_transfer(a_z),
        otoc_cluster_bottom(L, x_w, q), trunc_ceiling=trunc_ceiling, meta=meta,
    )


def cluster_heatmap(a_z: float, L: int, T: int, x_w: int = 4, geometry: str = "bw",
                    bc: str = "obc", chi: int = engine.DEFAULT_CHI,
                    cutoff: float = engine.DEFAULT_CUTOFF, dense: bool = False):
    """Occupation heatmap (+1 unoccupied, -1 occupied) for the cluster OTOC.

    No single configuration dominates the cluster-basis OTOC, so the
    backward bra is the OTOC boundary weight vector itself rather than a
    dominant configuration.
    """
    q = 2
    schedule = build_schedule(geometry, bc, L, T)
    groups = [bonds for _, bonds in schedule.unit_steps()]
    kernel = cluster_transfer(a_z).site_kernel()
    fwd = cluster_top_state(L, 0, chi=chi, cutoff=cutoff, dense=dense)
    cls = DenseState if dense else TensorTrainState
    bwd = cls.from_factors(otoc_cluster_bottom(L, x_w, q), chi_max=chi, cutoff=cutoff)
    values = forward_backward_grid(groups, kernel, fwd, bwd)
    meta = {"kind": "cluster-heatmap", "geometry": geometry, "bc": bc, "L": L,
            "t": T, "x_w": x_w, "a_z": a_z}
    return MagnetizationGrid(values=values, taus=np.arange(T + 1), meta=meta)


def random_operator_overlap(q: int, L: int, t: int) -> float:
    """Bottom overlap of the fully scrambled cluster profile after t steps.

    The initial cluster is expected to look random inside its light cone:
    each of the first t sites is identity with probability 1/q^2, occupied
    otherwise, followed by the occupied front and untouched sites.  Its
    overlap with the one-point bra collapses to (1/(q+1)) * q^{-t}.
    """
    if t > L - 1:
        raise InvalidParameterError("light cone must fit inside the chain")
    site = np.array([1.0 / q ** 2, (q ** 2 - 1.0) / q ** 2])
    bra = np.array([1.0, 1.0 / (q + 1.0)])
    per_site = float(bra @ site)
    return per_site ** t * (1.0 / (q + 1.0))
