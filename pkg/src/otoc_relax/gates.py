"""Averaged two-site transition matrices and closed-form decay rates.

After quench-averaging a brickwork/staircase circuit of two-qudit gates, the
dynamics of the surviving Ising-like degrees of freedom is generated by a
4x4 transition matrix acting on neighbouring site pairs.  This module builds
those matrices (Haar, parameterized dual-unitary family, dominant-weight
modified variant, and the occupied/unoccupied cluster flavor) together with
the domain-wall and magnon decay rates they imply.

Conventions fixed here and relied on everywhere else:

* Matrices act on column weight vectors, ``w_new = M @ w_old``.
* Spin flavor rows/columns are ordered ``(--, -+, +-, ++)``; cluster flavor
  ``(oo, ob, bo, bb)`` with ``o`` unoccupied and ``b`` occupied.
* Bookkeeping (orthonormal) coordinates put ``+``/``o`` at local index 0 and
  ``-``/``b`` at index 1; :meth:`TransitionMatrix4.site_kernel` returns the
  matrix permuted into that pair ordering for the evolution engine.
* Rates are quoted in units of ``ln 2`` per brickwork layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnsupportedEnsembleError

SPIN_BASIS = ("--", "-+", "+-", "++")
CLUSTER_BASIS = ("oo", "ob", "bo", "bb")

# paper order (--,-+,+-,++) <-> bookkeeping pair order (++,+-,-+,--)
_REVERSE = np.array([3, 2, 1, 0])


@dataclass(frozen=True)
class GateParams:
    """Ensemble parameters of the averaged two-qubit gate family.

    ``a_x = a_y = 1`` is the dual-unitary line where the domain-wall and
    magnon rates are known in closed form.
    """

    a_x: float
    a_y: float
    a_z: float
    q: int = 2

    def __post_init__(self):
        for name in ("a_x", "a_y", "a_z"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if self.q < 2:
            raise InvalidParameterError(f"local dimension q must be >= 2, got {self.q}")

    # u, v are recomputed on access so they can never go stale
    @property
    def u(self) -> float:
        cx, cy, cz = self._cosines()
        return cx + cy + cz

    @property
    def v(self) -> float:
        cx, cy, cz = self._cosines()
        return cx * cy + cy * cz + cz * cx

    def _cosines(self):
        return (
            math.cos(math.pi * self.a_x),
            math.cos(math.pi * self.a_y),
            math.cos(math.pi * self.a_z),
        )

    @property
    def dual_unitary(self) -> bool:
        return abs(self.a_x) == 1.0 and abs(self.a_y) == 1.0


@dataclass(frozen=True)
class TransitionMatrix4:
    """A 4x4 real two-site transition matrix with a declared basis order."""

    matrix: np.ndarray  # (4, 4), column = source, row = target
    flavor: str  # "spin" | "cluster"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise InvalidParameterError(f"expected 4x4 matrix, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        if self.flavor not in ("spin", "cluster"):
            raise InvalidParameterError(f"unknown flavor {self.flavor!r}")

    @property
    def basis_order(self) -> tuple[str, str, str, str]:
        return SPIN_BASIS if self.flavor == "spin" else CLUSTER_BASIS

    def site_kernel(self) -> np.ndarray:
        """Matrix in bookkeeping pair order (local index 0 = ``+``/``o``).

        Spin flavor needs the index reversal (its declared order lists ``--``
        first); the cluster order already agrees with bookkeeping.
        """
        if self.flavor == "spin":
            return self.matrix[np.ix_(_REVERSE, _REVERSE)].copy()
        return self.matrix.copy()


@dataclass(frozen=True)
class RatePrediction:
    """Predicted two-stage decay rates for one geometry/boundary cell."""

    r1: float
    r2: float
    geometry: str
    bc: str


def haar_transition(q: int) -> TransitionMatrix4:
    """Averaged two-site matrix for Haar-random two-qudit gates.

    ``--`` and ``++`` are fixed points; ``-+`` and ``+-`` feed both with
    equal weight h = q/(q^2+1).  This is the pure domain-wall dynamics.
    """
    if q < 2:
        raise InvalidParameterError(f"local dimension q must be >= 2, got {q}")
    h = q / (q * q + 1)
    m = np.array(
        [
            [1.0, h, h, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, h, h, 1.0],
        ]
    )
    return TransitionMatrix4(m, "spin")


def _hbb(p: GateParams):
    u, v = p.u, p.v
    h = (3.0 - v) / 9.0
    b_plus = (3.0 + 6.0 * u + 5.0 * v) / 36.0
    b_minus = (3.0 - 6.0 * u + 5.0 * v) / 36.0
    return h, b_plus, b_minus


def param_transition(p: GateParams) -> TransitionMatrix4:
    """Averaged two-site matrix of the (a_x, a_y, a_z) two-qubit family.

    Weights may be negative; only q = 2 is supported for this family.
    """
    if p.q != 2:
        raise UnsupportedEnsembleError(
            f"parameterized family is defined for q=2 only, got q={p.q}"
        )
    h, bp, bm = _hbb(p)
    m = np.array(
        [
            [1.0, h, h, 0.0],
            [0.0, bp, bm, 0.0],
            [0.0, bm, bp, 0.0],
            [0.0, h, h, 1.0],
        ]
    )
    return TransitionMatrix4(m, "spin")


def modified_transition(p: GateParams) -> TransitionMatrix4:
    """Transition matrix reweighted so evolution tracks the minus count.

    A transition that raises the number of ``-`` spins by one (``-+``/``+-``
    into ``--``) gains a factor q, one that lowers it (into ``++``) a factor
    1/q.  Evolving the top state with this matrix makes the bookkeeping
    amplitude of a configuration z equal to C_z(t) * q^{n_-(z)} up to one
    global constant, which is what the dominant-state search maximizes.
    The fixed-point columns are untouched.
    """
    base = param_transition(p)
    m = base.matrix.copy()
    q = float(p.q)
    m[0, 1] *= q
    m[0, 2] *= q
    m[3, 1] /= q
    m[3, 2] /= q
    return TransitionMatrix4(m, "spin")


def cluster_transfer(a_z: float) -> TransitionMatrix4:
    """Column-stochastic two-site transfer matrix in the cluster basis.

    Valid on the dual-unitary line a_x = a_y = 1 with q = 2.  The exchange
    weight (2 - cos(pi a_z))/3 is the single-step magnon survival
    probability; the all-unoccupied column is the only fixed point.
    """
    if not math.isfinite(a_z):
        raise InvalidParameterError("a_z must be finite")
    c = math.cos(math.pi * a_z)
    ex = (2.0 - c) / 3.0
    m = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, ex, (1.0 + c) / 9.0],
            [0.0, ex, 0.0, (1.0 + c) / 9.0],
            [0.0, (1.0 + c) / 3.0, (1.0 + c) / 3.0, (7.0 - 2.0 * c) / 9.0],
        ]
    )
    return TransitionMatrix4(m, "cluster")


def rates(p: GateParams) -> tuple[float, float]:
    """(r_DW, r_mag) for the dual-unitary family, in ln 2 per layer."""
    if not p.dual_unitary:
        raise UnsupportedEnsembleError(
            "closed-form rates exist only for the dual-unitary family a_x = a_y = 1"
        )
    r_dw = 1.0
    r_mag = math.log(3.0 / (2.0 - math.cos(math.pi * p.a_z))) / math.log(2.0)
    return r_dw, r_mag


def magnon_rate(a_z: float) -> float:
    """Shorthand for rates() of the dual-unitary point at this a_z."""
    return rates(GateParams(1.0, 1.0, a_z))[1]


def predicted_rates(geometry: str, bc: str, a_z: float) -> RatePrediction:
    """Two-stage rate prediction for a geometry/boundary cell.

    r1 is half the magnon rate in all four cells.  r2 is the magnon rate for
    BW-PBC, half of it for S-PBC, and the domain-wall/magnon competition
    min-rule for open boundaries (domain wall wins below a_z = 1/3).
    """
    geometry = geometry.lower()
    bc = bc.lower()
    if geometry not in ("bw", "s"):
        raise InvalidParameterError(f"geometry must be 'bw' or 's', got {geometry!r}")
    if bc not in ("obc", "pbc"):
        raise InvalidParameterError(f"bc must be 'obc' or 'pbc', got {bc!r}")
    r_dw, r_mag = rates(GateParams(1.0, 1.0, a_z))
    r1 = r_mag / 2.0
    if bc == "obc":
        r2 = r_dw if a_z < 1.0 / 3.0 else r_mag
    elif geometry == "bw":
        r2 = r_mag
    else:
        r2 = r_mag / 2.0
    return RatePrediction(r1=r1, r2=r2, geometry=geometry, bc=bc)


def spin_to_cluster_site() -> np.ndarray:
    """Single-site change of basis from spin to cluster bookkeeping coordinates.

    Built from |+> = q|o> and |-> = |o> + (q^2-1)|b> at q = 2, acting on
    (w_+, w_-) column coordinates.  Conjugating the spin matrix with the
    two-site Kronecker square of this map reproduces the cluster transfer
    matrix exactly.
    """
    q = 2.0
    return np.array([[q, 1.0], [0.0, q * q - 1.0]])
