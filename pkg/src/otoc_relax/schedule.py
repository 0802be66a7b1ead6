"""Bond schedules for brickwork and staircase circuits.

One brickwork layer (all even or all odd bonds) is the unit of time.  A full
staircase sweep applies every bond once in ascending order and counts as two
time units, since it contains twice the gates of a single brickwork layer.
Observables are only read out at integer times; for staircase geometry that
point can fall mid-sweep, and :meth:`LayerSchedule.unit_steps` splits sweeps
accordingly using per-bond fractional time bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidGeometryError

GEOMETRIES = ("bw", "s")
BOUNDARIES = ("obc", "pbc")

Bond = tuple[int, int]


@dataclass(frozen=True)
class Layer:
    """One natural circuit layer: an ordered list of bonds and its duration."""

    bonds: tuple[Bond, ...]
    time_units: float


@dataclass(frozen=True)
class LayerSchedule:
    """Ordered bond schedule covering at least ``total_time_units``."""

    L: int
    geometry: str
    bc: str
    total_time_units: int
    layers: tuple[Layer, ...] = field(repr=False)

    @property
    def time_units_per_layer(self) -> float:
        return self.layers[0].time_units if self.layers else 0.0

    def unit_steps(self):
        """Yield (t, bonds) per integer time unit, in application order.

        ``bonds`` is the tuple of bonds whose cumulative fractional time ends
        at (or first crosses) integer time ``t``.  Stops after
        ``total_time_units`` steps.
        """
        t_emitted = 0
        clock = 0.0
        pending: list[Bond] = []
        for layer in self.layers:
            dt = layer.time_units / len(layer.bonds)
            for bond in layer.bonds:
                pending.append(bond)
                clock += dt
                if clock >= t_emitted + 1 - 1e-9:
                    t_emitted += 1
                    yield t_emitted, tuple(pending)
                    pending = []
                    if t_emitted >= self.total_time_units:
                        return
        if pending and t_emitted < self.total_time_units:
            yield t_emitted + 1, tuple(pending)


def _bw_layers(L: int, bc: str, total: int) -> list[Layer]:
    even = tuple((i, i + 1) for i in range(0, L - 1, 2))
    odd = list((i, i + 1) for i in range(1, L - 1, 2))
    if bc == "pbc":
        odd = odd + [(L - 1, 0)]
    odd = tuple(odd)
    return [Layer(even if k % 2 == 0 else odd, 1.0) for k in range(total)]


def _s_layers(L: int, bc: str, total: int) -> list[Layer]:
    bonds = [(i, i + 1) for i in range(L - 1)]
    if bc == "pbc":
        bonds.append((L - 1, 0))
    sweep = Layer(tuple(bonds), 2.0)
    n_sweeps = (total + 1) // 2
    return [sweep] * n_sweeps


def build_schedule(geometry: str, bc: str, L: int, total_time_units: int) -> LayerSchedule:
    """Deterministic bond schedule for the requested geometry and boundary.

    Staircase schedules are built from whole sweeps (2 time units each) and
    therefore round an odd ``total_time_units`` up by one; consumers reading
    via ``unit_steps`` still stop at the requested time.
    """
    geometry = geometry.lower()
    bc = bc.lower()
    if geometry not in GEOMETRIES:
        raise InvalidGeometryError(f"geometry must be one of {GEOMETRIES}, got {geometry!r}")
    if bc not in BOUNDARIES:
        raise InvalidGeometryError(f"bc must be one of {BOUNDARIES}, got {bc!r}")
    if L < 4:
        raise InvalidGeometryError(f"need L >= 4 sites, got L={L}")
    if total_time_units < 1:
        raise InvalidGeometryError("total_time_units must be >= 1")
    if geometry == "bw" and bc == "pbc" and L % 2 != 0:
        raise InvalidGeometryError(f"brickwork PBC requires even L, got L={L}")

    if geometry == "bw":
        layers = _bw_layers(L, bc, total_time_units)
    else:
        layers = _s_layers(L, bc, total_time_units)
    return LayerSchedule(
        L=L,
        geometry=geometry,
        bc=bc,
        total_time_units=total_time_units,
        layers=tuple(layers),
    )
