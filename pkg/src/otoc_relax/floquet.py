"""Exact state-vector OTOCs for the clean/disordered Floquet brickwork model.

No averaging is available here, so the correlator is computed directly:
the infinite-temperature trace is approximated by expectation values in a
few Haar-random states (canonical typicality), and the time-evolved operator
is never materialized -- both bra and ket states are pushed through the
circuit gate by gate, forward to the fold and back.

The two-site gate is exp(-i pi/4 (XX + YY + a_z ZZ)) dressed with identical
single-site kicks u(phi) = exp(i (sin(phi) X + cos(phi) Z)); phi can be one
global constant (clean), one random value per circuit (homogeneous disorder),
or independent per site (site disorder).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    InvalidParameterError,
    NumericalIntegrityError,
)
from .series import RelaxationSeries, SignedLog

MAX_SITES = 24
NORM_DRIFT_TOL = 1e-8

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class FloquetParams:
    """One Floquet OTOC computation, seeds included."""

    a_z: float
    L: int = 18
    T: int = 40
    phi: float = 0.6
    phi_mode: str = "clean"  # clean | homog | site
    bc: str = "obc"
    n_typicality: int = 1
    n_samples: int = 1
    seed: int = 0
    x_w: int = 1
    v_op: str = "z"
    w_op: str = "z"

    def __post_init__(self):
        if self.L > MAX_SITES:
            raise InvalidParameterError(f"L <= {MAX_SITES} required, got {self.L}")
        if self.L < 4:
            raise InvalidParameterError("need L >= 4")
        if self.phi_mode not in ("clean", "homog", "site"):
            raise InvalidParameterError(f"unknown phi_mode {self.phi_mode!r}")
        if self.bc not in ("obc", "pbc"):
            raise InvalidParameterError(f"bc must be obc or pbc, got {self.bc!r}")
        if self.bc == "pbc" and self.L % 2:
            raise InvalidParameterError("brickwork PBC requires even L")
        if self.n_typicality < 1 or self.n_samples < 1:
            raise InvalidParameterError("need n_typicality >= 1 and n_samples >= 1")
        if not 0 <= self.x_w < self.L or self.x_w == 0:
            raise InvalidParameterError("x_w must lie in (0, L): V sits at site 0")
        if self.v_op not in PAULI or self.w_op not in PAULI:
            raise InvalidParameterError("v_op/w_op must be one of 'x', 'y', 'z'")

    @property
    def saturation(self) -> float:
        return -1.0 / (4.0 ** self.L - 1.0)


@dataclass
class FloquetSeries:
    """Complex OTOC(t) with its Haar saturation value and sampling record."""

    t: np.ndarray
    otoc: np.ndarray
    saturation: float
    n_samples: int
    seeds: tuple[int, ...]
    meta: dict = field(default_factory=dict)

    def minus_saturation(self) -> np.ndarray:
        return np.abs(self.otoc - self.saturation)

    def to_relaxation_series(self) -> RelaxationSeries:
        vals = self.otoc.real - self.saturation
        logs = np.array([SignedLog.from_value(v).log_abs for v in vals])
        signs = np.sign(vals).astype(int)
        return RelaxationSeries(
            t=self.t.astype(float), log_abs=logs, sign=signs,
            trunc_err=np.zeros_like(logs), meta=dict(self.meta),
        )


def single_site_kick(phi: float) -> np.ndarray:
    """u(phi) = exp(i (sin(phi) X + cos(phi) Z))."""
    return expm(1j * (np.sin(phi) * PAULI["x"] + np.cos(phi) * PAULI["z"]))


def floquet_gate(a_z: float, phi: float) -> np.ndarray:
    """Two-site Floquet gate: dual-unitary core times identical kicks."""
    if not (np.isfinite(a_z) and np.isfinite(phi)):
        raise InvalidParameterError("a_z and phi must be finite")
    core = _dual_unitary_core(a_z)
    u = single_site_kick(phi)
    return core @ np.kron(u, u)


def _dual_unitary_core(a_z: float) -> np.ndarray:
    gen = (
        np.kron(PAULI["x"], PAULI["x"])
        + np.kron(PAULI["y"], PAULI["y"])
        + a_z * np.kron(PAULI["z"], PAULI["z"])
    )
    return expm(-1j * np.pi / 4.0 * gen)


def _apply_adjacent(psi: np.ndarray, gate: np.ndarray, i: int, L: int) -> np.ndarray:
    block = psi.reshape(2 ** i, 4, -1)
    return np.einsum("ab,ibj->iaj", gate, block).reshape(-1)


def _apply_wrap(psi: np.ndarray, gate: np.ndarray, L: int) -> np.ndarray:
    # gate acts on (site L-1, site 0)
    g4 = gate.reshape(2, 2, 2, 2)
    psi3 = psi.reshape(2, -1, 2)
    return np.einsum("abcd,dmc->bma", g4, psi3).reshape(-1)


class BrickworkCircuit:
    """Alternating even/odd layers of two-site gates; one layer = one time unit."""

    def __init__(self, L: int, bc: str, gates_even, gates_odd):
        self.L = L
        self.bc = bc
        self.layers = (tuple(gates_even), tuple(gates_odd))

    @classmethod
    def build(cls, params: FloquetParams, phis: np.ndarray) -> "BrickworkCircuit":
        L = params.L
        core = _dual_unitary_core(params.a_z)
        kicks = [single_site_kick(p) for p in np.atleast_1d(phis)]
        if len(kicks) == 1:
            kicks = kicks * L

        def gate(i, j):
            return core @ np.kron(kicks[i], kicks[j])

        even = [(i, i + 1, gate(i, i + 1)) for i in range(0, L - 1, 2)]
        odd = [(i, i + 1, gate(i, i + 1)) for i in range(1, L - 1, 2)]
        if params.bc == "pbc":
            odd.append((L - 1, 0, gate(L - 1, 0)))
        return cls(L, params.bc, even, odd)

    def apply_layer(self, psi: np.ndarray, parity: int, dagger: bool = False) -> np.ndarray:
        gates = self.layers[parity % 2]
        if dagger:
            gates = tuple(reversed(gates))
        for (i, j, g) in gates:
            gm = g.conj().T if dagger else g
            if j == i + 1:
                psi = _apply_adjacent(psi, gm, i, self.L)
            else:
                psi = _apply_wrap(psi, gm, self.L)
        return psi

    def forward(self, psi: np.ndarray, t_from: int, t_to: int) -> np.ndarray:
        for t in range(t_from, t_to):
            psi = self.apply_layer(psi, t % 2)
        return psi

    def backward(self, psi: np.ndarray, t: int) -> np.ndarray:
        for k in range(t - 1, -1, -1):
            psi = self.apply_layer(psi, k % 2, dagger=True)
        return psi


def _site_operator(op: np.ndarray, x: int, psi: np.ndarray, L: int) -> np.ndarray:
    block = psi.reshape(2 ** x, 2, -1)
    return np.einsum("ab,ibj->iaj", op, block).reshape(-1)


def haar_state(L: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex Gaussian vector = Haar-random pure state."""
    vec = rng.normal(size=2 ** L) + 1j * rng.normal(size=2 ** L)
    return vec / np.linalg.norm(vec)


def _single_circuit_otoc(circuit: BrickworkCircuit, params: FloquetParams,
                         rng: np.random.Generator) -> np.ndarray:
    """Typicality-averaged OTOC(t) for one fixed circuit."""
    L, T = params.L, params.T
    v_op, w_op = PAULI[params.v_op], PAULI[params.w_op]
    acc = np.zeros(T + 1, dtype=complex)
    for _ in range(params.n_typicality):
        psi = haar_state(L, rng)
        nrm2 = np.vdot(psi, psi).real
        a = psi.copy()            # U^t |psi>
        b = _site_operator(w_op, params.x_w, psi, L)   # U^t W |psi>
        for t in range(T + 1):
            if t > 0:
                a = circuit.apply_layer(a, (t - 1) % 2)
                b = circuit.apply_layer(b, (t - 1) % 2)
            u = circuit.backward(_site_operator(v_op, 0, a, L), t)
            v = circuit.backward(_site_operator(v_op, 0, b, L), t)
            drift = max(abs(np.linalg.norm(u) - 1.0), abs(np.linalg.norm(v) - 1.0))
            if drift > NORM_DRIFT_TOL:
                raise NumericalIntegrityError(
                    f"state norm drifted by {drift:.2e} at t={t}"
                )
            v = _site_operator(w_op, params.x_w, v, L)
            acc[t] += np.vdot(u, v) / nrm2
    return acc / params.n_typicality


def otoc_typicality(params: FloquetParams) -> FloquetSeries:
    """OTOC(t) of one circuit draw (clean circuits are deterministic)."""
    children = np.random.SeedSequence(params.seed).spawn(2)
    phi_rng = np.random.Generator(np.random.Philox(children[0]))
    if params.phi_mode == "clean":
        phis = np.array([params.phi])
    elif params.phi_mode == "homog":
        phis = np.array([phi_rng.uniform(0.0, 2.0 * np.pi)])
    else:
        phis = phi_rng.uniform(0.0, 2.0 * np.pi, size=params.L)
    circuit = BrickworkCircuit.build(params, phis)
    rng = np.random.Generator(np.random.Philox(children[1]))
    otoc = _single_circuit_otoc(circuit, params, rng)
    meta = {"kind": "floquet", "L": params.L, "a_z": params.a_z,
            "phi_mode": params.phi_mode, "x_w": params.x_w, "seed": params.seed}
    return FloquetSeries(
        t=np.arange(params.T + 1), otoc=otoc, saturation=params.saturation,
        n_samples=1, seeds=(params.seed,), meta=meta,
    )


def disorder_average(params: FloquetParams) -> FloquetSeries:
    """Mean OTOC over n_samples circuit draws (phi resampled per circuit)."""
    seq = np.random.SeedSequence(params.seed)
    children = seq.spawn(params.n_samples)
    acc = np.zeros(params.T + 1, dtype=complex)
    seeds = []
    for child in children:
        child_seed = int(child.generate_state(1)[0])
        seeds.append(child_seed)
        phi_rng = np.random.Generator(np.random.Philox(child))
        if params.phi_mode == "clean":
            phis = np.array([params.phi])
        elif params.phi_mode == "homog":
            phis = np.array([phi_rng.uniform(0.0, 2.0 * np.pi)])
        else:
            phis = phi_rng.uniform(0.0, 2.0 * np.pi, size=params.L)
        circuit = BrickworkCircuit.build(params, phis)
        acc += _single_circuit_otoc(circuit, params, phi_rng)
    meta = {"kind": "floquet", "L": params.L, "a_z": params.a_z,
            "phi_mode": params.phi_mode, "x_w": params.x_w, "seed": params.seed,
            "n_samples": params.n_samples}
    return FloquetSeries(
        t=np.arange(params.T + 1), otoc=acc / params.n_samples,
        saturation=params.saturation, n_samples=params.n_samples,
        seeds=tuple(seeds), meta=meta,
    )


def otoc_exact_trace(params: FloquetParams) -> FloquetSeries:
    """Full-trace OTOC via dense matrices (oracle; L <= 10)."""
    if params.L > 10:
        raise InvalidParameterError("exact trace limited to L <= 10")
    if params.phi_mode != "clean":
        raise InvalidParameterError("exact trace supports the clean mode only")
    L, dim = params.L, 2 ** params.L
    circuit = BrickworkCircuit.build(params, np.array([params.phi]))

    def layer_matrix(parity):
        mat = np.eye(dim, dtype=complex)
        for col in range(dim):
            mat[:, col] = circuit.apply_layer(np.ascontiguousarray(mat[:, col]),
                                              parity)
        return mat

    u_even, u_odd = layer_matrix(0), layer_matrix(1)

    def embed(op, x):
        full = np.array([[1.0]], dtype=complex)
        for k in range(L):
            full = np.kron(full, op if k == x else _ID2)
        return full

    v_full = embed(PAULI[params.v_op], 0)
    w_full = embed(PAULI[params.w_op], params.x_w)
    otoc = np.zeros(params.T + 1, dtype=complex)
    v_t = v_full.copy()
    for t in range(params.T + 1):
        if t > 0:
            u_layer = u_even if (t - 1) % 2 == 0 else u_odd
            v_t = u_layer.conj().T @ v_t @ u_layer
        otoc[t] = np.trace(v_t @ w_full @ v_t @ w_full) / dim
    meta = {"kind": "floquet-exact", "L": L, "a_z": params.a_z, "x_w": params.x_w}
    return FloquetSeries(
        t=np.arange(params.T + 1), otoc=otoc, saturation=params.saturation,
        n_samples=0, seeds=(), meta=meta,
    )
