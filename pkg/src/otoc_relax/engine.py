"""Weight-vector evolution under two-site transition matrices.

Two interchangeable state containers evolve a length-L real weight vector in
orthonormal bookkeeping coordinates (local index 0 = ``+``/``o``, 1 =
``-``/``b``):

* :class:`TensorTrainState` -- production path.  Site tensors with bounded
  bond dimension, SVD truncation at every bond application, and a log-norm
  accumulator so exponentially small amplitudes never underflow.
* :class:`DenseState` -- brute-force oracle, a full 2^L vector (L <= 14).

Both expose the same operations (``apply_bond``, ``subtract_components``,
``renormalize``, ``overlap_product``), so every pipeline can be cross-checked
against the dense oracle.  Periodic wrap bonds on the tensor train are
realized by swapping the rightmost site across the lattice, applying the
boundary gate, and swapping back.
"""

from __future__ import annotations

import struct

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, SignalLostError

DENSE_MAX_SITES = 14
DEFAULT_CHI = 128
DEFAULT_CUTOFF = 1e-14

# exchanges the two physical legs of a pair index p = 2*s_i + s_j
_SWAP = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)


def _svd(mat: np.ndarray):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails on ill-conditioned input; gesvd is sturdier
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")


class TensorTrainState:
    """Tensor-train weight vector with log-norm and truncation bookkeeping."""

    def __init__(self, tensors, chi_max=DEFAULT_CHI, cutoff=DEFAULT_CUTOFF,
                 log_norm=0.0, sinks=()):
        self.tensors = [np.asarray(t, dtype=float) for t in tensors]
        self.L = len(self.tensors)
        self.chi_max = int(chi_max)
        self.cutoff = float(cutoff)
        self.log_norm = float(log_norm)
        self.trunc_err = 0.0
        self.sinks = tuple(tuple(b) for b in sinks)
        self._center = None

    @classmethod
    def from_product(cls, bits, chi_max=DEFAULT_CHI, cutoff=DEFAULT_CUTOFF, sinks=()):
        """Product basis state |bits> with bits[k] in {0, 1}."""
        tensors = []
        for b in bits:
            t = np.zeros((1, 2, 1))
            t[0, int(b), 0] = 1.0
            tensors.append(t)
        state = cls(tensors, chi_max=chi_max, cutoff=cutoff, sinks=sinks)
        state._center = 0
        return state

    @classmethod
    def from_factors(cls, vectors, chi_max=DEFAULT_CHI, cutoff=DEFAULT_CUTOFF, sinks=()):
        """Product state with an arbitrary length-2 factor on every site."""
        tensors = [np.asarray(v, dtype=float).reshape(1, 2, 1) for v in vectors]
        state = cls(tensors, chi_max=chi_max, cutoff=cutoff, sinks=sinks)
        state._center = 0
        return state

    def copy(self):
        out = TensorTrainState(
            [t.copy() for t in self.tensors],
            chi_max=self.chi_max,
            cutoff=self.cutoff,
            log_norm=self.log_norm,
            sinks=self.sinks,
        )
        out.trunc_err = self.trunc_err
        out._center = self._center
        return out

    @property
    def bond_dimensions(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    # -- gauge handling ----------------------------------------------------

    def _shift_center_right(self, pos):
        t = self.tensors[pos]
        chi_l, d, chi_r = t.shape
        q, r = np.linalg.qr(t.reshape(chi_l * d, chi_r))
        self.tensors[pos] = q.reshape(chi_l, d, -1)
        self.tensors[pos + 1] = np.tensordot(r, self.tensors[pos + 1], axes=(1, 0))

    def _shift_center_left(self, pos):
        t = self.tensors[pos]
        chi_l, d, chi_r = t.shape
        q, r = np.linalg.qr(t.reshape(chi_l, d * chi_r).T)
        self.tensors[pos] = q.T.reshape(-1, d, chi_r)
        self.tensors[pos - 1] = np.tensordot(self.tensors[pos - 1], r.T, axes=(2, 0))

    def _move_center(self, pos):
        if self._center is None:
            for k in range(self.L - 1):
                self._shift_center_right(k)
            self._center = self.L - 1
        while self._center < pos:
            self._shift_center_right(self._center)
            self._center += 1
        while self._center > pos:
            self._shift_center_left(self._center)
            self._center -= 1

    # -- two-site application ----------------------------------------------

    def _apply_adjacent(self, i, kernel):
        if not (self._center == i or self._center == i + 1):
            self._move_center(i)
        a, b = self.tensors[i], self.tensors[i + 1]
        chi_l, _, _ = a.shape
        _, _, chi_r = b.shape
        theta = np.tensordot(a, b, axes=(2, 0)).reshape(chi_l, 4, chi_r)
        theta = np.einsum("ab,ibj->iaj", kernel, theta)
        u, s, vt = _svd(theta.reshape(chi_l * 2, 2 * chi_r))
        total = float(np.dot(s, s))
        keep = len(s)
        if total > 0.0:
            keep = int(np.sum(s > self.cutoff * s[0]))
        keep = max(1, min(keep, self.chi_max))
        if total > 0.0 and keep < len(s):
            discarded = float(np.dot(s[keep:], s[keep:]))
            self.trunc_err += np.sqrt(discarded / total)
        self.tensors[i] = u[:, :keep].reshape(chi_l, 2, keep)
        self.tensors[i + 1] = (s[:keep, None] * vt[:keep]).reshape(keep, 2, chi_r)
        self._center = i + 1

    def apply_bond(self, i, j, kernel):
        """Apply a 4x4 kernel (pair order 2*s_i + s_j) to sites (i, j)."""
        if j == i + 1 and 0 <= i < self.L - 1:
            self._apply_adjacent(i, kernel)
            return
        if i == self.L - 1 and j == 0:
            # swap the rightmost site across the lattice, act, swap back
            for p in range(self.L - 2, 0, -1):
                self._apply_adjacent(p, _SWAP)
            self._apply_adjacent(0, _SWAP @ kernel @ _SWAP)
            for p in range(1, self.L - 1):
                self._apply_adjacent(p, _SWAP)
            return
        raise InvalidParameterError(f"bond ({i}, {j}) out of range for L={self.L}")

    # -- sink handling, norm, contractions -----------------------------------

    def amplitude(self, bits):
        env = np.ones((1,))
        for k, b in enumerate(bits):
            env = env @ self.tensors[k][:, int(b), :]
        return float(env[0])

    def overlap_product(self, vectors):
        """<w|state> for a product bra w = (x) vectors[k], without log_norm."""
        env = np.ones((1,))
        for k, v in enumerate(vectors):
            mat = np.tensordot(np.asarray(v, dtype=float), self.tensors[k], axes=(0, 1))
            env = env @ mat
        return float(env[0])

    def overlap(self, other, site_op=None, site=None):
        """sum_z self_z other_z, optionally with a 2x2 operator at one site.

        Everything is real, so this is the plain bilinear pairing; log-norm
        accumulators of both states are *not* applied.
        """
        env = np.ones((1, 1))
        for k in range(self.L):
            a, b = self.tensors[k], other.tensors[k]
            if site_op is not None and k == site:
                env = np.einsum("ab,aic,ij,bjd->cd", env, a, site_op, b)
            else:
                env = np.einsum("ab,aic,bid->cd", env, a, b)
        return float(env[0, 0])

    def subtract_components(self, bit_patterns=None):
        """Zero out the components along the given product basis states.

        Defaults to the state's registered sinks.  Adds one bond-dimension
        unit per pattern before recompressing.
        """
        if bit_patterns is None:
            bit_patterns = self.sinks
        terms = []
        for bits in bit_patterns:
            amp = self.amplitude(bits)
            if amp != 0.0:
                terms.append((bits, -amp))
        if not terms:
            return
        self._add_products(terms)
        self.compress()

    def _add_products(self, terms):
        """state += sum of scale * |bits> via block direct sums."""
        k_extra = len(terms)
        new_tensors = []
        for site in range(self.L):
            t = self.tensors[site]
            chi_l, d, chi_r = t.shape
            nl = chi_l + (k_extra if site > 0 else 0)
            nr = chi_r + (k_extra if site < self.L - 1 else 0)
            nt = np.zeros((nl, d, nr))
            nt[:chi_l, :, :chi_r] = t
            for m, (bits, scale) in enumerate(terms):
                row = chi_l + m if site > 0 else 0
                col = chi_r + m if site < self.L - 1 else 0
                val = scale if site == 0 else 1.0
                nt[row, int(bits[site]), col] += val
            new_tensors.append(nt)
        self.tensors = new_tensors
        self._center = None

    def compress(self):
        """Full QR sweep right, then truncated SVD sweep back to site 0."""
        for k in range(self.L - 1):
            self._shift_center_right(k)
        for k in range(self.L - 1, 0, -1):
            t = self.tensors[k]
            chi_l, d, chi_r = t.shape
            u, s, vt = _svd(t.reshape(chi_l, d * chi_r))
            total = float(np.dot(s, s))
            keep = len(s)
            if total > 0.0:
                keep = int(np.sum(s > self.cutoff * s[0]))
            keep = max(1, min(keep, self.chi_max))
            if total > 0.0 and keep < len(s):
                discarded = float(np.dot(s[keep:], s[keep:]))
                self.trunc_err += np.sqrt(discarded / total)
            self.tensors[k] = vt[:keep].reshape(keep, d, chi_r)
            self.tensors[k - 1] = np.tensordot(
                self.tensors[k - 1], u[:, :keep] * s[:keep], axes=(2, 0)
            )
        self._center = 0

    def norm(self):
        if self._center is None:
            self._move_center(0)
        return float(np.linalg.norm(self.tensors[self._center]))

    def renormalize(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise SignalLostError("state norm is exactly zero")
        self.tensors[self._center] = self.tensors[self._center] / nrm
        self.log_norm += np.log(nrm)
        return self

    def to_dense(self):
        """Full 2^L weight vector (tests only; L <= 20 guards memory)."""
        if self.L > 20:
            raise InvalidParameterError("to_dense limited to L <= 20")
        acc = np.ones((1, 1))
        for t in self.tensors:
            chi_l, d, chi_r = t.shape
            acc = acc @ t.reshape(chi_l, d * chi_r)
            acc = acc.reshape(-1, chi_r)
        return acc.reshape(-1)

    # -- checkpointing -------------------------------------------------------

    MAGIC = b"OTRLXTT1"

    def save(self, path):
        """Binary checkpoint: little-endian float64 tensors with shape headers."""
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(struct.pack("<IdddI", self.L, self.log_norm, self.trunc_err,
                                 self.cutoff, self.chi_max))
            for t in self.tensors:
                fh.write(struct.pack("<III", *t.shape))
                fh.write(np.ascontiguousarray(t, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != cls.MAGIC:
                raise InvalidParameterError(f"not a checkpoint file: magic {magic!r}")
            L, log_norm, trunc_err, cutoff, chi_max = struct.unpack(
                "<IdddI", fh.read(struct.calcsize("<IdddI"))
            )
            tensors = []
            for _ in range(L):
                shape = struct.unpack("<III", fh.read(12))
                n = shape[0] * shape[1] * shape[2]
                data = np.frombuffer(fh.read(8 * n), dtype="<f8")
                tensors.append(data.reshape(shape).astype(float))
        state = cls(tensors, chi_max=chi_max, cutoff=cutoff, log_norm=log_norm)
        state.trunc_err = trunc_err
        return state


class DenseState:
    """Full 2^L weight vector; the brute-force oracle for the tensor train."""

    def __init__(self, vector, L, log_norm=0.0, sinks=()):
        if L > DENSE_MAX_SITES:
            raise InvalidParameterError(
                f"dense oracle limited to L <= {DENSE_MAX_SITES}, got L={L}"
            )
        self.vector = np.asarray(vector, dtype=float)
        if self.vector.size != 2 ** L:
            raise InvalidParameterError("vector length does not match L")
        self.L = L
        self.log_norm = float(log_norm)
        self.trunc_err = 0.0
        self.sinks = tuple(tuple(b) for b in sinks)

    @classmethod
    def from_product(cls, bits, sinks=(), **_ignored):
        L = len(bits)
        vec = np.zeros(2 ** L)
        vec[cls._index(bits, L)] = 1.0
        return cls(vec, L, sinks=sinks)

    @classmethod
    def from_factors(cls, vectors, sinks=(), **_ignored):
        vec = np.ones(1)
        for v in vectors:
            vec = np.kron(vec, np.asarray(v, dtype=float))
        return cls(vec, len(vectors), sinks=sinks)

    @staticmethod
    def _index(bits, L):
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        return idx

    def copy(self):
        out = DenseState(self.vector.copy(), self.L, log_norm=self.log_norm,
                         sinks=self.sinks)
        out.trunc_err = self.trunc_err
        return out

    def apply_bond(self, i, j, kernel):
        if not (0 <= i < self.L and 0 <= j < self.L and i != j):
            raise InvalidParameterError(f"bond ({i}, {j}) out of range for L={self.L}")
        psi = self.vector.reshape([2] * self.L)
        psi = np.moveaxis(psi, (i, j), (0, 1)).reshape(4, -1)
        psi = kernel @ psi
        psi = np.moveaxis(psi.reshape([2] * self.L), (0, 1), (i, j))
        self.vector = np.ascontiguousarray(psi).reshape(-1)

    def amplitude(self, bits):
        return float(self.vector[self._index(bits, self.L)])

    def overlap_product(self, vectors):
        psi = self.vector.reshape([2] * self.L)
        for v in vectors:
            psi = np.tensordot(np.asarray(v, dtype=float), psi, axes=(0, 0))
        return float(psi)

    def overlap(self, other, site_op=None, site=None):
        """sum_z self_z other_z, optionally with a 2x2 operator at one site."""
        ket = other.vector
        if site_op is not None:
            psi = ket.reshape([2] * self.L)
            psi = np.moveaxis(
                np.tensordot(np.asarray(site_op, dtype=float), psi, axes=(1, site)),
                0, site,
            )
            ket = psi.reshape(-1)
        return float(np.dot(self.vector, ket))

    def subtract_components(self, bit_patterns=None):
        if bit_patterns is None:
            bit_patterns = self.sinks
        for bits in bit_patterns:
            self.vector[self._index(bits, self.L)] = 0.0

    def norm(self):
        return float(np.linalg.norm(self.vector))

    def renormalize(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise SignalLostError("state norm is exactly zero")
        self.vector = self.vector / nrm
        self.log_norm += np.log(nrm)
        return self

    def to_dense(self):
        return self.vector.copy()


def apply_layer(state, bonds, matrix):
    """Apply one ordered list of bonds with a TransitionMatrix4."""
    kernel = matrix.site_kernel()
    for (i, j) in bonds:
        state.apply_bond(i, j, kernel)
    return state


def subtract_sinks(state):
    """Remove the registered sink components (fixed-point product states)."""
    state.subtract_components()
    return state


def renormalize(state):
    """Scale to unit norm, pushing the factor into the log-norm accumulator."""
    return state.renormalize()
