"""Exception types shared across the package."""


class OtocRelaxError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(OtocRelaxError, ValueError):
    """A parameter is outside its valid domain (q < 2, bad site index, ...)."""


class UnsupportedEnsembleError(OtocRelaxError, ValueError):
    """Operation requires a gate family it was not given (e.g. q != 2, non dual-unitary)."""


class InvalidGeometryError(OtocRelaxError, ValueError):
    """Lattice/schedule request is inconsistent (odd L for BW-PBC, L too small, ...)."""


class TruncationCeilingError(OtocRelaxError, RuntimeError):
    """Cumulative truncation error crossed the hard ceiling.

    Carries the time step at which the ceiling was crossed.
    """

    def __init__(self, time_step, trunc_err, ceiling):
        self.time_step = time_step
        self.trunc_err = trunc_err
        self.ceiling = ceiling
        super().__init__(
            f"truncation error {trunc_err:.3e} exceeded ceiling {ceiling:.3e} "
            f"at t={time_step}"
        )


class SignalLostError(OtocRelaxError, RuntimeError):
    """The tracked quantity decayed to exactly zero / below representable range."""


class FitWindowError(OtocRelaxError, ValueError):
    """A fit window contains too few points. Message lists the required run length."""


class DegenerateNormalizationError(OtocRelaxError, RuntimeError):
    """Grid normalization Z(t) vanished; the heatmap is undefined."""


class NumericalIntegrityError(OtocRelaxError, RuntimeError):
    """A conserved numerical invariant (state norm, ...) drifted beyond tolerance."""
