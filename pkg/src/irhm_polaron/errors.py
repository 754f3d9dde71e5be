"""Exception types raised by the library."""


class UnsupportedConfigurationError(ValueError):
    """A builder was asked for a configuration it cannot represent (e.g. no phonon factor)."""


class InsufficientCutoffError(ValueError):
    """The phonon Fock cutoff is too small for the requested perturbative order."""


class StepSizeError(ValueError):
    """Fixed-step integration would violate the stability guard."""

    def __init__(self, message, suggested_n_steps):
        super().__init__(message)
        self.suggested_n_steps = suggested_n_steps


class OutOfScopeError(NotImplementedError):
    """Requested physics regime is deliberately not covered (finite temperature)."""


class SamplingError(ValueError):
    """Samples are too coarse for unambiguous phase unwrapping."""


class SeriesOverflowError(OverflowError):
    """Series argument is beyond the guarded range."""


class InvalidStateError(ValueError):
    """A density matrix failed its trace, Hermiticity or positivity monitor."""
