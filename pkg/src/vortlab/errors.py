"""Exception hierarchy shared by every vortlab module."""


class VortlabError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(VortlabError, ValueError):
    """A field contains non-finite entries or has the wrong shape."""


class DomainError(VortlabError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class GridMismatchError(VortlabError, ValueError):
    """Operands live on different grids."""


class UndefinedAngleError(VortlabError, ValueError):
    """Angle requested between vectors where one has zero length."""


class InsufficientDataError(VortlabError, ValueError):
    """Not enough samples/bins/records for the requested estimate."""


class DegenerateError(VortlabError, ValueError):
    """The requested quantity is undefined for this input (e.g. all-zero field)."""


class CFLError(VortlabError, RuntimeError):
    """Timestep violates the advective CFL guard."""


class BlowupError(VortlabError, RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, t, step_index, max_velocity):
        self.t = t
        self.step_index = step_index
        self.max_velocity = max_velocity
        super().__init__(
            f"non-finite state at t={t!r} (step {step_index}); "
            f"last finite max|u|={max_velocity!r}"
        )


class CheckpointFormatError(VortlabError, ValueError):
    """Checkpoint file is malformed or has an unknown version."""


class ConfigError(VortlabError, ValueError):
    """Run configuration file is invalid."""
