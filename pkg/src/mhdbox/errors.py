"""Exception types shared across the package."""

from __future__ import annotations


class MhdboxError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MhdboxError):
    """Invalid run configuration; the message names the offending key path."""


class CFLError(MhdboxError):
    """The requested time step exceeds the advective or acoustic CFL limit."""


class BlowupError(MhdboxError):
    """The integration produced non-finite values (or nonpositive density).

    Attributes
    ----------
    t : float
        Time at which the blowup was detected.
    last_state : object or None
        Last finite state before the failed step, when available.
    records : list or None
        Diagnostics records accumulated before the blowup, when available.
    """

    def __init__(self, t: float, message: str = "integration blew up"):
        super().__init__(f"{message} at t = {t:.6g}")
        self.t = float(t)
        self.last_state = None
        self.records = None


class SweepAborted(MhdboxError):
    """A Mach-number sweep stopped early; partial results are preserved.

    Attributes
    ----------
    partial : object
        SweepResult holding the rows completed before the abort.
    cause : BaseException
        The solver error that triggered the abort.
    """

    def __init__(self, partial, cause: BaseException):
        super().__init__(f"sweep aborted: {cause}")
        self.partial = partial
        self.cause = cause
