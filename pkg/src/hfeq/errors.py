"""Exception taxonomy shared by every module.

Three families matter to callers (and to the CLI, which maps them to exit
codes): configuration problems, numerical-quality problems, and violated
call preconditions.  Everything derives from HfeqError so library users can
catch one base class.
"""

from __future__ import annotations


class HfeqError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HfeqError):
    """A config file or scenario description could not be used (CLI exit 2)."""


class NumericError(HfeqError):
    """A computation could not meet its numerical contract (CLI exit 3)."""


class ResolutionError(NumericError):
    """Grid or histogram binning too coarse for the requested operation."""


class TruncationError(NumericError):
    """Too much analytic mass falls outside the requested grid."""


class PreconditionError(HfeqError):
    """A documented call precondition was violated (CLI exit 4)."""


class InvalidArgumentError(PreconditionError):
    """An argument fails basic validation (sign, shape, domain)."""


class RangeError(PreconditionError):
    """A value falls outside the supported range; message reports the range."""


class DegenerateInputError(PreconditionError):
    """Input carries no usable structure (e.g. a spectrum with no peak)."""
