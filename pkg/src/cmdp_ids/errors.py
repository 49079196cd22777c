"""Exception hierarchy shared across the package."""


class CmdpIdsError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(CmdpIdsError, ValueError):
    pass


class NumericError(CmdpIdsError, ArithmeticError):
    pass


class FormatError(CmdpIdsError):
    """A container file could not be read back."""


class BadMagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class CorruptFileError(FormatError):
    pass


class InconsistentModelError(FormatError):
    """Stored tensor shapes disagree with the stored layer description."""


class ModeError(CmdpIdsError, ValueError):
    pass


class EnvError(CmdpIdsError, RuntimeError):
    pass


class ActionError(CmdpIdsError, ValueError):
    pass


class ConfigError(CmdpIdsError, ValueError):
    pass


class IngestError(CmdpIdsError):
    pass


class SchemaError(CmdpIdsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class LabelError(CmdpIdsError, ValueError):
    pass


class PlanError(CmdpIdsError, ValueError):
    pass
