"""Exception types raised by pinspace."""


class PinspaceError(Exception):
    """Base class for all library errors."""


class InvalidSettingError(PinspaceError, ValueError):
    pass


class ConfigurationError(PinspaceError, ValueError):
    pass


class ShapeError(PinspaceError, ValueError):
    pass


class NormalizationError(PinspaceError, ValueError):
    pass


class UnitarityError(PinspaceError, ValueError):
    pass


class SymmetryError(PinspaceError, ValueError):
    pass


class UnsupportedSettingError(PinspaceError, LookupError):
    pass


class DegenerateConstraintError(PinspaceError, ValueError):
    pass


class NotPinnedError(PinspaceError):
    pass


class NoPermutationError(PinspaceError):
    """No orbital relabeling reconciles the state with the requested face."""


class EmptyActiveSpaceError(PinspaceError):
    pass


class DegenerateNONWarning(UserWarning):
    """Natural orbitals are not unique; structural checks may depend on the basis."""
