"""Exception types shared across the package."""


class DefTqftError(Exception):
    """Base class for all errors raised by this package."""


class LabelError(DefTqftError):
    """An identifier does not refer to an existing label."""


class GroupError(DefTqftError):
    """A multiplication table fails the group laws."""


class DefectDataError(DefTqftError):
    """Defect data is structurally invalid for the requested operation."""


class ChainError(DefTqftError):
    """Word endpoints do not chain."""


class ComposeError(DefTqftError):
    """Boundaries do not match for the requested composition."""


class ParallelError(DefTqftError):
    """Two diagrams that must be parallel are not."""


class TopologyError(DefTqftError):
    """A combinatorial map is not a sphere, or a link is malformed."""


class ColourError(DefTqftError):
    """An edge colour is not admissible for its label."""


class DegeneracyError(DefTqftError):
    """A pairing matrix is singular beyond tolerance."""


class FinenessError(DefTqftError):
    """A bordism is not fine (ball cells and disc faces) where required."""


class SchemaError(DefTqftError):
    """An input document does not match its schema."""
