"""Exception hierarchy shared across the toolkit."""


class RibolibError(Exception):
    """Base class for all toolkit errors."""


class IllegalSymbol(RibolibError):
    """A sequence or structure string contains a symbol outside its alphabet."""


class UnbalancedStructure(RibolibError):
    """A dot-bracket string has an unmatched '(' or ')'."""


class LengthMismatch(RibolibError):
    """Two aligned strings differ in length."""


class TooLong(RibolibError):
    """Input exceeds the size limit of an exhaustive routine."""


class ExternalFolderFailure(RibolibError):
    """An external folding command failed or produced unusable output."""


class MisalignedTemplates(RibolibError):
    """Sequence and structure templates of a design space differ in core length."""


class ExtensionSiteMismatch(RibolibError):
    """Extension sites of the two templates differ in count or position."""


class BadLengthRange(RibolibError):
    """A design-space length range is inconsistent with its templates."""


class IllegalToken(RibolibError):
    """A design-space document contains an unknown token or key."""


class CorpusTooSmall(RibolibError):
    """Not enough corpus entries satisfy a dataset's length filter."""


class IllegalPairAction(RibolibError):
    """A pair action was forced at a site without an identifiable partner."""


class EpisodeDone(RibolibError):
    """step() was called on a finished episode."""


class ShapeMismatch(RibolibError):
    """A network input does not match the configured window size."""


class AnchorNotFound(RibolibError):
    """A candidate does not carry the riboswitch complementary-region anchor."""
