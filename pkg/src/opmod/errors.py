"""Exception hierarchy shared across the package."""


class OpmodError(Exception):
    """Base class for all library-specific errors."""


class InvalidInputError(OpmodError, ValueError):
    """Malformed constructor arguments (bad block list, bad shapes, bad flags)."""


class IncompatibilityError(OpmodError, ValueError):
    """Operands live over different algebras or modules."""


class DomainError(OpmodError, ValueError):
    """Value outside an operation's mathematical domain (e.g. non-positive input)."""


class ZeroModuleError(InvalidInputError):
    """A module constructor received the zero projection."""


class GenerationError(OpmodError, RuntimeError):
    """An instance generator cannot realize the requested shape."""


class PreconditionError(OpmodError, RuntimeError):
    """A higher-level analysis was invoked without its prerequisite."""


class InternalInconsistencyError(OpmodError, RuntimeError):
    """Derived data contradicts a certificate; signals a false certificate."""


class ParseError(OpmodError, ValueError):
    """A document could not be parsed; carries location information."""


class ValidationError(OpmodError, ValueError):
    """A parsed document violates the schema; names the offending field."""
