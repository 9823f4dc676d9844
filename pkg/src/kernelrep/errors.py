"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the CLI copies
into its error documents.
"""


class KernelRepError(Exception):
    code = "E_GENERIC"


class DimensionMismatch(KernelRepError, ValueError):
    code = "E_DIMENSION"


class SpaceMismatch(KernelRepError, ValueError):
    code = "E_SPACE"


class InvalidSpace(KernelRepError, ValueError):
    """Bad weights, duplicate atoms, unknown norm tags."""

    code = "E_INVARIANT"


class ExponentError(KernelRepError, ValueError):
    code = "E_EXPONENT"


class NotExactError(KernelRepError, ValueError):
    """The requested quantity has no closed form in this norm regime."""

    code = "E_NOT_EXACT"


class UnorderedSpaceError(KernelRepError, ValueError):
    code = "E_UNORDERED"


class NonLocalError(KernelRepError, ValueError):
    """Raised for non-local input; ``witness`` holds ``(atoms, f)``."""

    code = "E_NON_LOCAL"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class FactorError(KernelRepError, ValueError):
    code = "E_FACTOR"


class DocumentError(KernelRepError, ValueError):
    code = "E_DOCUMENT"

    def __init__(self, message, path="", line=None):
        where = [f"line {line}"] if line is not None else []
        where += [path] if path else []
        super().__init__(": ".join(where + [message]))
        self.path = path
        self.line = line


class DocumentSyntaxError(DocumentError):
    code = "E_SYNTAX"


class SchemaError(DocumentError):
    code = "E_SCHEMA"


class InvariantError(DocumentError):
    code = "E_INVARIANT"
