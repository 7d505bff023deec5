"""Exception types shared across the toolkit."""


class CodeScoreError(Exception):
    """Base class for toolkit errors."""


class SchemaError(CodeScoreError):
    """Malformed input files, records, or identifiers (CLI exit code 2)."""


class DegeneracyError(CodeScoreError):
    """Numerically degenerate input: empty masks, zero norms, constant
    score series, vanishing denominators (CLI exit code 3)."""
