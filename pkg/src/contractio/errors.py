"""Exception types shared across the package."""

from __future__ import annotations


class ContractioError(Exception):
    """Base class for all library errors."""


class TooLargeError(ContractioError):
    """A finite-group computation exceeds the table-size budget."""


class NotCoprimeError(ContractioError):
    """A mod-p factor pair is not coprime, so a Hensel lift cannot start."""


class NotSquarefreeError(ContractioError):
    """gcd(f, f') != 1; the caller must split off the squarefree part."""


class UncertifiedError(ContractioError):
    """A yes/no question cannot be decided at the working precision."""


class UncertifiedFactorizationError(ContractioError):
    """Factorization left uncertified pieces; carries partial results."""

    def __init__(self, message, factorization=None, partial_chain=None):
        super().__init__(message)
        self.factorization = factorization
        self.partial_chain = partial_chain


class InconclusiveError(ContractioError):
    """The contractivity oracle hit its power budget without a decision."""


class NoRootError(ContractioError):
    """No n-th root exists for the requested element."""


class NotSimpleError(ContractioError):
    """classify_simple was applied to a non-simple group."""


class ValidationError(ContractioError):
    """A group definition violates a construction invariant."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        base = super().__str__()
        if self.line is not None:
            return f"{self.line}:{self.column}: {base}"
        return base


class DslSyntaxError(ValidationError):
    """Source text does not match the group-definition grammar."""

    def __init__(self, message, line, column, expected=None):
        super().__init__(message, line, column)
        self.expected = tuple(expected) if expected else ()

    def __str__(self):
        base = ValidationError.__str__(self)
        if self.expected:
            return f"{base} (expected {', '.join(self.expected)})"
        return base
