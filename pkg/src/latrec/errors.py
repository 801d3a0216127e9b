"""Exception hierarchy.

``MathematicalNegative`` subclasses mark outcomes that are answers rather than
misuse (no solution, failed verification); the CLI maps them to exit code 1.
"""


class LatrecError(Exception):
    """Base class for every error raised by this package."""


class MathematicalNegative(LatrecError):
    """A well-posed question whose answer is negative."""


class ParameterDegreeOverflow(LatrecError):
    """A product of two parameter-carrying factors was requested."""


class NotExactDivision(LatrecError):
    """Polynomial division left a nonzero remainder."""


class NoSolution(MathematicalNegative):
    """Inconsistent linear system."""


class Underdetermined(MathematicalNegative):
    def __init__(self, message, free=()):
        super().__init__(message)
        self.free = tuple(free)


class NotExactDifference(MathematicalNegative):
    """The expression has no antidifference in the Laurent polynomial ring."""

    def __init__(self, message, residue=None):
        super().__init__(message)
        self.residue = residue


class NoDilationSymmetry(MathematicalNegative):
    pass


class NonpositiveWeights(MathematicalNegative):
    def __init__(self, message, weights=None, relations=()):
        super().__init__(message)
        self.weights = weights
        self.relations = tuple(relations)


class NotUniform(MathematicalNegative):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class InfiniteBasis(LatrecError):
    pass


class NonlocalDepthExceeded(LatrecError):
    pass


class EmptyCandidate(MathematicalNegative):
    pass


class HierarchyBroken(MathematicalNegative):
    """Hierarchy generation stopped early; ``prefix`` holds the valid members."""

    def __init__(self, message, prefix=(), step=None):
        super().__init__(message)
        self.prefix = list(prefix)
        self.step = step


class DocumentError(LatrecError):
    """Malformed input document (syntax, undeclared names, bad structure)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class UndeclaredVariable(DocumentError):
    pass


class NonPolynomialRHS(DocumentError):
    pass
