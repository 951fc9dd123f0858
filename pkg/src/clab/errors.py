"""Exception hierarchy.

Every warning the CLI puts into a report is the name of one of these classes.
"""


class ClabError(Exception):
    """Base class for all library errors."""


class ExprSyntaxError(ClabError, ValueError):
    """Malformed expression text.

    Attributes
    ----------
    offset : int
        Byte offset into the source text where parsing failed.
    expected : frozenset of str
        Token kinds that would have been accepted at ``offset``.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        detail = f" (expected one of: {exp})" if exp else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, offset):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset,
                         {"xi", "i", "conj", "exp"})


class DivisionByZero(ClabError, ZeroDivisionError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"zero denominator at node {node_id}")


class DegenerateField(ClabError):
    """Tangent field vanishes on a whole sampled circle."""


class NonGlobalSection(ClabError):
    """The two chart expressions do not satisfy the TP^1 transition rule."""

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"transition residual {residual:.3e} exceeds {tol:.3e}")


class DegenerateFrame(ClabError):
    """|dminusF|^2 - |dplusF|^2 vanishes: the point is focal."""


class DegenerateCurvature(ClabError):
    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class FocalPoint(ClabError):
    def __init__(self, r):
        self.r = r
        super().__init__(f"focal point at r={r!r}")


class DegenerateShear(ClabError):
    """Shear vanishes on an open set; zeros are not isolated."""

    def __init__(self, fraction):
        self.fraction = fraction
        super().__init__(f"shear below tolerance on {fraction:.1%} of grid nodes")


class ZeroOnContour(ClabError):
    pass


class NonConvergent(ClabError):
    pass


class NotIntegrable(ClabError):
    def __init__(self, max_twist, tol):
        self.max_twist = max_twist
        self.tol = tol
        super().__init__(f"max |Im rho| = {max_twist:.3e} exceeds {tol:.3e}")


class PathInconsistent(ClabError):
    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"row/column sweeps differ by {residual:.3e} (> {tol:.3e})")


class SpecError(ClabError, ValueError):
    """Malformed congruence spec or configuration."""
