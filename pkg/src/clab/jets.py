"""First-order Wirtinger jets.

A :class:`Jet1` carries a complex value together with its derivatives with
respect to a complex parameter ``nu`` and its conjugate.  The fields may be
Python complex numbers or numpy arrays of equal shape, so a whole grid is
differentiated in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np


def _is_zero(x) -> bool:
    return bool(np.any(x == 0))


@dataclass(frozen=True)
class Jet1:
    value: Any
    d: Any = 0j
    dbar: Any = 0j

    # make ``ndarray * Jet1`` defer to the reflected Jet1 operators
    __array_ufunc__ = None

    @classmethod
    def variable(cls, z) -> "Jet1":
        """Seed jet of the identity map ``nu -> nu``."""
        z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
        one = np.ones_like(z) if np.ndim(z) else 1 + 0j
        return cls(z, one, 0 * one)

    @classmethod
    def constant(cls, c) -> "Jet1":
        return cls(c, 0j, 0j)

    def conj(self) -> "Jet1":
        return Jet1(np.conj(self.value), np.conj(self.dbar), np.conj(self.d))

    def exp(self) -> "Jet1":
        e = np.exp(self.value)
        return Jet1(e, e * self.d, e * self.dbar)

    @property
    def du(self):
        """Derivative along the real part of ``nu``."""
        return self.d + self.dbar

    @property
    def dv(self):
        """Derivative along the imaginary part of ``nu``."""
        return 1j * (self.d - self.dbar)

    def __neg__(self) -> "Jet1":
        return Jet1(-self.value, -self.d, -self.dbar)

    def __add__(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            return Jet1(self.value + other.value, self.d + other.d, self.dbar + other.dbar)
        return Jet1(self.value + other, self.d, self.dbar)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            return Jet1(self.value - other.value, self.d - other.d, self.dbar - other.dbar)
        return Jet1(self.value - other, self.d, self.dbar)

    def __rsub__(self, other) -> "Jet1":
        return Jet1(other - self.value, -self.d, -self.dbar)

    def __mul__(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            a, b = self.value, other.value
            return Jet1(a * b, self.d * b + a * other.d, self.dbar * b + a * other.dbar)
        return Jet1(self.value * other, self.d * other, self.dbar * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            if _is_zero(other.value):
                raise ZeroDivisionError("jet division by zero")
            q = self.value / other.value
            return Jet1(q, (self.d - q * other.d) / other.value,
                        (self.dbar - q * other.dbar) / other.value)
        if _is_zero(other):
            raise ZeroDivisionError("jet division by zero")
        return Jet1(self.value / other, self.d / other, self.dbar / other)

    def __rtruediv__(self, other) -> "Jet1":
        return Jet1.constant(other) / self

    def __pow__(self, n: int) -> "Jet1":
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        n = int(n)
        if n == 0:
            return Jet1(self.value ** 0, 0 * self.d, 0 * self.dbar)
        if n < 0 and _is_zero(self.value):
            raise ZeroDivisionError("negative power of zero")
        lower = self.value ** (n - 1)
        return Jet1(lower * self.value, n * lower * self.d, n * lower * self.dbar)
