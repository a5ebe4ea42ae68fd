"""Scalar fields: exact rationals (default) and machine reals with a zero tolerance.

Scalars are plain Python values (``fractions.Fraction`` or ``float``); a field
object supplies the operations that depend on the mode, chiefly the zero test.
The hot loops in :mod:`twdiag.boxes` use native arithmetic on these values and
only call back into the field for zero tests.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from numbers import Rational


class FieldError(ValueError):
    pass


class ModeMismatch(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


class Sign(enum.IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class Field:
    """Common interface. Subclasses fix the scalar type."""

    name = "abstract"
    exact = False

    def coerce(self, value):
        raise NotImplementedError

    def check(self, *values):
        raise NotImplementedError

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def add(self, a, b):
        self.check(a, b)
        return a + b

    def sub(self, a, b):
        self.check(a, b)
        return a - b

    def mul(self, a, b):
        self.check(a, b)
        return a * b

    def neg(self, a):
        self.check(a)
        return -a

    def div(self, a, b):
        self.check(a, b)
        if self.is_zero(b):
            raise DivisionByZero(f"division of {self.format(a)} by zero")
        return a / b

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def sign(self, a) -> Sign:
        if self.is_zero(a):
            return Sign.ZERO
        return Sign.POSITIVE if a > 0 else Sign.NEGATIVE

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, a) -> str:
        raise NotImplementedError


class RationalField(Field):
    """Arbitrary-precision rationals; every zero test is exact."""

    name = "rational"
    exact = True

    def coerce(self, value) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            if not math.isfinite(value):
                raise FieldError(f"non-finite value {value!r}")
            return Fraction(value)
        if isinstance(value, (int, Rational, str)):
            return Fraction(value)
        raise ModeMismatch(f"cannot coerce {type(value).__name__} to a rational")

    def check(self, *values):
        for a in values:
            if not isinstance(a, Fraction):
                raise ModeMismatch(f"expected Fraction, got {type(a).__name__}")

    def is_zero(self, a) -> bool:
        return a == 0

    def parse(self, text: str) -> Fraction:
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad rational {text!r}") from exc

    def format(self, a) -> str:
        a = Fraction(a)
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def __repr__(self):
        return "RationalField()"


class RealField(Field):
    """IEEE doubles. ``is_zero`` compares against ``tol * scale``.

    ``scale`` is the largest absolute entry of the input matrix, captured
    when a matrix is built over a field whose scale is still unset; the
    tolerance is therefore relative.
    """

    name = "real"
    exact = False

    def __init__(self, tol: float = 1e-12, scale: float | None = None):
        if not tol > 0:
            raise FieldError("zero tolerance must be positive")
        if scale is not None and (not scale > 0 or not math.isfinite(scale)):
            scale = 1.0
        self.tol = float(tol)
        self.scale = scale
        self._threshold = self.tol * (1.0 if scale is None else scale)

    @property
    def threshold(self) -> float:
        return self._threshold

    def with_scale(self, scale: float) -> "RealField":
        return RealField(self.tol, scale)

    def coerce(self, value) -> float:
        if isinstance(value, (Fraction, int, float, Rational)):
            x = float(value)
        elif isinstance(value, str):
            x = self.parse(value)
        else:
            raise ModeMismatch(f"cannot coerce {type(value).__name__} to a real")
        if not math.isfinite(x):
            raise FieldError(f"non-finite value {value!r}")
        return x

    def check(self, *values):
        for a in values:
            if not isinstance(a, float):
                raise ModeMismatch(f"expected float, got {type(a).__name__}")

    def _finite(self, x: float) -> float:
        if not math.isfinite(x):
            raise FieldError("arithmetic produced a non-finite value")
        return x

    def add(self, a, b):
        return self._finite(super().add(a, b))

    def sub(self, a, b):
        return self._finite(super().sub(a, b))

    def mul(self, a, b):
        return self._finite(super().mul(a, b))

    def div(self, a, b):
        return self._finite(super().div(a, b))

    def is_zero(self, a) -> bool:
        return abs(a) <= self._threshold

    def parse(self, text: str) -> float:
        text = text.strip()
        try:
            if "/" in text:
                x = float(Fraction(text))
            else:
                x = float(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad real {text!r}") from exc
        if not math.isfinite(x):
            raise FieldError(f"non-finite value {text!r}")
        return x

    def format(self, a) -> str:
        return repr(float(a))

    def __repr__(self):
        return f"RealField(tol={self.tol!r}, scale={self.scale!r})"


RATIONAL = RationalField()


def get_field(mode: str = "rational", tol: float = 1e-12) -> Field:
    if mode == "rational":
        return RATIONAL
    if mode == "real":
        return RealField(tol)
    raise FieldError(f"unknown field mode {mode!r}")
