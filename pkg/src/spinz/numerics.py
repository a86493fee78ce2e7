"""Complex scalars carried with a separate real log scale."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ScaledComplex:
  """The number ``mantissa * exp(log_scale)``.

  Partition functions of large systems overflow double precision, so every
  engine in this package returns its result in this form.
  """

  mantissa: complex
  log_scale: float = 0.0

  @classmethod
  def from_complex(cls, z: complex) -> "ScaledComplex":
    return cls(complex(z), 0.0).normalized()

  def normalized(self) -> "ScaledComplex":
    m = abs(self.mantissa)
    if m == 0.0 or not math.isfinite(m):
      return self
    return ScaledComplex(self.mantissa / m, self.log_scale + math.log(m))

  def is_zero(self) -> bool:
    return self.mantissa == 0

  def log(self) -> complex:
    """Principal complex logarithm; real part ``log|Z|``, imaginary ``arg Z``."""
    if self.mantissa == 0:
      return complex(-math.inf, 0.0)
    return cmath.log(self.mantissa) + self.log_scale

  def value(self) -> complex:
    """Plain complex value (inf/0 when outside double range)."""
    if self.mantissa == 0:
      return 0j
    lr = math.log(abs(self.mantissa)) + self.log_scale
    if lr > 709.0:
      return complex(math.inf, 0.0)
    return self.mantissa * math.exp(self.log_scale)

  def __mul__(self, other: "ScaledComplex") -> "ScaledComplex":
    if not isinstance(other, ScaledComplex):
      other = ScaledComplex.from_complex(other)
    return ScaledComplex(self.mantissa * other.mantissa,
                         self.log_scale + other.log_scale).normalized()

  def __truediv__(self, other: "ScaledComplex") -> "ScaledComplex":
    if not isinstance(other, ScaledComplex):
      other = ScaledComplex.from_complex(other)
    if other.mantissa == 0:
      raise ZeroDivisionError("division by a zero ScaledComplex")
    return ScaledComplex(self.mantissa / other.mantissa,
                         self.log_scale - other.log_scale).normalized()

  def __add__(self, other: "ScaledComplex") -> "ScaledComplex":
    if not isinstance(other, ScaledComplex):
      other = ScaledComplex.from_complex(other)
    if self.mantissa == 0:
      return other
    if other.mantissa == 0:
      return self
    ls = max(self.log_scale, other.log_scale)
    m = (self.mantissa * math.exp(self.log_scale - ls)
         + other.mantissa * math.exp(other.log_scale - ls))
    return ScaledComplex(m, ls).normalized()


def rel_err(a: complex, b: complex) -> float:
  """Relative error ``|a-b|/|b|`` (absolute when ``b == 0``)."""
  d = abs(complex(a) - complex(b))
  n = abs(complex(b))
  return d / n if n > 0 else d


def scaled_rel_err(a: ScaledComplex, b: ScaledComplex) -> float:
  """Relative error between two scaled values, immune to overflow."""
  if b.is_zero():
    return 0.0 if a.is_zero() else math.inf
  r = a / b
  return abs(r.value() - 1.0)
