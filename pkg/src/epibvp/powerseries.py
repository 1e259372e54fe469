"""Finite power series in t with half-integer exponents.

The solution machinery for the reduced equation

    u''(t) = u(t)^2 / (8 t^2) + lambda/2,   t in (0, 1/2],

only ever manipulates functions of the form

    f(t) = sum_k  a_k * t^(k/2),   k = 0, 1, 2, ...

Decomposition iterates built from the polynomial templates u0 stay on
integer exponents, while the seed functions of the monotone engine contain
sqrt(2 t); one lattice of half-integer exponents covers both.  A series is
stored densely as a coefficient array indexed by k, so the exponent of
``coeffs[k]`` is ``k/2``.  The class is closed under every operation the
iteration needs:

* add / subtract / scalar multiply,
* Cauchy product (exponents add, i.e. plain convolution in k),
* multiplication by t (shift by 2) and division by t^2 (shift by -4),
* antiderivative vanishing at 0,
* term-wise second derivative (for residual evaluation).

Division by t^2 is only legal when every term has exponent >= 2; anything
else signals a seed that violates u(0) = 0, u ~ c t and raises
:class:`~epibvp.errors.NegativeExponent`.  Values are immutable after
construction and all operations return new instances.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import DomainError, NegativeExponent

# Coefficients below this magnitude are treated as exact zeros during
# normalization.  Deliberately tiny: truncation is the caller's job.
_DROP_BELOW = 1e-300


class PowerSeries:
    """A finite sum of real multiples of t^(k/2), k a non-negative integer."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        a = np.array(coeffs, dtype=float).ravel()
        if a.size and not np.all(np.isfinite(a)):
            raise ValueError("non-finite coefficient")
        a[np.abs(a) < _DROP_BELOW] = 0.0
        nz = np.nonzero(a)[0]
        if nz.size == 0:
            a = np.zeros(0)
        else:
            a = a[: nz[-1] + 1].copy()
        self.coeffs = a
        self.coeffs.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls) -> "PowerSeries":
        return cls(())

    @classmethod
    def from_terms(cls, terms) -> "PowerSeries":
        """Build from (k, coefficient) pairs; k counts half-powers of t."""
        terms = list(terms)
        if not terms:
            return cls(())
        kmax = max(int(k) for k, _ in terms)
        if min(int(k) for k, _ in terms) < 0:
            raise NegativeExponent("exponent below 0")
        a = np.zeros(kmax + 1)
        for k, c in terms:
            a[int(k)] += float(c)
        return cls(a)

    # -- views ----------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def min_exponent_k(self) -> int:
        """Smallest k with a nonzero coefficient (0 for the zero series)."""
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[0]) if nz.size else 0

    def terms(self):
        """Normalized (k, coefficient) pairs in increasing k, zeros skipped."""
        return [(int(k), float(self.coeffs[k])) for k in np.nonzero(self.coeffs)[0]]

    def debug_json(self) -> str:
        return json.dumps([[k, c] for k, c in self.terms()])

    def __repr__(self):
        if self.is_zero:
            return "PowerSeries(0)"
        bits = []
        for k, c in self.terms():
            if k == 0:
                bits.append(f"{c:g}")
            elif k % 2 == 0:
                bits.append(f"{c:g}*t^{k // 2}")
            else:
                bits.append(f"{c:g}*t^({k}/2)")
        return "PowerSeries(" + " + ".join(bits) + ")"

    # -- algebra ----------------------------------------------------------------

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        out = np.zeros(n)
        out[: a.size] += a
        out[: b.size] += b
        return PowerSeries(out)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(-self.coeffs)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            if self.is_zero or other.is_zero:
                return PowerSeries(())
            return PowerSeries(np.convolve(self.coeffs, other.coeffs))
        return PowerSeries(self.coeffs * float(other))

    __rmul__ = __mul__

    def mul_t(self) -> "PowerSeries":
        """Multiply by t (exponent shift by +2 in k-units)."""
        if self.is_zero:
            return self
        return PowerSeries(np.concatenate([np.zeros(2), self.coeffs]))

    def scale_div_t2(self) -> "PowerSeries":
        """Divide by t^2; every exponent must be >= 2 (k >= 4)."""
        if self.is_zero:
            return self
        if np.any(self.coeffs[: min(4, self.coeffs.size)] != 0.0):
            raise NegativeExponent(
                "division by t^2 needs every exponent >= 2; "
                f"lowest present is {self.min_exponent_k}/2"
            )
        return PowerSeries(self.coeffs[4:])

    def integrate(self) -> "PowerSeries":
        """Antiderivative with value 0 at t = 0: t^(k/2) -> t^(k/2+1)/(k/2+1)."""
        if self.is_zero:
            return self
        k = np.arange(self.coeffs.size)
        return PowerSeries(np.concatenate([np.zeros(2), self.coeffs / (k / 2.0 + 1.0)]))

    def second_derivative(self) -> "PowerSeries":
        """Term-wise d2/dt2; stays on the lattice only if no t^(1/2) or t^(3/2) term."""
        if self.is_zero:
            return self
        a = self.coeffs
        if a.size > 1 and a[1] != 0.0 or a.size > 3 and a[3] != 0.0:
            raise NegativeExponent("second derivative leaves the exponent lattice")
        k = np.arange(a.size)
        d = a * (k / 2.0) * (k / 2.0 - 1.0)
        return PowerSeries(d[4:] if d.size > 4 else ())

    # -- evaluation ---------------------------------------------------------------

    def eval(self, t: float) -> float:
        """Value at t via compensated summation of the individual terms."""
        t = float(t)
        if t < 0.0:
            raise DomainError(f"t = {t} < 0")
        if self.is_zero:
            return 0.0
        x = math.sqrt(t)
        return math.fsum(c * x**k for k, c in self.terms())

    def eval_grid(self, ts) -> np.ndarray:
        """Vectorized evaluation on an array of t >= 0 (Horner in sqrt(t))."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < 0.0):
            raise DomainError("negative t in grid")
        x = np.sqrt(ts)
        out = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            out = out * x + c
        return out

    def deriv_at(self, t: float) -> float:
        """First derivative at a point (t > 0, or t = 0 when all exponents allow)."""
        t = float(t)
        if t < 0.0:
            raise DomainError(f"t = {t} < 0")
        if t == 0.0:
            if self.coeffs.size > 1 and self.coeffs[1] != 0.0:
                raise DomainError("derivative singular at t = 0")
            return float(self.coeffs[2]) if self.coeffs.size > 2 else 0.0
        x = math.sqrt(t)
        return math.fsum(
            c * (k / 2.0) * x ** (k - 2) for k, c in self.terms() if k != 0
        )

    def deriv2_at(self, t: float) -> float:
        """Second derivative at a point t > 0 (no lattice restriction)."""
        t = float(t)
        if t <= 0.0:
            raise DomainError("second derivative needs t > 0")
        x = math.sqrt(t)
        return math.fsum(
            c * (k / 2.0) * (k / 2.0 - 1.0) * x ** (k - 4)
            for k, c in self.terms()
            if k not in (0, 2)
        )
