"""Exact truncated Laurent series in one variable, used to evaluate the
closed-form coefficient expressions near ``omega*h = 0`` where their
trigonometric form cancels catastrophically."""
from fractions import Fraction
import math

ORDER = 64
_INF = 10**9


class Series:
    __slots__ = ("val", "coeffs", "prec")

    def __init__(self, coeffs, val=0, prec=_INF):
        coeffs = [Fraction(c) for c in coeffs]
        while coeffs and coeffs[0] == 0 and val < prec:
            coeffs.pop(0)
            val += 1
        if not coeffs:
            val = prec if prec < _INF else 0
        self.val = val
        self.prec = prec
        self.coeffs = coeffs[: max(prec - val, 0)]

    @classmethod
    def const(cls, c):
        return cls([c])

    def _lift(self, other):
        return other if isinstance(other, Series) else Series.const(other)

    def coeff(self, n):
        i = n - self.val
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __add__(self, other):
        other = self._lift(other)
        lo = min(self.val, other.val)
        prec = min(self.prec, other.prec, lo + ORDER)
        return Series([self.coeff(n) + other.coeff(n) for n in range(lo, prec)], lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return Series([-c for c in self.coeffs], self.val, self.prec)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Series):
            f = Fraction(other)
            return Series([c * f for c in self.coeffs], self.val, self.prec)
        if not self.coeffs or not other.coeffs:
            return Series([], 0, min(self.val + other.prec, other.val + self.prec))
        val = self.val + other.val
        prec = min(self.val + other.prec, other.val + self.prec, val + ORDER)
        n = prec - val
        out = [Fraction(0)] * n
        b = other.coeffs
        for i, a in enumerate(self.coeffs[:n]):
            if a:
                for j in range(min(len(b), n - i)):
                    if b[j]:
                        out[i + j] += a * b[j]
        return Series(out, val, prec)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Series.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return self * (Fraction(1) / Fraction(other))
        if not other.coeffs:
            raise ZeroDivisionError("series denominator vanishes to working order")
        rel = min(self.prec - self.val, other.prec - other.val, ORDER)
        a = self.coeffs + [Fraction(0)] * max(rel - len(self.coeffs), 0)
        b = other.coeffs
        q = []
        for n in range(rel):
            acc = a[n]
            for i in range(max(0, n - len(b) + 1), n):
                acc -= q[i] * b[n - i]
            q.append(acc / b[0])
        return Series(q, self.val - other.val, self.val - other.val + rel)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __call__(self, x):
        """Evaluate the truncated series at a float."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc * x**self.val if self.val else acc


X = Series([0, 1])


def _freq(arg):
    if not isinstance(arg, Series):
        raise TypeError("series trig functions need a multiple of X")
    if any(arg.coeff(n) for n in range(arg.val, arg.val + len(arg.coeffs)) if n != 1):
        raise ValueError("argument must be k*X")
    return arg.coeff(1)


def _trig(k, odd):
    out = []
    for n in range(ORDER):
        if n % 2 == odd:
            sign = -1 if (n // 2) % 2 else 1
            out.append(Fraction(sign) * k**n / math.factorial(n))
        else:
            out.append(Fraction(0))
    return Series(out, 0, ORDER)


class SeriesMath:
    """Drop-in for the subset of :mod:`math` used by the closed forms."""

    @staticmethod
    def sin(arg):
        return _trig(_freq(arg), 1)

    @staticmethod
    def cos(arg):
        return _trig(_freq(arg), 0)

    @staticmethod
    def tan(arg):
        k = _freq(arg)
        return _trig(k, 1) / _trig(k, 0)
