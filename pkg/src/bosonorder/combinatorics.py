"""Stirling numbers of the second kind, Bell numbers and Bell polynomials.

Everything here is exact (``int`` / ``Fraction``) except :func:`dobinski`,
which sums the Poisson-moment series numerically.

The Stirling triangle is memoized behind a lock; after it has been grown to
the largest ``n`` in use, concurrent readers never block on each other's
results changing.
"""

from __future__ import annotations

import decimal
import math
import threading
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "Polynomial",
    "IntPolynomial",
    "TruncatedSeries",
    "stirling_rec",
    "stirling_explicit",
    "stirling_row",
    "bell_number",
    "bell_polynomial",
    "dobinski",
    "poisson_moment",
    "egf_bell",
    "egf_stirling",
    "falling_factorial",
    "falling_factorial_expand",
    "from_falling_factorials",
    "bell_poly_recurrence_check",
    "sheffer_identity_check",
    "xd_power_apply",
    "stirling_table_tsv",
]

Number = Union[int, Fraction]


class Polynomial:
    """Dense univariate polynomial with exact rational coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``; trailing zeros are stripped.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def x(cls) -> Polynomial:
        return cls([0, 1])

    @classmethod
    def constant(cls, c: Number) -> Polynomial:
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other) -> Polynomial:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(self[i] + other[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, Fraction)):
            return Polynomial(c * other for c in self.coeffs)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        out = Polynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        # Horner; works for Fraction, int, float or complex arguments.
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, (int, Fraction)) else float(c))
        return acc

    def to_dict(self) -> dict:
        return {"coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs]}

    def __str__(self) -> str:
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            mag = abs(c)
            body = str(mag) if not mono else (mono if mag == 1 else f"{mag} {mono}")
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


IntPolynomial = Polynomial


class TruncatedSeries:
    """Power series ``c_0 + c_1 t + ... + c_N t^N`` with explicit order ``N``.

    Arithmetic is truncated at ``N``; nothing past the order is ever read.
    """

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Iterable[Number], order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        cs = [Fraction(c) for c in coeffs][: order + 1]
        cs += [Fraction(0)] * (order + 1 - len(cs))
        self.order = order
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def exp_t(cls, order: int) -> TruncatedSeries:
        """Truncation of ``e^t``."""
        return cls((Fraction(1, math.factorial(n)) for n in range(order + 1)), order)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def _check(self, other: TruncatedSeries):
        if other.order != self.order:
            raise ValueError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        self._check(other)
        return TruncatedSeries((a + b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __sub__(self, other: TruncatedSeries) -> TruncatedSeries:
        self._check(other)
        return TruncatedSeries((a - b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __mul__(self, other) -> TruncatedSeries:
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries((c * other for c in self.coeffs), self.order)
        if isinstance(other, Polynomial):
            other = TruncatedSeries(other.coeffs, self.order)
        self._check(other)
        n = self.order
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(n + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        return TruncatedSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> TruncatedSeries:
        out = TruncatedSeries([1], self.order)
        for _ in range(k):
            out = out * self
        return out

    def exp(self) -> TruncatedSeries:
        """``exp`` of a series with zero constant term, via ``f' = g' f``."""
        if self.coeffs[0] != 0:
            raise ValueError("exp needs a zero constant term for exact coefficients")
        g = self.coeffs
        f = [Fraction(1)] + [Fraction(0)] * self.order
        for n in range(1, self.order + 1):
            f[n] = sum(k * g[k] * f[n - k] for k in range(1, n + 1)) / n
        return TruncatedSeries(f, self.order)

    def derivative(self) -> TruncatedSeries:
        """``d/dt``; the result is one order shorter since c_N carries no info on c_{N+1}."""
        if self.order == 0:
            return TruncatedSeries([0], 0)
        return TruncatedSeries((k * self.coeffs[k] for k in range(1, self.order + 1)), self.order - 1)

    def times_t(self) -> TruncatedSeries:
        """Multiplication by the variable; the order grows by one."""
        return TruncatedSeries((Fraction(0),) + self.coeffs, self.order + 1)

    def to_dict(self) -> dict:
        return {"order": self.order, "coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs]}

    def __repr__(self) -> str:
        return f"TruncatedSeries({[str(c) for c in self.coeffs]}, order={self.order})"


# ---------------------------------------------------------------------------
# Stirling / Bell numbers
# ---------------------------------------------------------------------------

_triangle: list[list[int]] = [[1]]
_triangle_lock = threading.Lock()


def _grow(n: int) -> None:
    with _triangle_lock:
        while len(_triangle) <= n:
            prev = _triangle[-1]
            m = len(prev)  # building row m from row m-1
            row = [0] * (m + 1)
            for k in range(1, m + 1):
                row[k] = (k * prev[k] if k < m else 0) + prev[k - 1]
            _triangle.append(row)


def stirling_row(n: int) -> list[int]:
    """Row ``[S(n,0), ..., S(n,n)]`` of the triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(_triangle) <= n:
        _grow(n)
    return list(_triangle[n])


def stirling_rec(n: int, k: int) -> int:
    """S(n, k) from ``S(n+1,k) = k S(n,k) + S(n,k-1)`` with S(n,0) = [n == 0]."""
    if n < 0 or k < 0 or k > n:
        return 0
    if len(_triangle) <= n:
        _grow(n)
    return _triangle[n][k]


def stirling_explicit(n: int, k: int) -> int:
    """S(n, k) from the alternating binomial sum, divided exactly by k!."""
    if k < 1 or n < 0:
        raise ValueError(f"explicit formula needs k >= 1, got n={n}, k={k}")
    total = sum(math.comb(k, j) * (-1) ** (k - j) * j**n for j in range(1, k + 1))
    q, r = divmod(total, math.factorial(k))
    if r:
        raise ArithmeticError(f"sum for S({n},{k}) not divisible by {k}!")
    return q


def bell_number(n: int) -> int:
    return sum(stirling_row(n))


def bell_polynomial(n: int) -> Polynomial:
    """B(n, x) = sum_k S(n,k) x^k, with B(0, x) = 1."""
    return Polynomial(stirling_row(n))


def _to_decimal(x) -> decimal.Decimal:
    if isinstance(x, Fraction):
        return decimal.Decimal(x.numerator) / decimal.Decimal(x.denominator)
    return decimal.Decimal(x)


def dobinski(n: int, x, eps: float = 1e-10) -> float:
    """Evaluate B(n, x) as ``e^-x sum_k k^n x^k / k!``.

    Summation runs in decimal arithmetic with enough digits that the absolute
    error stays below ``eps`` even when B(n, x) is large; the loop stops once a
    geometric bound on the remaining tail is below ``eps / 2``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    xf = Fraction(x)
    if xf < 0:
        raise ValueError("dobinski needs x >= 0")
    if n < 0:
        raise ValueError("n must be non-negative")
    if xf == 0:
        return 1.0 if n == 0 else 0.0
    xv = float(xf)
    # digits for the integer part of the largest term plus the requested accuracy
    peak = n * math.log10(n + xv + 2) + xv / math.log(10) + 5
    digits = int(peak - math.log10(eps)) + 15
    ctx = decimal.Context(prec=max(digits, 30))
    with decimal.localcontext(ctx):
        xd = _to_decimal(xf)
        decay = (-xd).exp()
        half_eps = decimal.Decimal(eps) / 2
        start = 2 * max(n, math.ceil(xv), 1)
        total = decimal.Decimal(0)
        term = decimal.Decimal(1)  # x^k / k!
        k = 0
        while True:
            total += term * decimal.Decimal(k) ** n if k else (term if n == 0 else 0)
            k += 1
            term = term * xd / k
            if k >= start:
                # t_{j+1}/t_j = (1 + 1/j)^n x / (j + 1) decreases in j, so the
                # ratio at k bounds every later one
                ratio = (1 + decimal.Decimal(1) / k) ** n * xd / (k + 1)
                nxt = term * decimal.Decimal(k) ** n
                if ratio < 1 and decay * nxt / (1 - ratio) < half_eps:
                    break
        return float(decay * total)


def falling_factorial(k: int) -> Polynomial:
    """x(x-1)...(x-k+1) as a polynomial in x."""
    out = Polynomial.constant(1)
    for i in range(k):
        out = out * Polynomial([-i, 1])
    return out


def falling_factorial_expand(n: int) -> list[int]:
    """Coefficients of x^n in the falling-factorial basis: ``[S(n,0), ..., S(n,n)]``."""
    return stirling_row(n)


def from_falling_factorials(coeffs: Sequence[Number]) -> Polynomial:
    """Collect ``sum_k coeffs[k] x^(k falling)`` back into the monomial basis."""
    out = Polynomial()
    for k, c in enumerate(coeffs):
        if c:
            out = out + falling_factorial(k) * Fraction(c)
    return out


def poisson_moment(p: Polynomial, x=None) -> Polynomial | Fraction:
    """Exact ``e^-x sum_k p(k) x^k / k!`` as a polynomial in ``x``.

    ``p`` is expanded in falling factorials, whose Poisson means are ``x^j``.
    When ``x`` is given the polynomial is evaluated there.
    """
    out = [Fraction(0)] * (len(p.coeffs) or 1)
    for m, c in enumerate(p.coeffs):
        if c:
            for k, s in enumerate(stirling_row(m)):
                out[k] += c * s
    poly = Polynomial(out)
    return poly if x is None else poly(x)


def egf_bell(x: Number, order: int) -> TruncatedSeries:
    """``exp(x (e^t - 1))`` to order N; the t^n coefficient is B(n, x)/n!."""
    inner = TruncatedSeries.exp_t(order) - TruncatedSeries([1], order)
    return (inner * Fraction(x)).exp()


def egf_stirling(k: int, order: int) -> TruncatedSeries:
    """``(e^t - 1)^k / k!`` to order N; the t^n coefficient is S(n, k)/n!."""
    if k < 0:
        raise ValueError("k must be non-negative")
    inner = TruncatedSeries.exp_t(order) - TruncatedSeries([1], order)
    return (inner**k) * Fraction(1, math.factorial(k))


def bell_poly_recurrence_check(n_max: int) -> bool:
    """Build B(n, x) from ``B(n+1,x) = x sum_k C(n,k) B(k,x)`` and compare to the triangle."""
    x = Polynomial.x()
    seq = [Polynomial.constant(1)]
    for n in range(n_max):
        nxt = x * sum((seq[k] * math.comb(n, k) for k in range(n + 1)), Polynomial())
        seq.append(nxt)
    return all(seq[n] == bell_polynomial(n) for n in range(n_max + 1))


def sheffer_identity_check(n: int, x: Number, y: Number) -> bool:
    """Exact test of ``B(n, x+y) = sum_k C(n,k) B(k,y) B(n-k,x)``."""
    x, y = Fraction(x), Fraction(y)
    lhs = bell_polynomial(n)(x + y)
    rhs = sum(math.comb(n, k) * bell_polynomial(k)(y) * bell_polynomial(n - k)(x) for k in range(n + 1))
    return lhs == rhs


def xd_power_apply(n: int, order: int) -> TruncatedSeries:
    """Apply ``(X d/dx)^n`` to the truncated exponential, one D then X at a time."""
    f = TruncatedSeries.exp_t(order)
    for _ in range(n):
        f = f.derivative().times_t()
    return f


def stirling_table_tsv(n_max: int) -> str:
    """Tab-separated triangle: ``n``, S(n,1..n_max) (blank above the diagonal), B(n)."""
    header = ["n"] + [f"k={k}" for k in range(1, n_max + 1)] + ["B(n)"]
    lines = ["\t".join(header)]
    for n in range(1, n_max + 1):
        row = stirling_row(n)
        cells = [str(n)] + [str(row[k]) if k <= n else "" for k in range(1, n_max + 1)]
        cells.append(str(bell_number(n)))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
