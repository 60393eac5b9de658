"""Coherent-state expectation values, a truncated Fock-space oracle, and
exact verification of exponential normal-ordering identities as series in
a formal parameter ``lam``.
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .algebra import A, ADAG, BosonPolynomial, BosonWord, NormalForm, nf_product, normal_order, parse_expr
from .combinatorics import Polynomial, TruncatedSeries, poisson_moment

__all__ = [
    "ComplexAmplitude",
    "FockMatrix",
    "LambdaSeries",
    "VerifyReport",
    "IDENTITIES",
    "MAX_VERIFY_ORDER",
    "expectation",
    "fock_matrix",
    "ladder_matrices",
    "coherent_vector",
    "coherent_dimension",
    "expm_taylor",
    "fock_expectation",
    "series_exp",
    "verify_identity",
    "number_exp_nf",
    "vacuum_projector_nf",
]

MAX_VERIFY_ORDER = 8
TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ComplexAmplitude:
    """Coherent-state label ``z = re + i im``."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"amplitude must be finite, got ({self.re}, {self.im})")

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def parse(cls, text: str) -> ComplexAmplitude:
        """Parse ``"re,im"`` (``"re"`` alone means a real amplitude)."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) == 1:
            return cls(float(parts[0]))
        if len(parts) != 2:
            raise ValueError(f"expected 're,im', got {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    @classmethod
    def of(cls, z: Union[complex, float, ComplexAmplitude]) -> ComplexAmplitude:
        if isinstance(z, ComplexAmplitude):
            return z
        z = complex(z)
        return cls(z.real, z.imag)


Amplitude = Union[complex, float, ComplexAmplitude]


def expectation(nf: NormalForm, z: Amplitude) -> complex:
    """``<z| nf |z>``: substitute a -> z and a+ -> conj(z)."""
    z = ComplexAmplitude.of(z).value
    zc = z.conjugate()
    return sum((float(c) * zc**j * z**k for (j, k), c in nf.items()), 0j)


# ---------------------------------------------------------------------------
# Fock-space oracle
# ---------------------------------------------------------------------------

def ladder_matrices(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated ``a`` and ``a+`` in the number basis."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    return a, a.T.copy()


def _reach(word: BosonWord) -> int:
    """Highest excursion above the starting level while the word acts on a ket."""
    level = top = 0
    for letter, e in reversed(word.runs):
        level += e if letter is ADAG else -e
        top = max(top, level)
    return top


@dataclass(frozen=True, eq=False)
class FockMatrix:
    """Dense operator matrix on ``|0>..|dim-1>``.

    Columns ``n < exact_dim`` agree with the untruncated operator; beyond that
    truncation of the ladder action may have leaked in.
    """

    data: np.ndarray
    reach: int = 0

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def exact_dim(self) -> int:
        return max(self.dim - self.reach, 0)

    def trusted(self) -> np.ndarray:
        t = self.exact_dim
        return self.data[:t, :t]

    def __matmul__(self, other: FockMatrix) -> FockMatrix:
        return FockMatrix(self.data @ other.data, self.reach + other.reach)

    def __add__(self, other: FockMatrix) -> FockMatrix:
        return FockMatrix(self.data + other.data, max(self.reach, other.reach))

    def scale(self, factor: complex) -> FockMatrix:
        return FockMatrix(self.data * factor, self.reach)

    def expm(self) -> FockMatrix:
        # Exact only when the truncated space is invariant (reach 0).
        return FockMatrix(expm_taylor(self.data), 0 if self.reach == 0 else self.dim)

    def element(self, m: int, n: int) -> complex:
        return complex(self.data[m, n])


def fock_matrix(p: BosonPolynomial | NormalForm | BosonWord, dim: int) -> FockMatrix:
    """Matrix of ``p`` built from the ladder actions ``a|n> = sqrt(n)|n-1>``,
    ``a+|n> = sqrt(n+1)|n+1>`` on a ``dim``-state truncation.

    Each word maps ``|n>`` to ``s sqrt(m!/n!) |m>`` with integer ``s``, so the
    coefficient sums are formed exactly and rounded to float once per entry.
    """
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    if isinstance(p, NormalForm):
        p = BosonPolynomial({BosonWord.monomial(j, k): c for (j, k), c in p.items()})
    elif isinstance(p, BosonWord):
        p = BosonPolynomial.from_word(p)
    exact: dict[tuple[int, int], Fraction] = {}
    reach = 0
    for word, coeff in p.items():
        reach = max(reach, _reach(word))
        for n in range(dim):
            level, s = n, 1
            for letter, e in reversed(word.runs):
                if letter is A:
                    if level < e:
                        s = 0
                        break
                    s *= math.perm(level, e)
                    level -= e
                else:
                    level += e
                    if level >= dim:
                        s = 0
                        break
            if s:
                exact[(level, n)] = exact.get((level, n), 0) + coeff * s
    data = np.zeros((dim, dim), dtype=complex)
    for (m, n), r in exact.items():
        if r:
            lo, hi = min(m, n), max(m, n)
            root = math.sqrt(math.perm(hi, hi - lo))
            data[m, n] = float(r) * root if m >= n else float(r) / root
    return FockMatrix(data, reach)


def expm_taylor(mat: np.ndarray, tol: float = 1e-16) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Taylor sum."""
    mat = np.asarray(mat, dtype=complex)
    norm = np.abs(mat).sum(axis=1).max() if mat.size else 0.0
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    scaled = mat / 2**squarings
    total = np.eye(mat.shape[0], dtype=complex)
    term = total.copy()
    for k in range(1, 200):
        term = term @ scaled / k
        total = total + term
        if np.abs(term).max() <= tol * max(1.0, np.abs(total).max()):
            break
    for _ in range(squarings):
        total = total @ total
    return total


def coherent_dimension(z: Amplitude) -> int:
    r = abs(ComplexAmplitude.of(z).value)
    return max(40, math.ceil(r * r + 10 * r + 10))


def _poisson_tail(mean: float, start: int) -> float:
    """P(N >= start) for N ~ Poisson(mean), summed directly from the tail."""
    if mean == 0:
        return 0.0 if start > 0 else 1.0
    log_term = -mean + start * math.log(mean) - math.lgamma(start + 1)
    total, k = 0.0, start
    while True:
        t = math.exp(log_term)
        total += t
        k += 1
        log_term += math.log(mean) - math.log(k)
        if k > mean and t < 1e-18 * max(total, 1e-300):
            return total


def coherent_vector(z: Amplitude, dim: Optional[int] = None) -> np.ndarray:
    """Truncated ``|z> = e^{-|z|^2/2} sum z^n/sqrt(n!) |n>`` (no renormalisation)."""
    zc = ComplexAmplitude.of(z).value
    if dim is None:
        dim = coherent_dimension(zc)
    mean = abs(zc) ** 2
    tail = _poisson_tail(mean, dim)
    if tail >= TAIL_TOLERANCE:
        warnings.warn(
            f"coherent state |z|={abs(zc):.3g} truncated at dim={dim} drops norm^2 {tail:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    vec = np.zeros(dim, dtype=complex)
    amp = cmath.exp(-mean / 2)
    for n in range(dim):
        vec[n] = amp
        amp = amp * zc / math.sqrt(n + 1)
    return vec


def fock_expectation(mat: FockMatrix | np.ndarray, z: Amplitude, dim: Optional[int] = None) -> complex:
    data = mat.data if isinstance(mat, FockMatrix) else mat
    vec = coherent_vector(z, data.shape[0] if dim is None else dim)
    return complex(np.vdot(vec, data @ vec))


# ---------------------------------------------------------------------------
# Series in lam with normal-form coefficients
# ---------------------------------------------------------------------------

class LambdaSeries:
    """``sum_{n<=N} lam^n C_n`` with each ``C_n`` a :class:`NormalForm`."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Sequence[NormalForm], order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        cs = list(coeffs)[: order + 1]
        cs += [NormalForm()] * (order + 1 - len(cs))
        self.order = order
        self.coeffs: tuple[NormalForm, ...] = tuple(cs)

    @classmethod
    def zero(cls, order: int) -> LambdaSeries:
        return cls([], order)

    @classmethod
    def one(cls, order: int) -> LambdaSeries:
        return cls([NormalForm.one()], order)

    @classmethod
    def monomial(cls, nf: NormalForm, power: int, order: int) -> LambdaSeries:
        cs = [NormalForm()] * power + [nf]
        return cls(cs, order)

    @classmethod
    def scalar(cls, series: TruncatedSeries) -> LambdaSeries:
        """Lift a scalar series: each coefficient times the identity."""
        return cls([NormalForm.one().scale(c) for c in series.coeffs], series.order)

    def __getitem__(self, n: int) -> NormalForm:
        return self.coeffs[n]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LambdaSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __add__(self, other: LambdaSeries) -> LambdaSeries:
        self._check(other)
        return LambdaSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __sub__(self, other: LambdaSeries) -> LambdaSeries:
        self._check(other)
        return LambdaSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def scale(self, factor) -> LambdaSeries:
        return LambdaSeries([c.scale(factor) for c in self.coeffs], self.order)

    def _check(self, other: LambdaSeries):
        if other.order != self.order:
            raise ValueError(f"order mismatch: {self.order} vs {other.order}")

    def mul(self, other: LambdaSeries, commuting: bool = False) -> LambdaSeries:
        """Truncated Cauchy product.

        ``commuting=False`` multiplies coefficients as operators (concatenate,
        then normal-order); ``commuting=True`` treats a and a+ as plain symbols,
        which is how expressions inside double dots expand.
        """
        self._check(other)
        prod: Callable = NormalForm.commuting_mul if commuting else nf_product
        out = []
        for n in range(self.order + 1):
            acc = NormalForm()
            for i in range(n + 1):
                if self.coeffs[i] and other.coeffs[n - i]:
                    acc = acc + prod(self.coeffs[i], other.coeffs[n - i])
            out.append(acc)
        return LambdaSeries(out, self.order)

    def fock_sum(self, lam: complex, dim: int) -> np.ndarray:
        """Matrix of ``sum lam^n C_n`` on a ``dim``-state truncation."""
        total = np.zeros((dim, dim), dtype=complex)
        for n, c in enumerate(self.coeffs):
            if c:
                total += lam**n * fock_matrix(c, dim).data
        return total

    def to_dict(self) -> dict:
        return {"order": self.order, "coeffs": [c.to_dict() for c in self.coeffs]}

    def __repr__(self) -> str:
        body = ", ".join(f"lam^{n}: {c}" for n, c in enumerate(self.coeffs) if c)
        return f"LambdaSeries({body or '0'}; order={self.order})"


def series_exp(
    arg: LambdaSeries | NormalForm | BosonPolynomial,
    order: Optional[int] = None,
    commuting: bool = False,
) -> LambdaSeries:
    """Truncated ``exp(arg)``.

    A bare operator ``W`` is read as the series ``lam * W``. With
    ``commuting=False`` powers are operator products (normal-ordered after each
    step), so ``exp(lam W)`` gives the normal form of the operator exponential.
    """
    if not isinstance(arg, LambdaSeries):
        if order is None:
            raise ValueError("order is required when passing a bare operator")
        nf = arg if isinstance(arg, NormalForm) else normal_order(arg)
        arg = LambdaSeries.monomial(nf, 1, order)
    elif order is not None and order != arg.order:
        arg = LambdaSeries(arg.coeffs, order)
    if arg.coeffs[0]:
        raise ValueError("series_exp needs a zero constant term")
    n = arg.order
    total = LambdaSeries.one(n)
    power = LambdaSeries.one(n)
    for m in range(1, n + 1):
        power = power.mul(arg, commuting=commuting)
        total = total + power.scale(Fraction(1, math.factorial(m)))
    return total


# ---------------------------------------------------------------------------
# Named identities
# ---------------------------------------------------------------------------

def _symbols() -> tuple[NormalForm, NormalForm]:
    return NormalForm({(1, 0): 1}), NormalForm({(0, 1): 1})


def _rhs_number_exp(order: int) -> LambdaSeries:
    # :exp(x (e^lam - 1)):, x = a+ a
    ad, a = _symbols()
    x = ad.commuting_mul(a)
    shift = TruncatedSeries.exp_t(order) - TruncatedSeries([1], order)
    arg = LambdaSeries([x.scale(c) for c in shift.coeffs], order)
    return series_exp(arg, commuting=True)


def _rhs_bch_linear(order: int) -> LambdaSeries:
    # e^{lam^2/2} :exp(lam (a + a+)):
    ad, a = _symbols()
    inner = series_exp(LambdaSeries.monomial(ad + a, 1, order), commuting=True)
    half_sq = TruncatedSeries([0, 0, Fraction(1, 2)], order).exp()
    return LambdaSeries.scalar(half_sq).mul(inner, commuting=True)


def _rhs_excited_21(order: int) -> LambdaSeries:
    # :exp(lam a+^2 a / (1 - lam a+)): = :exp(sum_m lam^{m+1} a+^{m+2} a):
    arg = [NormalForm()] + [NormalForm({(m + 2, 1): 1}) for m in range(order)]
    return series_exp(LambdaSeries(arg, order), commuting=True)


def _rhs_kerr(order: int) -> LambdaSeries:
    # :e^{-y} sum_n e^{lam n(n-1)} y^n/n!:, y = a+ a; the lam^m coefficient is
    # the Poisson mean of (n(n-1))^m divided by m!
    pair = Polynomial([0, -1, 1])
    coeffs = []
    for m in range(order + 1):
        poly = poisson_moment(pair**m) * Fraction(1, math.factorial(m))
        coeffs.append(NormalForm({(k, k): c for k, c in enumerate(poly.coeffs)}))
    return LambdaSeries(coeffs, order)


IDENTITIES: dict[str, tuple[str, Callable[[int], LambdaSeries]]] = {
    "number-exp": ("ad a", _rhs_number_exp),
    "bch-linear": ("a + ad", _rhs_bch_linear),
    "excited-21": ("ad^2 a", _rhs_excited_21),
    "kerr": ("ad^2 a^2", _rhs_kerr),
}


@dataclass
class VerifyReport:
    identity: str
    order: int
    equal: bool
    mismatch_order: Optional[int] = None
    diff_terms: Optional[NormalForm] = None
    lhs: Optional[LambdaSeries] = field(default=None, repr=False)
    rhs: Optional[LambdaSeries] = field(default=None, repr=False)

    @property
    def first_mismatch(self) -> Optional[tuple[int, NormalForm]]:
        if self.equal:
            return None
        return self.mismatch_order, self.diff_terms

    def to_dict(self) -> dict:
        out: dict = {"identity": self.identity, "order": self.order, "equal": self.equal}
        if not self.equal:
            out["mismatch_order"] = self.mismatch_order
            out["diff_terms"] = self.diff_terms.to_dict()["terms"]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_identity(name: str, order: int) -> VerifyReport:
    """Compare both sides of a named exponential identity up to ``lam^order``.

    The left side is ``exp(lam W)`` expanded with operator products; the right
    side expands the closed form inside double dots with commuting symbols.
    """
    if name not in IDENTITIES:
        raise ValueError(f"unknown identity {name!r}; choose from {', '.join(IDENTITIES)}")
    if not 0 <= order <= MAX_VERIFY_ORDER:
        raise ValueError(f"order must be in 0..{MAX_VERIFY_ORDER}, got {order}")
    expr, rhs_builder = IDENTITIES[name]
    lhs = series_exp(parse_expr(expr), order)
    rhs = rhs_builder(order)
    for n in range(order + 1):
        if lhs[n] != rhs[n]:
            return VerifyReport(name, order, False, n, lhs[n] - rhs[n], lhs, rhs)
    return VerifyReport(name, order, True, lhs=lhs, rhs=rhs)


def number_exp_nf(lam: float, terms: int) -> NormalForm:
    """``:exp(a+ a (e^lam - 1)):`` truncated after ``terms`` powers.

    ``e^lam`` is taken as the exact rational value of its float.
    """
    c = Fraction(math.exp(lam)) - 1
    return NormalForm({(k, k): c**k / math.factorial(k) for k in range(terms + 1)})


def vacuum_projector_nf(terms: int) -> NormalForm:
    """``:e^{-a+ a}: = sum_k (-1)^k (a+)^k a^k / k!`` up to ``k = terms``."""
    return NormalForm({(k, k): Fraction((-1) ** k, math.factorial(k)) for k in range(terms + 1)})
