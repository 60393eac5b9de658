"""Exact boson operator expressions over the alphabet {a, a+}.

Words live in the free algebra; ``normal_order`` turns them into the
canonical form ``sum c_jk (a+)^j a^k`` by rewriting ``a a+ -> a+ a + 1``.
All coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import enum
import heapq
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Tuple, Union

__all__ = [
    "Letter",
    "A",
    "ADAG",
    "BosonWord",
    "BosonPolynomial",
    "NormalForm",
    "ParseError",
    "parse_expr",
    "normal_order",
    "double_dot",
    "nf_to_polynomial",
    "multiply",
    "nf_product",
    "word_normal_order",
]

Scalar = Union[int, Fraction]


class Letter(str, enum.Enum):
    A = "a"
    ADAG = "ad"

    def __str__(self) -> str:
        return self.value


A = Letter.A
ADAG = Letter.ADAG


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"exact coefficient required, got {type(value).__name__}")


@dataclass(frozen=True, order=True)
class BosonWord:
    """A product of ladder operators, stored as run-length ``(letter, exponent)`` pairs.

    The empty word is the identity operator.
    """

    runs: Tuple[Tuple[Letter, int], ...] = ()

    def __post_init__(self):
        merged: list[list] = []
        for letter, exp in self.runs:
            letter = Letter(letter)
            if not isinstance(exp, int) or exp < 0:
                raise ValueError(f"exponent must be a non-negative int, got {exp!r}")
            if exp == 0:
                continue
            if merged and merged[-1][0] is letter:
                merged[-1][1] += exp
            else:
                merged.append([letter, exp])
        object.__setattr__(self, "runs", tuple((l, e) for l, e in merged))

    @classmethod
    def from_letters(cls, letters: Iterable[Letter | str]) -> BosonWord:
        return cls(tuple((Letter(l), 1) for l in letters))

    @classmethod
    def identity(cls) -> BosonWord:
        return cls(())

    @classmethod
    def monomial(cls, j: int, k: int) -> BosonWord:
        """The normally ordered word ``(a+)^j a^k``."""
        return cls(((ADAG, j), (A, k)))

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return tuple(l for l, e in self.runs for _ in range(e))

    @property
    def creations(self) -> int:
        return sum(e for l, e in self.runs if l is ADAG)

    @property
    def annihilations(self) -> int:
        return sum(e for l, e in self.runs if l is A)

    def is_normal(self) -> bool:
        return len(self.runs) <= 1 or (len(self.runs) == 2 and self.runs[0][0] is ADAG)

    def __len__(self) -> int:
        return sum(e for _, e in self.runs)

    def __mul__(self, other: BosonWord) -> BosonWord:
        if not isinstance(other, BosonWord):
            return NotImplemented
        return BosonWord(self.runs + other.runs)

    def __pow__(self, n: int) -> BosonWord:
        if n < 0:
            raise ValueError("negative power of a word")
        return BosonWord(self.runs * n)

    def __str__(self) -> str:
        if not self.runs:
            return "1"
        return " ".join(str(l) if e == 1 else f"{l}^{e}" for l, e in self.runs)

    def __repr__(self) -> str:
        return f"BosonWord({str(self)!r})"


class _Linear:
    """Immutable finite linear combination with exact coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for key, coeff in items:
            key = self._check_key(key)
            acc[key] = acc.get(key, 0) + _frac(coeff)
        self._terms = {k: acc[k] for k in sorted(acc) if acc[k] != 0}
        self._hash = None

    @staticmethod
    def _check_key(key):
        return key

    @classmethod
    def zero(cls):
        return cls()

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, key) -> Fraction:
        return self._terms.get(self._check_key(key), Fraction(0))

    def __iter__(self) -> Iterator:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((type(self).__name__, tuple(self._terms.items())))
        return self._hash

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return type(self)({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: Scalar):
        factor = _frac(factor)
        return type(self)({k: factor * c for k, c in self._terms.items()})

    def __rmul__(self, factor):
        if isinstance(factor, (int, Fraction)):
            return self.scale(factor)
        return NotImplemented


class BosonPolynomial(_Linear):
    """Linear combination of :class:`BosonWord` s (free-algebra element)."""

    @staticmethod
    def _check_key(key):
        if not isinstance(key, BosonWord):
            raise TypeError(f"BosonPolynomial keys must be BosonWord, got {type(key).__name__}")
        return key

    @classmethod
    def one(cls) -> BosonPolynomial:
        return cls({BosonWord.identity(): 1})

    @classmethod
    def from_word(cls, word: BosonWord, coeff: Scalar = 1) -> BosonPolynomial:
        return cls({word: coeff})

    def __mul__(self, other):
        if isinstance(other, BosonPolynomial):
            return multiply(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> BosonPolynomial:
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = BosonPolynomial.one()
        for _ in range(n):
            out = multiply(out, self)
        return out

    def __str__(self) -> str:
        return _format_terms([(c, str(w)) for w, c in self._terms.items()])

    def __repr__(self) -> str:
        return f"BosonPolynomial({str(self)!r})"


class NormalForm(_Linear):
    """Normally ordered operator ``sum c_jk (a+)^j a^k`` keyed by ``(j, k)``.

    Keys are kept in lexicographic order of ``(j, k)``.
    """

    @staticmethod
    def _check_key(key):
        j, k = key
        if not (isinstance(j, int) and isinstance(k, int)) or j < 0 or k < 0:
            raise ValueError(f"normal-form key must be non-negative ints, got {key!r}")
        return (j, k)

    @classmethod
    def one(cls) -> NormalForm:
        return cls({(0, 0): 1})

    def commuting_mul(self, other: NormalForm) -> NormalForm:
        """Product treating a and a+ as commuting symbols (exponents add)."""
        out: dict = {}
        for (j1, k1), c1 in self._terms.items():
            for (j2, k2), c2 in other._terms.items():
                key = (j1 + j2, k1 + k2)
                out[key] = out.get(key, 0) + c1 * c2
        return NormalForm(out)

    def __str__(self) -> str:
        ordered = sorted(self._terms.items(), key=lambda kv: (-kv[0][0], -kv[0][1]))
        return _format_terms([(c, str(BosonWord.monomial(j, k))) for (j, k), c in ordered])

    def __repr__(self) -> str:
        return f"NormalForm({str(self)!r})"

    def to_json(self) -> str:
        return json.dumps({"terms": self.to_dict()["terms"]})

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"j": j, "k": k, "c": f"{c.numerator}/{c.denominator}"}
                for (j, k), c in self._terms.items()
            ]
        }

    @classmethod
    def from_json(cls, text: str | dict) -> NormalForm:
        data = json.loads(text) if isinstance(text, str) else text
        return cls({(int(t["j"]), int(t["k"])): Fraction(str(t["c"])) for t in data["terms"]})


def _format_terms(terms: Sequence[tuple[Fraction, str]]) -> str:
    if not terms:
        return "0"
    parts = []
    for i, (c, body) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if body == "1":
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag} {body}"
        if i == 0:
            parts.append(text if sign == "+" else f"-{text}")
        else:
            parts.append(f"{sign} {text}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    """Malformed expression text; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<adag>a†|a\^\+|ad)
  | (?P<a>a)
  | (?P<int>\d+)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self) -> BosonPolynomial:
        out = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return out

    def expr(self) -> BosonPolynomial:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        total = self.term().scale(sign)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
            total = total + self.term().scale(sign)
        return total

    def term(self) -> BosonPolynomial:
        coeff = Fraction(1)
        has_coeff = False
        if self.peek()[0] == "int":
            coeff = Fraction(int(self.take()[1]))
            has_coeff = True
            if self.peek()[1] == "/" and self.peek()[0] == "op":
                self.take()
                kind, text, pos = self.take()
                if kind != "int":
                    raise ParseError("expected unsigned integer denominator", pos)
                if int(text) == 0:
                    raise ParseError("zero denominator", pos)
                coeff /= int(text)
            if self.peek()[1] == "*" and self.peek()[0] == "op":
                self.take()
        product = BosonPolynomial.one()
        nfactors = 0
        while True:
            kind, text, pos = self.peek()
            if kind in ("a", "adag") or text == "(":
                product = multiply(product, self.factor())
                nfactors += 1
                if self.peek()[1] == "*" and self.peek()[0] == "op":
                    self.take()
                    if not (self.peek()[0] in ("a", "adag") or self.peek()[1] == "("):
                        raise ParseError("expected factor after '*'", self.peek()[2])
            else:
                break
        if nfactors == 0 and not has_coeff:
            kind, text, pos = self.peek()
            raise ParseError(f"expected term, found {text or 'end of input'!r}", pos)
        return product.scale(coeff)

    def factor(self) -> BosonPolynomial:
        kind, text, pos = self.take()
        if kind == "a":
            base = BosonPolynomial.from_word(BosonWord(((A, 1),)))
        elif kind == "adag":
            base = BosonPolynomial.from_word(BosonWord(((ADAG, 1),)))
        else:
            base = self.expr()
            self.expect(")")
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            kind, text, pos = self.take()
            if text == "-":
                raise ParseError("negative exponent", pos)
            if kind != "int":
                raise ParseError("expected unsigned integer exponent", pos)
            return base ** int(text)
        return base


def parse_expr(text: str) -> BosonPolynomial:
    """Parse an operator expression such as ``"2*ad^2 a^2 + ad a"``.

    Juxtaposition is the (non-commutative) product; ``a†`` and ``a^+`` are
    aliases for ``ad``. A bare coefficient denotes a multiple of the identity.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Products and orderings
# ---------------------------------------------------------------------------

def multiply(p: BosonPolynomial, q: BosonPolynomial) -> BosonPolynomial:
    """Free-algebra product: words concatenate, coefficients multiply."""
    out: dict = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            w = w1 * w2
            out[w] = out.get(w, 0) + c1 * c2
    return BosonPolynomial(out)


def _inversions(word: tuple) -> int:
    count = 0
    seen_a = 0
    for letter in word:
        if letter is A:
            seen_a += 1
        else:
            count += seen_a
    return count


def _inversion_sites(word: tuple) -> list[int]:
    return [i for i in range(len(word) - 1) if word[i] is A and word[i + 1] is ADAG]


Chooser = Callable[[tuple, list], int]


def _leftmost(word: tuple, sites: list) -> int:
    return sites[0]


def _rewrite(start: Mapping[tuple, Fraction], choose: Chooser) -> NormalForm:
    # Every rewrite drops either the inversion count (swap) or the length
    # (contraction), so popping by decreasing (length, inversions) guarantees a
    # word's coefficient is complete before it is expanded.
    pending: dict[tuple, Fraction] = {}
    heap: list = []

    def push(word: tuple, coeff: Fraction):
        if word in pending:
            pending[word] += coeff
        else:
            pending[word] = coeff
            heapq.heappush(heap, (-len(word), -_inversions(word), word))

    for word, coeff in start.items():
        push(word, coeff)

    result: dict[tuple[int, int], Fraction] = {}
    while heap:
        _, _, word = heapq.heappop(heap)
        coeff = pending.pop(word)
        if coeff == 0:
            continue
        sites = _inversion_sites(word)
        if not sites:
            key = (word.count(ADAG), word.count(A))
            result[key] = result.get(key, 0) + coeff
            continue
        i = choose(word, sites)
        if i not in sites:
            raise ValueError(f"chooser returned {i}, not an inversion site")
        push(word[:i] + (ADAG, A) + word[i + 2:], coeff)
        push(word[:i] + word[i + 2:], coeff)
    return NormalForm(result)


def normal_order(p: BosonPolynomial | BosonWord, choose: Chooser | None = None) -> NormalForm:
    """Normal-order ``p`` by exhaustive rewriting of ``a a+ -> a+ a + 1``.

    By default the leftmost ``a a+`` site is rewritten; ``choose(word, sites)``
    may pick a different site (used to probe confluence).
    """
    if isinstance(p, BosonWord):
        p = BosonPolynomial.from_word(p)
    start = {w.letters: c for w, c in p.items()}
    return _rewrite(start, choose or _leftmost)


def word_normal_order(word: BosonWord) -> NormalForm:
    return normal_order(BosonPolynomial.from_word(word))


def double_dot(p: BosonPolynomial | BosonWord) -> NormalForm:
    """Reorder as if a and a+ commuted: each word maps to its letter counts."""
    if isinstance(p, BosonWord):
        p = BosonPolynomial.from_word(p)
    return NormalForm([((w.creations, w.annihilations), c) for w, c in p.items()])


def nf_to_polynomial(nf: NormalForm) -> BosonPolynomial:
    return BosonPolynomial({BosonWord.monomial(j, k): c for (j, k), c in nf.items()})


def nf_product(p: NormalForm, q: NormalForm) -> NormalForm:
    """Operator product of two normal forms, normal-ordered again."""
    return normal_order(multiply(nf_to_polynomial(p), nf_to_polynomial(q)))
