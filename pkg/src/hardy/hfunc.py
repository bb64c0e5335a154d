"""
Subpolynomial functions f(x) = sum coeff * x^c * log(x)^k evaluated at an affine
argument a*x + b.

Coefficients and powers are kept as exact fractions (decimal input converts
exactly), which makes printing, derivatives and the exact-value path lossless.
"""

import logging
import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from mpmath.ctx_mp import MPContext

from errors import (
    DerivativeOrderError,
    DomainError,
    FunctionSyntaxError,
    NotSubpolynomialType,
    PolynomialRejected,
)
from numeric_config import CONFIG

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<log>log\(x\))|(?P<x>x)|(?P<op>[-+*^]))"
)
_AFFINE_RE = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?x\s*(?:([+-])\s*(\d+))?\s*$")

_local = threading.local()


def _mp_context(prec: int = 128) -> MPContext:
    """Per-thread multiprecision context; mpmath.mp is process-global."""
    ctx = getattr(_local, "mp", None)
    if ctx is None:
        ctx = MPContext()
        _local.mp = ctx
    ctx.prec = prec
    return ctx


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    c: Fraction
    k: int

    @property
    def key(self) -> tuple[Fraction, int]:
        return (self.c, self.k)


def _merge_terms(raw) -> tuple[Term, ...]:
    """Combine like (c, k) terms, drop zeros, sort by descending (c, k)."""
    acc: dict[tuple[Fraction, int], Fraction] = {}
    for coeff, c, k in raw:
        key = (Fraction(c), int(k))
        acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff)
    terms = [Term(coeff, c, k) for (c, k), coeff in acc.items() if coeff != 0]
    terms.sort(key=lambda t: t.key, reverse=True)
    return tuple(terms)


def _differentiate(terms: tuple[Term, ...]) -> tuple[Term, ...]:
    raw = []
    for t in terms:
        if t.c != 0:
            raw.append((t.coeff * t.c, t.c - 1, t.k))
        if t.k != 0:
            raw.append((t.coeff * t.k, t.c - 1, t.k - 1))
    return _merge_terms(raw)


def _format_decimal(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    den, twos, fives = q.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return repr(float(q))
    digits = max(twos, fives)
    scaled = abs(q.numerator * 10**digits // q.denominator)
    text = str(scaled).rjust(digits + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def _format_term(t: Term, magnitude: Fraction) -> str:
    factors = []
    if t.c != 0:
        factors.append("x" if t.c == 1 else f"x^{_format_decimal(t.c)}")
    if t.k != 0:
        factors.append("log(x)" if t.k == 1 else f"log(x)^{t.k}")
    if magnitude != 1 or not factors:
        factors.insert(0, _format_decimal(magnitude))
    return "*".join(factors)


def _format_terms(terms: tuple[Term, ...]) -> str:
    parts = []
    for i, t in enumerate(terms):
        body = _format_term(t, abs(t.coeff))
        if i == 0:
            parts.append(f"-{body}" if t.coeff < 0 else body)
        else:
            parts.append(f"{'-' if t.coeff < 0 else '+'} {body}")
    return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class TermSum:
    """
    Closed family of power/log terms at an affine argument.
    Powers may be negative here (derivatives); evaluation needs a*x + b >= 1.
    """

    terms: tuple[Term, ...]
    affine: tuple[int, int] = (1, 0)

    def argument(self, x):
        a, b = self.affine
        return a * x + b

    def evaluate(self, x):
        """float64 evaluation, scalar or array."""
        y = np.asarray(self.argument(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        total = np.zeros_like(y)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            logy = np.log(y)
            for t in self.terms:
                value = np.full_like(y, float(t.coeff))
                if t.c != 0:
                    value = value * np.power(y, float(t.c))
                if t.k != 0:
                    value = value * logy**t.k
                total = total + value
        return float(total) if total.ndim == 0 else total

    __call__ = evaluate

    def evaluate_mp(self, x, ctx=None):
        """Multiprecision evaluation in ``ctx`` (defaults to mpmath.mp)."""
        ctx = ctx or mpmath.mp
        y = self.argument(ctx.mpf(x))
        logy = ctx.log(y)
        total = ctx.mpf(0)
        for t in self.terms:
            value = ctx.mpf(t.coeff.numerator) / t.coeff.denominator
            if t.c != 0:
                value *= ctx.power(y, ctx.mpf(t.c.numerator) / t.c.denominator)
            if t.k != 0:
                value *= logy**t.k
            total += value
        return total

    def __str__(self) -> str:
        return _format_terms(self.terms)


@dataclass(frozen=True)
class SubpolyFunction(TermSum):
    """A valid member of the function family (all powers >= 0)."""

    @property
    def leading(self) -> Term:
        return self.terms[0]

    @property
    def raw_start(self) -> int:
        return _monotone_start(self.terms)

    @property
    def domain_start(self) -> Fraction:
        a, b = self.affine
        return max(Fraction(1), Fraction(self.raw_start - b, a))

    def float_error_bound(self, ns: np.ndarray) -> np.ndarray:
        """Absolute error bound of ``evaluate`` (generous: sum |terms| * 2^-44)."""
        y = np.asarray(self.argument(np.asarray(ns, dtype=np.float64)), dtype=np.float64)
        total = np.zeros_like(y)
        with np.errstate(over="ignore", invalid="ignore"):
            logy = np.log(y)
            for t in self.terms:
                value = np.full_like(y, abs(float(t.coeff)))
                if t.c != 0:
                    value = value * np.power(y, float(t.c))
                if t.k != 0:
                    value = value * np.abs(logy) ** t.k
                total = total + value
        return (total + 1.0) * CONFIG["float_error_scale"]

    def log2_magnitude(self, x: int) -> float:
        """Upper estimate of log2 |f_raw(x)| for a raw integer argument x >= 1."""
        best = -math.inf
        lx = math.log2(x)
        loglog = math.log2(math.log(x)) if x > 1 else -math.inf
        for t in self.terms:
            if t.k and x == 1:
                continue
            bits = math.log2(abs(t.coeff)) + float(t.c) * lx + (t.k * loglog if t.k else 0.0)
            best = max(best, bits)
        if best == -math.inf:
            return 0.0
        return best + math.log2(len(self.terms))

    def __str__(self) -> str:
        return format_function(self)


@dataclass(frozen=True)
class GrowthInfo:
    beta: float
    ell: int
    r: int
    bigR: int
    beta_exact: Fraction


@lru_cache(maxsize=512)
def _monotone_start(terms: tuple[Term, ...]) -> int:
    """Smallest 2^j past which f' keeps its asymptotic sign on the dyadic scan grid."""
    deriv = TermSum(_differentiate(terms))
    if not deriv.terms:
        return 1
    target = 1 if deriv.terms[0].coeff > 0 else -1
    ctx = _mp_context(128)
    last_bad = -1
    for j in range(CONFIG["monotonicity_scan_exponent"] + 1):
        value = deriv.evaluate_mp(ctx.mpf(2) ** j, ctx)
        if ctx.sign(value) == -target:
            last_bad = j
    if last_bad >= 0:
        logger.debug("derivative changes sign up to 2^%d for %s", last_bad, _format_terms(terms))
    return 1 if last_bad < 0 else 2 ** (last_bad + 1)


class _ExpressionParser:
    def __init__(self, text: str, body: str, offset: int = 0):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(body):
            if body[pos:].strip() == "":
                break
            m = _TOKEN_RE.match(body, pos)
            if not m:
                pos += len(body[pos:]) - len(body[pos:].lstrip())
                raise FunctionSyntaxError(text, offset + pos, "unexpected character")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), offset + m.start(kind)))
            pos = m.end()
        self.i = 0
        self.end = offset + len(body)

    def _peek(self, kind: str, value: str | None = None) -> bool:
        if self.i >= len(self.tokens):
            return False
        k, v, _ = self.tokens[self.i]
        return k == kind and (value is None or v == value)

    def _take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _position(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else self.end

    def _fail(self, reason: str):
        raise FunctionSyntaxError(self.text, self._position(), reason)

    def _number(self) -> Fraction:
        if not self._peek("num"):
            self._fail("expected a number")
        return Fraction(self._take()[1])

    def parse(self) -> list[tuple[Fraction, Fraction, int]]:
        if not self.tokens:
            self._fail("empty expression")
        sign = 1
        if self._peek("op", "+") or self._peek("op", "-"):
            sign = -1 if self._take()[1] == "-" else 1
        terms = [self._term(sign)]
        while self.i < len(self.tokens):
            if not (self._peek("op", "+") or self._peek("op", "-")):
                self._fail("expected '+' or '-'")
            sign = -1 if self._take()[1] == "-" else 1
            terms.append(self._term(sign))
        return terms

    def _term(self, sign: int) -> tuple[Fraction, Fraction, int]:
        coeff, c, k = Fraction(1), Fraction(0), 0
        need_factor = seen_x = False
        if self._peek("num"):
            coeff = self._number()
            if not self._peek("op", "*"):
                return (sign * coeff, c, k)
            self._take()
            need_factor = True
        if self._peek("x"):
            self._take()
            c = Fraction(1)
            seen_x = True
            if self._peek("op", "^"):
                self._take()
                c = self._number()
            need_factor = False
            if self._peek("op", "*"):
                self._take()
                if not self._peek("log"):
                    self._fail("expected log(x)")
        if self._peek("log"):
            self._take()
            k = 1
            if self._peek("op", "^"):
                self._take()
                power = self._number()
                if power.denominator != 1:
                    self._fail("log power must be an integer")
                k = int(power)
            need_factor = False
        elif not seen_x:
            self._fail("expected a term")
        if need_factor:
            self._fail("expected x or log(x)")
        return (sign * coeff, c, k)


def _split_affine(text: str) -> tuple[str, tuple[int, int]]:
    body, sep, suffix = text.partition("@")
    if not sep:
        return body, (1, 0)
    m = _AFFINE_RE.match(suffix)
    if not m or "@" in suffix:
        raise FunctionSyntaxError(text, len(body) + 1, "malformed affine suffix")
    a = int(m.group(1) or 1)
    b = int(m.group(3) or 0) * (-1 if m.group(2) == "-" else 1)
    if a < 1:
        raise FunctionSyntaxError(text, len(body) + 1, "affine factor must be >= 1")
    return body, (a, b)


def parse_function(text: str, allow_polynomial: bool = False) -> SubpolyFunction:
    """
    Parse ``term (("+"|"-") term)*`` where a term is
    ``[coeff "*"] "x" ["^" real] ["*" "log(x)" ["^" int]]``, a bare coefficient or a
    bare ``log(x)^k``, optionally followed by ``@ A*x+B`` for an affine argument.
    """
    body, affine = _split_affine(text)
    terms = _merge_terms(_ExpressionParser(text, body).parse())
    if not terms:
        raise FunctionSyntaxError(text, 0, "expression reduces to zero")
    polynomial = all(t.k == 0 and t.c.denominator == 1 for t in terms)
    if polynomial and not allow_polynomial:
        raise PolynomialRejected(f"{text!r} is a polynomial; pass allow_polynomial to accept it")
    f = SubpolyFunction(terms)
    if affine != (1, 0):
        f = affine_substitute(f, *affine)
    return f


def format_function(f: SubpolyFunction) -> str:
    """Canonical text; parse_function(format_function(f)) == f."""
    text = _format_terms(f.terms)
    a, b = f.affine
    if (a, b) == (1, 0):
        return text
    lhs = "x" if a == 1 else f"{a}*x"
    if b:
        lhs += f"{'-' if b < 0 else '+'}{abs(b)}"
    return f"{text} @ {lhs}"


def affine_substitute(f: SubpolyFunction, a: int, b: int) -> SubpolyFunction:
    """Return x -> f(a*x + b)."""
    if int(a) != a or int(b) != b or a < 1:
        raise DomainError(f"affine factor must be a positive integer, got a={a}")
    if a * f.domain_start + b < 1:
        raise DomainError(
            f"substitution ({a}, {b}) leaves the domain: {a}*{f.domain_start}+{b} < 1"
        )
    a0, b0 = f.affine
    return SubpolyFunction(f.terms, (a0 * int(a), a0 * int(b) + b0))


def derivative(f: TermSum, j: int) -> TermSum:
    """Exact j-th derivative, chain factor a^j included."""
    if j < 0 or j > CONFIG["max_derivative_order"]:
        raise DerivativeOrderError(
            f"derivative order must be in [0, {CONFIG['max_derivative_order']}], got {j}"
        )
    terms = f.terms
    for _ in range(j):
        terms = _differentiate(terms)
    scale = Fraction(f.affine[0]) ** j
    if scale != 1:
        terms = tuple(Term(t.coeff * scale, t.c, t.k) for t in terms)
    return TermSum(terms, f.affine)


def growth_exponent(f: SubpolyFunction) -> GrowthInfo:
    beta = f.leading.c
    r = max(1, math.ceil(beta + Fraction(1, 2)))
    return GrowthInfo(
        beta=float(beta),
        ell=math.floor(beta),
        r=r,
        bigR=2 ** (r - 1),
        beta_exact=beta,
    )


def classify_type(f: SubpolyFunction) -> int:
    """The unique ell with x^ell < f < x^(ell+1)."""
    lead = f.leading
    if lead.c.denominator == 1 and lead.k == 0:
        raise NotSubpolynomialType(
            f"leading term {_format_term(lead, abs(lead.coeff))} is a pure integer monomial"
        )
    return math.floor(lead.c)
