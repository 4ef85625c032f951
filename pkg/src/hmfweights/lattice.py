"""Embeddings, exact (possibly symbolic) coefficients and weight vectors.

A coefficient is either a plain ``int`` or an :class:`Affine` expression
``a*p + b*κ + c`` over symbols with integer lower bounds.  Comparisons
return a three-valued :class:`Tri` verdict that is sound for every
instantiation of the symbols respecting their bounds.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import InputError, SymbolContextError

P = "p"
KAPPA = "κ"


class Tri(enum.Enum):
    ALWAYS = "always"
    NEVER = "never"
    INDETERMINATE = "indeterminate"

    @classmethod
    def of(cls, flag: bool) -> Tri:
        return cls.ALWAYS if flag else cls.NEVER

    def __invert__(self) -> Tri:
        if self is Tri.ALWAYS:
            return Tri.NEVER
        if self is Tri.NEVER:
            return Tri.ALWAYS
        return self

    def __and__(self, other: Tri) -> Tri:
        if Tri.NEVER in (self, other):
            return Tri.NEVER
        if self is other is Tri.ALWAYS:
            return Tri.ALWAYS
        return Tri.INDETERMINATE

    def __or__(self, other: Tri) -> Tri:
        if Tri.ALWAYS in (self, other):
            return Tri.ALWAYS
        if self is other is Tri.NEVER:
            return Tri.NEVER
        return Tri.INDETERMINATE

    @staticmethod
    def all(items: Iterable[Tri]) -> Tri:
        return reduce(lambda a, b: a & b, items, Tri.ALWAYS)

    @staticmethod
    def any(items: Iterable[Tri]) -> Tri:
        return reduce(lambda a, b: a | b, items, Tri.NEVER)

    def __str__(self) -> str:
        return self.value


# --------------------------------------------------------------------------
# Symbol contexts and affine coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolContext:
    """Lower bounds for the symbols of one computation.

    At most two symbols: ``p`` (bound >= 2) and one auxiliary symbol.
    """

    bounds: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        names = [n for n, _ in self.bounds]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate symbol in context: {names}")
        aux = [n for n in names if n != P]
        if len(aux) > 1:
            raise InputError(f"at most one auxiliary symbol is supported, got {aux}")
        for name, lb in self.bounds:
            if name == P and lb < 2:
                raise InputError(f"lower bound for p must be >= 2, got {lb}")
        ordered = tuple(sorted(self.bounds, key=lambda t: (t[0] != P, t[0])))
        object.__setattr__(self, "bounds", ordered)

    @classmethod
    def of(cls, **bounds: int) -> SymbolContext:
        return cls(tuple(bounds.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bounds)

    def lower(self, name: str) -> int:
        for n, lb in self.bounds:
            if n == name:
                return lb
        raise InputError(f"symbol {name!r} not declared in context")

    def sym(self, name: str) -> Affine:
        self.lower(name)
        return Affine(((name, 1),), 0, self)

    def order(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class Affine:
    """``sum(coef * symbol) + const`` with at least one nonzero coefficient.

    Build through arithmetic on :meth:`SymbolContext.sym`; results whose
    symbols cancel collapse to ``int``.
    """

    terms: tuple[tuple[str, int], ...]
    const: int
    ctx: SymbolContext = field(repr=False)

    def _coeffs(self) -> dict[str, int]:
        return dict(self.terms)

    def coeff(self, name: str) -> int:
        return self._coeffs().get(name, 0)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.terms)

    def __add__(self, other: Coeff) -> Coeff:
        if isinstance(other, int):
            return Affine(self.terms, self.const + other, self.ctx)
        if isinstance(other, Affine):
            ctx = _join_ctx(self.ctx, other.ctx)
            acc = self._coeffs()
            for n, c in other.terms:
                acc[n] = acc.get(n, 0) + c
            return _make(acc, self.const + other.const, ctx)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> Affine:
        return Affine(tuple((n, -c) for n, c in self.terms), -self.const, self.ctx)

    def __sub__(self, other: Coeff) -> Coeff:
        if isinstance(other, (int, Affine)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: Coeff) -> Coeff:
        return (-self) + other

    def __mul__(self, other: int) -> Coeff:
        if isinstance(other, Affine):
            raise TypeError("product of two symbolic coefficients is not affine")
        if isinstance(other, int):
            return _make({n: c * other for n, c in self.terms}, self.const * other, self.ctx)
        return NotImplemented

    __rmul__ = __mul__

    def __str__(self) -> str:
        return format_coeff(self)


Coeff = Union[int, Affine]
CVec = tuple  # tuple[Coeff, ...]


def _make(coeffs: Mapping[str, int], const: int, ctx: SymbolContext) -> Coeff:
    terms = tuple(sorted(((n, c) for n, c in coeffs.items() if c), key=lambda t: ctx.order(t[0])))
    if not terms:
        return const
    return Affine(terms, const, ctx)


def _join_ctx(a: SymbolContext, b: SymbolContext) -> SymbolContext:
    if a is b or a == b:
        return a
    raise SymbolContextError(f"mismatched symbol contexts {a.bounds} vs {b.bounds}")


def context_of(*items: object) -> SymbolContext | None:
    """The shared context of the symbolic coefficients among ``items``."""
    ctx: SymbolContext | None = None
    for item in items:
        if isinstance(item, Affine):
            ctx = item.ctx if ctx is None else _join_ctx(ctx, item.ctx)
        elif isinstance(item, (tuple, list)):
            sub = context_of(*item)
            if sub is not None:
                ctx = sub if ctx is None else _join_ctx(ctx, sub)
    return ctx


# --------------------------------------------------------------------------
# Sound three-valued comparison
# --------------------------------------------------------------------------
# Differences are lowered to polynomials {monomial: coef}, monomial being a
# sorted tuple of symbol names, so that products like p*k_tau with symbolic
# k_tau can still be compared.

_Poly = dict


def _poly(c: Coeff) -> _Poly:
    if isinstance(c, int):
        return {(): c} if c else {}
    out = {(n,): a for n, a in c.terms}
    if c.const:
        out[()] = c.const
    return out


def _padd(a: _Poly, b: _Poly, sign: int = 1) -> _Poly:
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0) + sign * c
    return {m: c for m, c in out.items() if c}


def _pmul(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(sorted(ma + mb))
            out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def _range(poly: _Poly, ctx: SymbolContext | None) -> tuple[int | None, int | None]:
    """Bounds (lo, hi) of the polynomial over the admissible region; None is infinite."""
    lo: int | None = 0
    hi: int | None = 0
    for mono, c in poly.items():
        if not mono:
            lo = None if lo is None else lo + c
            hi = None if hi is None else hi + c
            continue
        assert ctx is not None
        lbs = [ctx.lower(n) for n in mono]
        if len(mono) == 1 or all(b >= 0 for b in lbs):
            corner = c
            for b in lbs:
                corner *= b
            if c > 0:
                lo = None if lo is None else lo + corner
                hi = None
            else:
                hi = None if hi is None else hi + corner
                lo = None
        else:
            lo = hi = None
    return lo, hi


def _positive(poly: _Poly, ctx: SymbolContext | None) -> Tri:
    lo, hi = _range(poly, ctx)
    if lo is not None and lo > 0:
        return Tri.ALWAYS
    if hi is not None and hi <= 0:
        return Tri.NEVER
    return Tri.INDETERMINATE


def _zero(poly: _Poly, ctx: SymbolContext | None) -> Tri:
    if not poly:
        return Tri.ALWAYS
    lo, hi = _range(poly, ctx)
    if (lo is not None and lo > 0) or (hi is not None and hi < 0):
        return Tri.NEVER
    linear = [m for m in poly if m]
    if len(linear) == 1 and len(linear[0]) == 1:
        # c*x + d == 0 has at most one root; check it against integrality and the bound
        (name,) = linear[0]
        c, d = poly[linear[0]], poly.get((), 0)
        assert ctx is not None
        if d % c or -d // c < ctx.lower(name):
            return Tri.NEVER
    return Tri.INDETERMINATE


def _diff(b: Coeff, a: Coeff, scale: Coeff = 1) -> tuple[_Poly, SymbolContext | None]:
    ctx = context_of(a, b, scale)
    return _padd(_poly(b), _pmul(_poly(scale), _poly(a)), -1), ctx


def coeff_cmp(a: Coeff, b: Coeff, rel: str = "<") -> Tri:
    """Verdict of ``a rel b`` over all admissible instantiations.

    ``rel`` is one of ``<, <=, ==, !=, >=, >``.  Mismatched contexts raise
    :class:`SymbolContextError`.
    """
    if isinstance(a, int) and isinstance(b, int):
        return Tri.of(_INT_REL[rel](a, b))
    poly, ctx = _diff(b, a)
    return _rel(poly, ctx, rel)


def scaled_cmp(scale: Coeff, a: Coeff, b: Coeff, rel: str = "<") -> Tri:
    """Verdict of ``scale*a rel b``; ``scale`` is typically ``p``."""
    if isinstance(scale, int) and isinstance(a, int) and isinstance(b, int):
        return Tri.of(_INT_REL[rel](scale * a, b))
    poly, ctx = _diff(b, a, scale)
    return _rel(poly, ctx, rel)


_INT_REL = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
    ">=": lambda x, y: x >= y,
    ">": lambda x, y: x > y,
}


def _rel(delta: _Poly, ctx: SymbolContext | None, rel: str) -> Tri:
    # delta = rhs - lhs
    if rel == "<":
        return _positive(delta, ctx)
    if rel == ">=":
        return ~_positive(delta, ctx)
    if rel == ">":
        return _positive({m: -c for m, c in delta.items()}, ctx)
    if rel == "<=":
        return ~_positive({m: -c for m, c in delta.items()}, ctx)
    if rel == "==":
        return _zero(delta, ctx)
    if rel == "!=":
        return ~_zero(delta, ctx)
    raise InputError(f"unknown relation {rel!r}")


def lt(a: Coeff, b: Coeff) -> Tri:
    return coeff_cmp(a, b, "<")


def ge(a: Coeff, b: Coeff) -> Tri:
    return coeff_cmp(a, b, ">=")


def eq(a: Coeff, b: Coeff) -> Tri:
    return coeff_cmp(a, b, "==")


def congruent_one_mod(c: Coeff, p: Coeff) -> Tri:
    """Verdict of ``c ≡ 1 (mod p)``."""
    if isinstance(p, int):
        if isinstance(c, int):
            return Tri.of(c % p == 1 % p)
        return Tri.INDETERMINATE
    if isinstance(c, Affine) and any(n != P for n in c.symbols):
        return Tri.INDETERMINATE
    # c = a*p + r, so c ≡ r (mod p) and the question is whether p | r - 1
    r = c.const if isinstance(c, Affine) else c
    n = abs(r - 1)
    if n == 0:
        return Tri.ALWAYS
    pmin = p.ctx.lower(P) if p.coeff(P) == 1 and p.const == 0 else None
    if pmin is None:
        return Tri.INDETERMINATE
    return Tri.NEVER if n < pmin else Tri.INDETERMINATE


# --------------------------------------------------------------------------
# Text form
# --------------------------------------------------------------------------


def format_coeff(c: Coeff) -> str:
    """Canonical form ``a*p+b*κ+c`` with zero terms and unit factors omitted."""
    if isinstance(c, int):
        return str(c)
    out = ""
    for name, a in c.terms:
        mag = name if abs(a) == 1 else f"{abs(a)}*{name}"
        if a < 0:
            out += "-" + mag
        else:
            out += ("+" if out else "") + mag
    if c.const:
        out += f"{c.const:+d}"
    return out


_TERM = re.compile(r"([+-])?(\d+)?(\*)?([a-zA-Zκ]+)?")
_ALIASES = {"p": P, "κ": KAPPA, "kappa": KAPPA}


def parse_coeff(text: str, ctx: SymbolContext | None = None) -> Coeff:
    """Parse ``INT``, ``INT p``, ``p``, ``κ``, ``INT κ`` terms joined by +/-.

    Whitespace is ignored; ``−`` is accepted for minus, ``kappa`` for κ.
    Symbols must be declared in ``ctx``.
    """
    s = "".join(text.split()).replace("−", "-")
    if not s:
        raise InputError("empty coefficient")
    pos = 0
    const = 0
    coeffs: dict[str, int] = {}
    while pos < len(s):
        m = _TERM.match(s, pos)
        sign, num, star, sym = m.groups()
        if m.end() == pos or (num is None and sym is None) or (sign is None and pos > 0):
            raise InputError(f"cannot parse coefficient {text!r} at {s[pos:]!r}")
        if star and not (num and sym):
            raise InputError(f"dangling '*' in {text!r}")
        value = int(num) if num else 1
        if sign == "-":
            value = -value
        if sym is None:
            const += value
        else:
            name = _ALIASES.get(sym)
            if name is None:
                raise InputError(f"unknown symbol {sym!r} in {text!r}")
            if ctx is None or name not in ctx.names:
                raise InputError(f"symbol {name!r} used without a declared lower bound")
            coeffs[name] = coeffs.get(name, 0) + value
        pos = m.end()
    if ctx is None:
        return const
    return _make(coeffs, const, ctx)


def format_vec(v: Sequence[Coeff]) -> str:
    return "(" + ",".join(format_coeff(c) for c in v) + ")"


def vec_strs(v: Sequence[Coeff]) -> list[str]:
    return [format_coeff(c) for c in v]


# --------------------------------------------------------------------------
# Embeddings
# --------------------------------------------------------------------------


class Embedding(NamedTuple):
    orbit: int
    index: int


@dataclass(frozen=True)
class EmbeddingSet:
    """The embeddings grouped into Frobenius orbits of the given residue degrees.

    Within an orbit, ``frob_inv`` sends index i to i+1 (mod f_v).
    """

    degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "degrees", tuple(self.degrees))
        if not self.degrees:
            raise InputError("at least one orbit is required")
        for f in self.degrees:
            if not isinstance(f, int) or f < 1:
                raise InputError(f"orbit degrees must be positive integers, got {self.degrees}")

    @property
    def d(self) -> int:
        return sum(self.degrees)

    @cached_property
    def _offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for f in self.degrees:
            out.append(acc)
            acc += f
        return tuple(out)

    @cached_property
    def embeddings(self) -> tuple[Embedding, ...]:
        return tuple(Embedding(v, i) for v, f in enumerate(self.degrees) for i in range(f))

    def orbit(self, v: int) -> tuple[Embedding, ...]:
        return tuple(Embedding(v, i) for i in range(self.degrees[v]))

    def check(self, tau: Embedding) -> Embedding:
        v, i = tau
        if not (0 <= v < len(self.degrees) and 0 <= i < self.degrees[v]):
            raise InputError(f"embedding {tuple(tau)} not valid for degrees {self.degrees}")
        return Embedding(v, i)

    def flat(self, tau: Embedding) -> int:
        v, i = self.check(tau)
        return self._offsets[v] + i

    def at(self, n: int) -> Embedding:
        return self.embeddings[n]

    def frob_pow(self, tau: Embedding, n: int) -> Embedding:
        """``Frob^n ∘ tau``; Frob lowers the index, so this is index - n."""
        v, i = self.check(tau)
        return Embedding(v, (i - n) % self.degrees[v])

    def frob_inv(self, tau: Embedding) -> Embedding:
        return self.frob_pow(tau, -1)

    def frob(self, tau: Embedding) -> Embedding:
        return self.frob_pow(tau, 1)

    def is_fixed(self, tau: Embedding) -> bool:
        return self.degrees[self.check(tau).orbit] == 1

    def label(self, tau: Embedding) -> str:
        v, i = tau
        return f"τ_{i}" if len(self.degrees) == 1 else f"τ_{{{v},{i}}}"

    def parse_label(self, text: str) -> Embedding:
        s = text.strip().replace("τ", "").replace("tau", "").lstrip("_").strip("{}")
        parts = [x for x in re.split(r"[,\s]+", s) if x]
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise InputError(f"cannot parse embedding {text!r}") from None
        if len(nums) == 1 and len(self.degrees) == 1:
            return self.check(Embedding(0, nums[0]))
        if len(nums) == 2:
            return self.check(Embedding(*nums))
        raise InputError(f"cannot parse embedding {text!r}")

    # vector helpers -------------------------------------------------------

    def zeros(self) -> CVec:
        return (0,) * self.d

    def unit(self, tau: Embedding, c: Coeff = 1) -> CVec:
        out = [0] * self.d
        out[self.flat(tau)] = c
        return tuple(out)

    def get(self, vec: Sequence[Coeff], tau: Embedding) -> Coeff:
        return vec[self.flat(tau)]


def make_embedding_set(degrees: Sequence[int]) -> EmbeddingSet:
    return EmbeddingSet(tuple(degrees))


def vadd(a: Sequence[Coeff], b: Sequence[Coeff]) -> CVec:
    if len(a) != len(b):
        raise InputError("vector length mismatch")
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[Coeff], b: Sequence[Coeff]) -> CVec:
    if len(a) != len(b):
        raise InputError("vector length mismatch")
    return tuple(x - y for x, y in zip(a, b))


# --------------------------------------------------------------------------
# Weights and predicates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    E: EmbeddingSet
    k: CVec
    l: CVec

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(self.k))
        object.__setattr__(self, "l", tuple(self.l))
        if len(self.k) != self.E.d or len(self.l) != self.E.d:
            raise InputError(f"weight vectors must have length {self.E.d}")
        context_of(self.k, self.l)

    @classmethod
    def of(cls, E: EmbeddingSet, k: Sequence[Coeff], l: Sequence[Coeff] | None = None) -> Weight:
        return cls(E, tuple(k), E.zeros() if l is None else tuple(l))

    def shift(self, dk: Sequence[Coeff] | None = None, dl: Sequence[Coeff] | None = None) -> Weight:
        k = self.k if dk is None else vadd(self.k, dk)
        l = self.l if dl is None else vadd(self.l, dl)
        return Weight(self.E, k, l)

    def to_json(self) -> dict:
        return {"k": vec_strs(self.k), "l": vec_strs(self.l)}

    def __str__(self) -> str:
        return f"({format_vec(self.k)},{format_vec(self.l)})"


def _kvec(w: Weight | Sequence[Coeff]) -> CVec:
    return w.k if isinstance(w, Weight) else tuple(w)


def is_algebraic(w: Weight | Sequence[Coeff]) -> Tri:
    return Tri.all(ge(c, 2) for c in _kvec(w))


def in_minimal_cone(E: EmbeddingSet, k: Sequence[Coeff], p: Coeff) -> Tri:
    """``p*k_τ >= k_{Frob⁻¹∘τ}`` for every τ."""
    return Tri.all(
        scaled_cmp(p, E.get(k, tau), E.get(k, E.frob_inv(tau)), ">=") for tau in E.embeddings
    )


def evaluate(obj, assignment: Mapping[str, int]):
    """Substitute integers for symbols in a coefficient, vector or :class:`Weight`."""
    if isinstance(obj, Weight):
        return Weight(obj.E, evaluate(obj.k, assignment), evaluate(obj.l, assignment))
    if isinstance(obj, (tuple, list)):
        return tuple(evaluate(c, assignment) for c in obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Affine):
        total = obj.const
        for name, a in obj.terms:
            if name not in assignment:
                raise InputError(f"assignment is missing symbol {name!r}")
            value = assignment[name]
            if value < obj.ctx.lower(name):
                raise InputError(
                    f"{name}={value} is below its lower bound {obj.ctx.lower(name)}"
                )
            total += a * value
        return total
    raise TypeError(f"cannot evaluate {type(obj).__name__}")
