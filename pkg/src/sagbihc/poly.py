"""Sparse multivariate polynomials over exact rationals or complex doubles.

A :class:`Polynomial` is an immutable mapping from exponent tuples to nonzero
coefficients, attached to a :class:`Ring` that fixes the variable names.
Coefficients are either :class:`fractions.Fraction` (the exact layer) or
``complex`` (the numeric layer).  Mixing the two promotes to ``complex``;
:meth:`Polynomial.to_complex` is the explicit one-way bridge.

Terms are kept in graded lexicographic order, highest first.  Equality,
hashing and printing are defined against that order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Number, Rational
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Ring",
    "Polynomial",
    "ParseError",
    "RingMismatchError",
    "parse",
    "jacobian",
    "grlex_key",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ParseError(ValueError):
    """Syntax error in a polynomial expression; ``offset`` is the byte offset."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class RingMismatchError(ValueError):
    pass


class Ring:
    """Ordered set of variable names.

    Names listed in ``params`` are deformation parameters (such as the
    homotopy parameter ``t``); :func:`jacobian` skips them by default.
    """

    __slots__ = ("names", "params", "_index")

    def __init__(self, names: Sequence[str], params: Iterable[str] = ()):
        names = tuple(names)
        if not names:
            raise ValueError("a ring needs at least one variable")
        for name in names:
            if not _IDENT.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        params = frozenset(params)
        if not params <= set(names):
            raise ValueError("parameters must be ring variables")
        self.names = names
        self.params = params
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def gens(self) -> list["Polynomial"]:
        return [self.var(name) for name in self.names]

    def var(self, name: str) -> "Polynomial":
        e = [0] * self.n
        e[self.index(name)] = 1
        return Polynomial(self, {tuple(e): Fraction(1)})

    def const(self, c) -> "Polynomial":
        return Polynomial(self, {(0,) * self.n: c})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def extend(self, name: str, param: bool = True) -> "Ring":
        """Ring with one extra trailing variable."""
        return Ring(self.names + (name,), self.params | ({name} if param else set()))

    def fresh_name(self, base: str) -> str:
        name = base
        while name in self._index:
            name += "_"
        return name

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.names == other.names
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.names, self.params))

    def __repr__(self):
        return f"Ring({list(self.names)!r})"


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


def _normalize_coeff(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        raise TypeError("boolean coefficient")
    if isinstance(c, Rational):
        return Fraction(c)
    if isinstance(c, (float, complex)):
        return complex(c)
    if isinstance(c, Number):
        return complex(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class Polynomial:
    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], object] | None = None):
        self.ring = ring
        clean = {}
        if terms:
            n = ring.n
            for e, c in terms.items():
                e = tuple(int(a) for a in e)
                if len(e) != n:
                    raise ValueError(f"exponent {e} has length {len(e)}, ring has {n}")
                if any(a < 0 for a in e):
                    raise ValueError(f"negative exponent {e}")
                c = _normalize_coeff(c)
                if c != 0:
                    clean[e] = c
        self._terms = dict(sorted(clean.items(), key=lambda kv: grlex_key(kv[0]), reverse=True))
        self._hash = None

    @classmethod
    def _raw(cls, ring, terms: dict) -> "Polynomial":
        # terms already clean; only sorting is done
        p = cls.__new__(cls)
        p.ring = ring
        p._terms = dict(sorted(terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True))
        p._hash = None
        return p

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> list[tuple[object, tuple[int, ...]]]:
        """``(coefficient, exponent)`` pairs in canonical order."""
        return [(c, e) for e, c in self._terms.items()]

    def coefficients(self) -> dict[tuple[int, ...], object]:
        return dict(self._terms)

    def coeff(self, e: Sequence[int]):
        return self._terms.get(tuple(e), 0)

    def exponents(self) -> list[tuple[int, ...]]:
        return list(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def leading(self) -> tuple[object, tuple[int, ...]]:
        """Largest term in graded lexicographic order."""
        for e, c in self._terms.items():
            return c, e
        raise ValueError("zero polynomial has no leading term")

    def support(self) -> list[tuple[int, ...]]:
        return list(self._terms)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"{self.ring!r} vs {other.ring!r}")
            return other
        if isinstance(other, Number):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
        return Polynomial._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {e: -c for e, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, Number) and not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v == 0:
                    out.pop(e, None)
                else:
                    out[e] = v
        return Polynomial._raw(self.ring, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def scale(self, c) -> "Polynomial":
        c = _normalize_coeff(c)
        if c == 0:
            return self.ring.zero()
        return Polynomial._raw(self.ring, {e: v * c for e, v in self._terms.items()})

    def __truediv__(self, c):
        if isinstance(c, Polynomial):
            raise TypeError("polynomial division is not supported")
        c = _normalize_coeff(c)
        return self.scale(1 / c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Number) and not isinstance(other, Polynomial):
            other = self.ring.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and list(self._terms.items()) == list(other._terms.items())

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, tuple(self._terms.items())))
        return self._hash

    # -- conversions ------------------------------------------------------
    def to_complex(self) -> "Polynomial":
        return Polynomial._raw(self.ring, {e: complex(c) for e, c in self._terms.items()})

    def change_ring(self, ring: Ring, positions: Sequence[int] | None = None) -> "Polynomial":
        """Embed into ``ring``; variable ``i`` goes to slot ``positions[i]``."""
        if positions is None:
            positions = [ring.index(name) for name in self.ring.names]
        out = {}
        for e, c in self._terms.items():
            f = [0] * ring.n
            for i, a in enumerate(e):
                if a:
                    f[positions[i]] += a
            out[tuple(f)] = c
        return Polynomial(ring, out)

    # -- evaluation -------------------------------------------------------
    def evaluate(self, point: Sequence) -> object:
        """Term-wise evaluation in canonical term order."""
        if len(point) != self.ring.n:
            raise ValueError(f"point has length {len(point)}, ring has {self.ring.n}")
        total = 0
        for e, c in self._terms.items():
            v = c
            for xi, a in zip(point, e):
                if a:
                    v = v * xi**a
            total = total + v
        return total

    __call__ = evaluate

    def subs(self, values: Mapping[str, object]) -> "Polynomial":
        """Substitute numbers for some variables; the ring is unchanged."""
        idx = {self.ring.index(k): v for k, v in values.items()}
        out: dict = {}
        for e, c in self._terms.items():
            f = list(e)
            v = c
            for i, val in idx.items():
                if f[i]:
                    v = v * val ** f[i]
                    f[i] = 0
            f = tuple(f)
            out[f] = out.get(f, 0) + v
        return Polynomial(self.ring, out)

    def diff(self, var: int | str) -> "Polynomial":
        i = self.ring.index(var) if isinstance(var, str) else var
        out = {}
        for e, c in self._terms.items():
            a = e[i]
            if a:
                f = e[:i] + (a - 1,) + e[i + 1:]
                out[f] = c * a
        return Polynomial._raw(self.ring, out)

    # -- printing ---------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, (e, c) in enumerate(self._terms.items()):
            mono = "*".join(
                name if a == 1 else f"{name}^{a}"
                for name, a in zip(self.ring.names, e)
                if a
            )
            neg, cstr = _coeff_str(c)
            if mono:
                body = mono if cstr == "1" else f"{cstr}*{mono}"
            else:
                body = cstr
            if k == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def _coeff_str(c) -> tuple[bool, str]:
    if isinstance(c, Fraction):
        neg = c < 0
        c = abs(c)
        return neg, str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    z = complex(c)
    if z.imag == 0:
        return z.real < 0, repr(abs(z.real))
    return False, f"({z.real!r}{z.imag:+}j)"


# -- parser -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()/]))"
)


class _Parser:
    def __init__(self, text: str, ring: Ring):
        self.text = text
        self.ring = ring
        self.tokens = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:]
                if rest.strip() == "":
                    break
                off = pos + (len(rest) - len(rest.lstrip()))
                raise ParseError(f"unexpected character {text[off]!r}", _byte_offset(text, off), text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, _byte_offset(self.text, tok[2]), self.text)

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.error("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.unary()
            elif kind == "op" and val == "/":
                self.take()
                tok = self.peek()
                if tok[0] != "num":
                    self.error("division only by a numeric literal")
                self.take()
                d = Fraction(tok[1])
                if d == 0:
                    self.error("division by zero", tok)
                p = p / d
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                self.error("implicit multiplication is not allowed")
            else:
                return p

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if val == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be a non-negative integer literal")
            self.take()
            base = base ** int(tok[1])
            if self.peek()[0] == "op" and self.peek()[1] == "^":
                self.error("chained exponents are ambiguous; use parentheses")
        return base

    def atom(self):
        kind, val, _ = tok = self.take()
        if kind == "num":
            return self.ring.const(Fraction(val))
        if kind == "name":
            if val not in self.ring.names:
                self.error(f"unknown variable {val!r}", tok)
            return self.ring.var(val)
        if kind == "op" and val == "(":
            p = self.expr()
            if self.peek()[1] != ")":
                self.error("expected ')'")
            self.take()
            return p
        self.error(f"unexpected token {val!r}" if kind != "end" else "unexpected end of input", tok)


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode("utf-8"))


def parse(text: str, ring: Ring) -> Polynomial:
    """Parse ``text`` such as ``"x^2 + 3/2*y - 1"`` into a polynomial of ``ring``."""
    return _Parser(text, ring).parse()


def jacobian(system: Sequence[Polynomial], wrt: Sequence[int | str] | None = None) -> list[list[Polynomial]]:
    """Matrix of partial derivatives; parameters are skipped unless ``wrt`` is given."""
    if not system:
        raise ValueError("empty system")
    ring = system[0].ring
    for f in system:
        if f.ring != ring:
            raise RingMismatchError("system polynomials live in different rings")
    if wrt is None:
        wrt = [i for i, name in enumerate(ring.names) if name not in ring.params]
    return [[f.diff(v) for v in wrt] for f in system]
