"""Exact finite-field arithmetic in GF(q).

Supports prime fields GF(p) for p up to 2^16 and binary extension fields
GF(2^m) for 1 <= m <= 8.  Extension-field multiplication uses log/antilog
tables built from a multiplicative generator.  All arithmetic is exact,
over plain unsigned integers; no floating point is used anywhere.

Elements are represented either as bare ints (via the FieldContext methods,
used in inner loops) or as FieldElement wrappers that carry their context
and overload the arithmetic operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class FieldError(ValueError):
    """Invalid field construction or an operation outside the field."""


class ContextMismatchError(FieldError):
    """Operands belong to different field contexts."""


#: Default irreducible polynomials for GF(2^m), as bitmasks including the
#: x^m term (e.g. 0b1011 = x^3 + x + 1).  All are primitive.
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
}

MAX_PRIME = 1 << 16
MAX_BINARY_DEGREE = 8


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _poly_degree(p: int) -> int:
    return p.bit_length() - 1


def _poly_mod(a: int, m: int) -> int:
    """Remainder of polynomial a modulo m over GF(2)."""
    dm = _poly_degree(m)
    while a.bit_length() - 1 >= dm and a:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _poly_mulmod(a: int, b: int, m: int) -> int:
    """Carry-less product of a and b, reduced modulo m."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
    return _poly_mod(r, m)


def _is_irreducible(poly: int, m: int) -> bool:
    """Brute-force irreducibility test for a degree-m polynomial over GF(2)."""
    if _poly_degree(poly) != m:
        return False
    # any nontrivial factorization has a factor of degree <= m // 2
    for d in range(1, m // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, cand) == 0:
                return False
    return True


class FieldContext:
    """Descriptor of GF(q): either a prime field or a binary extension.

    Immutable after construction; every method is a pure function, so a
    context may be shared freely across threads.
    """

    def __init__(self, q: int, *, kind: str, m: int = 0, poly: int = 0):
        self.q = q
        self.kind = kind  # "prime" or "binary"
        self.m = m
        self.poly = poly
        if kind == "binary":
            self._build_tables()

    # -- constructors -----------------------------------------------------

    @classmethod
    def prime(cls, p: int) -> "FieldContext":
        if p > MAX_PRIME:
            raise FieldError(f"prime field order {p} exceeds {MAX_PRIME}")
        if not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        return cls(p, kind="prime")

    @classmethod
    def binary(cls, m: int, poly: int | None = None) -> "FieldContext":
        if not 1 <= m <= MAX_BINARY_DEGREE:
            raise FieldError(f"extension degree {m} out of range [1, {MAX_BINARY_DEGREE}]")
        if poly is None:
            poly = DEFAULT_POLYS[m]
        if not _is_irreducible(poly, m):
            raise FieldError(f"polynomial {poly:#x} is not irreducible of degree {m}")
        return cls(1 << m, kind="binary", m=m, poly=poly)

    @classmethod
    def parse(cls, spec: str) -> "FieldContext":
        """Parse a field spec string: ``p:<prime>`` or ``b:<m>[:poly=<hex>]``."""
        parts = spec.split(":")
        try:
            if parts[0] == "p" and len(parts) == 2:
                return cls.prime(int(parts[1]))
            if parts[0] == "b" and len(parts) in (2, 3):
                m = int(parts[1])
                poly = None
                if len(parts) == 3:
                    key, _, value = parts[2].partition("=")
                    if key != "poly":
                        raise FieldError(f"unknown field option {key!r}")
                    poly = int(value, 16)
                return cls.binary(m, poly)
        except ValueError as exc:
            raise FieldError(f"bad field spec {spec!r}: {exc}") from exc
        raise FieldError(f"bad field spec {spec!r}")

    @property
    def spec(self) -> str:
        if self.kind == "prime":
            return f"p:{self.q}"
        return f"b:{self.m}:poly={self.poly:#x}"

    # -- table construction ----------------------------------------------

    def _build_tables(self) -> None:
        q, poly = self.q, self.poly
        if q == 2:
            self._exp, self._log = [1], [0, 0]
            return
        for g in range(2, q):
            exp = [0] * (q - 1)
            log = [0] * q
            x = 1
            ok = True
            for i in range(q - 1):
                if i > 0 and x == 1:
                    ok = False  # order of g is less than q - 1
                    break
                exp[i] = x
                log[x] = i
                x = _poly_mulmod(x, g, poly)
            if ok and x == 1:
                self._exp, self._log = exp, log
                return
        raise FieldError(f"no generator found for poly {poly:#x}")  # pragma: no cover

    # -- scalar arithmetic on bare ints ----------------------------------

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"value {a} outside [0, {self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a + b) % self.q
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a - b) % self.q
        return a ^ b

    def neg(self, a: int) -> int:
        if self.kind == "prime":
            return (-a) % self.q
        return a

    def mul(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a * b) % self.q
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        if self.kind == "prime":
            return pow(a, self.q - 2, self.q)
        return self._exp[(-self._log[a]) % (self.q - 1)]

    # -- vector helpers --------------------------------------------------

    def dot(self, u: Sequence[int], w: Sequence[int]) -> int:
        if len(u) != len(w):
            raise FieldError(f"length mismatch: {len(u)} vs {len(w)}")
        acc = 0
        for a, b in zip(u, w):
            acc = self.add(acc, self.mul(a, b))
        return acc

    def vec_add(self, u: Sequence[int], w: Sequence[int]) -> tuple[int, ...]:
        if len(u) != len(w):
            raise FieldError(f"length mismatch: {len(u)} vs {len(w)}")
        return tuple(self.add(a, b) for a, b in zip(u, w))

    def vec_sub(self, u: Sequence[int], w: Sequence[int]) -> tuple[int, ...]:
        if len(u) != len(w):
            raise FieldError(f"length mismatch: {len(u)} vs {len(w)}")
        return tuple(self.sub(a, b) for a, b in zip(u, w))

    def vec_scale(self, c: int, u: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.mul(c, a) for a in u)

    def random_element(self, rng) -> int:
        return rng.randrange(self.q)

    def random_vector(self, length: int, rng) -> tuple[int, ...]:
        return tuple(rng.randrange(self.q) for _ in range(length))

    # -- identity --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldContext):
            return NotImplemented
        return (self.q, self.kind, self.poly) == (other.q, other.kind, other.poly)

    def __hash__(self) -> int:
        return hash((self.q, self.kind, self.poly))

    def __repr__(self) -> str:
        return f"FieldContext({self.spec})"

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(self.check(value), self)


@dataclass(frozen=True)
class FieldElement:
    """A single element of GF(q), carrying its field context."""

    value: int
    ctx: FieldContext

    def _coerce(self, other: "FieldElement") -> int:
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ContextMismatchError(f"{self.ctx} vs {other.ctx}")
        return other.value

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx.add(self.value, self._coerce(other)), self.ctx)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx.sub(self.value, self._coerce(other)), self.ctx)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx.mul(self.value, self._coerce(other)), self.ctx)

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.ctx.neg(self.value), self.ctx)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx.inv(self.value), self.ctx)

    def __repr__(self) -> str:
        return f"{self.value}@GF({self.ctx.q})"


def dot(u: Iterable[FieldElement], w: Iterable[FieldElement]) -> FieldElement:
    """Inner product of two equal-length FieldElement vectors."""
    u, w = list(u), list(w)
    if not u or not w:
        raise FieldError("dot of empty vectors")
    ctx = u[0].ctx
    for e in u + w:
        if e.ctx != ctx:
            raise ContextMismatchError("mixed contexts in dot")
    if len(u) != len(w):
        raise FieldError(f"length mismatch: {len(u)} vs {len(w)}")
    return FieldElement(ctx.dot([e.value for e in u], [e.value for e in w]), ctx)
