"""Exact arithmetic over GF(p), GF(p^m) and extension towers GF(q) < GF(q^N).

Every field is represented as ``base[x] / (modulus)`` where ``base`` is either
the prime field or another :class:`GF`.  Elements are plain integers: the
base-q digit expansion of the coefficient vector (constant term first), which
unrolls to the base-p digit expansion of the full prime-field coefficient
vector.  An element of a base field therefore keeps its integer encoding when
embedded into an extension built on top of it.

All arithmetic methods accept Python ints (returning ints) or numpy integer
arrays (returning int64 arrays), so matrices can be eliminated row-at-a-time
without per-element Python loops.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

#: Fields up to this order get full addition/multiplication/inverse tables.
TABLE_ORDER = 256
#: Fields up to this order (and above ``TABLE_ORDER``) get exp/log tables.
LOG_TABLE_ORDER = 1 << 16
#: Largest supported field order; encodings must fit in int64.
MAX_ORDER = 1 << 62


class FieldError(ValueError):
    """Invalid field parameters or mixing elements of different fields."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def _is_scalar(x) -> bool:
    return isinstance(x, (int, np.integer))


class GF:
    """A finite field ``base[x]/(modulus)``; ``base is None`` for GF(p).

    Use :func:`field_create` and :func:`extend` rather than calling this
    directly: those validate the modulus and share one instance (and its
    tables) per descriptor.
    """

    def __init__(self, p: int, base: GF | None, modulus: Sequence[int]):
        self.p = p
        self.base = base
        self.modulus = tuple(int(c) for c in modulus)
        self.degree = len(self.modulus) - 1
        if base is None:
            self.order = p
            self.abs_degree = 1
        else:
            self.order = base.order**self.degree
            self.abs_degree = base.abs_degree * self.degree
        if self.order > MAX_ORDER:
            raise FieldError(f"field order {self.order} exceeds int64 encodings")
        self._kind = self._pick_kind()
        if self.base is not None:
            self._qpow = np.array(
                [self.base.order**i for i in range(self.degree)], dtype=np.int64
            )
            self._neg_low = np.array(
                [self.base._sneg(c) for c in self.modulus[:-1]], dtype=np.int64
            )
        self._ppow = np.array([p**i for i in range(self.abs_degree)], dtype=np.int64)
        if self._kind == "table":
            self._build_tables()
        elif self._kind == "log":
            self._build_log_tables()
        elif self._kind == "prime" and p <= LOG_TABLE_ORDER:
            inv = np.zeros(p, dtype=np.int64)
            for a in range(1, p):
                inv[a] = pow(a, p - 2, p)
            self._inv_t = inv

    # -- identity -------------------------------------------------------
    @property
    def key(self) -> tuple:
        return (self.p, None if self.base is None else self.base.key, self.modulus)

    def __eq__(self, other) -> bool:
        return isinstance(other, GF) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.base is None:
            return f"GF({self.p})"
        if self.base.base is None:
            return f"GF({self.p}^{self.degree})"
        return f"GF(({self.base.order})^{self.degree})"

    @property
    def is_prime_field(self) -> bool:
        return self.base is None or (self.base.base is None and self.degree == 1)

    def is_extension_of(self, other: GF) -> bool:
        """True if ``other`` is this field or one of its tower bases."""
        f: GF | None = self
        while f is not None:
            if f == other:
                return True
            f = f.base
        return False

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(self, int(value))

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def to_dict(self) -> dict:
        if self.base is None:
            return {"p": self.p, "m": 1, "modulus": [0, 1]}
        if self.base.base is None:
            return {"p": self.p, "m": self.degree, "modulus": list(self.modulus)}
        return {
            "p": self.p,
            "m": self.abs_degree,
            "base": self.base.to_dict(),
            "degree": self.degree,
            "modulus": list(self.modulus),
        }

    @staticmethod
    def from_dict(d: dict) -> GF:
        if "base" in d:
            return extend(GF.from_dict(d["base"]), d["degree"], tuple(d["modulus"]))
        if d["m"] == 1:
            return field_create(d["p"], 1)
        return field_create(d["p"], d["m"], tuple(d["modulus"]))

    # -- representation helpers ----------------------------------------
    def _pick_kind(self) -> str:
        if self.base is None:
            return "prime"
        if self.degree == 1:
            return "alias"
        if self.order <= TABLE_ORDER:
            return "table"
        if self.order <= LOG_TABLE_ORDER:
            return "log"
        return "poly"

    def coeffs(self, a):
        """Coefficient digits over the base field, constant term first."""
        if self.base is None:
            return np.asarray(a, dtype=np.int64)[..., None]
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._qpow) % self.base.order

    def from_coeffs(self, c):
        c = np.asarray(c, dtype=np.int64)
        if self.base is None:
            return c[..., 0]
        return (c * self._qpow).sum(axis=-1)

    def prime_digits(self, a):
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._ppow) % self.p

    def _from_prime_digits(self, d):
        return (np.asarray(d, dtype=np.int64) * self._ppow).sum(axis=-1)

    # -- polynomial route (vectorized) ---------------------------------
    def _poly_mul(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, np.int64), np.asarray(b, np.int64))
        B, N = self.base, self.degree
        da, db = self.coeffs(a), self.coeffs(b)
        prod = np.zeros(a.shape + (2 * N - 1,), dtype=np.int64)
        for i in range(N):
            prod[..., i : i + N] = B.add(prod[..., i : i + N], B.mul(da[..., i : i + 1], db))
        for t in range(2 * N - 2, N - 1, -1):
            lead = prod[..., t : t + 1]
            prod[..., t - N : t] = B.add(prod[..., t - N : t], B.mul(lead, self._neg_low))
        return self.from_coeffs(prod[..., :N])

    def _build_tables(self):
        q = self.order
        a = np.arange(q, dtype=np.int64)
        self._mul_t = self._poly_mul(a[:, None], a[None, :])
        if self.p == 2:
            self._add_t = a[:, None] ^ a[None, :]
        else:
            self._add_t = self._digitwise_add(a[:, None], a[None, :])
        self._neg_t = self._digitwise_neg(a)
        inv = np.zeros(q, dtype=np.int64)
        rows, cols = np.nonzero(self._mul_t == 1)
        inv[rows] = cols
        self._inv_t = inv
        self._mul_l = self._mul_t.tolist()
        self._add_l = self._add_t.tolist()

    def _build_log_tables(self):
        q = self.order
        g = self._find_primitive()
        block = 256
        first = [1]
        for _ in range(block - 1):
            first.append(self._poly_smul(first[-1], g))
        step = self._poly_smul(first[-1], g)
        exp = np.zeros(q - 1, dtype=np.int64)
        cur = np.array(first, dtype=np.int64)
        for start in range(0, q - 1, block):
            stop = min(start + block, q - 1)
            exp[start:stop] = cur[: stop - start]
            cur = self._poly_mul(cur, step)
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(q - 1, dtype=np.int64)
        if len(np.unique(exp)) != q - 1:
            raise FieldError("generator search produced a non-primitive element")
        self._exp = np.concatenate([exp, exp])
        self._log = log

    def _poly_smul(self, a: int, b: int) -> int:
        return int(self._poly_mul(np.int64(a), np.int64(b)))

    def _poly_spow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self._poly_smul(result, base)
            base = self._poly_smul(base, base)
            e >>= 1
        return result

    def _find_primitive(self) -> int:
        q = self.order
        factors = _prime_factors(q - 1)
        for g in range(2, q):
            if all(self._poly_spow(g, (q - 1) // f) != 1 for f in factors):
                return g
        raise FieldError("no primitive element found")  # pragma: no cover

    def _digitwise_add(self, a, b):
        s = (self.prime_digits(a) + self.prime_digits(b)) % self.p
        return self._from_prime_digits(s)

    def _digitwise_neg(self, a):
        return self._from_prime_digits((-self.prime_digits(a)) % self.p)

    # -- scalar fast paths (Python ints) -------------------------------
    def _sadd(self, a: int, b: int) -> int:
        k = self._kind
        if k == "prime":
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        if k == "table":
            return self._add_l[a][b]
        if k == "alias":
            return self.base._sadd(a, b)
        return int(self._digitwise_add(a, b))

    def _sneg(self, a: int) -> int:
        k = self._kind
        if k == "prime":
            return (-a) % self.p
        if self.p == 2:
            return a
        if k == "table":
            return int(self._neg_t[a])
        if k == "alias":
            return self.base._sneg(a)
        return int(self._digitwise_neg(a))

    def _smul(self, a: int, b: int) -> int:
        k = self._kind
        if k == "prime":
            return (a * b) % self.p
        if k == "table":
            return self._mul_l[a][b]
        if k == "alias":
            return self.base._smul(a, b)
        if k == "log":
            if a == 0 or b == 0:
                return 0
            return int(self._exp[self._log[a] + self._log[b]])
        return self._poly_smul(a, b)

    def _sinv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        k = self._kind
        if k == "prime":
            return pow(int(a), self.p - 2, self.p)
        if k == "table":
            return int(self._inv_t[a])
        if k == "alias":
            return self.base._sinv(a)
        if k == "log":
            return int(self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)])
        ring = PolyRing(self.base)
        inv = ring.inverse_mod(list(self.coeffs(a)), list(self.modulus))
        inv = inv + [0] * (self.degree - len(inv))
        return int(self.from_coeffs(inv))

    # -- public arithmetic (ints or arrays) ----------------------------
    def add(self, a, b):
        if _is_scalar(a) and _is_scalar(b):
            return self._sadd(int(a), int(b))
        a, b = np.asarray(a, np.int64), np.asarray(b, np.int64)
        k = self._kind
        if k == "prime":
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        if k == "table":
            return self._add_t[a, b]
        if k == "alias":
            return self.base.add(a, b)
        return self._digitwise_add(a, b)

    def neg(self, a):
        if _is_scalar(a):
            return self._sneg(int(a))
        a = np.asarray(a, np.int64)
        k = self._kind
        if k == "prime":
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        if k == "table":
            return self._neg_t[a]
        if k == "alias":
            return self.base.neg(a)
        return self._digitwise_neg(a)

    def sub(self, a, b):
        if self.p == 2:
            return self.add(a, b)
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if _is_scalar(a) and _is_scalar(b):
            return self._smul(int(a), int(b))
        a, b = np.asarray(a, np.int64), np.asarray(b, np.int64)
        k = self._kind
        if k == "prime":
            return (a * b) % self.p
        if k == "table":
            return self._mul_t[a, b]
        if k == "alias":
            return self.base.mul(a, b)
        if k == "log":
            a, b = np.broadcast_arrays(a, b)
            out = self._exp[self._log[a] + self._log[b]]
            return np.where((a == 0) | (b == 0), 0, out)
        return self._poly_mul(a, b)

    def inv(self, a):
        if _is_scalar(a):
            return self._sinv(int(a))
        a = np.asarray(a, np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        k = self._kind
        if k in ("table",) or (k == "prime" and hasattr(self, "_inv_t")):
            return self._inv_t[a]
        if k == "alias":
            return self.base.inv(a)
        if k == "log":
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        flat = [self._sinv(int(x)) for x in a.ravel()]
        return np.array(flat, dtype=np.int64).reshape(a.shape)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, e: int):
        """``a**e`` by square-and-multiply; negative ``e`` inverts first."""
        if e < 0:
            a, e = self.inv(a), -e
        scalar = _is_scalar(a)
        result = 1 if scalar else np.ones_like(np.asarray(a, np.int64))
        base = int(a) if scalar else np.asarray(a, np.int64)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def frobenius(self, a, i: int = 1, over: GF | None = None):
        """``a ** (q**i)`` where q is the order of ``over`` (default: the base field).

        For a prime-based field the default ``over`` is GF(p).
        """
        if i < 0:
            raise ValueError("frobenius power must be non-negative")
        q = self.p if (over is None and self.base is None) else (over or self.base).order
        for _ in range(i):
            a = self.power(a, q)
        return a


@dataclass(frozen=True)
class FieldElement:
    """A single element; thin wrapper over the integer encoding."""

    field: GF
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise FieldError(f"{self.value} is not an element of {self.field}")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError(f"field mismatch: {self.field} vs {other.field}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p if self.field.base is None else int(other)
        return NotImplemented

    def _wrap(self, v: int) -> FieldElement:
        return FieldElement(self.field, int(v))

    def __add__(self, other):
        return self._wrap(self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return self._wrap(self.field.sub(self._other(other), self.value))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __mul__(self, other):
        return self._wrap(self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.field.div(self.value, self._other(other)))

    def __pow__(self, e: int):
        return self._wrap(self.field.power(self.value, e))

    def inverse(self) -> FieldElement:
        return self._wrap(self.field.inv(self.value))

    def frobenius(self, i: int = 1) -> FieldElement:
        return self._wrap(self.field.frobenius(self.value, i))

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.field.coeffs(self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field}({self.value})"


class PolyRing:
    """Dense polynomials over a field as coefficient lists (constant first)."""

    def __init__(self, field: GF):
        self.F = field

    @staticmethod
    def trim(a: list[int]) -> list[int]:
        a = [int(c) for c in a]
        while a and a[-1] == 0:
            a.pop()
        return a

    def add(self, a, b):
        F = self.F
        n = max(len(a), len(b))
        a = list(a) + [0] * (n - len(a))
        b = list(b) + [0] * (n - len(b))
        return self.trim([F._sadd(x, y) for x, y in zip(a, b)])

    def sub(self, a, b):
        return self.add(a, [self.F._sneg(y) for y in b])

    def mul(self, a, b):
        F = self.F
        if not a or not b:
            return []
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F._sadd(out[i + j], F._smul(x, y))
        return self.trim(out)

    def divmod(self, a, b):
        F = self.F
        b = self.trim(b)
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        a = self.trim(a)
        inv_lead = F._sinv(b[-1])
        quot = [0] * max(len(a) - len(b) + 1, 0)
        while len(a) >= len(b):
            c = F._smul(a[-1], inv_lead)
            shift = len(a) - len(b)
            quot[shift] = c
            for i, y in enumerate(b):
                a[shift + i] = F._sadd(a[shift + i], F._sneg(F._smul(c, y)))
            a = self.trim(a)
        return self.trim(quot), a

    def mod(self, a, b):
        return self.divmod(a, b)[1]

    def gcd(self, a, b):
        a, b = self.trim(a), self.trim(b)
        while b:
            a, b = b, self.mod(a, b)
        if a:
            inv = self.F._sinv(a[-1])
            a = [self.F._smul(c, inv) for c in a]
        return a

    def powmod(self, a, e: int, m):
        result, base = [1], self.mod(a, m)
        while e:
            if e & 1:
                result = self.mod(self.mul(result, base), m)
            base = self.mod(self.mul(base, base), m)
            e >>= 1
        return result

    def inverse_mod(self, a, m):
        """Inverse of ``a`` modulo ``m`` by the extended Euclidean algorithm."""
        F = self.F
        r0, r1 = self.trim(m), self.mod(a, m)
        s0, s1 = [], [1]
        while r1:
            q, r = self.divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, self.sub(s0, self.mul(q, s1))
        if len(r0) != 1:
            raise ZeroDivisionError("element not invertible modulo the polynomial")
        inv = F._sinv(r0[0])
        return [F._smul(c, inv) for c in s0]


def _frobenius_matrix(f: list[int], base: GF) -> list[list[int]]:
    """Columns j = coefficients of x^(q*j) mod f, for the q-power map mod f."""
    ring = PolyRing(base)
    m = len(f) - 1
    step = ring.mod([0] * base.order + [1], f)
    cols, cur = [], [1]
    for _ in range(m):
        cols.append(cur + [0] * (m - len(cur)))
        cur = ring.mod(ring.mul(cur, step), f)
    return cols


def is_irreducible(modulus: Sequence[int], base: GF) -> bool:
    """Ben-Or test: f irreducible iff gcd(x^(q^i) - x, f) = 1 for i <= deg/2."""
    ring = PolyRing(base)
    f = ring.trim(modulus)
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    cols = _frobenius_matrix(f, base)
    add, mul = base._sadd, base._smul
    v = [0, 1] + [0] * (m - 2)
    for _ in range(m // 2):
        nxt = [0] * m
        for j, c in enumerate(v):
            if c:
                for r, e in enumerate(cols[j]):
                    if e:
                        nxt[r] = add(nxt[r], mul(c, e))
        v = nxt
        if len(ring.gcd(ring.sub(v, [0, 1]), f)) > 1:
            return False
    return True


def is_irreducible_trial(modulus: Sequence[int], base: GF) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    ring = PolyRing(base)
    f = ring.trim(modulus)
    m = len(f) - 1
    if m < 1:
        return False
    for deg in range(1, m // 2 + 1):
        for low in itertools.product(range(base.order), repeat=deg):
            if not ring.mod(f, list(low) + [1]):
                return False
    return True


def _first_irreducible(base: GF, m: int) -> tuple[int, ...]:
    # lexicographic on (c0, c1, ..., c_{m-1}), constant term most significant
    if m == 1:
        return (0, 1)
    # c0 = 0 means x divides f
    for c0 in range(1, base.order):
        for rest in itertools.product(range(base.order), repeat=m - 1):
            f = (c0,) + rest + (1,)
            if is_irreducible(f, base):
                return f
    raise FieldError(f"no irreducible polynomial of degree {m}")  # pragma: no cover


def _check_modulus(base: GF, m: int, modulus: Sequence[int]) -> tuple[int, ...]:
    modulus = tuple(int(c) for c in modulus)
    if len(modulus) != m + 1:
        raise FieldError(f"modulus must have degree {m}")
    if modulus[-1] != 1:
        raise FieldError("modulus must be monic")
    if any(not 0 <= c < base.order for c in modulus):
        raise FieldError("modulus coefficients must be base-field elements")
    if not is_irreducible(modulus, base):
        raise FieldError(f"modulus {modulus} is reducible over {base}")
    return modulus


@functools.lru_cache(maxsize=None)
def _prime_field(p: int) -> GF:
    return GF(p, None, (0, 1))


@functools.lru_cache(maxsize=None)
def _extension(base: GF, modulus: tuple[int, ...]) -> GF:
    return GF(base.p, base, modulus)


def field_create(p: int, m: int = 1, modulus: Sequence[int] | None = None) -> GF:
    """GF(p^m).  Without ``modulus`` the lexicographically first irreducible
    polynomial (coefficients compared from the constant term up) is used."""
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if m < 1:
        raise FieldError("degree must be >= 1")
    if m == 1:
        if modulus is not None:
            _check_modulus(_prime_field(p), 1, modulus)
        return _prime_field(p)
    return extend(_prime_field(p), m, modulus)


def extend(base: GF, degree: int, modulus: Sequence[int] | None = None) -> GF:
    """The degree-``degree`` extension ``base[x]/(modulus)``."""
    if degree < 1:
        raise FieldError("extension degree must be >= 1")
    if base.order**degree > MAX_ORDER:
        raise FieldError(f"{base}^{degree} exceeds int64 encodings")
    if modulus is None:
        modulus = _first_irreducible(base, degree)
    else:
        modulus = _check_modulus(base, degree, modulus)
    return _extension(base, tuple(modulus))


@dataclass(frozen=True)
class TowerSpec:
    """GF(q) inside GF(q^N) with the polynomial basis 1, g, ..., g^(N-1)."""

    base: GF
    ext: GF

    def __post_init__(self):
        if self.ext.base != self.base:
            raise FieldError(f"{self.ext} is not built directly over {self.base}")
        coords = self.coords(np.array(self.basis, dtype=np.int64))
        if not np.array_equal(coords, np.eye(self.degree, dtype=np.int64)):
            raise FieldError("tower basis is not independent")  # pragma: no cover

    @property
    def degree(self) -> int:
        return self.ext.degree

    @property
    def basis(self) -> tuple[int, ...]:
        return tuple(self.base.order**t for t in range(self.degree))

    def coords(self, a):
        """Coordinates over the base field w.r.t. the basis, shape (..., N)."""
        return self.ext.coeffs(a)

    def from_coords(self, c):
        return self.ext.from_coeffs(c)

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "ext": self.ext.to_dict()}

    @staticmethod
    def from_dict(d: dict) -> TowerSpec:
        return TowerSpec(GF.from_dict(d["base"]), GF.from_dict(d["ext"]))


def make_tower(base: GF, degree: int, modulus: Sequence[int] | None = None) -> TowerSpec:
    return TowerSpec(base, extend(base, degree, modulus))


def mul_map(tower: TowerSpec, c: int) -> Callable:
    """The GF(q)-linear map x -> c*x on GF(q^N)."""
    return lambda x: tower.ext.mul(x, c)


def frobenius_map(tower: TowerSpec, i: int = 1) -> Callable:
    """The GF(q)-linear map x -> x^(q^i) on GF(q^N)."""
    return lambda x: tower.ext.frobenius(x, i)


def flatten_linear_map(tower: TowerSpec, fn: Callable) -> np.ndarray:
    """N x N base-field matrix of a GF(q)-linear map on GF(q^N).

    Column t holds the coordinates of ``fn(basis[t])``, so the matrix acts on
    coordinate column vectors.
    """
    images = np.asarray(fn(np.array(tower.basis, dtype=np.int64)), dtype=np.int64)
    if images.shape != (tower.degree,) or np.any((images < 0) | (images >= tower.ext.order)):
        raise FieldError("map does not send the tower basis into the extension field")
    return tower.coords(images).T.copy()


def flatten_multipliers(tower: TowerSpec, c) -> np.ndarray:
    """Flatten multiply-by-c for every entry of the array ``c``.

    Returns shape ``c.shape + (N, N)``; block ``[..., :, t]`` is the coordinate
    vector of ``c * basis[t]``.
    """
    c = np.asarray(c, dtype=np.int64)
    basis = np.array(tower.basis, dtype=np.int64)
    images = tower.ext.mul(c[..., None], basis)
    return np.swapaxes(tower.coords(images), -1, -2)
