"""Finite fields GF(p) and GF(2^k), dense linear algebra, affine bijections.

Field elements are plain integers in ``[0, q)``.  For binary extension
fields the integer is the bit-vector of the residue polynomial (bit ``i``
holds the coefficient of ``X^i``).  Every :class:`FieldSpec` method accepts
either Python ints (fast scalar path) or numpy integer arrays (vectorised
path, broadcasting like ordinary numpy arithmetic).  Matrices are 2-D
``int64`` numpy arrays; the field they live in is always passed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
import numpy as np

from .errors import DivisionByZero, DimensionMismatch, ParamRange, RngExhausted, SpecMismatch

# Fixed moduli so that key files are interoperable.  GF(2^8) uses the AES
# polynomial, in which X itself is *not* primitive.
DEFAULT_MODULI = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000010001,
    10: 0b10000001001,
    12: 0b1000001010011,
    16: 0b10001000000001011,
}

MAX_REJECTIONS = 1000


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials given as bit-vectors."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def gf2_polymod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible_gf2(modulus: int) -> bool:
    """Brute-force factor search: no divisor of degree 1..k/2."""
    k = modulus.bit_length() - 1
    if k < 1:
        return False
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if gf2_polymod(modulus, f) == 0:
                return False
    return True


def _smallest_irreducible(k: int) -> int:
    for cand in range((1 << k) | 1, 1 << (k + 1), 2):
        if is_irreducible_gf2(cand):
            return cand
    raise ParamRange(f"no irreducible polynomial of degree {k}")  # unreachable


@dataclass(frozen=True)
class FieldSpec:
    """Description of GF(q), q = p^k.

    Only prime fields (``k == 1``) and binary extensions (``p == 2``) are
    supported.  ``modulus`` is the bit-vector of the defining polynomial,
    leading term included; it is ignored (and stored as 0) when ``k == 1``.
    """

    p: int
    k: int = 1
    modulus: int = 0

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ParamRange(f"characteristic {self.p} is not prime")
        if self.k < 1:
            raise ParamRange("extension degree must be >= 1")
        if self.k == 1:
            if self.p >= 1 << 31:
                raise ParamRange("prime fields are limited to p < 2^31")
            object.__setattr__(self, "modulus", 0)
            return
        if self.p != 2:
            raise ParamRange("extension fields are only supported in characteristic 2")
        if self.k > 32:
            raise ParamRange("binary extension degree limited to 32")
        mod = self.modulus or DEFAULT_MODULI.get(self.k) or _smallest_irreducible(self.k)
        if mod.bit_length() - 1 != self.k:
            raise ParamRange(f"modulus {mod:#b} does not have degree {self.k}")
        if self.k <= 16 and not is_irreducible_gf2(mod):
            raise ParamRange(f"modulus {mod:#b} is reducible")
        object.__setattr__(self, "modulus", mod)

    # ------------------------------------------------------------------
    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def binary(self) -> bool:
        return self.p == 2

    @property
    def bits(self) -> int:
        """Bits needed to store one element."""
        return max(1, (self.q - 1).bit_length())

    def __str__(self) -> str:
        return f"GF({self.p})" if self.k == 1 else f"GF(2^{self.k})"

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={self.modulus:#x})"

    # ------------------------------------------------------------------
    # tables
    def _raw_mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        return gf2_polymod(clmul(a, b), self.modulus)

    @cached_property
    def _log_tables(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.q
        g = self.primitive_element
        exp = np.zeros(2 * q, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        v = 1
        for i in range(q - 1):
            exp[i] = v
            log[v] = i
            v = self._raw_mul(v, g)
        exp[q - 1 : 2 * q - 2] = exp[: q - 1]
        return exp, log

    @cached_property
    def primitive_element(self) -> int:
        """Smallest generator of the multiplicative group."""
        q = self.q
        if q == 2:
            return 1
        order = q - 1
        factors = _prime_factors(order)
        for g in range(2, q):
            if all(self._raw_pow(g, order // f) != 1 for f in factors):
                return g
        raise AssertionError("multiplicative group is cyclic")  # pragma: no cover

    def _raw_pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._raw_mul(r, a)
            a = self._raw_mul(a, a)
            e >>= 1
        return r

    @cached_property
    def _use_tables(self) -> bool:
        return self.q <= 1 << 16

    @cached_property
    def _mul_table(self) -> np.ndarray | None:
        if self.q > 256:
            return None
        q = self.q
        a = np.arange(q, dtype=np.int64)
        if self.k == 1:
            return np.outer(a, a) % q
        exp, log = self._log_tables
        t = exp[(log[:, None] + log[None, :])]
        t[0, :] = 0
        t[:, 0] = 0
        return t

    @cached_property
    def _mul_rows(self) -> list[list[int]] | None:
        t = self._mul_table
        return None if t is None else t.tolist()

    @cached_property
    def _inv_table(self) -> np.ndarray | None:
        if not self._use_tables:
            return None
        q = self.q
        inv = np.zeros(q, dtype=np.int64)
        if self.k == 1:
            for a in range(1, q):
                inv[a] = pow(a, q - 2, q)
            return inv
        exp, log = self._log_tables
        inv[1:] = exp[(q - 1 - log[1:]) % (q - 1)]
        return inv

    @cached_property
    def _xpow_reduced(self) -> np.ndarray:
        """X^d mod modulus for d < 2k-1 (used by the bit-plane matmul)."""
        return np.array([gf2_polymod(1 << d, self.modulus) for d in range(2 * self.k - 1)], dtype=np.int64)

    # ------------------------------------------------------------------
    # element-wise arithmetic
    def asarray(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.int64)

    def add(self, a, b):
        if self.binary:
            return a ^ b
        return (a + b) % self.p

    def sub(self, a, b):
        if self.binary:
            return a ^ b
        return (a - b) % self.p

    def neg(self, a):
        if self.binary:
            return a
        return (-a) % self.p

    def mul(self, a, b):
        if type(a) is int and type(b) is int:
            if self.k == 1:
                return a * b % self.p
            rows = self._mul_rows
            if rows is not None:
                return rows[a][b]
            if not a or not b:
                return 0
            if self._use_tables:
                exp, log = self._log_tables
                return int(exp[log[a] + log[b]])
            return self._raw_mul(a, b)
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return a * b % self.p
        t = self._mul_table
        if t is not None:
            return t[a, b]
        if self._use_tables:
            exp, log = self._log_tables
            r = exp[log[a] + log[b]]
            return np.where((a == 0) | (b == 0), 0, r)
        return self._shift_mul(a, b)

    def _shift_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(a, b)
        a = a.copy()
        r = np.zeros_like(a)
        top = 1 << self.k
        for i in range(self.k):
            r ^= np.where((b >> i) & 1, a, 0)
            a = a << 1
            a = np.where(a & top, a ^ self.modulus, a)
        return r

    def inv(self, a):
        if type(a) is int:
            if a == 0:
                raise DivisionByZero("inverse of zero")
            t = self._inv_table
            if t is not None:
                return int(t[a])
            return self._raw_pow(a, self.q - 2)
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("inverse of zero")
        t = self._inv_table
        if t is not None:
            return t[a]
        return np.vectorize(lambda v: self._raw_pow(int(v), self.q - 2), otypes=[np.int64])(a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if type(a) is int:
            r = 1
            while e:
                if e & 1:
                    r = self.mul(r, a)
                a = self.mul(a, a)
                e >>= 1
            return r
        a = np.asarray(a, dtype=np.int64)
        r = np.ones_like(a)
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def sum(self, a, axis=None):
        a = np.asarray(a, dtype=np.int64)
        if self.binary:
            if axis is None:
                return np.bitwise_xor.reduce(a.ravel())
            return np.bitwise_xor.reduce(a, axis=axis)
        return np.sum(a, axis=axis) % self.p

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over the field (2-D @ 2-D, or with 1-D vectors)."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        va, vb = A.ndim == 1, B.ndim == 1
        if va:
            A = A[None, :]
        if vb:
            B = B[:, None]
        if A.shape[1] != B.shape[0]:
            raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
        if A.shape[1] == 0:
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        elif self.binary:
            out = self._matmul_binary(A, B)
        else:
            out = self._matmul_prime(A, B)
        if va:
            out = out[0]
        if vb:
            out = out[..., 0]
        return out

    def _matmul_prime(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        p = self.p
        inner = A.shape[1]
        if (p - 1) ** 2 * inner < 1 << 53:
            return (A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64) % p
        step = max(1, ((1 << 62) // (p - 1) ** 2))
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for s in range(0, inner, step):
            out = (out + (A[:, s : s + step] @ B[s : s + step]) % p) % p
        return out

    def _matmul_binary(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        # Bit-plane decomposition: integer matmuls of 0/1 planes give, after
        # reduction mod 2, the coefficients of the unreduced product polynomial.
        k = self.k
        r, _ = A.shape
        c = B.shape[1]
        bcat = np.concatenate([((B >> j) & 1) for j in range(k)], axis=1).astype(np.float64)
        red = self._xpow_reduced
        out = np.empty((r, c), dtype=np.int64)
        chunk = max(1, (1 << 22) // max(1, (2 * k) * c))
        for s in range(0, r, chunk):
            a = A[s : s + chunk]
            acc = np.zeros((a.shape[0], 2 * k - 1, c))
            for i in range(k):
                plane = ((a >> i) & 1).astype(np.float64)
                acc[:, i : i + k, :] += (plane @ bcat).reshape(a.shape[0], k, c)
            par = acc.astype(np.int64) & 1
            res = np.zeros((a.shape[0], c), dtype=np.int64)
            for d in range(2 * k - 1):
                res ^= par[:, d, :] * red[d]
            out[s : s + chunk] = res
        return out

    # ------------------------------------------------------------------
    def random(self, rng: np.random.Generator, shape=None):
        if shape is None:
            return int(rng.integers(0, self.q))
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    def random_nonzero(self, rng: np.random.Generator, shape=None):
        if shape is None:
            return int(rng.integers(1, self.q))
        return rng.integers(1, self.q, size=shape, dtype=np.int64)

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(self, value)


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


@lru_cache(maxsize=None)
def GF(q: int, modulus: int | None = None) -> FieldSpec:
    """Field of order ``q`` (prime or a power of two) with the default modulus."""
    if q >= 2 and is_prime(q):
        return FieldSpec(q)
    if q >= 4 and q & (q - 1) == 0:
        return FieldSpec(2, q.bit_length() - 1, modulus or 0)
    raise ParamRange(f"unsupported field order {q}")


def parse_field(text: str) -> FieldSpec:
    """Parse ``"5"``, ``"64"`` or ``"2^6"``."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return GF(int(base) ** int(exp))
    return GF(int(text))


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class FieldElement:
    """A single element of GF(q), tied to its field."""

    spec: FieldSpec
    value: int

    def __post_init__(self) -> None:
        v = int(self.value)
        if self.spec.k == 1:
            v %= self.spec.p
        elif not 0 <= v < self.spec.q:
            raise ParamRange(f"{v} is not an element of {self.spec}")
        object.__setattr__(self, "value", v)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise SpecMismatch(f"{self.spec} vs {other.spec}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return FieldElement(self.spec, int(other)).value
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FieldElement(self.spec, self.spec.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldElement(self.spec, self.spec.sub(self.value, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FieldElement(self.spec, self.spec.sub(o, self.value))

    def __mul__(self, other):
        o = self._other(other)
        return FieldElement(self.spec, self.spec.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return FieldElement(self.spec, self.spec.div(self.value, o))

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.spec, self.spec.pow(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value}@{self.spec}"


def fe_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, div} to two elements of the same field."""
    if a.spec != b.spec:
        raise SpecMismatch(f"{a.spec} vs {b.spec}")
    ops = {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}
    try:
        return ops[op](b)
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None


# ----------------------------------------------------------------------
# dense linear algebra
def rref(M, F: FieldSpec) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Pivot rule: scan columns left to right, take the first row (in current
    order) with a nonzero entry.  Deterministic for a given input.
    """
    R = np.array(M, dtype=np.int64, copy=True)
    if R.ndim != 2:
        raise DimensionMismatch("rref expects a matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        lead = int(R[r, c])
        if lead != 1:
            R[r, c:] = F.mul(R[r, c:], F.inv(lead))
        col = R[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            R[hit, c:] = F.sub(R[hit, c:], F.mul(col[hit, None], R[r, c:][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, F: FieldSpec) -> int:
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return 0
    return len(rref(M, F)[1])


def nullspace(M, F: FieldSpec) -> np.ndarray:
    """Basis of the right nullspace ``{v : M v = 0}``, one vector per row.

    The basis is the canonical one read off the reduced echelon form: one
    vector per free column, with a 1 in that column.
    """
    M = np.asarray(M, dtype=np.int64)
    if M.ndim != 2:
        raise DimensionMismatch("nullspace expects a matrix")
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, pivots = rref(M, F)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = F.neg(int(R[r, f]))
    return basis


def left_nullspace(M, F: FieldSpec) -> np.ndarray:
    """Basis of ``{x : x^T M = 0}``."""
    return nullspace(np.asarray(M, dtype=np.int64).T, F)


@dataclass(frozen=True)
class LinearSolution:
    """Affine solution set ``particular + span(basis)``."""

    particular: np.ndarray
    basis: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[0])

    def count(self, q: int) -> int:
        return q**self.dimension

    def enumerate(self, F: FieldSpec, limit: int | None = None) -> np.ndarray:
        """All solutions as rows; refuses when more than ``limit`` exist."""
        d = self.dimension
        if limit is not None and F.q**d > limit:
            from .errors import BudgetExceeded

            raise BudgetExceeded(f"{F.q}^{d} solutions exceed budget {limit}")
        if d == 0:
            return self.particular[None, :].copy()
        coeffs = all_vectors(F, d)
        return F.add(self.particular[None, :], F.matmul(coeffs, self.basis))

    def sample(self, F: FieldSpec, rng: np.random.Generator) -> np.ndarray:
        if self.dimension == 0:
            return self.particular.copy()
        c = F.random(rng, self.dimension)
        return F.add(self.particular, F.matmul(c, self.basis))


def solve_linear(M, b, F: FieldSpec) -> LinearSolution | None:
    """Solve ``M v = b``.  Returns ``None`` when the system is inconsistent."""
    M = np.asarray(M, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if M.ndim != 2 or b.shape != (M.shape[0],):
        raise DimensionMismatch(f"rhs of length {b.shape} for matrix {M.shape}")
    rows, cols = M.shape
    R, pivots = rref(np.hstack([M, b[:, None]]), F)
    if pivots and pivots[-1] == cols:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, pc in enumerate(pivots):
        x[pc] = R[r, cols]
    basis = nullspace(M, F) if rows else np.eye(cols, dtype=np.int64)
    return LinearSolution(x, basis)


def inverse(M, F: FieldSpec) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    d = M.shape[0]
    if M.shape != (d, d):
        raise DimensionMismatch("inverse of a non-square matrix")
    R, pivots = rref(np.hstack([M, np.eye(d, dtype=np.int64)]), F)
    if pivots[:d] != list(range(d)):
        raise DivisionByZero("matrix is singular")
    return R[:, d:]


def det(M, F: FieldSpec) -> int:
    """Determinant by forward elimination."""
    A = np.array(M, dtype=np.int64, copy=True)
    d = A.shape[0]
    if A.shape != (d, d):
        raise DimensionMismatch("determinant of a non-square matrix")
    result = 1
    for c in range(d):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            result = F.neg(result)
        lead = int(A[c, c])
        result = F.mul(result, lead)
        below = A[c + 1 :, c]
        hit = np.flatnonzero(below)
        if hit.size:
            f = F.mul(below[hit], F.inv(lead))
            A[c + 1 + hit, c:] = F.sub(A[c + 1 + hit, c:], F.mul(f[:, None], A[c, c:][None, :]))
    return int(result)


def all_vectors(F: FieldSpec, d: int) -> np.ndarray:
    """Every vector of GF(q)^d as rows, in base-q counting order (first coordinate most significant)."""
    q = F.q
    idx = np.arange(q**d, dtype=np.int64)
    out = np.empty((q**d, d), dtype=np.int64)
    for j in range(d - 1, -1, -1):
        out[:, j] = idx % q
        idx //= q
    return out


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AffineBijection:
    """``v -> L v + c`` on GF(q)^d with the inverse linear part cached."""

    spec: FieldSpec
    linear: np.ndarray
    translation: np.ndarray
    inverse_linear: np.ndarray = dc_field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        L = np.asarray(self.linear, dtype=np.int64)
        c = np.asarray(self.translation, dtype=np.int64)
        d = L.shape[0]
        if L.shape != (d, d) or c.shape != (d,):
            raise DimensionMismatch("affine bijection needs a square matrix and matching translation")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "translation", c)
        if self.inverse_linear is None:
            object.__setattr__(self, "inverse_linear", inverse(L, self.spec))
        L.setflags(write=False)
        c.setflags(write=False)
        self.inverse_linear.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, v) -> np.ndarray:
        """Apply to a vector, or to each row of a 2-D array of points."""
        v = np.asarray(v, dtype=np.int64)
        F = self.spec
        if v.ndim == 1:
            return F.add(F.matmul(self.linear, v), self.translation)
        return F.add(F.matmul(v, self.linear.T), self.translation[None, :])

    def apply_inverse(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.int64)
        F = self.spec
        if w.ndim == 1:
            return F.matmul(self.inverse_linear, F.sub(w, self.translation))
        return F.matmul(F.sub(w, self.translation[None, :]), self.inverse_linear.T)

    def inverse(self) -> "AffineBijection":
        F = self.spec
        c = F.neg(F.matmul(self.inverse_linear, self.translation))
        return AffineBijection(F, self.inverse_linear, c, self.linear)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AffineBijection)
            and other.spec == self.spec
            and np.array_equal(other.linear, self.linear)
            and np.array_equal(other.translation, self.translation)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def identity(cls, F: FieldSpec, d: int) -> "AffineBijection":
        eye = np.eye(d, dtype=np.int64)
        return cls(F, eye, np.zeros(d, dtype=np.int64), eye.copy())


def random_invertible(d: int, F: FieldSpec, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Uniform invertible d x d matrix by rejection; also returns the attempt count."""
    if d < 1:
        raise ParamRange("dimension must be >= 1")
    for attempt in range(1, MAX_REJECTIONS + 1):
        L = F.random(rng, (d, d))
        if rank(L, F) == d:
            return L, attempt
    raise RngExhausted(f"no invertible {d}x{d} matrix after {MAX_REJECTIONS} draws")


def random_affine_bijection(d: int, F: FieldSpec, rng: np.random.Generator) -> AffineBijection:
    L, _ = random_invertible(d, F, rng)
    return AffineBijection(F, L, F.random(rng, d))


def block_affine_bijection(d: int, t: int, F: FieldSpec, rng: np.random.Generator) -> AffineBijection:
    """Affine bijection whose linear part is ``[[A, 0], [C, D]]`` with a t x (d-t) zero block."""
    if not 1 <= t <= d:
        raise ParamRange(f"need 1 <= t <= d, got t={t}, d={d}")
    A, _ = random_invertible(t, F, rng)
    L = np.zeros((d, d), dtype=np.int64)
    L[:t, :t] = A
    if t < d:
        D, _ = random_invertible(d - t, F, rng)
        L[t:, :t] = F.random(rng, (d - t, t))
        L[t:, t:] = D
    return AffineBijection(F, L, F.random(rng, d))


def has_zero_block(L: np.ndarray, t: int) -> bool:
    return not np.any(np.asarray(L)[:t, t:])


def make_rng(seed: int | None = None) -> np.random.Generator:
    """The package RNG: numpy ``Generator`` over PCG64."""
    return np.random.Generator(np.random.PCG64(seed))

