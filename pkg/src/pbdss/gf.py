"""Exact arithmetic over GF(p^m) and dense linear algebra on top of it.

Field elements are canonical unsigned integers in [0, q).  For extension
fields (m > 1) the integer encodes the coefficient vector of the polynomial
basis in little-endian base p: value = sum(c_i * p**i), so bit/digit i is
the coefficient of alpha**i.  Multiplication reduces modulo an irreducible
polynomial of degree m over GF(p); addition is digit-wise mod p.

Fields are capped at q <= 2**16 so elements fit in 16-bit storage and
exhaustive checks (irreducibility, field axioms in tests) stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_FIELD_ORDER = 1 << 16


class FieldMismatchError(ValueError):
    """Arithmetic was attempted between symbols of different fields."""


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


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomial helpers over GF(p), coefficients little-endian lists --------


def _poly_trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mulmod(f: list[int], g: list[int], mod: list[int], p: int) -> list[int]:
    res = [0] * (len(f) + len(g) - 1) if f and g else []
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            res[i + j] = (res[i + j] + a * b) % p
    return _poly_modred(res, mod, p)


def _poly_modred(f: list[int], mod: list[int], p: int) -> list[int]:
    f = _poly_trim(list(f))
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], -1, p)
    while len(f) - 1 >= dm:
        shift = len(f) - 1 - dm
        factor = (f[-1] * inv_lead) % p
        for i, c in enumerate(mod):
            f[shift + i] = (f[shift + i] - factor * c) % p
        _poly_trim(f)
    return f


def _poly_powmod(f: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_modred(f, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_gcd(f: list[int], g: list[int], p: int) -> list[int]:
    f, g = _poly_trim(list(f)), _poly_trim(list(g))
    while g:
        f = _poly_modred(f, g, p)
        f, g = g, f
    return f


def is_irreducible(coeffs: list[int], p: int) -> bool:
    """Rabin test: no root of x^(p^d) - x for proper divisors d of deg."""
    f = _poly_trim([c % p for c in coeffs])
    m = len(f) - 1
    if m < 1:
        return False
    x = [0, 1]
    xq = _poly_powmod(x, p**m, f, p)
    diff = _poly_trim([(a - b) % p for a, b in zip(xq + [0] * len(x), x + [0] * len(xq))])
    if diff:
        return False
    for r in _prime_factors(m):
        xd = _poly_powmod(x, p ** (m // r), f, p)
        diff = _poly_trim([(a - b) % p for a, b in zip(xd + [0] * len(x), x + [0] * len(xd))])
        if len(_poly_gcd(f, diff, p)) - 1 != 0:
            return False
    return True


def default_reduction(p: int, m: int) -> tuple[int, ...]:
    """Smallest irreducible monic polynomial of degree m over GF(p).

    "Smallest" orders candidates by the integer encoding of the low
    coefficients (sum c_i * p**i); the choice only fixes the element
    representation, nothing downstream depends on it.
    """
    if m == 1:
        return (0, 1)
    for v in range(p**m):
        coeffs = [(v // p**i) % p for i in range(m)] + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise ValueError(f"no irreducible polynomial of degree {m} over GF({p})")


class FieldSpec:
    """A finite field GF(p^m) with q = p^m <= 2**16.

    Instances are immutable and hashable; equality is structural on
    (p, m, reduction), so two specs of the same field interoperate.
    """

    def __init__(self, p: int, m: int = 1, reduction: tuple[int, ...] | None = None):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if m < 1:
            raise ValueError(f"extension degree must be >= 1, got {m}")
        q = p**m
        if q > MAX_FIELD_ORDER:
            raise ValueError(f"field order {q} exceeds {MAX_FIELD_ORDER}")
        if reduction is None:
            reduction = default_reduction(p, m)
        reduction = tuple(c % p for c in reduction)
        if m > 1:
            if len(reduction) != m + 1 or reduction[-1] != 1:
                raise ValueError("reduction must be monic of degree m")
            if not is_irreducible(list(reduction), p):
                raise ValueError(f"reduction polynomial {reduction} is reducible over GF({p})")
        self.p = p
        self.m = m
        self.q = q
        self.reduction = reduction
        self._build_log_tables()
        self._dense = None

    # -- representation -----------------------------------------------------

    def __repr__(self) -> str:
        if self.m == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.m})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldSpec)
            and (self.p, self.m, self.reduction) == (other.p, other.m, other.reduction)
        )

    def __hash__(self) -> int:
        return hash((self.p, self.m, self.reduction))

    @property
    def bits(self) -> int:
        return self.m * math.ceil(math.log2(self.p))

    def _digits(self, a: int) -> list[int]:
        return [(a // self.p**i) % self.p for i in range(self.m)]

    def _undigits(self, ds: list[int]) -> int:
        return sum(d * self.p**i for i, d in enumerate(ds))

    def _raw_mul(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a * b) % self.p
        prod = _poly_mulmod(self._digits(a), self._digits(b), list(self.reduction), self.p)
        return self._undigits(prod + [0] * (self.m - len(prod)))

    def _build_log_tables(self) -> None:
        q = self.q
        factors = _prime_factors(q - 1)
        gen = None
        for cand in range(2, q):
            if all(self._pow_raw(cand, (q - 1) // r) != 1 for r in factors):
                gen = cand
                break
        if gen is None:  # q == 2
            gen = 1
        exp = [0] * (2 * (q - 1))
        log = [0] * q
        x = 1
        for i in range(q - 1):
            exp[i] = x
            exp[i + q - 1] = x
            log[x] = i
            x = self._raw_mul(x, gen)
        self.generator = gen
        self._exp = exp
        self._log = log

    def _pow_raw(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._raw_mul(r, a)
            a = self._raw_mul(a, a)
            e >>= 1
        return r

    # -- element arithmetic on canonical integers ---------------------------

    def add(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self._undigits([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def neg(self, a: int) -> int:
        if self.m == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self._undigits([(-x) % self.p for x in self._digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self._exp[self.q - 1 - self._log[a]]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero field element")
        if a == 0:
            return 0
        return self._exp[self._log[a] - self._log[b] + self.q - 1]

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def element(self, value: int) -> "Symbol":
        return Symbol(value % self.q, self)

    def zero(self) -> "Symbol":
        return Symbol(0, self)

    def one(self) -> "Symbol":
        return Symbol(1, self)

    def dense_tables(self):
        """(add, sub, mul, inv) numpy tables for vectorised elimination.

        Built lazily; only sensible for small fields, so capped at q <= 1024.
        """
        if self._dense is None:
            import numpy as np

            q = self.q
            if q > 1024:
                raise ValueError(f"dense tables capped at q <= 1024, got {q}")
            add = np.zeros((q, q), dtype=np.int32)
            sub = np.zeros((q, q), dtype=np.int32)
            mul = np.zeros((q, q), dtype=np.int32)
            inv = np.zeros(q, dtype=np.int32)
            for a in range(q):
                for b in range(q):
                    add[a, b] = self.add(a, b)
                    sub[a, b] = self.sub(a, b)
                    mul[a, b] = self.mul(a, b)
                if a:
                    inv[a] = self.inv(a)
            self._dense = (add, sub, mul, inv)
        return self._dense


@dataclass(frozen=True)
class Symbol:
    """One element of a finite field: canonical value plus its FieldSpec."""

    value: int
    field: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"value {self.value} out of range for {self.field}")

    def _check(self, other: "Symbol") -> None:
        if not isinstance(other, Symbol):
            raise TypeError(f"expected Symbol, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatchError(f"mixed fields: {self.field} vs {other.field}")

    def __add__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(self.field.add(self.value, other.value), self.field)

    def __sub__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(self.field.sub(self.value, other.value), self.field)

    def __mul__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(self.field.mul(self.value, other.value), self.field)

    def __truediv__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(self.field.div(self.value, other.value), self.field)

    def __neg__(self) -> "Symbol":
        return Symbol(self.field.neg(self.value), self.field)

    def __bool__(self) -> bool:
        return self.value != 0


def field_arith(a: Symbol, b: Symbol, kind: str) -> Symbol:
    """Dispatch one binary field operation: add, sub, mul or div."""
    ops = {
        "add": Symbol.__add__,
        "sub": Symbol.__sub__,
        "mul": Symbol.__mul__,
        "div": Symbol.__truediv__,
    }
    try:
        op = ops[kind]
    except KeyError:
        raise ValueError(f"unknown operation {kind!r}") from None
    return op(a, b)


def symbol_bits(field: FieldSpec) -> int:
    """Symbol size in bits: m * ceil(log2 p)."""
    return field.bits


# -- dense linear solving ----------------------------------------------------


@dataclass
class SolveResult:
    """Outcome of Gaussian elimination on A x = b.

    `solution` is set only when the system is consistent and every unknown
    is determined.  `undetermined` lists free columns; `consistent` is False
    when some equation reduces to 0 = c with c != 0 (an uncorrectable
    erasure pattern upstream).
    """

    solution: list[Symbol] | None
    rank: int
    consistent: bool
    pivot_cols: tuple[int, ...]
    undetermined: tuple[int, ...]


def row_reduce(field: FieldSpec, rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """In-place-free RREF over the field; returns (reduced rows, pivot cols)."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = field.inv(m[r][c])
        m[r] = [field.mul(inv, x) for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def solve_values(field: FieldSpec, a_rows: list[list[int]], b: list[int]) -> SolveResult:
    """gaussian_solve on plain integer values (the workhorse solver)."""
    if len(a_rows) != len(b):
        raise ValueError("matrix/vector size mismatch")
    ncols = len(a_rows[0]) if a_rows else 0
    aug = [list(r) + [v] for r, v in zip(a_rows, b)]
    red, pivots = row_reduce(field, aug) if aug else ([], [])
    consistent = all(p != ncols for p in pivots)
    pivot_cols = tuple(p for p in pivots if p != ncols)
    rank = len(pivot_cols)
    undetermined = tuple(c for c in range(ncols) if c not in pivot_cols)
    solution = None
    if consistent and not undetermined:
        vals = [0] * ncols
        for i, c in enumerate(pivot_cols):
            vals[c] = red[i][ncols]
        solution = [Symbol(v, field) for v in vals]
    return SolveResult(solution, rank, consistent, pivot_cols, undetermined)


def solve_values_dense(field: FieldSpec, a_rows: list[list[int]], b: list[int]) -> SolveResult:
    """solve_values on numpy lookup tables; same semantics, much faster on
    large systems over small fields."""
    import numpy as np

    if len(a_rows) != len(b):
        raise ValueError("matrix/vector size mismatch")
    ncols = len(a_rows[0]) if a_rows else 0
    if not a_rows:
        return SolveResult([], 0, True, (), ())
    _, sub_t, mul_t, inv_t = field.dense_tables()
    m = np.concatenate(
        [np.array(a_rows, dtype=np.int32), np.array(b, dtype=np.int32)[:, None]], axis=1
    )
    nrows = m.shape[0]
    pivots = []
    r = 0
    for c in range(ncols + 1):
        if r == nrows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = mul_t[int(inv_t[m[r, c]]), m[r]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            m[hit] = sub_t[m[hit], mul_t[m[np.ix_(hit, [c])], m[r][None, :]]]
        pivots.append(c)
        r += 1
    consistent = all(p != ncols for p in pivots)
    pivot_cols = tuple(p for p in pivots if p != ncols)
    undetermined = tuple(c for c in range(ncols) if c not in pivot_cols)
    solution = None
    if consistent and not undetermined:
        vals = [0] * ncols
        for i, c in enumerate(pivot_cols):
            vals[c] = int(m[i, ncols])
        solution = [Symbol(v, field) for v in vals]
    return SolveResult(solution, len(pivot_cols), consistent, pivot_cols, undetermined)


def gaussian_solve(a: list[list[Symbol]], b: list[Symbol]) -> SolveResult:
    """Solve A x = b over one field, or report rank and free unknowns."""
    if not a:
        raise ValueError("empty system")
    field = a[0][0].field
    for row in a:
        for s in row:
            if s.field != field:
                raise FieldMismatchError("matrix entries from different fields")
    for s in b:
        if s.field != field:
            raise FieldMismatchError("rhs entries from a different field")
    return solve_values(field, [[s.value for s in row] for row in a], [s.value for s in b])


def matrix_rank(field: FieldSpec, rows: list[list[int]]) -> int:
    if not rows:
        return 0
    _, pivots = row_reduce(field, rows)
    return len(pivots)


def is_invertible(field: FieldSpec, rows: list[list[int]]) -> bool:
    n = len(rows)
    return n == 0 or (len(rows[0]) == n and matrix_rank(field, rows) == n)


def smallest_field_of_order_at_least(n: int) -> FieldSpec:
    """Smallest prime power q >= n, as a FieldSpec with default reduction."""
    q = max(n, 2)
    while True:
        factors = _prime_factors(q)
        if len(factors) == 1:
            p = factors[0]
            m = 0
            t = q
            while t > 1:
                t //= p
                m += 1
            return FieldSpec(p, m)
        q += 1
