"""Exact linear algebra over the local ring ``Z/p^k``.

Row modules over ``Z/p^k`` are put in Howell normal form: an echelon form in
which every pivot is a power of ``p`` and the rows with zero leading columns
span every element of the module with zero leading columns. That last property
is what makes membership, kernels and module orders decidable by simple
reduction, which a plain echelon form does not give over a ring with zero
divisors.

All arithmetic is on Python integers; vectors are tuples of ints in
``range(p**k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ContainmentError, DenominatorError, ModulusMismatch

__all__ = [
    "Residue",
    "ResidueMatrix",
    "HowellForm",
    "vp",
    "vp_fraction",
    "unit_part",
    "to_residue",
    "vector_valuation",
    "howell_form",
    "solve_linear",
    "span_order",
    "quotient_order",
    "is_prime",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(n: int, p: int) -> int | float:
    """p-adic valuation of an integer; ``inf`` for zero."""
    if n == 0:
        return float("inf")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(q, p: int) -> int | float:
    q = Fraction(q)
    if q == 0:
        return float("inf")
    return vp(q.numerator, p) - vp(q.denominator, p)


def unit_part(n: int, p: int) -> tuple[int, int]:
    """Split a nonzero integer as ``p**v * u`` with ``p`` not dividing ``u``."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def to_residue(q, p: int, k: int) -> int:
    """Image of a rational in ``Z/p^k``; the denominator must be prime to ``p``."""
    q = Fraction(q)
    if q.denominator % p == 0:
        raise DenominatorError(f"{q} has p={p} in its denominator")
    mod = p**k
    return q.numerator * pow(q.denominator, -1, mod) % mod


def vector_valuation(x: Sequence[int], p: int, k: int) -> int:
    """Minimum coordinate valuation of a vector mod ``p^k`` (``k`` for zero)."""
    mod = p**k
    best = k
    for c in x:
        c %= mod
        if c:
            best = min(best, vp(c, p))
    return best


@dataclass(frozen=True)
class Residue:
    """A single element of ``Z/p^k``."""

    value: int
    p: int
    k: int

    def __post_init__(self):
        if self.k < 1 or not is_prime(self.p):
            raise ValueError(f"bad modulus {self.p}^{self.k}")
        object.__setattr__(self, "value", self.value % self.p**self.k)

    @property
    def modulus(self) -> int:
        return self.p**self.k

    def _coerce(self, other) -> int:
        if isinstance(other, Residue):
            if (other.p, other.k) != (self.p, self.k):
                raise ModulusMismatch(f"{self.p}^{self.k} vs {other.p}^{other.k}")
            return other.value
        return int(other)

    def __add__(self, other):
        return Residue(self.value + self._coerce(other), self.p, self.k)

    __radd__ = __add__

    def __sub__(self, other):
        return Residue(self.value - self._coerce(other), self.p, self.k)

    def __neg__(self):
        return Residue(-self.value, self.p, self.k)

    def __mul__(self, other):
        return Residue(self.value * self._coerce(other), self.p, self.k)

    __rmul__ = __mul__

    def valuation(self) -> int:
        return self.k if self.value == 0 else vp(self.value, self.p)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def inverse(self) -> "Residue":
        return Residue(pow(self.value, -1, self.modulus), self.p, self.k)

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class ResidueMatrix:
    """Row-major matrix with entries in ``Z/p^k``."""

    p: int
    k: int
    rows: tuple[tuple[int, ...], ...]
    ncols: int = -1

    def __post_init__(self):
        if self.k < 1 or not is_prime(self.p):
            raise ValueError(f"bad modulus {self.p}^{self.k}")
        mod = self.p**self.k
        rows = tuple(tuple(int(c) % mod for c in r) for r in self.rows)
        ncols = self.ncols
        if ncols < 0:
            if not rows:
                raise ValueError("column count required for an empty matrix")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], p: int, k: int, ncols: int = -1):
        return cls(p, k, tuple(tuple(r) for r in rows), ncols)

    @classmethod
    def identity(cls, n: int, p: int, k: int):
        return cls(p, k, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, p: int, k: int):
        return cls(p, k, tuple((0,) * ncols for _ in range(nrows)), ncols)

    @property
    def modulus(self) -> int:
        return self.p**self.k

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def transpose(self) -> "ResidueMatrix":
        cols = tuple(zip(*self.rows)) if self.rows else ()
        return ResidueMatrix(self.p, self.k, cols, self.nrows)

    def vecmul(self, x: Sequence[int]) -> tuple[int, ...]:
        """Row vector times matrix."""
        if len(x) != self.nrows:
            raise ValueError("dimension mismatch")
        mod = self.modulus
        out = [0] * self.ncols
        for xi, row in zip(x, self.rows):
            if xi % mod:
                for j, c in enumerate(row):
                    if c:
                        out[j] += xi * c
        return tuple(c % mod for c in out)


def _axpy(y: list[int], a: int, x: Sequence[int], mod: int, start: int = 0) -> None:
    """In-place ``y -= a * x`` from column ``start`` on."""
    for j in range(start, len(y)):
        if x[j]:
            y[j] = (y[j] - a * x[j]) % mod


@dataclass(frozen=True)
class HowellForm:
    """Howell basis of a row module over ``Z/p^k``.

    ``pivots`` holds ``(row index, column, valuation)`` triples with the pivot
    entry equal to ``p**valuation``. ``transform`` rows express each basis row
    as a combination of the rows of the matrix it was computed from
    (``transform[i] . M == basis.rows[i]``); it is ``None`` when the form was
    assembled without a certificate.
    """

    basis: ResidueMatrix
    pivots: tuple[tuple[int, int, int], ...]
    transform: ResidueMatrix | None = field(default=None, compare=False)

    @property
    def p(self) -> int:
        return self.basis.p

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def ncols(self) -> int:
        return self.basis.ncols

    @property
    def rows(self):
        return self.basis.rows

    def order_exponent(self) -> int:
        return sum(self.k - v for _, _, v in self.pivots)

    def reduce(self, x: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...] | None]:
        """Reduce ``x`` against the basis.

        Returns the remainder and the coefficients used. The remainder is a
        canonical representative of ``x`` modulo the span; it is zero exactly
        when ``x`` is a member.
        """
        mod = self.basis.modulus
        y = [c % mod for c in x]
        if len(y) != self.ncols:
            raise ValueError("dimension mismatch")
        coeffs = [0] * len(self.pivots)
        for idx, (r, c, v) in enumerate(self.pivots):
            if y[c]:
                q = y[c] // self.p**v
                if q:
                    coeffs[idx] = q
                    _axpy(y, q, self.basis.rows[r], mod, c)
        return tuple(y), tuple(coeffs)

    def contains(self, x: Sequence[int]) -> bool:
        rem, _ = self.reduce(x)
        return not any(rem)

    def contains_span(self, other: "HowellForm") -> bool:
        return all(self.contains(r) for r in other.rows)

    def elements(self):
        """Enumerate every element of the span (small spans only)."""
        mod = self.basis.modulus
        gens = [(self.basis.rows[r], self.p ** (self.k - v)) for r, _, v in self.pivots]
        out = [tuple([0] * self.ncols)]
        for row, order in gens:
            new = []
            for base in out:
                for t in range(order):
                    new.append(tuple((b + t * c) % mod for b, c in zip(base, row)))
            out = new
        return out


def _howell_rows(rows: list[list[int]], p: int, k: int, ncols: int):
    """Core Howell reduction; returns (basis rows, pivots as (col, val))."""
    mod = p**k
    work = [r for r in rows if any(r)]
    basis: list[list[int]] = []
    pivots: list[tuple[int, int]] = []
    for c in range(ncols):
        best = None
        best_v = k
        for idx, r in enumerate(work):
            if r[c]:
                v = vp(r[c], p)
                if v < best_v:
                    best, best_v = idx, v
                    if v == 0:
                        break
        if best is None:
            continue
        piv = work.pop(best)
        v = best_v
        _, u = unit_part(piv[c], p)
        uinv = pow(u, -1, mod)
        if uinv != 1:
            piv = [(x * uinv) % mod for x in piv]
        pv = p**v
        rest = []
        for r in work:
            if r[c]:
                _axpy(r, r[c] // pv, piv, mod, c)
            if any(r):
                rest.append(r)
        if v > 0:
            # Howell saturation: p^(k-v) * pivot row has a zero in column c but
            # may be nonzero further right.
            extra = [(x * p ** (k - v)) % mod for x in piv]
            if any(extra):
                rest.append(extra)
        work = rest
        basis.append(piv)
        pivots.append((c, v))
    # Reduce entries above each pivot into [0, p^v).
    for j, (c, v) in enumerate(pivots):
        pv = p**v
        for i in range(j):
            q = basis[i][c] // pv
            if q:
                _axpy(basis[i], q, basis[j], mod, c)
    return basis, pivots


def howell_form(M: ResidueMatrix) -> HowellForm:
    """Howell normal form of the row span of ``M``, with a transform certificate."""
    p, k, mod = M.p, M.k, M.modulus
    n, m = M.nrows, M.ncols
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.rows)]
    rows, pivots = _howell_rows(aug, p, k, m)
    basis, trans, piv = [], [], []
    for row, (c, v) in zip(rows, pivots):
        piv.append((len(basis), c, v))
        basis.append(tuple(row[:m]))
        trans.append(tuple(row[m:]))
    return HowellForm(
        ResidueMatrix(p, k, tuple(basis), m),
        tuple(piv),
        ResidueMatrix(p, k, tuple(trans), n),
    )


def howell_span(rows: Iterable[Sequence[int]], p: int, k: int, ncols: int) -> HowellForm:
    """Howell form of a set of vectors, without a transform certificate."""
    mod = p**k
    work = [[int(c) % mod for c in r] for r in rows]
    basis, pivots = _howell_rows(work, p, k, ncols)
    return HowellForm(
        ResidueMatrix(p, k, tuple(tuple(r) for r in basis), ncols),
        tuple((i, c, v) for i, (c, v) in enumerate(pivots)),
    )


def solve_linear(M: ResidueMatrix, b: Sequence[int]):
    """Solve ``x . M = b`` over ``Z/p^k``.

    Returns ``(x, kernel)`` where ``kernel`` is the Howell form of
    ``{y : y . M = 0}``, or ``None`` when no solution exists. ``x`` is the
    canonical representative of the solution coset (reduced by the kernel
    basis), so equal inputs give equal outputs.
    """
    p, k, mod = M.p, M.k, M.modulus
    n, m = M.nrows, M.ncols
    if len(b) != m:
        raise ValueError("dimension mismatch")
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.rows)]
    rows, pivots = _howell_rows(aug, p, k, m + n)
    y = [int(c) % mod for c in b] + [0] * n
    for row, (c, v) in zip(rows, pivots):
        if c >= m:
            break
        if y[c]:
            pv = p**v
            if y[c] % pv:
                return None
            _axpy(y, y[c] // pv, row, mod, c)
    if any(y[:m]):
        return None
    kern_rows = [row[m:] for row, (c, _) in zip(rows, pivots) if c >= m]
    kernel = howell_span(kern_rows, p, k, n)
    x = tuple((-c) % mod for c in y[m:])
    x, _ = kernel.reduce(x)
    return x, kernel


def span_order(M: ResidueMatrix | HowellForm) -> int:
    """Exponent ``e`` with ``|row span| = p**e``."""
    if isinstance(M, ResidueMatrix):
        M = howell_span(M.rows, M.p, M.k, M.ncols)
    return M.order_exponent()


def quotient_order(A: HowellForm, B: HowellForm) -> int:
    """Exponent of ``|span A / span B|``; ``span B`` must lie inside ``span A``."""
    if (A.p, A.k, A.ncols) != (B.p, B.k, B.ncols):
        raise ModulusMismatch("spans live in different modules")
    for r in B.rows:
        if not A.contains(r):
            raise ContainmentError(f"{r} is not in the larger span", witness=r)
    return A.order_exponent() - B.order_exponent()
