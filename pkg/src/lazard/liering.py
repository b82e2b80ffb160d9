"""Lie rings given by integral structure constants.

Only brackets ``[e_i, e_j]`` with ``i < j`` are stored; the rest follows from
antisymmetry. Matrices act on column vectors: ``D e_c = sum_r D[r][c] e_r``,
and a ``d x d`` matrix is flattened row-major (index ``r*d + c``) whenever it
has to live in a module over ``Z/p^k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import RingValidationError, UniformityError
from .residue import (
    HowellForm,
    ResidueMatrix,
    howell_span,
    is_prime,
    quotient_order,
    solve_linear,
    to_residue,
    vp,
)

__all__ = [
    "LieRingData",
    "ReducedLieRing",
    "ValidationReport",
    "DerivationModule",
    "validate",
    "uniformity",
    "scale",
    "reduce_ring",
    "center",
    "center_rank",
    "derived_ideal",
    "derivations",
    "h1_lie",
    "is_derivation",
    "exp_ad",
    "INFINITE_VALUATION",
]

INFINITE_VALUATION = float("inf")


@dataclass(frozen=True)
class LieRingData:
    """Rank ``d`` Lie ring over the integers, attached to a prime ``p``.

    ``brackets`` maps 0-based pairs ``(i, j)`` with ``i < j`` to coefficient
    tuples; absent pairs bracket to zero.
    """

    rank: int
    prime: int
    brackets: Mapping[tuple[int, int], tuple[int, ...]]
    label: str = ""

    def __post_init__(self):
        if self.rank < 1:
            raise RingValidationError("rank must be positive", pointer="/rank")
        if not is_prime(self.prime):
            raise RingValidationError(f"{self.prime} is not prime", pointer="/prime")
        clean = {}
        for (i, j), coeffs in sorted(self.brackets.items()):
            if not (0 <= i < j < self.rank):
                raise RingValidationError(f"bad bracket index pair {(i + 1, j + 1)}", pointer="/brackets")
            coeffs = tuple(int(c) for c in coeffs)
            if len(coeffs) != self.rank:
                raise RingValidationError(f"bracket {(i + 1, j + 1)} needs {self.rank} coefficients", pointer="/brackets")
            if any(coeffs):
                clean[(i, j)] = coeffs
        object.__setattr__(self, "brackets", clean)

    @property
    def dim(self) -> int:
        return self.rank

    def structure(self, i: int, j: int) -> tuple[int, ...]:
        """``[e_i, e_j]`` as an integer vector (0-based indices)."""
        if i < j:
            return self.brackets.get((i, j), (0,) * self.rank)
        if i > j:
            return tuple(-c for c in self.brackets.get((j, i), (0,) * self.rank))
        return (0,) * self.rank

    @property
    def sparse(self) -> tuple[tuple[int, int, int, int], ...]:
        return tuple(
            (i, j, l, c) for (i, j), coeffs in self.brackets.items() for l, c in enumerate(coeffs) if c
        )

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        out = [0] * self.rank
        for i, j, l, c in self.sparse:
            t = x[i] * y[j] - x[j] * y[i]
            if t:
                out[l] += c * t
        return tuple(out)

    def is_abelian(self) -> bool:
        return not self.brackets

    @classmethod
    def from_json(cls, obj: dict) -> "LieRingData":
        d = obj["rank"]
        br = {}
        for entry in obj.get("brackets", []):
            key = (entry["i"] - 1, entry["j"] - 1)
            if key in br:
                raise RingValidationError(f"duplicate bracket {entry['i'], entry['j']}", pointer="/brackets")
            br[key] = tuple(entry["coeffs"])
        return cls(d, obj["prime"], br, obj.get("label", ""))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "prime": self.prime,
            "rank": self.rank,
            "brackets": [
                {"i": i + 1, "j": j + 1, "coeffs": list(c)} for (i, j), c in sorted(self.brackets.items())
            ],
        }


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    rank: int
    triples_checked: int
    residuals: tuple[tuple[tuple[int, int, int], tuple[int, ...]], ...]

    @property
    def first_violation(self) -> tuple[int, int, int] | None:
        return self.residuals[0][0] if self.residuals else None


def _jacobi(data: LieRingData, i, j, k):
    d = data.rank
    e = lambda t: tuple(int(t == s) for s in range(d))  # noqa: E731
    total = [0] * d
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        inner = data.bracket(e(b), e(c))
        for l, v in enumerate(data.bracket(e(a), inner)):
            total[l] += v
    return tuple(total)


def validate(data: LieRingData) -> ValidationReport:
    """Jacobi identity over Z on every basis triple ``i < j < k``."""
    bad = []
    count = 0
    for i, j, k in itertools.combinations(range(data.rank), 3):
        count += 1
        r = _jacobi(data, i, j, k)
        if any(r):
            bad.append(((i + 1, j + 1, k + 1), r))
    return ValidationReport(not bad, data.rank, count, tuple(bad))


def check_valid(data: LieRingData) -> LieRingData:
    rep = validate(data)
    if not rep.valid:
        t = rep.first_violation
        raise RingValidationError(f"Jacobi identity fails on basis triple {t}", triple=t)
    return data


def uniformity(data: LieRingData, p: int | None = None) -> tuple[float, bool]:
    """Largest ``s`` with every structure constant in ``p^s Z``, and the uniform verdict.

    Uniform means ``s >= 1`` for odd ``p`` and ``s >= 2`` for ``p = 2``; the
    abelian ring reports ``s = inf``.
    """
    p = data.prime if p is None else p
    s = min((vp(c, p) for c in itertools.chain.from_iterable(data.brackets.values()) if c), default=INFINITE_VALUATION)
    return s, s >= (2 if p == 2 else 1)


def scale(data: LieRingData, s: int) -> LieRingData:
    """Rescale the basis by ``p^s``, multiplying every structure constant by ``p^s``."""
    f = data.prime**s
    return LieRingData(
        data.rank,
        data.prime,
        {key: tuple(f * c for c in v) for key, v in data.brackets.items()},
        data.label,
    )


@dataclass(frozen=True)
class ReducedLieRing:
    """``L / p^k L`` for an integral ring ``L``; ``s`` is the bracket valuation of ``L``."""

    base: LieRingData
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("precision must be at least 1")

    @property
    def p(self) -> int:
        return self.base.prime

    @property
    def dim(self) -> int:
        return self.base.rank

    @property
    def modulus(self) -> int:
        return self.base.prime**self.k

    @property
    def s(self):
        return uniformity(self.base)[0]

    @property
    def sparse(self):
        # integral constants: BCH evaluation divides exactly by powers of p
        return self.base.sparse

    def is_uniform(self) -> bool:
        return uniformity(self.base)[1]

    def bracket(self, x, y) -> tuple[int, ...]:
        mod = self.modulus
        return tuple(c % mod for c in self.base.bracket(x, y))

    def basis(self):
        d = self.dim
        return [tuple(int(i == j) for j in range(d)) for i in range(d)]

    def ad(self, x) -> list[list[int]]:
        """Matrix of ``ad(x) = [x, -]`` (columns are images of basis vectors)."""
        cols = [self.bracket(x, e) for e in self.basis()]
        return [[cols[c][r] for c in range(self.dim)] for r in range(self.dim)]

    def with_precision(self, k: int) -> "ReducedLieRing":
        return ReducedLieRing(self.base, k)


def reduce_ring(data: LieRingData, k: int) -> ReducedLieRing:
    return ReducedLieRing(data, k)


def _flatten(A):
    return tuple(c for row in A for c in row)


def matmul(A, B, mod):
    n, m = len(A), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) % mod for j in range(m)] for i in range(n)]


def matvec(A, x, mod):
    return tuple(sum(a * b for a, b in zip(row, x)) % mod for row in A)


def exp_ad(ring: ReducedLieRing, x, precision: int | None = None) -> list[list[int]]:
    """``exp(ad x)`` as a matrix mod ``p^precision`` (default: the ring's ``k``).

    The series is summed with exact rationals on an integer lift of ``x``;
    terms stop once ``n*s - v_p(n!)`` reaches the precision.
    """
    p = ring.p
    t = ring.k if precision is None else precision
    d = ring.dim
    s = ring.s
    base = ring.base
    cols = [base.bracket(x, e) for e in ring.basis()]
    ad = [[Fraction(cols[c][r]) for c in range(d)] for r in range(d)]
    mod = p**t
    result = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    term = [row[:] for row in result]
    if not base.brackets:
        return [[int(c) % mod for c in row] for row in result]
    if s == INFINITE_VALUATION or s < 1:
        raise UniformityError("exp(ad x) needs a uniform ring")
    # terms with n*s - (n-1)/(p-1) >= t vanish mod p^t, and that bound increases with n
    n_stop = 1
    while n_stop * s - Fraction(n_stop - 1, p - 1) < t:
        n_stop += 1
    for n in range(1, n_stop):
        term = [[sum(term[i][a] * ad[a][j] for a in range(d)) / n for j in range(d)] for i in range(d)]
        for i in range(d):
            for j in range(d):
                result[i][j] += term[i][j]
    return [[to_residue(c, p, t) for c in row] for row in result]


def center(ring: ReducedLieRing) -> tuple[HowellForm, int]:
    """``{v : [v, e_j] = 0 mod p^k for all j}`` and its order exponent."""
    d = ring.dim
    # row v of the system is the concatenation of [e_v, e_j] over j
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            row.extend(ring.base.structure(i, j))
        rows.append(row)
    M = ResidueMatrix.from_rows(rows, ring.p, ring.k, d * d)
    _, ker = solve_linear(M, (0,) * (d * d))
    return ker, ker.order_exponent()


def center_rank(data: LieRingData, window: Sequence[int] | None = None) -> tuple[int, tuple[int, ...]]:
    """Estimate ``dim Z(L tensor Q_p)`` from centers mod ``p^k``.

    For each ``k`` in the window, counts pivots of valuation 0 in the center's
    Howell form. Returns the count at the top of the window together with the
    window; the estimate is reliable once the counts have stabilised, which is
    checked by the caller via :func:`center_rank_table`.
    """
    table = center_rank_table(data, window)
    return table[-1][1], tuple(k for k, _ in table)


def center_rank_table(data: LieRingData, window: Sequence[int] | None = None):
    if window is None:
        s, _ = uniformity(data)
        top = 3 if s == INFINITE_VALUATION else int(s) + 3
        window = range(top - 2, top + 1)
    out = []
    for k in window:
        H, _ = center(ReducedLieRing(data, k))
        out.append((k, sum(1 for _, _, v in H.pivots if v == 0)))
    return out


def derived_ideal(ring: ReducedLieRing) -> HowellForm:
    vecs = [ring.bracket(*_pair(ring, i, j)) for i, j in itertools.combinations(range(ring.dim), 2)]
    return howell_span(vecs, ring.p, ring.k, ring.dim)


def _pair(ring, i, j):
    b = ring.basis()
    return b[i], b[j]


@dataclass(frozen=True)
class DerivationModule:
    """Derivations and inner derivations of ``L / p^k L`` as spans of flattened matrices."""

    der_basis: HowellForm
    inn_basis: HowellForm
    der_order_exp: int
    inn_order_exp: int
    h1_order_exp: int
    ring: ReducedLieRing = field(compare=False, repr=False)

    def matrices(self, which: str = "der"):
        H = self.der_basis if which == "der" else self.inn_basis
        d = self.ring.dim
        return [[list(r[i * d:(i + 1) * d]) for i in range(d)] for r in H.rows]


def _leibniz_system(ring: ReducedLieRing) -> ResidueMatrix:
    """Rows indexed by unknowns ``D[r][c]``, one column per (pair, coordinate)."""
    d = ring.dim
    C = ring.base.structure
    cols = []
    for i, j in itertools.combinations(range(d), 2):
        cij = C(i, j)
        for l in range(d):
            col = [0] * (d * d)
            # (D [e_i, e_j])_l
            for m in range(d):
                if cij[m]:
                    col[l * d + m] += cij[m]
            # -([D e_i, e_j] + [e_i, D e_j])_l
            for r in range(d):
                col[r * d + i] -= C(r, j)[l]
                col[r * d + j] -= C(i, r)[l]
            cols.append(col)
    if not cols:
        return ResidueMatrix.zeros(d * d, 0, ring.p, ring.k)
    rows = [tuple(col[u] for col in cols) for u in range(d * d)]
    return ResidueMatrix.from_rows(rows, ring.p, ring.k, len(cols))


def is_derivation(ring: ReducedLieRing, D) -> bool:
    """Direct Leibniz check on all basis pairs."""
    mod = ring.modulus
    basis = ring.basis()
    for i, j in itertools.combinations(range(ring.dim), 2):
        lhs = matvec(D, ring.bracket(basis[i], basis[j]), mod)
        a = ring.bracket(matvec(D, basis[i], mod), basis[j])
        b = ring.bracket(basis[i], matvec(D, basis[j], mod))
        if any((x - y - z) % mod for x, y, z in zip(lhs, a, b)):
            return False
    return True


def derivations(ring: ReducedLieRing) -> DerivationModule:
    d = ring.dim
    M = _leibniz_system(ring)
    if M.ncols == 0:
        der = howell_span([tuple(int(u == v) for v in range(d * d)) for u in range(d * d)], ring.p, ring.k, d * d)
    else:
        _, der = solve_linear(M, (0,) * M.ncols)
    inn = howell_span([_flatten(ring.ad(e)) for e in ring.basis()], ring.p, ring.k, d * d)
    h1 = quotient_order(der, inn)
    return DerivationModule(der, inn, der.order_exponent(), inn.order_exponent(), h1, ring)


def h1_lie(ring: ReducedLieRing) -> int:
    """Exponent of ``|Der / Inn|`` for ``L / p^k L``."""
    return derivations(ring).h1_order_exp
