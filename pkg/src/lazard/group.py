"""The finite groups ``U_m = L / p^m L`` with BCH multiplication.

Elements are Lie coordinates (tuples of residues mod ``p^m``); the identity
is the zero vector and ``x^-1 = -x``. Products are computed with a truncated
BCH series whose degree is certified for ``(p, m, s)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .bch import BchEvaluator, BchSeries, TruncationCertificate, bch_series, truncation_degree
from .errors import BudgetExceeded, ModulusMismatch, UniformityError, WindowError
from .liering import INFINITE_VALUATION, LieRingData, ReducedLieRing, exp_ad, matmul, matvec
from .residue import HowellForm, howell_span, unit_part, vector_valuation, vp

__all__ = [
    "LazardGroup",
    "lazard_group",
    "mul",
    "inv",
    "power",
    "commutator",
    "conjugate",
    "element_order",
    "ppower_subgroup",
    "multiplication_table",
    "check_group_axioms",
    "Endomorphism",
    "inner_automorphism",
    "restriction",
    "SectionModule",
    "section_module",
]

DEFAULT_TABLE_BUDGET = 729


@dataclass(frozen=True)
class LazardGroup:
    ring: ReducedLieRing
    # two groups are equal when their rings are; the series only has to be long enough
    series: BchSeries = field(compare=False)
    certificate: TruncationCertificate | None = field(compare=False)
    _ev: BchEvaluator = field(compare=False, repr=False)

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def m(self) -> int:
        return self.ring.k

    @property
    def dim(self) -> int:
        return self.ring.dim

    @property
    def modulus(self) -> int:
        return self.ring.modulus

    @property
    def order_exponent(self) -> int:
        return self.dim * self.m

    @property
    def order(self) -> int:
        return self.p**self.order_exponent

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.dim

    def generators(self) -> list[tuple[int, ...]]:
        return self.ring.basis()

    def is_abelian(self) -> bool:
        # commutators lie in p^s L, which is zero mod p^m once s >= m
        return self.ring.s >= self.m

    def reduce(self, x) -> tuple[int, ...]:
        if len(x) != self.dim:
            raise ModulusMismatch(f"expected {self.dim} coordinates, got {len(x)}")
        return tuple(int(c) % self.modulus for c in x)

    def mul(self, x, y) -> tuple[int, ...]:
        return self._ev(self.reduce(x), self.reduce(y))

    def mul_batch(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return self._ev.batch(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64))

    def inv(self, x) -> tuple[int, ...]:
        return tuple(-c % self.modulus for c in self.reduce(x))

    # coordinates <-> table index (base p^m digits, first coordinate most significant)
    def encode(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64) % self.modulus
        idx = np.zeros(X.shape[:-1], dtype=np.int64)
        for c in range(self.dim):
            idx = idx * self.modulus + X[..., c]
        return idx

    def decode(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros(idx.shape + (self.dim,), dtype=np.int64)
        for c in range(self.dim - 1, -1, -1):
            out[..., c] = idx % self.modulus
            idx = idx // self.modulus
        return out

    def elements(self, budget: int | None = None) -> np.ndarray:
        if budget is not None and self.order > budget:
            raise BudgetExceeded(f"group of order {self.order} exceeds budget {budget}", self.order, budget)
        return self.decode(np.arange(self.order, dtype=np.int64))


def lazard_group(data: LieRingData | ReducedLieRing, m: int | None = None, series: BchSeries | None = None) -> LazardGroup:
    """Build ``U_m`` from an integral uniform ring."""
    ring = data if isinstance(data, ReducedLieRing) else ReducedLieRing(data, m)
    if m is not None and ring.k != m:
        ring = ring.with_precision(m)
    if not ring.is_uniform():
        raise UniformityError(f"ring {ring.base.label or ''} is not uniform at p = {ring.p}")
    if ring.s == INFINITE_VALUATION:
        cert = None
        degree = 1
    else:
        cert = truncation_degree(ring.p, ring.k, int(ring.s))
        degree = cert.degree
    if series is None:
        series = bch_series(max(degree, 1))
    return LazardGroup(ring, series, cert, BchEvaluator(series, ring, degree))


def _check(G: LazardGroup, H: LazardGroup) -> None:
    if (G.p, G.m, G.dim) != (H.p, H.m, H.dim):
        raise ModulusMismatch("groups differ")


def mul(G: LazardGroup, x, y) -> tuple[int, ...]:
    return G.mul(x, y)


def inv(G: LazardGroup, x) -> tuple[int, ...]:
    return G.inv(x)


def power(G: LazardGroup, x, n: int) -> tuple[int, ...]:
    """``x^n``; on a one-parameter subgroup this is the scalar multiple ``n x``."""
    return tuple(n * c % G.modulus for c in G.reduce(x))


def conjugate(G: LazardGroup, g, x) -> tuple[int, ...]:
    """``g x g^-1``."""
    return G.mul(G.mul(g, x), G.inv(g))


def commutator(G: LazardGroup, x, y) -> tuple[int, ...]:
    """``x^-1 y^-1 x y``."""
    return G.mul(G.mul(G.inv(x), G.inv(y)), G.mul(x, y))


def element_order(G: LazardGroup, x) -> int:
    v = vector_valuation(G.reduce(x), G.p, G.m)
    return G.p ** (G.m - v)


def ppower_subgroup(G: LazardGroup, j: int) -> tuple[HowellForm, int]:
    """``G^{p^j} = p^j L / p^m L`` and the index exponent ``d*j``."""
    if not 0 <= j <= G.m:
        raise ValueError(f"need 0 <= j <= {G.m}")
    rows = [tuple(G.p**j * int(a == b) for b in range(G.dim)) for a in range(G.dim)]
    H = howell_span(rows, G.p, G.m, G.dim)
    return H, G.order_exponent - H.order_exponent()


def multiplication_table(G: LazardGroup, budget: int = DEFAULT_TABLE_BUDGET) -> np.ndarray:
    """``T[a, b] = index(a * b)`` for all element indices."""
    E = G.elements(budget)
    n = len(E)
    T = np.empty((n, n), dtype=np.int32 if n < 2**31 else np.int64)
    step = max(1, (1 << 18) // n)
    for a in range(0, n, step):
        rows = E[a:a + step]
        X = np.repeat(rows, n, axis=0)
        Y = np.tile(E, (len(rows), 1))
        T[a:a + step] = G.encode(G.mul_batch(X, Y)).reshape(len(rows), n)
    return T


@dataclass(frozen=True)
class AxiomReport:
    method: str
    checked: int
    associativity_failures: int
    identity_failures: int
    inverse_failures: int
    seed: int | None = None

    @property
    def ok(self) -> bool:
        return not (self.associativity_failures or self.identity_failures or self.inverse_failures)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "checked": self.checked,
            "associativityFailures": self.associativity_failures,
            "identityFailures": self.identity_failures,
            "inverseFailures": self.inverse_failures,
            "seed": self.seed,
            "ok": self.ok,
        }


def check_group_axioms(G: LazardGroup, mode: str = "auto", samples: int = 100_000, seed: int = 0,
                       table_budget: int = DEFAULT_TABLE_BUDGET) -> AxiomReport:
    """Associativity, identity and inverse laws; exhaustive on small groups, sampled otherwise."""
    if mode == "auto":
        mode = "exhaustive" if G.order <= table_budget else "sampled"
    if mode == "exhaustive":
        T = multiplication_table(G, max(table_budget, G.order))
        n = len(T)
        bad_assoc = 0
        for a in range(n):
            # (a b) c versus a (b c) for all b, c
            bad_assoc += int((T[T[a]] != T[a][T]).sum())
        E = G.elements()
        neg = G.encode((-E) % G.modulus)
        ar = np.arange(n)
        bad_id = int((T[0] != ar).sum() + (T[:, 0] != ar).sum())
        bad_inv = int((T[ar, neg] != 0).sum() + (T[neg, ar] != 0).sum())
        return AxiomReport("exhaustive", n**3, bad_assoc, bad_id, bad_inv)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    mod = G.modulus
    X, Y, Z = (rng.integers(0, mod, (samples, G.dim)) for _ in range(3))
    left = G.mul_batch(G.mul_batch(X, Y), Z)
    right = G.mul_batch(X, G.mul_batch(Y, Z))
    bad_assoc = int((left != right).any(axis=1).sum())
    zero = np.zeros_like(X)
    bad_id = int((G.mul_batch(X, zero) != X).any(axis=1).sum() + (G.mul_batch(zero, X) != X).any(axis=1).sum())
    bad_inv = int(G.mul_batch(X, (-X) % mod).any(axis=1).sum() + G.mul_batch((-X) % mod, X).any(axis=1).sum())
    return AxiomReport("sampled", samples, bad_assoc, bad_id, bad_inv, seed)


# --- endomorphisms -------------------------------------------------------------


@dataclass(frozen=True)
class Endomorphism:
    """A map of ``U_m`` given by a matrix on Lie coordinates (columns are images of ``e_j``)."""

    group: LazardGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        mod = self.group.modulus
        object.__setattr__(self, "matrix", tuple(tuple(int(c) % mod for c in row) for row in self.matrix))

    def __call__(self, x) -> tuple[int, ...]:
        return matvec(self.matrix, self.group.reduce(x), self.group.modulus)

    def apply_batch(self, X: np.ndarray) -> np.ndarray:
        A = np.array(self.matrix, dtype=np.int64)
        return (np.asarray(X, dtype=np.int64) @ A.T) % self.group.modulus

    def compose(self, other: "Endomorphism") -> "Endomorphism":
        """``self o other``."""
        _check(self.group, other.group)
        return Endomorphism(self.group, matmul(self.matrix, other.matrix, self.group.modulus))

    def is_bijective(self) -> bool:
        # invertible mod p^m iff invertible mod p
        return _rank_mod_p(self.matrix, self.group.p) == self.group.dim

    def is_identity(self) -> bool:
        d = self.group.dim
        return all(self.matrix[r][c] == int(r == c) for r in range(d) for c in range(d))

    def homomorphism_failures(self, samples: int | None = None, seed: int = 0) -> tuple[int, int]:
        """Count pairs with ``phi(xy) != phi(x) phi(y)``; exhaustive when ``samples`` is None."""
        G = self.group
        if samples is None:
            E = G.elements()
            n = len(E)
            bad = 0
            step = max(1, (1 << 17) // n)
            for a in range(0, n, step):
                X = np.repeat(E[a:a + step], n, axis=0)
                Y = np.tile(E, (min(step, n - a), 1))
                bad += self._failures(X, Y)
            return bad, n * n
        rng = np.random.default_rng(seed)
        X = rng.integers(0, G.modulus, (samples, G.dim))
        Y = rng.integers(0, G.modulus, (samples, G.dim))
        return self._failures(X, Y), samples

    def _failures(self, X, Y) -> int:
        G = self.group
        lhs = self.apply_batch(G.mul_batch(X, Y))
        rhs = G.mul_batch(self.apply_batch(X), self.apply_batch(Y))
        return int((lhs != rhs).any(axis=1).sum())

    def preserves_bracket(self) -> bool:
        ring = self.group.ring
        basis = ring.basis()
        for i in range(ring.dim):
            for j in range(i + 1, ring.dim):
                if self(ring.bracket(basis[i], basis[j])) != ring.bracket(self(basis[i]), self(basis[j])):
                    return False
        return True


def _rank_mod_p(A, p) -> int:
    rows = [[c % p for c in r] for r in A]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                f = rows[r][c]
                rows[r] = [(x - f * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def identity_endomorphism(G: LazardGroup) -> Endomorphism:
    return Endomorphism(G, tuple(tuple(int(r == c) for c in range(G.dim)) for r in range(G.dim)))


def inner_automorphism(G: LazardGroup, g) -> Endomorphism:
    """``x -> g x g^-1``; linear in Lie coordinates since it is ``exp(ad g)``."""
    cols = [conjugate(G, g, e) for e in G.generators()]
    return Endomorphism(G, tuple(tuple(cols[c][r] for c in range(G.dim)) for r in range(G.dim)))


def restriction(phi: Endomorphism, j: int, target: LazardGroup | None = None) -> Endomorphism:
    """``rho_{m,j}``: the induced map on ``U_j = U_m / U_m^{p^j}`` (``j <= m``)."""
    G = phi.group
    if not 1 <= j <= G.m:
        raise ValueError(f"need 1 <= j <= {G.m}")
    if target is None:
        target = G if j == G.m else lazard_group(G.ring.with_precision(j), series=G.series)
    elif target.m != j or target.dim != G.dim or target.p != G.p:
        raise ModulusMismatch("target group does not match the requested level")
    return Endomorphism(target, phi.matrix)


# --- sections ------------------------------------------------------------------


@dataclass(frozen=True)
class SectionModule:
    """``U^{p^i} / U^{p^j}`` identified with ``L / p^{j-i} L`` via ``p^i y -> y``.

    ``action[l]`` is the matrix by which the generator ``e_l`` acts on the
    module (it is ``exp(ad e_l)`` mod ``p^{j-i}``).
    """

    i: int
    j: int
    p: int
    dim: int
    action: tuple
    abelian: bool
    intertwines: bool
    method: str
    checked: int
    seed: int | None = None

    @property
    def precision(self) -> int:
        return self.j - self.i

    @property
    def verdict(self) -> bool:
        return self.abelian and self.intertwines


def section_action_matrices(G: LazardGroup, t: int, gens=None) -> list:
    ring = G.ring
    gens = G.generators() if gens is None else gens
    return [tuple(tuple(r) for r in exp_ad(ring.with_precision(max(t, 1)), g, t)) for g in gens]


def section_module(G: LazardGroup, i: int, j: int, limit: int = 10_000, samples: int = 10_000, seed: int = 0) -> SectionModule:
    """Check that the section is abelian and that conjugation matches the adjoint module."""
    if not (0 <= i <= j <= G.m):
        raise WindowError(f"need 0 <= i <= j <= {G.m}")
    if j > 2 * i + 1:
        raise WindowError(f"section ({i}, {j}) outside the window j <= 2i + 1")
    p, d, t = G.p, G.dim, j - i
    mod_t = p**t
    pi = p**i
    mats = section_action_matrices(G, t)
    carrier = np.array(list(itertools.product(range(mod_t), repeat=d)), dtype=np.int64)
    if mod_t**d <= limit:
        method = "exhaustive"
        Y1 = np.repeat(carrier, len(carrier), axis=0)
        Y2 = np.tile(carrier, (len(carrier), 1))
        Gel = G.elements() if G.order * len(carrier) <= 4_000_000 else None
        if Gel is not None:
            Gs = np.repeat(Gel, len(carrier), axis=0)
            Ys = np.tile(carrier, (len(Gel), 1))
        else:
            method = "exhaustive-section/sampled-group"
            rng = np.random.default_rng(seed)
            Gs = rng.integers(0, G.modulus, (samples, d))
            Ys = carrier[rng.integers(0, len(carrier), samples)]
    else:
        method = "sampled"
        rng = np.random.default_rng(seed)
        Y1 = rng.integers(0, mod_t, (samples, d))
        Y2 = rng.integers(0, mod_t, (samples, d))
        Gs = rng.integers(0, G.modulus, (samples, d))
        Ys = rng.integers(0, mod_t, (samples, d))
    # (a) products of section elements agree with addition modulo p^j
    prod = G.mul_batch(pi * Y1, pi * Y2)
    pj = p**j
    abelian = bool(((prod - pi * (Y1 + Y2)) % pj == 0).all())
    # (b) conjugation by g, rescaled, equals exp(ad g) acting on y mod p^{j-i}
    conj = G.mul_batch(G.mul_batch(Gs, pi * Ys), (-Gs) % G.modulus)
    ok = bool((conj % pi == 0).all())
    if ok:
        lhs = (conj // pi) % mod_t
        rhs = _adjoint_batch(G, Gs, Ys, t)
        ok = bool((lhs == rhs).all())
    checked = len(Y1) + len(Gs)
    return SectionModule(i, j, p, d, tuple(mats), abelian, ok, method, checked,
                         None if method == "exhaustive" else seed)


def _adjoint_batch(G: LazardGroup, Gs: np.ndarray, Ys: np.ndarray, t: int) -> np.ndarray:
    """``exp(ad g) y = sum_n [g, [g, ..., y]] / n!`` mod ``p^t``, row by row.

    Brackets are taken with the integral constants modulo a working modulus
    with enough extra powers of p to divide exactly by ``n!``.
    """
    p = G.p
    mod_t = p**t
    if t == 0:
        return np.zeros_like(Ys)
    Ys = np.asarray(Ys, dtype=np.int64) % mod_t
    s = G.ring.s
    if s == INFINITE_VALUATION:
        return Ys
    n_stop = 1
    while n_stop * s - Fraction(n_stop - 1, p - 1) < t:
        n_stop += 1
    extra = max((vp(factorial(n), p) for n in range(1, n_stop)), default=0)
    W = p ** (t + extra)
    if W >= 1 << 29:
        raise BudgetExceeded("working modulus too large for the vectorised adjoint action", W, 1 << 29)
    sparse = G.ring.sparse
    Gw = np.asarray(Gs, dtype=np.int64) % W
    term = Ys.copy()
    out = Ys.copy()
    for n in range(1, n_stop):
        nxt = np.zeros_like(term)
        for a, b, l, c in sparse:
            nxt[:, l] = (nxt[:, l] + (c % W) * ((Gw[:, a] * term[:, b] - Gw[:, b] * term[:, a]) % W)) % W
        term = nxt
        v, u = unit_part(factorial(n), p)
        q = p**v
        if (term % q).any():
            raise ArithmeticError("bracket chain not divisible by the factorial's p-part")
        contrib = ((term // q) % mod_t) * pow(u, -1, mod_t) % mod_t
        out = (out + contrib) % mod_t
    return out
