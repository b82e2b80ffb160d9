"""Automorphism counts, inner automorphisms, stabilisation evidence and the bound chain.

Automorphism counts use the orbit-stabiliser chain. ``Aut(G)`` acts freely
on generating tuples, and the tuples extending to automorphisms form a single
orbit, so

    |Aut(G)| = prod_r #{x : (g_1, ..., g_{r-1}, x) extends to an automorphism}.

Each factor needs only an existence test per candidate, which is a
backtracking search over the remaining generator images.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, UniformityError
from .group import LazardGroup, lazard_group, multiplication_table
from .liering import (
    INFINITE_VALUATION,
    LieRingData,
    ReducedLieRing,
    center,
    center_rank_table,
    derivations,
    uniformity,
    validate,
)
from .residue import howell_span

__all__ = [
    "AutSearchResult",
    "aut_bruteforce",
    "lie_matrix_automorphisms",
    "inn_order",
    "StabilizationResult",
    "stabilization_k",
    "LevelBound",
    "BoundReport",
    "bound_chain",
    "bound_report",
    "totient",
    "totient_ratio",
]

DEFAULT_AUT_BUDGET = 729
DEFAULT_NODE_BUDGET = 5_000_000
WITNESS_CAP = 16


@dataclass(frozen=True)
class AutSearchResult:
    order: int
    generator_images: tuple = ()
    pruned_nodes: int = 0
    visited_nodes: int = 0
    method: str = "orbit-chain"
    factors: tuple = ()

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "method": self.method,
            "factors": list(self.factors),
            "visitedNodes": self.visited_nodes,
            "prunedNodes": self.pruned_nodes,
            "witnesses": [list(map(list, w)) for w in self.generator_images],
        }


class _Budget:
    def __init__(self, nodes: int | None, seconds: float | None):
        self.nodes = nodes
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.visited = 0
        self.pruned = 0

    def visit(self, count: int) -> None:
        self.visited += count
        if self.nodes is not None and self.visited > self.nodes:
            raise BudgetExceeded(f"search visited more than {self.nodes} nodes", self.visited, self.nodes)
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("search ran past its time limit")


# --- group side ------------------------------------------------------------------


@dataclass
class _Tables:
    G: LazardGroup
    T: np.ndarray
    order: np.ndarray
    cent: np.ndarray
    depth: np.ndarray
    norm: np.ndarray
    frattini_code: np.ndarray


def _tables(G: LazardGroup, budget: int) -> _Tables:
    T = multiplication_table(G, budget).astype(np.int64)
    N = len(T)
    ar = np.arange(N)
    # element orders from the table
    order = np.zeros(N, dtype=np.int64)
    cur = ar.copy()
    n = 1
    while (order == 0).any():
        order[(cur == 0) & (order == 0)] = n
        cur = T[cur, ar]
        n += 1
    cent = (T == T.T).sum(axis=1)
    # depth: largest t with a in the set of p^t-th powers
    p = G.p
    depth = np.zeros(N, dtype=np.int64)
    powers = ar.copy()
    t = 0
    while True:
        nxt = powers.copy()
        for _ in range(p - 1):
            nxt = T[nxt, powers]
        # nxt[a] = a^(p^(t+1)) computed as powers^p
        t += 1
        image = np.unique(nxt)
        if len(image) == 1:
            depth[image] = np.maximum(depth[image], t)
            break
        depth[image] = t
        powers = nxt
    depth[0] = 10**6
    # Frattini subgroup G^p [G, G] and coordinates of the quotient
    inv = _inverses(T)
    gens = set(np.unique(_pth_powers(T, p)).tolist())
    comm = T[T[inv][:, inv], T]  # [a, b] = a^-1 b^-1 a b
    gens |= set(np.unique(comm).tolist())
    phi = _subgroup(T, sorted(gens))
    coset = T[:, phi].min(axis=1)
    # |N_G(<x>)|: y normalises <x> iff [y, x] lies in <x>
    cyc = np.zeros((N, N), dtype=bool)
    cur = np.zeros(N, dtype=np.int64)
    for _ in range(int(order.max())):
        cyc[ar, cur] = True
        cur = T[cur, ar]
    norm = cyc[ar[None, :], comm].sum(axis=0)
    return _Tables(G, T, order, cent, depth, norm, _frattini_coordinates(T, coset, G, p))


def _inverses(T: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(T == 0)
    inv = np.empty(len(T), dtype=np.int64)
    inv[rows] = cols
    return inv


def _pth_powers(T, p):
    ar = np.arange(len(T))
    cur = ar.copy()
    for _ in range(p - 1):
        cur = T[cur, ar]
    return cur


def _subgroup(T, gens) -> np.ndarray:
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = int(T[a, g])
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64)


def _frattini_coordinates(T, coset, G, p) -> np.ndarray:
    """Code in ``[0, p^d)`` of each element's image in ``G / Phi(G) = F_p^d``.

    Coordinates are read off relative to the standard generators by a walk
    over the quotient.
    """
    gens = [int(G.encode(np.array(e))) for e in G.generators()]
    d = len(gens)
    code_of = {int(coset[0]): 0}
    frontier = [(0, 0)]  # (element, code)
    while frontier:
        nxt = []
        for a, c in frontier:
            for j, g in enumerate(gens):
                b = int(T[a, g])
                rep = int(coset[b])
                if rep not in code_of:
                    digits = [(c // p**(d - 1 - t)) % p for t in range(d)]
                    digits[j] = (digits[j] + 1) % p
                    new = sum(x * p**(d - 1 - t) for t, x in enumerate(digits))
                    code_of[rep] = new
                    nxt.append((b, new))
        frontier = nxt
    if len(code_of) != p**d:
        raise ValueError("standard generators do not give a Frattini basis")
    return np.array([code_of[int(c)] for c in coset], dtype=np.int64)


def _span_codes(codes: Sequence[int], p: int, d: int) -> np.ndarray:
    vecs = [np.array([(c // p**(d - 1 - t)) % p for t in range(d)]) for c in codes]
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(vecs)):
        v = sum((a * x for a, x in zip(coeffs, vecs)), np.zeros(d, dtype=np.int64)) % p
        out.add(int(sum(int(x) * p**(d - 1 - t) for t, x in enumerate(v))))
    return np.array(sorted(out), dtype=np.int64)


@dataclass
class _Tree:
    size: int
    layers: list            # per layer: list of (gen, parents, children)
    edges: list             # per gen: (u positions, w positions)
    members: np.ndarray     # element indices of H in tree order


def _tree(T: np.ndarray, gens: Sequence[int]) -> _Tree:
    pos = {0: 0}
    members = [0]
    layers = []
    edges = {g: ([], []) for g in range(len(gens))}
    frontier = [0]
    while frontier:
        nxt = []
        layer = {g: ([], []) for g in range(len(gens))}
        for u in frontier:
            for gi, g in enumerate(gens):
                w = int(T[members[u], g])
                if w not in pos:
                    pos[w] = len(members)
                    members.append(w)
                    nxt.append(pos[w])
                    layer[gi][0].append(u)
                    layer[gi][1].append(pos[w])
                else:
                    edges[gi][0].append(u)
                    edges[gi][1].append(pos[w])
        layers.append([(g, np.array(a), np.array(b)) for g, (a, b) in layer.items() if a])
        frontier = nxt
    return _Tree(len(members), layers, [(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)) for a, b in edges.values()],
                 np.array(members))


class _GroupSearch:
    def __init__(self, tabs: _Tables, budget: _Budget):
        self.t = tabs
        self.budget = budget
        G = tabs.G
        basis = [int(G.encode(np.array(e))) for e in G.generators()]
        # standard basis ordered by element order, then coordinates
        self.gens = sorted(basis, key=lambda a: (int(tabs.order[a]), tuple(G.decode(a).tolist())))
        self.d = len(self.gens)
        self.trees = [_tree(tabs.T, self.gens[:r + 1]) for r in range(self.d)]
        self.witnesses: list = []

    def candidates(self, r: int, prefix: Sequence[int]) -> np.ndarray:
        t = self.t
        g = self.gens[r]
        N = len(t.T)
        X = np.nonzero((t.order == t.order[g]) & (t.cent == t.cent[g]) & (t.depth == t.depth[g])
                     & (t.norm == t.norm[g]))[0]
        pre = N - len(X)
        p, d = t.G.p, self.d
        span = _span_codes([int(t.frattini_code[y]) for y in prefix], p, d)
        X = X[~np.isin(t.frattini_code[X], span)]
        self.budget.visit(len(X))
        self.budget.pruned += pre
        if len(X) == 0:
            return X
        ok = self._closure_ok(r, prefix, X)
        self.budget.pruned += int((~ok).sum())
        return X[ok]

    def _closure_ok(self, r, prefix, X) -> np.ndarray:
        T = self.t.T
        tree = self.trees[r]
        C = len(X)
        imgs = [np.full(C, y, dtype=np.int64) for y in prefix] + [X]
        psi = np.zeros((C, tree.size), dtype=np.int64)
        for layer in tree.layers:
            for g, parents, children in layer:
                psi[:, children] = T[psi[:, parents], imgs[g][:, None]]
        ok = np.ones(C, dtype=bool)
        for g, (u, w) in enumerate(tree.edges):
            if len(u):
                ok &= (T[psi[:, u], imgs[g][:, None]] == psi[:, w]).all(axis=1)
        # an automorphism restricts to an injective map on the subgroup
        srt = np.sort(psi[ok], axis=1)
        ok[ok] = (np.diff(srt, axis=1) != 0).all(axis=1)
        return ok

    def exists(self, r: int, prefix: list) -> bool:
        X = self.candidates(r, prefix)
        if r == self.d - 1:
            if len(X) and len(self.witnesses) < WITNESS_CAP:
                self.witnesses.append(tuple(prefix) + (int(X[0]),))
            return len(X) > 0
        return any(self.exists(r + 1, prefix + [int(x)]) for x in X)

    def count_chain(self) -> tuple[int, tuple]:
        factors = []
        for r in range(self.d):
            prefix = list(self.gens[:r])
            X = self.candidates(r, prefix)
            if r == self.d - 1:
                factors.append(len(X))
            else:
                factors.append(sum(1 for x in X if self.exists(r + 1, prefix + [int(x)])))
        return math.prod(factors), tuple(factors)

    def enumerate_all(self, r: int = 0, prefix: list | None = None) -> list:
        prefix = [] if prefix is None else prefix
        X = self.candidates(r, prefix)
        if r == self.d - 1:
            return [tuple(prefix) + (int(x),) for x in X]
        out = []
        for x in X:
            out.extend(self.enumerate_all(r + 1, prefix + [int(x)]))
        return out

    def verify(self, images: tuple) -> bool:
        """Full check: the induced map is a bijective homomorphism of the whole table."""
        T = self.t.T
        tree = self.trees[-1]
        psi = np.zeros(tree.size, dtype=np.int64)
        for layer in tree.layers:
            for g, parents, children in layer:
                psi[children] = T[psi[parents], images[g]]
        phi = np.empty(len(T), dtype=np.int64)
        phi[tree.members] = psi
        if tree.size != len(T) or len(np.unique(phi)) != len(T):
            return False
        return bool((phi[T] == T[phi][:, phi]).all())


def aut_bruteforce(G: LazardGroup, budget: int = DEFAULT_AUT_BUDGET, mode: str = "chain",
                   node_budget: int | None = DEFAULT_NODE_BUDGET, seconds: float | None = None) -> AutSearchResult:
    """``|Aut(G)|`` by backtracking over images of the standard generators.

    ``mode="chain"`` uses the orbit-stabiliser product; ``mode="enumerate"``
    lists every automorphism (small groups only). Candidates are pruned by
    element order, centraliser size, power depth, the order of the
    normaliser of ``<x>``, independence modulo the Frattini subgroup and
    consistency of the partial map on the subgroup generated by the images
    assigned so far. Witnesses list the images of ``e_1, ..., e_d``. Exceeding any budget raises
    :class:`BudgetExceeded`; no partial count is returned.
    """
    if G.order > budget:
        raise BudgetExceeded(f"group of order {G.order} exceeds the brute-force budget {budget}", G.order, budget)
    tabs = _tables(G, budget)
    b = _Budget(node_budget, seconds)
    search = _GroupSearch(tabs, b)
    if mode == "chain":
        order, factors = search.count_chain()
        witnesses = search.witnesses
    elif mode == "enumerate":
        allw = search.enumerate_all()
        order, factors = len(allw), ()
        witnesses = allw[:WITNESS_CAP]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for w in witnesses:
        if not search.verify(w):
            raise AssertionError(f"emitted map {w} is not an automorphism")
    # report images of e_1, ..., e_d in basis order, the columns of the matrix
    basis = [int(G.encode(np.array(e))) for e in G.generators()]
    slot = [search.gens.index(b_) for b_ in basis]
    images = tuple(tuple(tuple(int(c) for c in G.decode(w[i])) for i in slot) for w in witnesses)
    return AutSearchResult(order, images, b.pruned, b.visited, mode, factors)


# --- Lie side ------------------------------------------------------------------------


def _ad_rank(ring: ReducedLieRing, X: np.ndarray) -> np.ndarray:
    """Exponent of ``|[x, L]|`` for each row ``x``."""
    out = np.empty(len(X), dtype=np.int64)
    basis = ring.basis()
    for n, x in enumerate(X.tolist()):
        out[n] = howell_span([ring.bracket(x, e) for e in basis], ring.p, ring.k, ring.dim).order_exponent()
    return out


class _LieSearch:
    def __init__(self, ring: ReducedLieRing, budget: _Budget):
        self.ring = ring
        self.budget = budget
        d, mod = ring.dim, ring.modulus
        self.d, self.mod, self.p = d, mod, ring.p
        self.all = np.array(list(itertools.product(range(mod), repeat=d)), dtype=np.int64)
        self.rank = _ad_rank(ring, self.all)
        basis_rank = [int(self.rank[self._index(e)]) for e in ring.basis()]
        self.cols = sorted(range(d), key=lambda j: (basis_rank[j], j))
        self.sparse = [(a, b, l, c % mod) for a, b, l, c in ring.sparse]

    def _index(self, x) -> int:
        idx = 0
        for c in x:
            idx = idx * self.mod + int(c) % self.mod
        return idx

    def _bracket(self, X, Y):
        Z = np.zeros((len(X), self.d), dtype=np.int64)
        for a, b, l, c in self.sparse:
            Z[:, l] = (Z[:, l] + c * ((X[:, a] * Y[:, b] - X[:, b] * Y[:, a]) % self.mod)) % self.mod
        return Z

    def candidates(self, r: int, assigned: dict) -> np.ndarray:
        """Rows of ``self.all`` usable as the image of basis vector ``self.cols[r]``."""
        col = self.cols[r]
        X = self.all[self.rank == self.rank[self._index(self.ring.basis()[col])]]
        pre = len(self.all) - len(X)
        # independence modulo p from the columns already assigned
        if assigned:
            p = self.p
            prev = [np.array(v) % p for v in assigned.values()]
            span = set()
            for coeffs in itertools.product(range(p), repeat=len(prev)):
                span.add(tuple((sum(a * v for a, v in zip(coeffs, prev)) % p).tolist()))
            Xp = X % p
            keep = np.array([tuple(row) not in span for row in Xp.tolist()], dtype=bool)
        else:
            keep = X.any(axis=1) & (X % self.p).any(axis=1)
        X = X[keep]
        self.budget.visit(len(X))
        self.budget.pruned += pre + int((~keep).sum())
        if len(X) == 0:
            return X
        ok = self._constraints_ok(r, assigned, X)
        self.budget.pruned += int((~ok).sum())
        return X[ok]

    def _constraints_ok(self, r, assigned, X) -> np.ndarray:
        col = self.cols[r]
        cols = dict(assigned)
        C = len(X)
        img = {j: np.broadcast_to(np.array(v, dtype=np.int64), (C, self.d)) for j, v in cols.items()}
        img[col] = X
        ok = np.ones(C, dtype=bool)
        base = self.ring.base
        for i, j in itertools.combinations(sorted(img), 2):
            if col not in (i, j) and not any(base.structure(i, j)[l] for l in range(self.d) if l == col):
                continue
            cij = base.structure(i, j)
            if any(cij[l] % self.mod and l not in img for l in range(self.d)):
                continue
            lhs = np.zeros((C, self.d), dtype=np.int64)
            for l in range(self.d):
                if cij[l] % self.mod:
                    lhs = (lhs + (cij[l] % self.mod) * img[l]) % self.mod
            ok &= (lhs == self._bracket(img[i], img[j])).all(axis=1)
        return ok

    def exists(self, r: int, assigned: dict) -> bool:
        X = self.candidates(r, assigned)
        if r == self.d - 1:
            return len(X) > 0
        col = self.cols[r]
        return any(self.exists(r + 1, {**assigned, col: tuple(x)}) for x in X.tolist())

    def count_chain(self) -> tuple[int, tuple]:
        factors = []
        basis = self.ring.basis()
        for r in range(self.d):
            assigned = {self.cols[q]: basis[self.cols[q]] for q in range(r)}
            X = self.candidates(r, assigned)
            if r == self.d - 1:
                factors.append(len(X))
            else:
                col = self.cols[r]
                factors.append(sum(1 for x in X.tolist() if self.exists(r + 1, {**assigned, col: tuple(x)})))
        return math.prod(factors), tuple(factors)


def lie_matrix_automorphisms(ring: ReducedLieRing, budget: int = 20_000, node_budget: int | None = DEFAULT_NODE_BUDGET,
                             seconds: float | None = None) -> AutSearchResult:
    """Count invertible matrices mod ``p^k`` preserving the bracket, column by column.

    ``budget`` bounds the number of candidate columns ``p^(k d)``.
    """
    if ring.dim > 4:
        raise BudgetExceeded("matrix search supports rank at most 4", ring.dim, 4)
    size = ring.modulus**ring.dim
    if size > budget:
        raise BudgetExceeded(f"{size} candidate columns exceed budget {budget}", size, budget)
    b = _Budget(node_budget, seconds)
    search = _LieSearch(ring, b)
    order, factors = search.count_chain()
    return AutSearchResult(order, (), b.pruned, b.visited, "lie-matrix-chain", factors)


# --- inner automorphisms -------------------------------------------------------------


@dataclass(frozen=True)
class InnResult:
    exponent: int
    center_exponent: int
    method: str


def inn_order(G: LazardGroup, budget: int = DEFAULT_AUT_BUDGET) -> InnResult:
    """Exponent of ``|G / Z(G)|``; exhaustive on small groups, Lie-side kernel otherwise."""
    if G.order <= budget:
        T = multiplication_table(G, budget)
        zsize = int(((T == T.T).all(axis=1)).sum())
        z = round(math.log(zsize, G.p))
        if G.p**z != zsize:
            raise ArithmeticError("center order is not a power of p")
        return InnResult(G.order_exponent - z, z, "exhaustive")
    _, z = center(G.ring)
    return InnResult(G.order_exponent - z, z, "lie-center")


# --- stabilisation ---------------------------------------------------------------------


@dataclass(frozen=True)
class StabilizationResult:
    k: int
    levels: tuple
    stabilizes: bool
    table: tuple        # rows: (i, der exp, inn exp, h1 exp, annihilator exp, method)
    group_side: tuple = ()

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "testedLevels": list(self.levels),
            "stabilizes": self.stabilizes,
            "method": "empirical",
            "table": [
                {"i": i, "derExp": de, "innExp": ie, "h1Exp": h, "annihilatorExp": a, "method": m}
                for i, de, ie, h, a, m in self.table
            ],
            "groupSide": [{"m": m, "t": t, "h1Exp": h, "note": "finite-quotient H^1, informational"} for m, t, h in self.group_side],
        }


def _annihilator_exp(mod) -> int:
    """Least ``e`` with ``p^e Der`` inside ``Inn``."""
    der, inn = mod.der_basis, mod.inn_basis
    p, k = der.p, der.k
    worst = 0
    for row in der.rows:
        e = 0
        while not inn.contains(tuple(p**e * c % p**k for c in row)):
            e += 1
        worst = max(worst, e)
    return worst


def stabilization_k(data: LieRingData, levels: Sequence[int] = (1, 2, 3, 4, 5), group_budget: int = 0) -> StabilizationResult:
    """Empirical stabilisation constant from ``Der / Inn`` of ``L / p^i L`` across levels.

    ``k`` is the largest measured annihilator exponent, the least ``e`` with
    ``p^e Der`` inside ``Inn``, so that ``p^k H^1 = 0`` at every tested level.
    The table also lists the order exponent of ``Der/Inn``; the verdict asks
    both columns to agree over the last three levels. With ``group_budget > 0`` the finite-quotient ``H^1(U_i, L/p^i L)``
    is added for levels whose group fits the budget.
    """
    rows = []
    for i in levels:
        D = derivations(ReducedLieRing(data, i))
        rows.append((i, D.der_order_exp, D.inn_order_exp, D.h1_order_exp, _annihilator_exp(D), "lie-der-inn"))
    tails = [r[3] for r in rows][-3:], [r[4] for r in rows][-3:]
    stabilizes = all(len(t) == 3 and len(set(t)) == 1 for t in tails)
    group_rows = []
    if group_budget:
        from .cohomology import adjoint_action, z1_space

        s, ok = uniformity(data)
        if ok:
            for i in levels:
                if data.prime ** (data.rank * i) > group_budget:
                    break
                G = lazard_group(data, i)
                group_rows.append((i, i, z1_space(adjoint_action(G, i)).h1_exp))
    return StabilizationResult(max(r[4] for r in rows), tuple(levels), stabilizes, tuple(rows), tuple(group_rows))


# --- the bound chain -------------------------------------------------------------------


@dataclass(frozen=True)
class LevelBound:
    i: int
    group_exp: int            # |U_i| = p^(d i)
    inn_exp_bound: int        # |Inn(U_i)| <= p^((d - z) i)
    aut_bound: int | None     # D * p^((d - z) i), when D is known
    exact_aut: int | None = None

    @property
    def dominates(self) -> bool | None:
        if self.exact_aut is None or self.aut_bound is None:
            return None
        return self.exact_aut <= self.aut_bound


@dataclass(frozen=True)
class BoundReport:
    d: int
    z: int
    z_window: tuple
    k: int
    k_source: str
    p: int | None
    aut_uk: int | None
    aut_uk_method: str
    kernel_bound_exp: int
    D: int | None
    per_level: tuple
    ratio_exponent: Fraction
    theorem_holds: bool
    refusals: tuple = ()
    caveats: tuple = ()

    def D_text(self) -> str:
        base = "p" if self.p is None else str(self.p)
        aut = "|Aut(U_k)|" if self.aut_uk is None else str(self.aut_uk)
        return f"{aut} * {base}^{self.kernel_bound_exp}"

    def chain_text(self) -> list[str]:
        base = "p" if self.p is None else str(self.p)
        lines = [
            f"|ker rho_(i,i-k)| <= {base}^(d^2 k) = {base}^{self.kernel_bound_exp}",
            f"|Aut(U_i) : Inn(U_i)| <= |Aut(U_k)| * |ker rho_(i,i-k)| <= D = {self.D_text()}",
        ]
        for row in self.per_level:
            bound = "D" if row.aut_bound is None else str(row.aut_bound)
            lines.append(
                f"i={row.i}: |U_i| = {base}^{row.group_exp}, |Inn(U_i)| <= {base}^{row.inn_exp_bound}, "
                f"|Aut(U_i)| <= D * {base}^{row.inn_exp_bound}" + ("" if row.aut_bound is None else f" = {bound}")
            )
        if self.theorem_holds:
            lines.append(f"limsup |Aut(U_i)| / |U_i|^({self.ratio_exponent}) < infinity")
        else:
            lines.append("theorem-style conclusion withheld: " + "; ".join(self.refusals))
        return lines

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "z": {"value": self.z, "window": list(self.z_window), "method": "empirical" if self.z_window else "supplied"},
            "k": {"value": self.k, "source": self.k_source, "method": "empirical" if self.k_source == "stabilization" else "supplied"},
            "p": self.p,
            "autUk": {"value": self.aut_uk, "method": self.aut_uk_method},
            "kernelBoundExp": self.kernel_bound_exp,
            "D": {"value": self.D, "text": self.D_text()},
            "perLevel": [
                {
                    "i": r.i,
                    "groupExp": r.group_exp,
                    "innExpBound": r.inn_exp_bound,
                    "autBound": r.aut_bound,
                    "exactAut": r.exact_aut,
                    "dominates": r.dominates,
                }
                for r in self.per_level
            ],
            "ratioExponent": f"{self.ratio_exponent.numerator}/{self.ratio_exponent.denominator}",
            "theoremHolds": self.theorem_holds,
            "refusals": list(self.refusals),
            "caveats": list(self.caveats),
            "chain": self.chain_text(),
        }


def bound_chain(d: int, z: int, k: int, i_max: int, p: int | None = None, aut_uk: int | None = None,
                exact: dict | None = None, z_window: tuple = (), k_source: str = "supplied",
                aut_uk_method: str = "unavailable", refusals: Sequence[str] = (),
                caveats: Sequence[str] = ()) -> BoundReport:
    """The inequality chain from ``(d, z, k, |Aut(U_k)|)``; ``p`` and ``aut_uk`` may stay symbolic."""
    if not 0 <= z <= d:
        raise ValueError("need 0 <= z <= d")
    kernel = d * d * k
    D = None if aut_uk is None or p is None else aut_uk * p**kernel
    exact = exact or {}
    rows = []
    for i in range(1, i_max + 1):
        bound = None if D is None else D * p ** ((d - z) * i)
        rows.append(LevelBound(i, d * i, (d - z) * i, bound, exact.get(i)))
    refusals = list(refusals)
    if z == d:
        refusals.append("z = d: the center is everything, so the ratio exponent is 0 and Inn gives no growth")
    return BoundReport(d, z, tuple(z_window), k, k_source, p, aut_uk, aut_uk_method, kernel, D, tuple(rows),
                       Fraction(d - z, d), not refusals, tuple(refusals), tuple(caveats))


def bound_report(data: LieRingData, k: int | None = None, i_max: int = 4, levels: Sequence[int] = (1, 2, 3, 4, 5),
                 aut_budget: int = DEFAULT_AUT_BUDGET, exact_levels: Sequence[int] = (),
                 node_budget: int | None = DEFAULT_NODE_BUDGET) -> BoundReport:
    """Full pipeline: z from the center, k from stabilisation (unless given), ``|Aut(U_k)|`` by brute force."""
    rep = validate(data)
    if not rep.valid:
        raise UniformityError(f"ring fails the Jacobi identity on {rep.first_violation}")
    s, uniform = uniformity(data)
    if not uniform:
        raise UniformityError("ring is not uniform; the correspondence does not apply")
    d, p = data.rank, data.prime
    table = center_rank_table(data)
    z = table[-1][1]
    caveats = [f"z estimated from center pivots at precisions {[t for t, _ in table]}"]
    if len({c for _, c in table}) != 1:
        caveats.append("center rank estimate not yet stable over the window")
    refusals = []
    stab = stabilization_k(data, levels)
    if k is None:
        k = stab.k
        k_source = "stabilization"
        caveats.append(f"k is empirical over levels {list(levels)}")
    else:
        k_source = "supplied"
    if not stab.stabilizes:
        refusals.append(
            "Der/Inn does not stabilize over the tested levels, so the hypothesis that all derivations are inner fails"
        )
    aut_uk, method = None, "unavailable"
    if k >= 1:
        try:
            aut_uk = aut_bruteforce(lazard_group(data, k), aut_budget, node_budget=node_budget).order
            method = "exact"
        except BudgetExceeded as exc:
            caveats.append(f"|Aut(U_k)| unavailable: {exc}")
    else:
        aut_uk, method = 1, "exact"
    exact = {}
    for i in exact_levels:
        try:
            exact[i] = aut_bruteforce(lazard_group(data, i), aut_budget, node_budget=node_budget).order
        except BudgetExceeded as exc:
            caveats.append(f"|Aut(U_{i})| not brute-forced: {exc}")
    return bound_chain(d, z, k, i_max, p, aut_uk, exact, tuple(t for t, _ in table), k_source, method,
                       refusals, caveats)


# --- totient comparison ----------------------------------------------------------------


def totient(p: int, n: int) -> int:
    """``phi(p^n)``, with ``phi(1) = 1``."""
    return 1 if n == 0 else p**n - p ** (n - 1)


@dataclass(frozen=True)
class TotientRatio:
    ratio: Fraction
    power_ratio: Fraction | None    # (|Aut| / phi^e)^d with e = (d - z)/d, kept exact
    root: int | None
    approx: float | None

    def to_dict(self) -> dict:
        return {
            "ratio": f"{self.ratio.numerator}/{self.ratio.denominator}",
            "powerRatio": None if self.power_ratio is None else f"{self.power_ratio.numerator}/{self.power_ratio.denominator}",
            "root": self.root,
            "approx": self.approx,
        }


def totient_ratio(p: int, order_exp: int, aut_order: int, d: int | None = None, z: int | None = None) -> TotientRatio:
    """``|Aut| / phi(|G|)`` and, when ``d, z`` are given, ``|Aut| / phi(|G|)^((d-z)/d)``.

    The second ratio is irrational in general, so it is returned exactly as
    its ``d``-th power ``|Aut|^d / phi^(d-z)`` together with a float.
    """
    phi = totient(p, order_exp)
    ratio = Fraction(aut_order, phi)
    if d is None or z is None:
        return TotientRatio(ratio, None, None, None)
    power = Fraction(aut_order**d, phi ** (d - z))
    approx = math.exp(math.log(aut_order) - (d - z) / d * math.log(phi))
    return TotientRatio(ratio, power, d, approx)
