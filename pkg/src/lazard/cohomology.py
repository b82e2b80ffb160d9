"""Degree-one cohomology of the finite quotients ``U_m``.

The group is written multiplicatively and the module additively: a
1-cocycle satisfies ``c(uv) = c(u) + u.c(v)`` and the coboundary of ``v`` is
``u -> u.v - v``. The multiplicative ``c(u) = phi(u) u^-1`` inside a
section ``U^{p^i} / U^{p^j}`` becomes, after the rescaling ``p^i y -> y``,
an additive cocycle with values in ``L / p^{j-i} L``.

Cocycles are parameterised by their values on a generating set. Walking a
breadth-first spanning tree of the Cayley graph expresses ``c(u)`` as a
linear function ``L_u`` of those values; every non-tree edge gives a linear
constraint, and ``Z^1`` is the common kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, LazardError, ModulusMismatch, WindowError
from .group import (
    Endomorphism,
    LazardGroup,
    _rank_mod_p,
    inner_automorphism,
    section_action_matrices,
)
from .liering import INFINITE_VALUATION
from .residue import HowellForm, ResidueMatrix, howell_span, solve_linear, vector_valuation

__all__ = [
    "GAction",
    "Cocycle",
    "CocycleSpace",
    "ActionError",
    "section_action",
    "adjoint_action",
    "trivial_action",
    "coboundary",
    "z1_space",
    "cocycle_from_values",
    "cocycle_split",
    "Correction",
    "correct_automorphism",
]

DEFAULT_CLOSURE_BUDGET = 1 << 16


class ActionError(LazardError, ValueError):
    """The matrices do not define an action of the group."""


@dataclass(frozen=True)
class _Closure:
    elements: np.ndarray          # (N, d) group elements in BFS order
    index: dict                   # encoded element -> position
    parent: np.ndarray            # position of the tree parent (-1 for the identity)
    via: np.ndarray               # generator used on the tree edge
    edges: tuple                  # non-tree edges (u, g, w) with w = u * g
    acts: np.ndarray              # (N, n, n) action matrices A_u


@dataclass(frozen=True)
class GAction:
    """``group`` acting on ``(Z/p^t)^n`` through ``matrices[g]`` for each generator ``g``.

    ``g.v = A_g v`` with column vectors.
    """

    group: LazardGroup
    generators: tuple
    p: int
    t: int
    n: int
    matrices: tuple
    label: str = ""
    budget: int = DEFAULT_CLOSURE_BUDGET
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def modulus(self) -> int:
        return self.p**self.t

    @property
    def module_size(self) -> int:
        return self.modulus**self.n

    def closure(self) -> _Closure:
        """Breadth-first closure over the Cayley graph, checking that the action is well defined."""
        if "closure" in self._cache:
            return self._cache["closure"]
        G = self.group
        if G.order > self.budget:
            raise BudgetExceeded(f"group of order {G.order} exceeds closure budget {self.budget}", G.order, self.budget)
        mod = self.modulus
        mats = [np.array(A, dtype=np.int64) % mod for A in self.matrices]
        for A in mats:
            if _rank_mod_p(A.tolist(), self.p) < self.n:
                raise ActionError("action matrix not invertible")
        gens = np.array(self.generators, dtype=np.int64).reshape(len(self.generators), G.dim)
        order = [G.identity]
        index = {int(G.encode(np.array(G.identity))): 0}
        parent, via = [-1], [-1]
        acts = [np.eye(self.n, dtype=np.int64)]
        edges = []
        head = 0
        while head < len(order):
            frontier = np.array(order[head:], dtype=np.int64).reshape(-1, G.dim)
            start = head
            head = len(order)
            for gi in range(len(gens)):
                prods = G.mul_batch(frontier, np.repeat(gens[gi:gi + 1], len(frontier), axis=0))
                keys = G.encode(prods)
                for off, key in enumerate(keys.tolist()):
                    u = start + off
                    A = acts[u] @ mats[gi] % mod
                    w = index.get(key)
                    if w is None:
                        index[key] = len(order)
                        order.append(tuple(prods[off].tolist()))
                        parent.append(u)
                        via.append(gi)
                        acts.append(A)
                    else:
                        if not np.array_equal(acts[w], A):
                            raise ActionError(f"relation not respected at element {order[w]}")
                        edges.append((u, gi, w))
        cl = _Closure(np.array(order, dtype=np.int64), index, np.array(parent), np.array(via), tuple(edges),
                      np.array(acts, dtype=np.int64))
        self._cache["closure"] = cl
        return cl

    def act(self, u, v) -> tuple[int, ...]:
        cl = self.closure()
        A = cl.acts[cl.index[int(self.group.encode(np.array(u)))]]
        return tuple((A @ np.array(v, dtype=np.int64) % self.modulus).tolist())


def trivial_action(G: LazardGroup, p: int, t: int, n: int, generators=None) -> GAction:
    gens = tuple(G.generators() if generators is None else generators)
    eye = tuple(tuple(int(r == c) for c in range(n)) for r in range(n))
    return GAction(G, gens, p, t, n, tuple(eye for _ in gens), "trivial")


def section_action(G: LazardGroup, i: int, j: int, generators=None) -> GAction:
    """Conjugation action on ``U^{p^i} / U^{p^j}``, transported to ``L / p^{j-i} L``."""
    if not 0 <= i <= j <= G.m or j > 2 * i + 1:
        raise WindowError(f"section ({i}, {j}) outside the window")
    gens = tuple(G.generators() if generators is None else generators)
    t = j - i
    mats = section_action_matrices(G, t, gens)
    return GAction(G, gens, G.p, t, G.dim, tuple(mats), f"section({i},{j})")


def adjoint_action(G: LazardGroup, t: int, generators=None) -> GAction:
    """``U_m`` acting on ``L / p^t L`` by ``exp(ad u)``; well defined for ``t <= m + s``."""
    s = G.ring.s
    if s != INFINITE_VALUATION and t > G.m + s:
        raise ValueError(f"adjoint action of U_{G.m} on L/p^{t}L is not defined (needs t <= {G.m + s})")
    gens = tuple(G.generators() if generators is None else generators)
    mats = section_action_matrices(G, t, gens)
    return GAction(G, gens, G.p, t, G.dim, tuple(mats), f"adjoint({t})")


# --- cocycles ------------------------------------------------------------------


@dataclass(frozen=True)
class Cocycle:
    """A crossed homomorphism given by generator values, with its closure table."""

    action: GAction = field(repr=False)
    values: tuple
    table: np.ndarray = field(compare=False, repr=False)

    def __call__(self, u) -> tuple[int, ...]:
        cl = self.action.closure()
        return tuple(self.table[cl.index[int(self.action.group.encode(np.array(u)))]].tolist())

    def flat(self) -> tuple[int, ...]:
        return tuple(c for v in self.values for c in v)

    def identity_failures(self, pairs: int | None = None, seed: int = 0) -> int:
        """Count pairs with ``c(uv) != c(u) + u.c(v)``; all pairs when ``pairs`` is None."""
        act = self.action
        cl = act.closure()
        G = act.group
        mod = act.modulus
        N = len(cl.elements)
        if pairs is None:
            U = np.repeat(np.arange(N), N)
            V = np.tile(np.arange(N), N)
        else:
            rng = np.random.default_rng(seed)
            U = rng.integers(0, N, pairs)
            V = rng.integers(0, N, pairs)
        bad = 0
        step = 1 << 16
        lookup = np.full(G.order, -1, dtype=np.int64)
        for key, pos in cl.index.items():
            lookup[key] = pos
        for s0 in range(0, len(U), step):
            u, v = U[s0:s0 + step], V[s0:s0 + step]
            w = lookup[G.encode(G.mul_batch(cl.elements[u], cl.elements[v]))]
            if (w < 0).any():
                raise ActionError("closure is not a subgroup")
            rhs = (self.table[u] + np.einsum("kij,kj->ki", cl.acts[u], self.table[v])) % mod
            bad += int((self.table[w] != rhs).any(axis=1).sum())
        return bad


def _linear_maps(action: GAction) -> np.ndarray:
    """``L_u`` for every element: ``c(u) = L_u x`` with ``x`` the stacked generator values."""
    cl = action.closure()
    n, r = action.n, len(action.generators)
    mod = action.modulus
    L = np.zeros((len(cl.elements), n, n * r), dtype=np.int64)
    for w in range(1, len(cl.elements)):
        u, g = cl.parent[w], cl.via[w]
        L[w] = L[u]
        L[w][:, g * n:(g + 1) * n] = (L[w][:, g * n:(g + 1) * n] + cl.acts[u]) % mod
    return L


def cocycle_from_values(action: GAction, values: Sequence[Sequence[int]], check: bool = True) -> Cocycle:
    n, r, mod = action.n, len(action.generators), action.modulus
    x = np.array([int(c) % mod for v in values for c in v], dtype=np.int64)
    if len(x) != n * r:
        raise ModulusMismatch("need one module vector per generator")
    L = _maps(action)
    table = np.einsum("kij,j->ki", L, x) % mod
    c = Cocycle(action, tuple(tuple(int(a) for a in v) for v in np.array(x).reshape(r, n)), table)
    if check and not _edges_consistent(action, table, x):
        raise ValueError("generator values do not define a cocycle")
    return c


def _maps(action: GAction) -> np.ndarray:
    if "maps" not in action._cache:
        action._cache["maps"] = _linear_maps(action)
    return action._cache["maps"]


def _edges_consistent(action: GAction, table: np.ndarray, x: np.ndarray) -> bool:
    cl = action.closure()
    n, mod = action.n, action.modulus
    for u, g, w in cl.edges:
        if not np.array_equal(table[w], (table[u] + cl.acts[u] @ x[g * n:(g + 1) * n]) % mod):
            return False
    return True


def coboundary(action: GAction, v: Sequence[int]) -> Cocycle:
    """``u -> u.v - v``."""
    cl = action.closure()
    mod = action.modulus
    vv = np.array([int(c) % mod for c in v], dtype=np.int64)
    table = (np.einsum("kij,j->ki", cl.acts, vv) - vv) % mod
    values = []
    for A in action.matrices:
        values.append(tuple(((np.array(A, dtype=np.int64) @ vv - vv) % mod).tolist()))
    return Cocycle(action, tuple(values), table)


@dataclass(frozen=True)
class CocycleSpace:
    """``Z^1`` and ``B^1`` as spans of stacked generator values."""

    action: GAction = field(repr=False)
    z1: HowellForm
    b1: HowellForm
    z1_exp: int
    b1_exp: int
    h1_exp: int
    elements_closed: int
    constraints: int

    def to_dict(self) -> dict:
        return {
            "z1exp": self.z1_exp,
            "b1exp": self.b1_exp,
            "h1exp": self.h1_exp,
            "budgetUsed": self.elements_closed,
            "constraints": self.constraints,
        }


def _constraint_span(action: GAction) -> HowellForm:
    cl = action.closure()
    L = _maps(action)
    n, r, mod = action.n, len(action.generators), action.modulus
    rows = set()
    for u, g, w in cl.edges:
        D = L[w] - L[u]
        D[:, g * n:(g + 1) * n] -= cl.acts[u]
        for row in (D % mod).tolist():
            if any(row):
                rows.add(tuple(row))
    return howell_span(sorted(rows), action.p, action.t, n * r)


def z1_space(action: GAction) -> CocycleSpace:
    n, r = action.n, len(action.generators)
    N = n * r
    C = _constraint_span(action)
    if C.basis.nrows == 0:
        z1 = howell_span([tuple(int(a == b) for b in range(N)) for a in range(N)], action.p, action.t, N)
    else:
        M = ResidueMatrix.from_rows([tuple(row[c] for row in C.rows) for c in range(N)], action.p, action.t,
                                    C.basis.nrows)
        _, z1 = solve_linear(M, (0,) * C.basis.nrows)
    b1 = howell_span([coboundary_values(action, e) for e in _unit_vectors(n)], action.p, action.t, N)
    if not z1.contains_span(b1):
        raise ActionError("coboundaries are not cocycles; the action is inconsistent")
    return CocycleSpace(action, z1, b1, z1.order_exponent(), b1.order_exponent(),
                        z1.order_exponent() - b1.order_exponent(), len(action.closure().elements),
                        C.basis.nrows)


def _unit_vectors(n):
    return [tuple(int(a == b) for b in range(n)) for a in range(n)]


def coboundary_values(action: GAction, v) -> tuple[int, ...]:
    mod = action.modulus
    out = []
    for A in action.matrices:
        out.extend(((np.array(A, dtype=np.int64) @ np.array(v, dtype=np.int64) - np.array(v)) % mod).tolist())
    return tuple(out)


@dataclass(frozen=True)
class Split:
    c_prime: Cocycle
    v: tuple[int, ...]


def cocycle_split(space: CocycleSpace, c: Cocycle, B: HowellForm) -> Split | None:
    """Find ``v`` with ``c - dv`` valued in ``B``; ``None`` when no such ``v`` exists.

    The solution is the canonical Howell solution (reduced modulo the kernel).
    """
    action = space.action
    n, r, mod = action.n, len(action.generators), action.modulus
    if B.ncols != n or B.k != action.t:
        raise ModulusMismatch("submodule does not live in the action's module")
    if not space.z1.contains(c.flat()):
        raise ValueError("c is not a cocycle of this action")
    for A in action.matrices:
        for row in B.rows:
            img = tuple(int(x) for x in (np.array(A, dtype=np.int64) @ np.array(row, dtype=np.int64)) % mod)
            if not B.contains(img):
                raise ValueError("B is not invariant under the action")
    rows = [coboundary_values(action, e) for e in _unit_vectors(n)]
    for g in range(r):
        for brow in B.rows:
            rows.append(tuple(brow[a - g * n] if g * n <= a < (g + 1) * n else 0 for a in range(n * r)))
    M = ResidueMatrix.from_rows(rows, action.p, action.t, n * r)
    sol = solve_linear(M, c.flat())
    if sol is None:
        return None
    x, _ = sol
    v = tuple(x[:n])
    dv = coboundary(action, v)
    table = (c.table - dv.table) % mod
    prime = Cocycle(action, tuple(tuple((a - b) % mod for a, b in zip(cv, dvv)) for cv, dvv in zip(c.values, dv.values)), table)
    for row in table.tolist():
        if not B.contains(row):
            raise ArithmeticError("split cocycle left B on a closed-over element")
    return Split(prime, v)


# --- the correction step -----------------------------------------------------------


@dataclass(frozen=True)
class Correction:
    """Outcome of one correction step.

    When ``found`` is true, ``phi = inn_g o phi_prime`` and ``phi_prime`` is the
    identity modulo ``p^level``.
    """

    found: bool
    g: tuple[int, ...] | None
    phi_prime: Endomorphism | None
    level: int
    h1_exp: int | None = None
    note: str = ""


def _deviation_level(phi: Endomorphism) -> int:
    G = phi.group
    d = G.dim
    diff = [(phi.matrix[r][c] - int(r == c)) % G.modulus for r in range(d) for c in range(d)]
    return vector_valuation(diff, G.p, G.m)


def correct_automorphism(G: LazardGroup, phi: Endomorphism, k: int, measure_h1: bool = True,
                         samples: int = 2000) -> Correction:
    """Push an automorphism trivial on ``U_{m-1-k}`` one level deeper by an inner automorphism.

    Writes ``r = m - 1 - k``. The deviation ``phi - 1`` is ``p^r delta`` with
    ``delta`` taken mod ``p``. For ``g = p^a y`` with ``a = r - s`` we have
    ``Ad(g) = 1 + p^r ad'(y)`` mod ``p^(r+1)``, where ``ad' = ad / p^s``, so
    the witness solves the linear system ``ad'(y) = delta`` over ``Z/p``; the
    least solution is taken and the result is verified exactly.
    """
    if phi.group != G:
        raise ModulusMismatch("automorphism lives on a different group")
    m, p, d = G.m, G.p, G.dim
    r = m - 1 - k
    if r < 0:
        raise ValueError("need k <= m - 1")
    if not phi.is_bijective():
        raise ValueError("phi is not bijective")
    if not phi.preserves_bracket() or phi.homomorphism_failures(samples)[0]:
        raise ValueError("phi is not an automorphism")
    level = _deviation_level(phi)
    if level < r:
        raise ValueError(f"phi is only trivial modulo p^{level}, need p^{r}")
    if level >= r + 1:
        return Correction(True, G.identity, phi, r + 1, note="already trivial one level deeper")
    s = G.ring.s
    delta = [[((phi.matrix[a][b] - int(a == b)) // p**r) % p for b in range(d)] for a in range(d)]
    g = None
    if s != INFINITE_VALUATION and r >= s:
        a_exp = r - int(s)
        # column c of ad'(y) is [y, e_c] / p^s; linear in y
        rows = []
        for yi in range(d):
            e = tuple(int(t == yi) for t in range(d))
            cols = [tuple(v // p**int(s) for v in G.ring.base.bracket(e, f)) for f in G.generators()]
            rows.append(tuple(cols[c][rr] % p for rr in range(d) for c in range(d)))
        M = ResidueMatrix.from_rows(rows, p, 1, d * d)
        sol = solve_linear(M, tuple(delta[rr][c] for rr in range(d) for c in range(d)))
        if sol is not None:
            y, _ = sol
            g = tuple(p**a_exp * yi % G.modulus for yi in y)
    if g is not None:
        inn_inv = inner_automorphism(G, G.inv(g))
        phi_prime = inn_inv.compose(phi)
        if _deviation_level(phi_prime) >= r + 1:
            return Correction(True, g, phi_prime, r + 1)
    h1 = None
    note = "no inner witness one level deeper"
    if measure_h1:
        try:
            h1 = z1_space(section_action(G, r, m) if m <= 2 * r + 1 else adjoint_action(G, m - r)).h1_exp
        except (BudgetExceeded, ValueError) as exc:
            note += f"; H^1 not measured ({exc})"
    return Correction(False, None, None, r + 1, h1, note)
