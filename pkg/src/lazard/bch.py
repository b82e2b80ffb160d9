"""Baker-Campbell-Hausdorff series on two generators in a Hall basis.

Hall words on the letters ``a < b`` are generated degree by degree. A bracket
``[u, v]`` of Hall words is itself a Hall word when ``u < v`` and either ``v``
is a letter or the left factor of ``v`` is ``<= u``; the order is the order of
generation, which is graded by degree. This gives, for instance, the degree 3
words ``[a,[a,b]]`` and ``[b,[a,b]]``.

The series itself is produced by Varadarajan's recursion for the homogeneous
components ``Z_n`` of ``log(exp(a) exp(b))``, carried out with exact
rationals inside the free Lie algebra. Expanding Hall polynomials into the
free associative algebra gives an independent route to the same numbers, see
:func:`associative_bch`.

Evaluation in a Lie ring over ``Z/p^k`` keeps track of ``p`` in the
denominators: a degree ``n`` term is an ``(n-1)``-fold bracket, so when every
bracket lies in ``p^s L`` the term is divisible by ``p^((n-1)s)`` before the
coefficient is applied.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DenominatorError, UniformityError
from .residue import to_residue, unit_part, vp, vp_fraction

__all__ = [
    "HallWord",
    "BchSeries",
    "TruncationCertificate",
    "hall_basis",
    "hall_word",
    "bch_series",
    "truncation_degree",
    "lazard_bound",
    "evaluate_bch",
    "BchEvaluator",
    "expand_word",
    "associative_bch",
    "series_to_associative",
    "SCAN_WINDOW",
]

SCAN_WINDOW = 20


class _HallRegistry:
    """Hall words in generation order, extended on demand."""

    def __init__(self):
        self.trees: list = ["a", "b"]
        self.index: dict = {"a": 0, "b": 1}
        self.degree: list[int] = [1, 1]
        self.by_degree: list[list[int]] = [[], [0, 1]]

    @property
    def max_degree(self) -> int:
        return len(self.by_degree) - 1

    def extend(self, D: int) -> None:
        for n in range(self.max_degree + 1, D + 1):
            new = []
            for i in range(1, n):
                for u in self.by_degree[i]:
                    for v in self.by_degree[n - i]:
                        if u >= v:
                            continue
                        tv = self.trees[v]
                        if isinstance(tv, tuple) and self.index[tv[0]] > u:
                            continue
                        new.append((self.trees[u], tv))
            # sort within the degree for a deterministic, readable order
            new.sort(key=lambda t: (self.index[t[0]], self.index[t[1]]))
            ids = []
            for t in new:
                self.index[t] = len(self.trees)
                ids.append(len(self.trees))
                self.trees.append(t)
                self.degree.append(n)
            self.by_degree.append(ids)

    def is_hall_pair(self, u: int, v: int) -> bool:
        if u >= v:
            return False
        tv = self.trees[v]
        return not isinstance(tv, tuple) or self.index[tv[0]] <= u

    def pair(self, u: int, v: int) -> int:
        t = (self.trees[u], self.trees[v])
        if t not in self.index:
            self.extend(self.degree[u] + self.degree[v])
        return self.index[t]


_HALL = _HallRegistry()


def _tree_str(t) -> str:
    if isinstance(t, str):
        return t
    return f"[{_tree_str(t[0])},{_tree_str(t[1])}]"


@dataclass(frozen=True)
class HallWord:
    tree: object
    degree: int

    @property
    def index(self) -> int:
        return _HALL.index[self.tree]

    @property
    def left(self) -> "HallWord | None":
        if isinstance(self.tree, str):
            return None
        return _word(_HALL.index[self.tree[0]])

    @property
    def right(self) -> "HallWord | None":
        if isinstance(self.tree, str):
            return None
        return _word(_HALL.index[self.tree[1]])

    def __str__(self) -> str:
        return _tree_str(self.tree)

    def __lt__(self, other: "HallWord") -> bool:
        return self.index < other.index


def _word(i: int) -> HallWord:
    return HallWord(_HALL.trees[i], _HALL.degree[i])


def _parse(text: str):
    text = text.replace(" ", "")

    def rec(pos):
        if text[pos] in "ab":
            return text[pos], pos + 1
        assert text[pos] == "[", text
        left, pos = rec(pos + 1)
        assert text[pos] == ",", text
        right, pos = rec(pos + 1)
        assert text[pos] == "]", text
        return (left, right), pos + 1

    tree, end = rec(0)
    if end != len(text):
        raise ValueError(f"trailing characters in {text!r}")
    return tree


def _tree_degree(t) -> int:
    return 1 if isinstance(t, str) else _tree_degree(t[0]) + _tree_degree(t[1])


def hall_word(text: str) -> HallWord:
    """Look up a Hall word from its bracket notation, e.g. ``"[b,[a,b]]"``."""
    tree = _parse(text)
    _HALL.extend(_tree_degree(tree))
    if tree not in _HALL.index:
        raise ValueError(f"{text} is not a Hall word")
    return _word(_HALL.index[tree])


def hall_basis(D: int) -> dict[int, list[HallWord]]:
    """Hall words of degree ``1..D`` grouped by degree."""
    if D < 1:
        raise ValueError("degree must be at least 1")
    _HALL.extend(D)
    return {n: [_word(i) for i in _HALL.by_degree[n]] for n in range(1, D + 1)}


# --- free Lie algebra arithmetic on Hall coordinates -------------------------

LieElt = dict  # Hall index -> Fraction


@lru_cache(maxsize=None)
def _bracket_basis(u: int, v: int) -> tuple:
    """``[u, v]`` of two Hall words, rewritten in the Hall basis."""
    if u == v:
        return ()
    if u > v:
        return tuple((w, -c) for w, c in _bracket_basis(v, u))
    if _HALL.is_hall_pair(u, v):
        return ((_HALL.pair(u, v), Fraction(1)),)
    # v = [v1, v2] with v1 > u: Jacobi gives [[u,v1],v2] + [v1,[u,v2]]
    v1 = _HALL.index[_HALL.trees[v][0]]
    v2 = _HALL.index[_HALL.trees[v][1]]
    out: dict = {}
    for w, c in _bracket_basis(u, v1):
        for w2, c2 in _bracket_basis(w, v2):
            out[w2] = out.get(w2, 0) + c * c2
    for w, c in _bracket_basis(u, v2):
        for w2, c2 in _bracket_basis(v1, w):
            out[w2] = out.get(w2, 0) + c * c2
    return tuple((w, c) for w, c in sorted(out.items()) if c)


def _lie_bracket(x: LieElt, y: LieElt, max_degree: int) -> LieElt:
    out: dict = {}
    for u, cu in x.items():
        du = _HALL.degree[u]
        for v, cv in y.items():
            if du + _HALL.degree[v] > max_degree:
                continue
            for w, c in _bracket_basis(u, v):
                out[w] = out.get(w, 0) + cu * cv * c
    return {w: c for w, c in out.items() if c}


def _bernoulli(n: int) -> Fraction:
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(Fraction(_binom(m + 1, j)) * B[j] for j in range(m)) / (m + 1))
    return B[n]


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def _compositions(n: int, parts: int):
    for cuts in itertools.combinations(range(1, n), parts - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


@lru_cache(maxsize=None)
def _bch_components(D: int) -> tuple:
    """Homogeneous components ``Z_1..Z_D`` as Lie elements."""
    if D == 1:
        return ({0: Fraction(1), 1: Fraction(1)},)
    Z = list(_bch_components(D - 1))
    _HALL.extend(D)
    n = D - 1
    a_plus_b = {0: Fraction(1), 1: Fraction(1)}
    a_minus_b = {0: Fraction(1), 1: Fraction(-1)}
    nested: dict = {(): a_plus_b}

    def nest(ks):
        # [Z_k1, [Z_k2, ... [Z_km, a+b]]]
        if ks not in nested:
            nested[ks] = _lie_bracket(Z[ks[0] - 1], nest(ks[1:]), D)
        return nested[ks]

    total = {w: c / 2 for w, c in _lie_bracket(a_minus_b, Z[n - 1], D).items()}
    for p in range(1, n // 2 + 1):
        K = _bernoulli(2 * p) / _factorial(2 * p)
        for ks in _compositions(n, 2 * p):
            for w, c in nest(ks).items():
                total[w] = total.get(w, 0) + K * c
    Z.append({w: c / (n + 1) for w, c in sorted(total.items()) if c})
    return tuple(Z)


def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


@dataclass(frozen=True)
class BchSeries:
    """Exact BCH coefficients on all Hall words of degree ``<= max_degree``.

    Words with coefficient zero are not stored.
    """

    max_degree: int
    coefficients: tuple[tuple[HallWord, Fraction], ...]

    def coefficient(self, word) -> Fraction:
        if isinstance(word, str):
            word = hall_word(word)
        for w, c in self.coefficients:
            if w == word:
                return c
        return Fraction(0)

    def terms(self, degree: int | None = None):
        return [(w, c) for w, c in self.coefficients if degree is None or w.degree == degree]

    def as_dict(self) -> dict[str, Fraction]:
        return {str(w): c for w, c in self.coefficients}

    def truncate(self, degree: int) -> "BchSeries":
        return BchSeries(degree, tuple((w, c) for w, c in self.coefficients if w.degree <= degree))


def bch_series(D: int) -> BchSeries:
    """BCH series through degree ``D``."""
    if D < 1:
        raise ValueError("degree must be at least 1")
    comps = _bch_components(D)
    coeffs = []
    for Zn in comps:
        for w in sorted(Zn):
            coeffs.append((_word(w), Zn[w]))
    return BchSeries(D, tuple(coeffs))


# --- free associative algebra (independent check) ----------------------------


@lru_cache(maxsize=None)
def _expand_tree(tree) -> tuple:
    if isinstance(tree, str):
        return ((tree, 1),)
    left = _expand_tree(tree[0])
    right = _expand_tree(tree[1])
    out: dict = {}
    for x, cx in left:
        for y, cy in right:
            out[x + y] = out.get(x + y, 0) + cx * cy
            out[y + x] = out.get(y + x, 0) - cx * cy
    return tuple(sorted((w, c) for w, c in out.items() if c))


def expand_word(word: HallWord) -> dict[str, int]:
    """A Hall polynomial as an integer combination of words in ``a``, ``b``."""
    return dict(_expand_tree(word.tree))


def _assoc_mul(x: dict, y: dict, D: int) -> dict:
    out: dict = {}
    for u, cu in x.items():
        for v, cv in y.items():
            if len(u) + len(v) <= D:
                out[u + v] = out.get(u + v, 0) + cu * cv
    return {w: c for w, c in out.items() if c}


def associative_bch(D: int) -> dict[str, Fraction]:
    """``log(exp(a) exp(b))`` in the free associative algebra, truncated at degree ``D``."""

    def exp_letter(x):
        return {x * n: Fraction(1, _factorial(n)) for n in range(D + 1)}

    prod = _assoc_mul(exp_letter("a"), exp_letter("b"), D)
    X = {w: c for w, c in prod.items() if w}
    out: dict = {}
    power = {"": Fraction(1)}
    for n in range(1, D + 1):
        power = _assoc_mul(power, X, D)
        sign = Fraction((-1) ** (n + 1), n)
        for w, c in power.items():
            out[w] = out.get(w, 0) + sign * c
    return {w: c for w, c in out.items() if c}


def series_to_associative(series: BchSeries) -> dict[str, Fraction]:
    out: dict = {}
    for w, c in series.coefficients:
        for word, e in expand_word(w).items():
            out[word] = out.get(word, 0) + c * e
    return {w: c for w, c in out.items() if c}


# --- truncation ---------------------------------------------------------------


def lazard_bound(n: int, p: int) -> int:
    """Lower bound ``-floor((n-1)/(p-1))`` on the p-adic valuation of degree ``n`` coefficients."""
    return -((n - 1) // (p - 1))


@dataclass(frozen=True)
class TruncationCertificate:
    """Least degree after which every BCH term vanishes mod ``p^k``.

    ``margins`` lists ``(n, coefficient valuation, (n-1)*s + valuation, source)``
    for every scanned degree, where ``source`` is ``"exact"`` when the
    valuation was read off the computed coefficients and ``"lazard"`` when
    the general denominator bound was used.
    """

    p: int
    k: int
    s: int
    degree: int
    scan_window: int
    margins: tuple[tuple[int, float, float, str], ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "s": self.s,
            "degree": self.degree,
            "scanWindow": self.scan_window,
            "margins": [
                {"n": n, "coeffValuation": _num(v), "termValuation": _num(m), "source": src}
                for n, v, m, src in self.margins
            ],
        }


def _num(x):
    return "inf" if x == float("inf") else int(x)


EXACT_VALUATION_DEGREE = 10


def _min_coefficient_valuation(n: int, p: int):
    vals = [vp_fraction(c, p) for _, c in bch_series(n).terms(n)]
    return min(vals) if vals else float("inf")


def check_uniform_params(p: int, s: int) -> None:
    if p == 2 and s < 2:
        raise UniformityError("p = 2 needs bracket valuation s >= 2")
    if s < 1:
        raise UniformityError("bracket valuation s must be at least 1")


def truncation_degree(p: int, k: int, s: int, exact_through: int = EXACT_VALUATION_DEGREE) -> TruncationCertificate:
    """Certify a BCH truncation degree for rings with ``[L, L] <= p^s L`` mod ``p^k``."""
    check_uniform_params(p, s)
    if k < 1:
        raise ValueError("precision k must be at least 1")

    cache: dict = {}

    def margin(n):
        if n not in cache:
            if n <= exact_through:
                v, src = _min_coefficient_valuation(n, p), "exact"
            else:
                v, src = lazard_bound(n, p), "lazard"
            cache[n] = (n, v, (n - 1) * s + v, src)
        return cache[n]

    D = 1
    while any(margin(n)[2] < k for n in range(D + 1, D + SCAN_WINDOW + 1)):
        D += 1
    rows = tuple(margin(n) for n in range(2, D + SCAN_WINDOW + 1))
    return TruncationCertificate(p, k, s, D, SCAN_WINDOW, rows)


# --- evaluation in a Lie ring ---------------------------------------------------


def _bracket_int(x, y, sparse):
    """Integer bracket from ``(i, j, l, c)`` structure constants with ``i < j``."""
    out = None
    for i, j, l, c in sparse:
        t = x[i] * y[j] - x[j] * y[i]
        if t:
            if out is None:
                out = [0] * len(x)
            out[l] += c * t
    return out


class BchEvaluator:
    """Compiled evaluation of a truncated BCH series in a fixed ring.

    ``ring`` needs ``p``, ``k``, ``s``, ``dim`` and ``sparse`` (nonzero
    structure constants as ``(i, j, l, c)`` with ``i < j``).
    """

    def __init__(self, series: BchSeries, ring, degree: int | None = None):
        self.p, self.k, self.dim = ring.p, ring.k, ring.dim
        self.sparse = tuple(ring.sparse)
        self.mod = self.p**self.k
        if degree is None:
            degree = series.max_degree
        if degree > series.max_degree:
            raise ValueError("series shorter than the requested degree")
        s = ring.s
        terms = []
        extra = 0
        for w, c in series.coefficients:
            if w.degree > degree:
                continue
            if self.sparse == () and w.degree > 1:
                continue
            v, u = unit_part(c.numerator, self.p)
            dv, du = unit_part(c.denominator, self.p)
            shift = v - dv
            if shift < 0 and (w.degree - 1) * s < -shift:
                raise DenominatorError(
                    f"coefficient {c} of {w} has p-adic valuation {shift} but the ring only "
                    f"guarantees {(w.degree - 1) * s} from brackets"
                )
            extra = max(extra, -shift)
            terms.append((w.index, shift, to_residue(Fraction(u, du), self.p, self.k)))
        self.work = self.p ** (self.k + extra)
        self.terms = terms
        need = set()
        for idx, _, _ in terms:
            stack = [idx]
            while stack:
                i = stack.pop()
                if i in need:
                    continue
                need.add(i)
                t = _HALL.trees[i]
                if isinstance(t, tuple):
                    stack.append(_HALL.index[t[0]])
                    stack.append(_HALL.index[t[1]])
        self.order = sorted(need)
        self.children = {
            i: (_HALL.index[_HALL.trees[i][0]], _HALL.index[_HALL.trees[i][1]])
            for i in self.order
            if isinstance(_HALL.trees[i], tuple)
        }

    def _finish(self, vals: dict, zero):
        mod = self.mod
        out = [0] * self.dim
        for idx, shift, u in self.terms:
            val = vals.get(idx)
            if val is None:
                continue
            if shift < 0:
                q = self.p ** (-shift)
                if any(c % q for c in val):
                    raise DenominatorError("bracket value not divisible by the coefficient denominator")
                for l in range(self.dim):
                    out[l] += (val[l] // q) * u
            else:
                f = u * self.p**shift
                for l in range(self.dim):
                    out[l] += val[l] * f
        return tuple(c % mod for c in out)

    def __call__(self, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
        W = self.work
        vals: dict = {}
        for i in self.order:
            if i == 0:
                vals[0] = [c % W for c in x]
            elif i == 1:
                vals[1] = [c % W for c in y]
            else:
                l, r = self.children[i]
                if l not in vals or r not in vals:
                    continue
                z = _bracket_int(vals[l], vals[r], self.sparse)
                if z is not None:
                    z = [c % W for c in z]
                    if any(z):
                        vals[i] = z
        return self._finish(vals, None)

    def batch(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Vectorised evaluation on rows of ``X`` and ``Y`` (int64)."""
        W = self.work
        if W >= 1 << 29:
            out = [self(x, y) for x, y in zip(X.tolist(), Y.tolist())]
            return np.array(out, dtype=np.int64).reshape(len(out), self.dim)
        X = _reduced(np.asarray(X, dtype=np.int64), W)
        Y = _reduced(np.asarray(Y, dtype=np.int64), W)
        n = X.shape[0]
        # with W < 2^20 a bracket term times a reduced constant stays below 2^62,
        # so one reduction per term suffices
        lazy = W < 1 << 20
        # small moduli fit every intermediate in int32, which halves memory traffic
        dt = np.int32 if W**3 * (len(self.terms) + 2) < 1 << 31 else np.int64
        # one contiguous array per coordinate; None marks an all-zero coordinate
        vals = {0: [X[:, c].astype(dt) for c in range(self.dim)],
                1: [Y[:, c].astype(dt) for c in range(self.dim)]}
        for i in self.order:
            if i < 2:
                continue
            l, r = self.children[i]
            if l not in vals or r not in vals:
                continue
            A, B = vals[l], vals[r]
            Z = [None] * self.dim
            for a, b, t, c in self.sparse:
                if (A[a] is None or B[b] is None) and (A[b] is None or B[a] is None):
                    continue
                if A[a] is not None and B[b] is not None:
                    term = A[a] * B[b]
                    if A[b] is not None and B[a] is not None:
                        term -= A[b] * B[a]
                else:
                    term = -(A[b] * B[a])
                if not lazy:
                    term %= W
                term *= c % W
                if Z[t] is not None:
                    term += Z[t]
                term %= W
                Z[t] = term
            Z = [None if z is None or not z.any() else z for z in Z]
            if any(z is not None for z in Z):
                vals[i] = Z
        out = np.zeros((self.dim, n), dtype=dt)
        mod = self.mod
        for idx, shift, u in self.terms:
            V = vals.get(idx)
            if V is None:
                continue
            for c, col in enumerate(V):
                if col is None:
                    continue
                if shift < 0:
                    q = self.p ** (-shift)
                    if (col % q).any():
                        raise DenominatorError("bracket value not divisible by the coefficient denominator")
                    out[c] += (col // q) * u
                else:
                    out[c] += col * (u * self.p**shift % mod)
                if not lazy:
                    out[c] %= mod
        out %= mod
        return out.T.astype(np.int64)


def _reduced(X: np.ndarray, W: int) -> np.ndarray:
    if X.size and (X.min() < 0 or X.max() >= W):
        return X % W
    return X


def evaluate_bch(series: BchSeries, ring, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    """``log(exp(x) exp(y))`` in ``ring`` (all arithmetic mod ``p^k``).

    The series must reach the certified truncation degree for the ring's
    ``(p, k, s)``.
    """
    cert = truncation_degree(ring.p, ring.k, ring.s)
    if series.max_degree < cert.degree:
        raise ValueError(f"series degree {series.max_degree} below certified degree {cert.degree}")
    return BchEvaluator(series, ring, cert.degree)(x, y)
