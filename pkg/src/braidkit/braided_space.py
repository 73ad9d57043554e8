"""The braided covector algebra generated by ``x_i`` with ``x_1 x_2 = x_2 x_1 R'``.

Degree-``m`` words are tuples of indices.  Relations are row reduced with the
pivot preference of :func:`pivot_key`; the basis words are the complement of the
pivots.  The degree-2 reduction gives rewriting rules; these are used by memoized
rewriting as long as they provably annihilate the relation span of each degree
(checked exactly), and otherwise every degree falls back to a full row
reduction of its relation span.
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable

from braidkit.linalg import SparseMatrix, echelon, vec_axpy
from braidkit.scalars import QScalar, conjugate, parse_qscalar

if TYPE_CHECKING:  # pragma: no cover
    from braidkit.models import ModelSpec

__all__ = [
    "DegreeBasis",
    "FreeTensor",
    "ModelMismatch",
    "NormalElement",
    "NotCovariant",
    "antipode_block",
    "braiding_psi",
    "degree_basis",
    "free_braiding",
    "multiply",
    "normal_form",
    "parse_element",
    "relation_generators",
]


class ModelMismatch(ValueError):
    pass


class NotCovariant(ValueError):
    pass


Word = tuple
Tensor = dict  # Word -> scalar


# -- free tensors -------------------------------------------------------------------


@dataclass
class FreeTensor:
    """Element of the free algebra, graded by word length."""

    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for w in self.terms:
            if any(not 0 <= i < self.n for i in w):
                raise IndexError(f"index out of range in {w}")
        self.terms = {w: c for w, c in self.terms.items() if c}

    def components(self) -> dict[int, Tensor]:
        out: dict[int, Tensor] = {}
        for w, c in self.terms.items():
            out.setdefault(len(w), {})[w] = c
        return out

    def __add__(self, other: "FreeTensor") -> "FreeTensor":
        t = dict(self.terms)
        vec_axpy(t, other.terms, 1)
        return FreeTensor(self.n, t)

    def __mul__(self, other: "FreeTensor") -> "FreeTensor":
        t: Tensor = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                vec_axpy(t, {w1 + w2: c2}, c1)
        return FreeTensor(self.n, t)


def relation_generators(model: "ModelSpec") -> list[Tensor]:
    """Spanning set of the degree-2 relations ``x_i x_j - x_b x_a R'^a_i^b_j``."""
    n = model.n
    Rp = model.Rprime
    rows: dict[tuple, Tensor] = {}
    for i in range(n):
        for j in range(n):
            rows[(i, j)] = {(i, j): 1}
    for (a, i, b, j), v in Rp.entries():
        vec_axpy(rows[(i, j)], {(b, a): v}, -1)
    return [r for r in rows.values() if r]


def pivot_key(w: Word):
    """Pivot preference: unsorted words first, then lexicographically greatest.

    For every built-in model the sorted words then form the basis, which stays
    regular at ``q = 1``; on the quantum planes and the Euclidean model this is
    the plain lexicographic choice.
    """
    return (any(w[k] > w[k + 1] for k in range(len(w) - 1)), w)


# -- per-degree bases ---------------------------------------------------------------


@dataclass
class DegreeBasis:
    degree: int
    words: list[Word]
    index: dict[Word, int]
    reduction: SparseMatrix  # dim x n^m, column t = coordinates of word t

    @property
    def dim(self) -> int:
        return len(self.words)


class _Quotient:
    """Cached normal-form machinery for one model (write-once, thread safe)."""

    def __init__(self, model: "ModelSpec"):
        self.model = model
        self.n = model.n
        self._lock = threading.RLock()
        self._bases: dict[int, DegreeBasis] = {}
        self._nf: dict[Word, Tensor] = {}
        self._fallback: dict[int, dict] = {}
        rel = echelon(relation_generators(model), key=pivot_key)
        self.rules: dict[Word, Tensor] = {}
        for lead, row in rel.items():
            self.rules[lead] = {w: -c for w, c in row.items() if w != lead}
        self.groebner = self._check_overlaps()

    # rewriting ------------------------------------------------------------------

    def _rewrite(self, w: Word, depth: int = 0) -> Tensor:
        if depth > 200:
            raise RecursionError("rewriting does not terminate")
        hit = self._nf.get(w)
        if hit is not None:
            return hit
        for k in range(len(w) - 1):
            rule = self.rules.get(w[k:k + 2])
            if rule is not None:
                out: Tensor = {}
                for pair, c in rule.items():
                    vec_axpy(out, self._rewrite(w[:k] + pair + w[k + 2:], depth + 1), c)
                break
        else:
            out = {w: 1}
        self._nf[w] = out
        return out

    def _check_overlaps(self) -> bool:
        return self._rewriting_kills(3)

    def _rewriting_kills(self, m: int) -> bool:
        """True if rewriting sends every degree-``m`` relation generator to zero."""
        try:
            for r in self._degree_relations(m):
                acc: Tensor = {}
                for w, c in r.items():
                    vec_axpy(acc, self._rewrite(w), c)
                if acc:
                    self._nf.clear()
                    return False
        except RecursionError:
            self._nf.clear()
            return False
        return True

    # full row reduction ------------------------------------------------------------

    def _degree_relations(self, m: int) -> list[Tensor]:
        rels = relation_generators(self.model)
        out = []
        for p in range(m - 1):
            for pre in itertools.product(range(self.n), repeat=p):
                for post in itertools.product(range(self.n), repeat=m - 2 - p):
                    for r in rels:
                        out.append({pre + w + post: c for w, c in r.items()})
        return out

    def _fallback_pivots(self, m: int) -> dict:
        piv = self._fallback.get(m)
        if piv is None:
            piv = echelon(self._degree_relations(m), key=pivot_key)
            self._fallback[m] = piv
        return piv

    def reduce_word(self, w: Word) -> Tensor:
        """Normal form of one word as a combination of standard words."""
        with self._lock:
            if self.groebner:
                return self._rewrite(tuple(w))
            piv = self._fallback_pivots(len(w))
            row = piv.get(tuple(w))
            if row is None:
                return {tuple(w): 1}
            return {u: -c for u, c in row.items() if u != tuple(w)}

    def basis(self, m: int) -> DegreeBasis:
        with self._lock:
            b = self._bases.get(m)
            if b is not None:
                return b
            words = []
            if self.groebner and m > 3 and not self._rewriting_kills(m):
                self.groebner = False
                self._bases.clear()
                return self.basis(m)
            if self.groebner:
                for w in itertools.product(range(self.n), repeat=m):
                    if not any(w[k:k + 2] in self.rules for k in range(m - 1)):
                        words.append(w)
            else:
                piv = self._fallback_pivots(m)
                words = [w for w in itertools.product(range(self.n), repeat=m) if w not in piv]
            index = {w: i for i, w in enumerate(words)}
            red = SparseMatrix(len(words), self.n**m)
            for col, w in enumerate(itertools.product(range(self.n), repeat=m)):
                for u, c in self.reduce_word(w).items():
                    red.add_to(index[u], col, c)
            b = DegreeBasis(m, words, index, red)
            self._bases[m] = b
            return b


_QUOTIENTS: dict[int, _Quotient] = {}
_QLOCK = threading.Lock()


def _quotient(model: "ModelSpec") -> _Quotient:
    with _QLOCK:
        qt = model.cache.get("quotient")
        if qt is None:
            qt = _Quotient(model)
            model.cache["quotient"] = qt
        return qt


def degree_basis(model: "ModelSpec", m: int) -> DegreeBasis:
    if m < 0:
        raise ValueError("degree must be non-negative")
    return _quotient(model).basis(m)


def reduce_tensor(model: "ModelSpec", t: Tensor) -> dict[int, dict[int, object]]:
    """Free tensor -> {degree: {basis index: coefficient}}."""
    qt = _quotient(model)
    out: dict[int, dict[int, object]] = {}
    for w, c in t.items():
        if not c:
            continue
        b = qt.basis(len(w))
        vec = out.setdefault(len(w), {})
        for u, d in qt.reduce_word(w).items():
            vec_axpy(vec, {b.index[u]: d}, c)
    return {m: v for m, v in out.items() if v}


# -- elements -----------------------------------------------------------------------


class NormalElement:
    """Element of the quotient in basis coordinates, graded by degree."""

    __slots__ = ("model", "coords")

    def __init__(self, model: "ModelSpec", coords: dict[int, dict[int, object]] | None = None):
        self.model = model
        self.coords = {m: {i: c for i, c in v.items() if c} for m, v in (coords or {}).items()}
        self.coords = {m: v for m, v in self.coords.items() if v}

    @classmethod
    def one(cls, model) -> "NormalElement":
        return cls(model, {0: {0: QScalar(1)}})

    @classmethod
    def generator(cls, model, i: int) -> "NormalElement":
        if not 0 <= i < model.n:
            raise IndexError(f"generator index {i} out of range")
        return normal_form(model, {(i,): QScalar(1)})

    @classmethod
    def basis_element(cls, model, m: int, k: int) -> "NormalElement":
        return cls(model, {m: {k: QScalar(1)}})

    def is_zero(self) -> bool:
        return not self.coords

    def _check(self, other: "NormalElement") -> None:
        if other.model is not self.model:
            raise ModelMismatch(f"{self.model.name} vs {other.model.name}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormalElement):
            return NotImplemented
        self._check(other)
        return (self - other).is_zero()

    __hash__ = None

    def __add__(self, other: "NormalElement") -> "NormalElement":
        self._check(other)
        out = {m: dict(v) for m, v in self.coords.items()}
        for m, v in other.coords.items():
            vec_axpy(out.setdefault(m, {}), v, 1)
        return NormalElement(self.model, out)

    def __sub__(self, other: "NormalElement") -> "NormalElement":
        return self + other.scale(-1)

    def __neg__(self) -> "NormalElement":
        return self.scale(-1)

    def scale(self, c) -> "NormalElement":
        return NormalElement(self.model, {m: {i: c * x for i, x in v.items()} for m, v in self.coords.items()})

    def __mul__(self, other):
        if isinstance(other, NormalElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def homogeneous(self, m: int) -> dict[int, object]:
        return dict(self.coords.get(m, {}))

    def degrees(self) -> list[int]:
        return sorted(self.coords)

    def to_tensor(self) -> Tensor:
        """Lift to the free algebra using the basis words."""
        out: Tensor = {}
        for m, v in self.coords.items():
            words = degree_basis(self.model, m).words
            for i, c in v.items():
                out[words[i]] = c
        return out

    def conjugate_coefficients(self) -> "NormalElement":
        return NormalElement(self.model, {m: {i: conjugate(c) for i, c in v.items()} for m, v in self.coords.items()})

    def __str__(self) -> str:
        return format_tensor(self.to_tensor())

    def __repr__(self) -> str:
        return f"NormalElement({self.model.name!r}, {str(self)!r})"


def normal_form(model: "ModelSpec", t) -> NormalElement:
    """Image of a free tensor (FreeTensor or ``{word: coeff}``) in the quotient."""
    if isinstance(t, FreeTensor):
        if t.n != model.n:
            raise ModelMismatch("tensor dimension differs from model")
        t = t.terms
    return NormalElement(model, reduce_tensor(model, t))


def multiply(a: NormalElement, b: NormalElement) -> NormalElement:
    a._check(b)
    prod: Tensor = {}
    ta, tb = a.to_tensor(), b.to_tensor()
    for w1, c1 in ta.items():
        for w2, c2 in tb.items():
            vec_axpy(prod, {w1 + w2: c2}, c1)
    return normal_form(a.model, prod)


def format_tensor(t: Tensor) -> str:
    if not t:
        return "0"
    parts = []
    for w in sorted(t, key=lambda w: (len(w), w)):
        mono = "".join(f"x[{i}]" for i in w) or "1"
        parts.append(f"({t[w]}) * {mono}")
    return " + ".join(parts)


_MONO = re.compile(r"((?:\s*x\[\d+\])+)\s*$")


def parse_element(model: "ModelSpec", text: str) -> NormalElement:
    """Parse ``"(c1) * x[0]x[1] + (c2) * 1"``; bare monomials have coefficient 1.

    Accepts the output of :func:`format_tensor` as well as forms like ``-q*x[1] + 2``.
    """
    t: Tensor = {}
    for chunk in _split_terms(text):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _MONO.search(chunk)
        word: tuple = ()
        if m:
            word = tuple(int(i) for i in re.findall(r"x\[(\d+)\]", m.group(1)))
            chunk = chunk[: m.start()].rstrip()
            if chunk.endswith("*"):
                chunk = chunk[:-1].rstrip()
        if chunk in ("", "+"):
            coef = QScalar(1)
        elif chunk == "-":
            coef = QScalar(-1)
        else:
            coef = parse_qscalar(chunk)
        if any(i >= model.n for i in word):
            raise IndexError(f"generator index out of range in {text!r}")
        vec_axpy(t, {word: coef}, 1)
    return normal_form(model, t)


def _split_terms(text: str) -> list[str]:
    """Split on top-level ``+``/``-`` that start a new term (keeping the sign)."""
    out, depth, cur = [], 0, ""
    prev = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and cur.strip() and prev not in "*/^(":
            out.append(cur)
            cur = ch
        else:
            cur += ch
        if not ch.isspace():
            prev = ch
    out.append(cur)
    return out


# -- braiding and antipode ------------------------------------------------------------


def _cross(model, t: Tensor, p: int) -> Tensor:
    """Apply ``x_i x_j -> x_b x_a R^a_i^b_j`` at positions ``(p, p+1)``."""
    cols = model.cache.get("psi_cols")
    if cols is None:
        cols = {}
        for (a, i, b, j), v in model.R.entries():
            cols.setdefault((i, j), []).append((b, a, v))
        model.cache["psi_cols"] = cols
    out: Tensor = {}
    for w, c in t.items():
        for b, a, v in cols.get((w[p], w[p + 1]), ()):
            nw = w[:p] + (b, a) + w[p + 2:]
            nv = out.get(nw, 0) + c * v
            if nv:
                out[nw] = nv
            else:
                out.pop(nw, None)
    return out


def free_braiding(model, t: Tensor, m: int) -> Tensor:
    """``Psi`` on words split as (first ``m`` letters) (x) (rest), on the free level.

    The result words list the former right factor first.
    """
    out: Tensor = dict(t)
    if not out:
        return out
    k = len(next(iter(out))) - m
    for s in range(k):
        # letter s of the right block sits at position m+s; move it to position s
        for p in range(m + s - 1, s - 1, -1):
            out = _cross(model, out, p)
    return out


def braiding_psi(model, m: int, k: int) -> SparseMatrix:
    """Matrix of ``Psi: V_m (x) V_k -> V_k (x) V_m`` on basis coordinates.

    Columns are indexed ``i*dim(V_k) + j`` for basis words ``(w_i, w_j)`` and rows
    ``r*dim(V_m) + s`` for ``(w_r, w_s)`` in ``V_k (x) V_m``.
    """
    key = ("psi", m, k)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    bm, bk = degree_basis(model, m), degree_basis(model, k)
    out = SparseMatrix(bk.dim * bm.dim, bm.dim * bk.dim)
    for i, u in enumerate(bm.words):
        for j, v in enumerate(bk.words):
            col = i * bk.dim + j
            img = free_braiding(model, {u + v: 1}, m)
            for vec_row, c in _split_reduce(model, img, k).items():
                out.add_to(vec_row, col, c)
    model.cache[key] = out
    return out


def _split_reduce(model, t: Tensor, first: int) -> dict[int, object]:
    """Reduce words split after ``first`` letters into ``V_first (x) V_rest`` coordinates."""
    qt = _quotient(model)
    out: dict[int, object] = {}
    for w, c in t.items():
        a, b = w[:first], w[first:]
        ba, bb = qt.basis(len(a)), qt.basis(len(b))
        ra, rb = qt.reduce_word(a), qt.reduce_word(b)
        for u, cu in ra.items():
            for v, cv in rb.items():
                vec_axpy(out, {ba.index[u] * bb.dim + bb.index[v]: cu * cv}, c)
    return out


def check_braiding_well_defined(model, m: int, k: int) -> None:
    """Raise :class:`NotCovariant` if ``Psi`` does not preserve the relation ideal."""
    rels_m = _quotient(model)._degree_relations(m) if m >= 2 else []
    rels_k = _quotient(model)._degree_relations(k) if k >= 2 else []
    for r in rels_m:
        for v in itertools.product(range(model.n), repeat=k):
            t = {w + v: c for w, c in r.items()}
            if _split_reduce(model, free_braiding(model, t, m), k):
                raise NotCovariant(f"Psi({m},{k}) does not preserve relations")
    for r in rels_k:
        for u in itertools.product(range(model.n), repeat=m):
            t = {u + w: c for w, c in r.items()}
            if _split_reduce(model, free_braiding(model, t, m), k):
                raise NotCovariant(f"Psi({m},{k}) does not preserve relations")


def antipode_block(model, m: int) -> SparseMatrix:
    """Braided antipode on ``V_m``: ``S(x_i w) = -(mult o Psi)(x_i (x) S(w))``."""
    key = ("antipode", m)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    b = degree_basis(model, m)
    if m == 0:
        out = SparseMatrix.identity(1, QScalar(1))
    else:
        prev = antipode_block(model, m - 1)
        bp = degree_basis(model, m - 1)
        psi = braiding_psi(model, 1, m - 1)
        mult = multiplication_block(model, m - 1, 1)
        out = SparseMatrix(b.dim, b.dim)
        for col, w in enumerate(b.words):
            i, rest = w[0], w[1:]
            rest_vec = {bp.index[u]: c for u, c in _quotient(model).reduce_word(rest).items()}
            srest = prev.apply(rest_vec)
            # x_i (x) S(rest) in V_1 (x) V_{m-1}
            tens = {i * bp.dim + j: -c for j, c in srest.items()}
            img = mult.apply(psi.apply(tens))
            for r, c in img.items():
                out.add_to(r, col, c)
    model.cache[key] = out
    return out


def multiplication_block(model, m: int, k: int) -> SparseMatrix:
    """Product ``V_m (x) V_k -> V_{m+k}`` with columns ``i*dim(V_k) + j``."""
    key = ("mult", m, k)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    bm, bk, bs = degree_basis(model, m), degree_basis(model, k), degree_basis(model, m + k)
    qt = _quotient(model)
    out = SparseMatrix(bs.dim, bm.dim * bk.dim)
    for i, u in enumerate(bm.words):
        for j, v in enumerate(bk.words):
            for w, c in qt.reduce_word(u + v).items():
                out.add_to(bs.index[w], i * bk.dim + j, c)
    model.cache[key] = out
    return out


def word_vector(model, t: Tensor, m: int) -> dict[int, object]:
    """Coordinates of a homogeneous free tensor in ``V_m``."""
    return reduce_tensor(model, t).get(m, {})
