"""Graded operators on the covector algebra and the residual engines built on them.

An operator of degree shift ``d`` is a family of blocks ``V_m -> V_{m+d}``.  Blocks
are computed lazily from a free-level lift (a map on words) followed by reduction
to normal form.  Powers of the normalisation constant ``lambda`` are carried as
formal powers of ``mu = lambda^(1/2)`` so that half-integer powers and an
irrational ``lambda`` stay exact; see :class:`LamBlock`.

Naming: ``derivative_op(model, i)`` is the braided derivative ``d^i`` (the
bar-action of the momentum ``p^i``) and ``derivative_op(model, i, conjugate=True)``
is ``dbar^i = -(p^i acting by the fundamental action)``.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterable

from braidkit.braided_space import (
    _quotient,
    antipode_block,
    braiding_psi,
    degree_basis,
    free_braiding,
    multiplication_block,
    reduce_tensor,
)
from braidkit.linalg import SparseMatrix, vec_axpy
from braidkit.rmatrix import NoCanonicalRoot, RMatrix, monomial_sqrt
from braidkit.scalars import QScalar, specialize

__all__ = [
    "GradedOperator",
    "LamBlock",
    "LayoutError",
    "NotWellDefined",
    "SuiteEntry",
    "antipode_op",
    "crossing_matrix",
    "derivative_op",
    "dilaton_op",
    "identity_op",
    "intertwiner_residual",
    "leibniz_residual",
    "lowered_derivative_op",
    "multiplication_op",
    "rotation_op",
    "twisting_residual",
    "universal_r_action",
    "cross_relation_residual",
]


class LayoutError(ValueError):
    pass


class NotWellDefined(ValueError):
    pass


# -- formal powers of mu = lambda^(1/2) ------------------------------------------------


def mu_rule(model) -> tuple[int, object] | None:
    """``(k, c)`` with ``mu^k = c`` in Q(q), or ``None`` if nothing is known.

    Exponents are reduced modulo ``k`` so that a zero test on the parts is a
    zero test in the field extension.
    """
    if "mu_rule" in model.cache:
        return model.cache["mu_rule"]
    rule = None
    if model.lam is not None:
        try:
            rule = (1, monomial_sqrt(model.lam))
        except NoCanonicalRoot:
            rule = (2, model.lam)
    elif model.lambda_squared is not None:
        rule = (4, model.lambda_squared)
    model.cache["mu_rule"] = rule
    return rule


class LamBlock:
    """Matrix ``sum_e mu^e M_e`` between two degree components."""

    __slots__ = ("rows", "cols", "parts", "rule")

    def __init__(self, rows: int, cols: int, parts: dict[int, SparseMatrix] | None = None, rule=None):
        self.rows = rows
        self.cols = cols
        self.rule = rule
        self.parts: dict[int, SparseMatrix] = {}
        for e, m in (parts or {}).items():
            self._accumulate(e, m)

    def _accumulate(self, e: int, m: SparseMatrix) -> None:
        if self.rule is not None:
            k, c = self.rule
            r = e % k
            if r != e:
                m = m.scale(c ** ((e - r) // k))
            e = r
        cur = self.parts.get(e)
        cur = m if cur is None else cur + m
        if cur.is_zero():
            self.parts.pop(e, None)
        else:
            self.parts[e] = cur

    @classmethod
    def plain(cls, m: SparseMatrix, e: int = 0, rule=None) -> "LamBlock":
        return cls(m.nrows, m.ncols, {e: m}, rule)

    def is_zero(self) -> bool:
        return not self.parts

    def __add__(self, other: "LamBlock") -> "LamBlock":
        out = LamBlock(self.rows, self.cols, dict(self.parts), self.rule)
        for e, m in other.parts.items():
            out._accumulate(e, m)
        return out

    def __neg__(self) -> "LamBlock":
        return LamBlock(self.rows, self.cols, {e: -m for e, m in self.parts.items()}, self.rule)

    def __sub__(self, other: "LamBlock") -> "LamBlock":
        return self + (-other)

    def scale(self, c) -> "LamBlock":
        return LamBlock(self.rows, self.cols, {e: m.scale(c) for e, m in self.parts.items()}, self.rule)

    def mu_shift(self, k: int) -> "LamBlock":
        return LamBlock(self.rows, self.cols, {e + k: m for e, m in self.parts.items()}, self.rule)

    def __matmul__(self, other: "LamBlock") -> "LamBlock":
        out = LamBlock(self.rows, other.cols, None, self.rule)
        for e1, m1 in self.parts.items():
            for e2, m2 in other.parts.items():
                out._accumulate(e1 + e2, m1 @ m2)
        return out

    def matrix(self) -> SparseMatrix:
        """The block as one matrix; only possible without leftover powers of ``mu``."""
        if set(self.parts) - {0}:
            raise ValueError("block carries a power of lambda^(1/2)")
        return self.parts.get(0, SparseMatrix(self.rows, self.cols))

    def at_mu_one(self) -> SparseMatrix:
        """Sum of the parts, i.e. the block with ``mu`` set to 1 (used at ``q = 1``)."""
        out = SparseMatrix(self.rows, self.cols)
        for m in self.parts.values():
            out = out + m
        return out

    def specialize(self, q0) -> list[list]:
        """Dense numeric block at ``q = q0``, valid when ``mu(q0) = 1``."""
        dense = [[0] * self.cols for _ in range(self.rows)]
        for m in self.parts.values():
            for i, j, v in m.entries():
                dense[i][j] += specialize(v, q0)
        return dense

    def largest_entry(self) -> str:
        """Deterministic representative of a nonzero block (``"0"`` if zero)."""
        best = None
        for e, m in sorted(self.parts.items()):
            for i, j, v in m.entries():
                s = str(QScalar(v)) if e == 0 else f"({QScalar(v)})*lambda^({e}/2)"
                if best is None or (len(s), s) > (len(best), best):
                    best = s
        return best or "0"

    def to_json_obj(self) -> dict:
        return {
            "shape": [self.rows, self.cols],
            "parts": {
                str(e): [[i, j, str(QScalar(v))] for i, j, v in sorted(m.entries(), key=lambda t: t[:2])]
                for e, m in sorted(self.parts.items())
            },
        }


# -- graded operators --------------------------------------------------------------------


Builder = Callable[[int], LamBlock]


class GradedOperator:
    """Degree-indexed family of blocks ``V_m -> V_{m+shift}``, memoized on demand."""

    def __init__(self, model, shift: int, builder: Builder, label: str = "",
                 lift: Callable[[tuple], dict] | None = None):
        self.model = model
        self.shift = shift
        self.label = label
        self.lift = lift
        self._builder = builder
        self._blocks: dict[int, LamBlock] = {}
        self._lock = threading.Lock()

    def block(self, m: int) -> LamBlock:
        hit = self._blocks.get(m)
        if hit is not None:
            return hit
        if m + self.shift < 0:
            blk = LamBlock(0, degree_basis(self.model, m).dim, None, mu_rule(self.model))
        else:
            blk = self._builder(m)
        with self._lock:
            return self._blocks.setdefault(m, blk)

    def _combine(self, other: "GradedOperator", fn, label: str) -> "GradedOperator":
        if other.shift != self.shift:
            raise ValueError("degree shifts differ")
        return GradedOperator(self.model, self.shift, lambda m: fn(self.block(m), other.block(m)), label)

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        return self._combine(other, lambda a, b: a + b, f"({self.label} + {other.label})")

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self._combine(other, lambda a, b: a - b, f"({self.label} - {other.label})")

    def __neg__(self) -> "GradedOperator":
        return GradedOperator(self.model, self.shift, lambda m: -self.block(m), f"-{self.label}")

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        def build(m):
            inner = other.block(m)
            if m + other.shift < 0:
                return LamBlock(0, inner.cols, None, inner.rule)
            return self.block(m + other.shift) @ inner

        return GradedOperator(self.model, self.shift + other.shift, build, f"{self.label} {other.label}")

    def scale(self, c) -> "GradedOperator":
        return GradedOperator(self.model, self.shift, lambda m: self.block(m).scale(c), self.label)

    def mu_shift(self, k: int) -> "GradedOperator":
        """Multiply by ``mu^k = lambda^(k/2)``."""
        return GradedOperator(self.model, self.shift, lambda m: self.block(m).mu_shift(k), self.label)

    def nonzero_blocks(self, max_degree: int) -> dict[int, LamBlock]:
        return {m: b for m in range(max_degree + 1) if not (b := self.block(m)).is_zero()}

    def to_json_obj(self, m: int) -> dict:
        return {"operator": self.label, "degree": m, "shift": self.shift, **self.block(m).to_json_obj()}


def _zero_block(model, m: int, shift: int) -> LamBlock:
    rows = degree_basis(model, m + shift).dim if m + shift >= 0 else 0
    return LamBlock(rows, degree_basis(model, m).dim, None, mu_rule(model))


def zero_op(model, shift: int = 0) -> GradedOperator:
    return GradedOperator(model, shift, lambda m: _zero_block(model, m, shift), "0")


def sum_ops(model, shift: int, ops: Iterable[GradedOperator]) -> GradedOperator:
    out = zero_op(model, shift)
    for op in ops:
        out = out + op
    return out


def _lifted(model, shift: int, lift: Callable[[tuple], dict], mu: Callable[[int], int], label: str) -> GradedOperator:
    """Operator whose block ``m`` is ``mu^{mu(m)}`` times the reduced free lift."""

    def build(m):
        b_in = degree_basis(model, m)
        b_out = degree_basis(model, m + shift)
        out = SparseMatrix(b_out.dim, b_in.dim)
        for col, w in enumerate(b_in.words):
            for r, c in reduce_tensor(model, lift(w)).get(m + shift, {}).items():
                out.add_to(r, col, c)
        return LamBlock.plain(out, mu(m), mu_rule(model))

    return GradedOperator(model, shift, build, label, lift)


def check_well_defined(op: GradedOperator, m: int) -> None:
    """Raise :class:`NotWellDefined` unless the free lift kills degree-``m`` relations."""
    if op.lift is None:
        raise ValueError(f"{op.label} has no free lift")
    qt = _quotient(op.model)
    for r in qt._degree_relations(m) if m >= 2 else []:
        img: dict = {}
        for w, c in r.items():
            vec_axpy(img, op.lift(w), c)
        if reduce_tensor(op.model, img):
            raise NotWellDefined(f"{op.label} does not preserve the relations in degree {m}")


# -- braided integer chains ----------------------------------------------------------------


def crossing_matrix(model, which: str) -> RMatrix:
    """``R`` or ``R21^-1`` for the model (cached)."""
    key = ("crossing", which)
    hit = model.cache.get(key)
    if hit is None:
        if which == "R":
            hit = model.R
        elif which == "R21inv":
            hit = model.R.r21().inverse()
        elif which == "R21":
            hit = model.R.r21()
        elif which == "Rinv":
            hit = model.R.inverse()
        else:
            raise ValueError(which)
        model.cache[key] = hit
    return hit


def _crossing_cols(model, which: str) -> dict:
    key = ("crossing_cols", which)
    hit = model.cache.get(key)
    if hit is None:
        hit = {}
        for (a, i, b, j), v in crossing_matrix(model, which).entries():
            hit.setdefault((i, j), []).append((b, a, v))
        model.cache[key] = hit
    return hit


def _apply_pr(cols: dict, t: dict, p: int) -> dict:
    """``(PX)`` at positions ``(p, p+1)``: ``e_(j,l) -> sum X^k_j^i_l e_(i,k)``."""
    out: dict = {}
    for w, c in t.items():
        for b, a, v in cols.get((w[p], w[p + 1]), ()):
            nw = w[:p] + (b, a) + w[p + 2:]
            nv = out.get(nw, 0) + c * v
            if nv:
                out[nw] = nv
            else:
                out.pop(nw, None)
    return out


def chain_to_front(model, which: str, word: tuple, k: int) -> dict:
    """``[1,k;X] e_word = (PX)_12 ... (PX)_{k-1,k} e_word`` (letter ``k-1`` moves first)."""
    cols = _crossing_cols(model, which)
    t = {tuple(word): 1}
    for p in range(k - 2, -1, -1):
        t = _apply_pr(cols, t, p)
    return t


def braided_integer(model, which: str, word: tuple) -> dict:
    """``[m;X] e_word`` as a free tensor, with the identity term ``[1,1] = 1`` included."""
    out: dict = {}
    for k in range(1, len(word) + 1):
        vec_axpy(out, chain_to_front(model, which, word, k), 1)
    return out


def _strip_front(t: dict, i: int) -> dict:
    out: dict = {}
    for w, c in t.items():
        if w[0] == i:
            vec_axpy(out, {w[1:]: c}, 1)
    return out


# -- the generators -------------------------------------------------------------------------


def _check_index(model, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < model.n:
            raise IndexError(f"index {i} out of range for n = {model.n}")


def _memo_op(model, key, factory: Callable[[], GradedOperator]) -> GradedOperator:
    store = model.cache.setdefault("operators", {})
    hit = store.get(key)
    if hit is None:
        hit = store.setdefault(key, factory())
    return hit


def derivative_op(model, i: int, conjugate: bool = False) -> GradedOperator:
    """``d^i`` via the braided integers ``[m;R]``; ``dbar^i`` via ``[m;R21^-1]``."""
    _check_index(model, i)
    which = "R21inv" if conjugate else "R"

    def lift(w):
        return _strip_front(braided_integer(model, which, w), i) if w else {}

    label = f"dbar^{i}" if conjugate else f"d^{i}"
    return _memo_op(model, ("d", i, conjugate),
                    lambda: _lifted(model, -1, lift, lambda m: 0, label))


def lowered_derivative_op(model, i: int, conjugate: bool = False) -> GradedOperator:
    """``d_i = eta_ia d^a`` (or the barred version)."""
    _check_index(model, i)

    def make():
        terms = [derivative_op(model, a, conjugate).scale(v)
                 for a, v in model.eta.rows.get(i, {}).items()]
        op = sum_ops(model, -1, terms)
        op.label = f"dbar_{i}" if conjugate else f"d_{i}"
        return op

    return _memo_op(model, ("dlow", i, conjugate), make)


def rotation_op(model, i: int, j: int, sign: str = "+") -> GradedOperator:
    """``l^(+-)^i_j`` acting by ``lambda^(+-m) [1,m+1;R]`` (``R21^-1`` for the minus sign)."""
    _check_index(model, i, j)
    if sign not in "+-" or len(sign) != 1:
        raise ValueError("sign must be '+' or '-'")
    which = "R" if sign == "+" else "R21inv"
    s = 1 if sign == "+" else -1

    def lift(w):
        word = tuple(w) + (j,)
        return _strip_front(chain_to_front(model, which, word, len(word)), i)

    return _memo_op(model, ("l", i, j, sign),
                    lambda: _lifted(model, 0, lift, lambda m: 2 * s * m, f"l{sign}^{i}_{j}"))


def dilaton_op(model, power: int = 1) -> GradedOperator:
    """``lambda^xi`` (to the given power): degree ``m`` is scaled by ``lambda^(power*m)``."""
    return _memo_op(model, ("dilaton", power),
                    lambda: _lifted(model, 0, lambda w: {tuple(w): 1}, lambda m: 2 * power * m,
                                    "lambda^xi" if power == 1 else f"lambda^({power}xi)"))


def identity_op(model) -> GradedOperator:
    return _memo_op(model, ("id",), lambda: _lifted(model, 0, lambda w: {tuple(w): 1}, lambda m: 0, "id"))


def multiplication_op(model, i: int) -> GradedOperator:
    """Left multiplication by ``x_i``."""
    _check_index(model, i)
    return _memo_op(model, ("x", i),
                    lambda: _lifted(model, 1, lambda w: {(i,) + tuple(w): 1}, lambda m: 0, f"x_{i}"))


def _free_antipode(model, w: tuple, memo: dict) -> dict:
    hit = memo.get(w)
    if hit is not None:
        return hit
    if not w:
        out = {(): 1}
    else:
        rest = _free_antipode(model, w[1:], memo)
        t = {(w[0],) + u: -c for u, c in rest.items()}
        out = free_braiding(model, t, 1)
    memo[w] = out
    return out


def antipode_op(model) -> GradedOperator:
    """Braided antipode: ``S(x_i w) = -(. o Psi)(x_i (x) S(w))``."""

    def make():
        memo: dict = {}

        def build(m):
            return LamBlock.plain(antipode_block(model, m), 0, mu_rule(model))

        return GradedOperator(model, 0, build, "S", lambda w: _free_antipode(model, tuple(w), memo))

    return _memo_op(model, ("S",), make)


def fundamental_momentum(model, i: int) -> GradedOperator:
    """``p^i`` in the fundamental action, i.e. ``-dbar^i``."""
    return _memo_op(model, ("p", i), lambda: -derivative_op(model, i, conjugate=True))


def matrix_action_op(model, mats: dict[int, dict], label: str, mu_per_degree: int = 0) -> GradedOperator:
    """Algebra automorphism extending ``x_k -> sum_a x_a M^a_k`` multiplicatively.

    ``mats[k]`` maps ``a`` to ``M^a_k``; degree ``m`` carries ``mu^(m*mu_per_degree)``.
    """

    def lift(w):
        t = {(): 1}
        for k in w:
            nt: dict = {}
            for u, c in t.items():
                for a, v in mats.get(k, {}).items():
                    vec_axpy(nt, {u + (a,): v}, c)
            t = nt
        return t

    return _lifted(model, 0, lift, lambda m: mu_per_degree * m, label)


# -- reports ------------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteEntry:
    identity: str
    anchor: str
    degree: int
    residual: str

    @property
    def status(self) -> str:
        return "pass" if self.residual == "0" else "fail"

    def to_json_obj(self) -> dict:
        return {"identity": self.identity, "anchor": self.anchor, "degree": self.degree,
                "status": self.status, "residual": self.residual}


def _summarize(identity: str, anchor: str, residuals: Iterable[GradedOperator], max_degree: int,
               min_degree: int = 0) -> list[SuiteEntry]:
    """One entry per degree, the residual being the largest nonzero block entry seen."""
    residuals = list(residuals)
    out = []
    for m in range(min_degree, max_degree + 1):
        worst = "0"
        for op in residuals:
            s = op.block(m).largest_entry()
            if s != "0" and (worst == "0" or (len(s), s) > (len(worst), worst)):
                worst = s
        out.append(SuiteEntry(identity, anchor, m, worst))
    return out


# -- Leibniz rules -------------------------------------------------------------------------


def _const(model, c) -> GradedOperator:
    return identity_op(model).scale(c)


def leibniz_operators(model, variant: str) -> list[GradedOperator]:
    """Residual operators (one per index pair) of the chosen commutation relation."""
    n = model.n
    x = [multiplication_op(model, a) for a in range(n)]
    R = model.R
    Rinv = crossing_matrix(model, "Rinv")
    out = []
    if variant == "leib":
        for bar in (False, True):
            d = [derivative_op(model, a, bar) for a in range(n)]
            for i in range(n):
                for j in range(n):
                    res = d[i] @ x[j]
                    for a in range(n):
                        for b in range(n):
                            # d_1 x_2 - x_2 R21 d_1 = id ; dbar_1 x_2 - x_2 R^-1 dbar_1 = id
                            c = Rinv[i, a, b, j] if bar else R[b, j, i, a]
                            if c:
                                res = res - (x[b] @ d[a]).scale(c)
                    out.append(res - _const(model, 1 if i == j else 0))
    elif variant == "lowleib":
        _need_metric(model)
        for bar in (False, True):
            d = [lowered_derivative_op(model, a, bar) for a in range(n)]
            for i in range(n):
                for j in range(n):
                    res = d[i] @ x[j]
                    for a in range(n):
                        for b in range(n):
                            if bar:  # dbar_1 x_2 - lambda^2 x_2 dbar_1 R = eta
                                c, k = R[a, i, b, j], 4
                            else:  # d_1 x_2 - lambda^-2 x_2 d_1 R21^-1 = eta
                                c, k = Rinv[b, j, a, i], -4
                            if c:
                                res = res - (x[b] @ d[a]).scale(c).mu_shift(k)
                    out.append(res - _const(model, model.eta.get(i, j)))
    elif variant in ("eucdif", "minkdif"):
        want = "euclidean" if variant == "eucdif" else "minkowski"
        if model.layout != want:
            raise LayoutError(f"{variant} needs the {want} layout, model is {model.layout}")
        out = _spinorial_leibniz(model, variant)
    else:
        raise ValueError(f"unknown Leibniz variant {variant!r}")
    return out


def _need_metric(model) -> None:
    if model.eta is None:
        raise LayoutError(f"{model.name} has no quantum metric")


def _chain_operator(model, entry: dict, tokens: dict) -> GradedOperator:
    """Evaluate ``sum coeff * word`` where each word is a product of operator tokens."""
    shift = None
    terms = []
    for word, c in entry.items():
        op = None
        for tok in word:
            t = tokens[tok]
            op = t if op is None else op @ t
        if op is None:
            op = identity_op(model)
        terms.append(op.scale(c))
        shift = op.shift
    if not terms:
        return None
    return sum_ops(model, shift, terms)


def _spinorial_leibniz(model, variant: str) -> list[GradedOperator]:
    from braidkit.matrixforms import word_chain

    seed = model.seed
    n = seed.n
    N = n * n
    R, R21, Rinv = seed, seed.r21(), seed.inverse()
    eta = {(I, J): v for I, row in model.eta.rows.items() for J, v in row.items()}
    eta12 = RMatrix.from_entries(n, {(I // n, I % n, J // n, J % n): v for (I, J), v in eta.items()})
    tokens = {}
    for I in range(N):
        tokens[("x", I)] = multiplication_op(model, I)
        tokens[("d", I)] = lowered_derivative_op(model, I, False)
        tokens[("db", I)] = lowered_derivative_op(model, I, True)

    def eval_eta(entry, lead):
        # a word with one e1 and one e2 letter stands for eta with its first
        # index on the letter sitting where the derivative sat (``lead``)
        acc = 0
        for word, c in entry.items():
            I = next(k for t, k in word if t == lead)
            J = next(k for t, k in word if t != lead)
            v = eta.get((I, J))
            if v:
                acc = acc + c * v
        return acc

    def numeric(factors):
        return [[sum(e.values(), 0) if e else 0 for e in row] for row in word_chain(n, factors)]

    if variant == "eucdif":
        sides = [
            ([("R", R), ("p2", "d"), ("p1", "x"), ("R", R)], [("p1", "x"), ("p2", "d")], -4,
             numeric([("R", R), ("R", eta12.r21()), ("R", R)])),
            ([("p1", "db"), ("p2", "x")], [("R", R), ("p2", "x"), ("p1", "db"), ("R", R)], 4,
             numeric([("R", eta12)])),
        ]
    else:
        rhs1 = word_chain(n, [("p2", "e2"), ("R", R21), ("p1", "e1"), ("R", R)])
        rhs2 = word_chain(n, [("R", Rinv), ("p1", "e1"), ("R", R), ("p2", "e2")])
        sides = [
            ([("p2", "d"), ("R", R21), ("p1", "x"), ("R", R)],
             [("R", Rinv), ("p1", "x"), ("R", R), ("p2", "d")], -4,
             [[eval_eta(e, "e2") for e in row] for row in rhs1]),
            ([("R", Rinv), ("p1", "db"), ("R", R), ("p2", "x")],
             [("p2", "x"), ("R", R21), ("p1", "db"), ("R", R)], 4,
             [[eval_eta(e, "e1") for e in row] for row in rhs2]),
        ]
    out = []
    for first, second, k, rhs in sides:
        A = word_chain(n, first)
        B = word_chain(n, second)
        for r in range(N):
            for c in range(N):
                res = _chain_operator(model, A[r][c], tokens)
                sec = _chain_operator(model, B[r][c], tokens)
                if res is None:
                    res = zero_op(model, 0)
                if sec is not None:
                    res = res - sec.mu_shift(k)
                out.append(res - _const(model, rhs[r][c]))
    return out


_ANCHORS = {
    "leib": "braided Leibniz rule, upper-index derivatives",
    "lowleib": "braided Leibniz rule, lowered derivatives",
    "eucdif": "Leibniz rule in matrix form, Euclidean layout",
    "minkdif": "Leibniz rule in matrix form, Minkowski layout",
}


def applicable_leibniz(model) -> list[str]:
    out = ["leib"]
    if model.eta is not None:
        out.append("lowleib")
    if model.layout == "euclidean":
        out.append("eucdif")
    elif model.layout == "minkowski":
        out.append("minkdif")
    return out


def leibniz_residual(model, variant: str, max_degree: int = 3) -> list[SuiteEntry]:
    return _summarize(variant, _ANCHORS[variant], leibniz_operators(model, variant), max_degree)


# -- antipode intertwiner ------------------------------------------------------------------


def intertwiner_residual(model, max_degree: int = 4) -> list[SuiteEntry]:
    """``S d^i + dbar^i S`` for all ``i``."""
    S = antipode_op(model)
    ops = [S @ derivative_op(model, i) + derivative_op(model, i, True) @ S for i in range(model.n)]
    return _summarize("intertwiner", "antipode intertwines d and -dbar", ops, max_degree)


# -- universal R-matrix and twisting -------------------------------------------------------


def flip_matrix(dm: int, dk: int) -> SparseMatrix:
    """``V_k (x) V_m -> V_m (x) V_k`` with the block-column conventions of ``braiding_psi``."""
    out = SparseMatrix(dm * dk, dk * dm)
    for r in range(dk):
        for s in range(dm):
            out.add_to(s * dk + r, r * dm + s, 1)
    return out


def universal_r_action(model, m: int, k: int) -> SparseMatrix:
    """Action of the universal R-matrix on ``V_m (x) V_k``, recovered as ``P o Psi``."""
    dm, dk = degree_basis(model, m).dim, degree_basis(model, k).dim
    return flip_matrix(dm, dk) @ braiding_psi(model, m, k)


def _tensor_blocks(a: LamBlock, b: LamBlock) -> LamBlock:
    from braidkit.linalg import kron

    out = LamBlock(a.rows * b.rows, a.cols * b.cols, None, a.rule)
    for e1, m1 in a.parts.items():
        for e2, m2 in b.parts.items():
            out._accumulate(e1 + e2, kron(m1, m2))
    return out


def _total_offsets(model, total: int) -> tuple[dict, int]:
    off, pos = {}, 0
    for m in range(total + 1):
        off[m] = pos
        pos += degree_basis(model, m).dim * degree_basis(model, total - m).dim
    return off, pos


def _coproduct_terms(model, g: str, idx: tuple, conj: bool) -> list[tuple[GradedOperator, GradedOperator]]:
    """``Delta g`` (or ``Delta-bar g``) as a list of pairs ``(h1, h2)`` for ``h1 (x) h2``."""
    n = model.n
    if g == "p":
        (i,) = idx
        p = [fundamental_momentum(model, a) for a in range(n)]
        # Delta p = p (x) 1 + lambda^xi l- (x) p ; Delta-bar p = p (x) 1 + lambda^-xi l+ (x) p
        sign, pw = ("+", -1) if conj else ("-", 1)
        terms = [(p[i], identity_op(model))]
        for a in range(n):
            terms.append((dilaton_op(model, pw) @ rotation_op(model, i, a, sign), p[a]))
        return terms
    if g in ("l+", "l-"):
        i, j = idx
        return [(rotation_op(model, i, a, g[1]), rotation_op(model, a, j, g[1])) for a in range(n)]
    if g == "dilaton":
        return [(dilaton_op(model), dilaton_op(model))]
    raise ValueError(g)


def _on_total(model, terms, total: int, shift: int, flipped: bool) -> LamBlock:
    """Action of ``sum h1 (x) h2`` from ``T_total`` to ``T_(total+shift)``, ``T_N = sum V_m (x) V_(N-m)``.

    With ``flipped`` the flipped coproduct is used: ``h2`` acts on the first factor.
    """
    src, ncols = _total_offsets(model, total)
    dst, nrows = _total_offsets(model, total + shift)
    out = LamBlock(nrows, ncols, None, mu_rule(model))
    for h1, h2 in terms:
        first, second = (h2, h1) if flipped else (h1, h2)
        for m in range(total + 1):
            k = total - m
            mm, kk = m + first.shift, k + second.shift
            if mm < 0 or kk < 0:
                continue
            blk = _tensor_blocks(first.block(m), second.block(k))
            out = out + _placed(blk, nrows, ncols, dst[mm], src[m])
    return out


def _placed(blk: LamBlock, nrows: int, ncols: int, r0: int, c0: int) -> LamBlock:
    parts = {}
    for e, mat in blk.parts.items():
        big = SparseMatrix(nrows, ncols)
        for i, j, v in mat.entries():
            big.add_to(r0 + i, c0 + j, v)
        parts[e] = big
    return LamBlock(nrows, ncols, parts, blk.rule)


def _r_on_total(model, total: int, inverse: bool = False) -> LamBlock:
    off, size = _total_offsets(model, total)
    out = SparseMatrix(size, size)
    for m in range(total + 1):
        R = universal_r_action(model, m, total - m)
        if inverse:
            R = R.inverse()
        for i, j, v in R.entries():
            out.add_to(off[m] + i, off[m] + j, v)
    return LamBlock.plain(out, 0, mu_rule(model))


def twisting_operators(model, total: int) -> list[tuple[str, LamBlock]]:
    n = model.n
    gens = [("dilaton", ())]
    gens += [("p", (i,)) for i in range(n)]
    gens += [(s, (i, j)) for s in ("l+", "l-") for i in range(n) for j in range(n)]
    Rt = _r_on_total(model, total)
    out = []
    for g, idx in gens:
        shift = -1 if g == "p" else 0
        if total + shift < 0:
            continue
        lhs = _on_total(model, _coproduct_terms(model, g, idx, True), total, shift, False)
        mid = _on_total(model, _coproduct_terms(model, g, idx, False), total, shift, True)
        res = lhs - _r_on_total(model, total + shift, inverse=True) @ mid @ Rt
        out.append((f"{g}{idx}", res))
    return out


def twisting_residual(model, max_total: int = 3) -> list[SuiteEntry]:
    """Compare ``Delta-bar g`` with ``R^-1 (tau o Delta g) R`` on ``V_m (x) V_k``, ``m + k <= max_total``."""
    out = []
    for total in range(max_total + 1):
        worst = "0"
        for _, res in twisting_operators(model, total):
            s = res.largest_entry()
            if s != "0" and (worst == "0" or (len(s), s) > (len(worst), worst)):
                worst = s
        out.append(SuiteEntry("twisting", "conjugate coproduct equals R^-1 (flipped coproduct) R", total, worst))
    return out


# -- cross relations -------------------------------------------------------------------------


def _momentum_relation(model, P: dict, layout: str) -> list[GradedOperator]:
    """Residuals of the quadratic momentum relations in matrix form."""
    from braidkit.matrixforms import word_chain

    seed = model.seed
    n = seed.n
    R, R21 = seed, seed.r21()
    if layout == "euclidean":
        lhs, rhs = [("R", R21), ("p1", "a"), ("p2", "b")], [("p2", "b"), ("p1", "a"), ("R", R)]
    else:
        lhs = [("R", R21), ("p1", "a"), ("R", R), ("p2", "b")]
        rhs = [("p2", "b"), ("R", R21), ("p1", "a"), ("R", R)]
    tokens = {(t, I): P[I] for t in "ab" for I in range(n * n)}
    A, B = word_chain(n, lhs), word_chain(n, rhs)
    out = []
    for r in range(n * n):
        for c in range(n * n):
            a = _chain_operator(model, A[r][c], tokens) or zero_op(model, -2)
            b = _chain_operator(model, B[r][c], tokens) or zero_op(model, -2)
            out.append(a - b)
    return out


def vector_cross_operators(model) -> list[tuple[str, GradedOperator]]:
    """Residuals of the vector-form cross relations with ``p^i = -dbar^i``."""
    n = model.n
    R = model.R
    R21inv = crossing_matrix(model, "R21inv")
    Rinv = crossing_matrix(model, "Rinv")
    p = [fundamental_momentum(model, a) for a in range(n)]
    lp = {(i, j): rotation_op(model, i, j, "+") for i in range(n) for j in range(n)}
    lm = {(i, j): rotation_op(model, i, j, "-") for i in range(n) for j in range(n)}
    out = []
    for i, j, k in itertools.product(range(n), repeat=3):
        # l+_1 p_2 = lambda^-1 R21^-1 p_2 l+_1 ; l-_1 p_2 = lambda R p_2 l-_1
        plus = lp[i, j] @ p[k]
        minus = lm[i, j] @ p[k]
        for a in range(n):
            for b in range(n):
                c = R21inv[i, a, k, b]
                if c:
                    plus = plus - (p[b] @ lp[a, j]).scale(c).mu_shift(-2)
                c = R[i, a, k, b]
                if c:
                    minus = minus - (p[b] @ lm[a, j]).scale(c).mu_shift(2)
        out.append(("l+ p", plus))
        out.append(("l- p", minus))
    D = dilaton_op(model)
    for k in range(n):
        out.append(("dilaton p", D @ p[k] - (p[k] @ D).mu_shift(-2)))
    if model.eta is not None:
        # lowered momenta p_k = -dbar_k transform like coordinates
        pl = [-lowered_derivative_op(model, a, True) for a in range(n)]
        for i, j, k in itertools.product(range(n), repeat=3):
            plus = lp[i, j] @ pl[k]
            minus = lm[i, j] @ pl[k]
            for a in range(n):
                for b in range(n):
                    c = R[b, k, i, a]
                    if c:
                        plus = plus - (pl[b] @ lp[a, j]).scale(c).mu_shift(2)
                    c = Rinv[i, a, b, k]
                    if c:
                        minus = minus - (pl[b] @ lm[a, j]).scale(c).mu_shift(-2)
            out.append(("l+ p_low", plus))
            out.append(("l- p_low", minus))
        Rp = model.Rprime
        for i in range(n):
            for j in range(n):
                res = pl[i] @ pl[j]
                for a in range(n):
                    for b in range(n):
                        c = Rp[a, i, b, j]
                        if c:
                            res = res - (pl[b] @ pl[a]).scale(c)
                out.append(("p_low p_low", res))
    return out


def spinorial_cross_operators(model) -> list[tuple[str, GradedOperator]]:
    """Residuals of the two-copy cross relations with lowered momenta ``p_I = -dbar_I``.

    In the Minkowski layout each momentum is dressed as ``(p L-)^k_l = p^k_c L-^c_l``.
    """
    from braidkit.spinor import small_generator_op

    seed = model.seed
    n = seed.n
    R, R21, Rinv, R21inv = seed, seed.r21(), seed.inverse(), seed.r21().inverse()
    P = {I: -lowered_derivative_op(model, I, True) for I in range(n * n)}
    gen = {(g, i, j): small_generator_op(model, g, i, j)
           for g in ("L+", "L-", "M+", "M-") for i in range(n) for j in range(n)}
    if model.layout == "minkowski":
        Pt = {}
        for k in range(n):
            for l in range(n):
                Pt[k, l] = sum_ops(model, -1, [P[k * n + c] @ gen["L-", c, l] for c in range(n)])
    else:
        Pt = {(k, l): P[k * n + l] for k in range(n) for l in range(n)}
    out = []
    for i, j, k, l in itertools.product(range(n), repeat=4):
        res = {g: gen[g, i, j] @ Pt[k, l] for g in ("L+", "L-", "M+", "M-")}
        for a in range(n):
            for b in range(n):
                # L+_1 p_2 = mu^-1 R21^-1 p_2 L+_1 ; L-_1 p_2 = mu R p_2 L-_1
                c = R21inv[i, a, k, b]
                if c:
                    res["L+"] = res["L+"] - (Pt[b, l] @ gen["L+", a, j]).scale(c).mu_shift(-1)
                c = R[i, a, k, b]
                if c:
                    res["L-"] = res["L-"] - (Pt[b, l] @ gen["L-", a, j]).scale(c).mu_shift(1)
                # M+_1 p_2 = p_2 mu R21 M+_1 ; M-_1 p_2 = p_2 mu^-1 R^-1 M-_1
                c = R21[i, a, b, l]
                if c:
                    res["M+"] = res["M+"] - (Pt[k, b] @ gen["M+", a, j]).scale(c).mu_shift(1)
                c = Rinv[i, a, b, l]
                if c:
                    res["M-"] = res["M-"] - (Pt[k, b] @ gen["M-", a, j]).scale(c).mu_shift(-1)
        out.extend((f"{g} p", op) for g, op in res.items())
    D = dilaton_op(model)
    for I in range(n * n):
        out.append(("dilaton p", D @ P[I] - (P[I] @ D).mu_shift(-2)))
    out.extend(("p p", op) for op in _momentum_relation(model, P, model.layout))
    return out


def cross_relation_operators(model) -> list[tuple[str, GradedOperator]]:
    out = vector_cross_operators(model)
    if model.layout in ("euclidean", "minkowski"):
        out += spinorial_cross_operators(model)
    return out


def cross_relation_residual(model, max_degree: int = 3) -> list[SuiteEntry]:
    ops = cross_relation_operators(model)
    out = []
    groups: dict[str, list] = {}
    for name, op in ops:
        groups.setdefault(name, []).append(op)
    for name, members in groups.items():
        out += _summarize(f"cross {name}", _CROSS_ANCHORS[name], members, max_degree)
    return out


_CROSS_ANCHORS = {
    "l+ p": "rotation-translation cross relation, l+",
    "l- p": "rotation-translation cross relation, l-",
    "dilaton p": "dilaton-translation cross relation",
    "l+ p_low": "cross relation with lowered momenta, l+",
    "l- p_low": "cross relation with lowered momenta, l-",
    "p_low p_low": "lowered momenta obey the covector relations",
    "L+ p": "two-copy cross relation, L+",
    "L- p": "two-copy cross relation, L-",
    "M+ p": "two-copy cross relation, M+",
    "M- p": "two-copy cross relation, M-",
    "p p": "momentum relations in matrix form",
}
