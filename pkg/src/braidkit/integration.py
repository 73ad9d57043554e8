"""The Gaussian-weighted integration functional Z and the sesquilinear forms built on it.

``Z`` is never obtained from an actual Gaussian; its values on words are defined
by the recursion

    Z[1] = 1,  Z[x_i] = 0,  Z[x_i x_j] = lambda^-2 eta_ab (R^-1)^a_j^b_i,
    Z[x_i1 ... x_im] = sum_r Z[x_i1..x_ir x_a(r+3)..x_am] Z[x_i(r+1) x_a(r+2)]
                       [r+2,m;R21^-1] lambda^(-2(m-2-r)),

where the chain moves the last letter to position ``r+2``.  Whether this is
well defined on the quotient is checked, not assumed.
"""

from __future__ import annotations

import itertools
import threading

from braidkit.braided_space import (
    NormalElement,
    _quotient,
    braiding_psi,
    degree_basis,
    multiplication_block,
)
from braidkit.linalg import SingularMatrix, SparseMatrix, vec_axpy
from braidkit.operators import (
    SuiteEntry,
    _apply_pr,
    _crossing_cols,
    crossing_matrix,
    derivative_op,
    mu_rule,
    rotation_op,
)
from braidkit.rmatrix import NoMetric
from braidkit.scalars import QScalar, conjugate
from braidkit.star_metric import star_structure

__all__ = [
    "MomentTable",
    "adjointness_residual",
    "conj_symmetry_residual",
    "gram_matrix",
    "moment_table",
    "parity_adjointness_residual",
    "parity_inner_form",
    "relation_moments",
    "sesquilinear",
    "z_functional",
    "z_moment",
]


class MomentTable:
    """Memoized values of ``Z`` on free words."""

    def __init__(self, model):
        if model.eta is None:
            raise NoMetric(f"{model.name} has no quantum metric; Z is undefined")
        self.model = model
        self.moments: dict[tuple, QScalar] = {(): QScalar(1)}
        self._lock = threading.Lock()
        self._inv_l2 = 1 / QScalar(model.lambda_squared)
        self._cols = _crossing_cols(model, "R21inv")

    def __call__(self, word) -> QScalar:
        word = tuple(word)
        hit = self.moments.get(word)
        if hit is None:
            hit = self._compute(word)
            with self._lock:
                hit = self.moments.setdefault(word, hit)
        return hit

    def _compute(self, w: tuple) -> QScalar:
        m = len(w)
        if m % 2:
            # every term of the recursion ends in an odd moment of lower degree
            return QScalar(0)
        if m == 2:
            i, j = w
            Rinv = crossing_matrix(self.model, "Rinv")
            eta = self.model.eta
            s = QScalar(0)
            for a, row in eta.rows.items():
                for b, e in row.items():
                    s += e * Rinv[a, j, b, i]
            return s * self._inv_l2
        total = QScalar(0)
        for r in range(m - 1):
            t = {w[r + 1:]: QScalar(1)}
            for p in range(m - r - 3, -1, -1):
                t = _apply_pr(self._cols, t, p)
            weight = self._inv_l2 ** (m - 2 - r)
            for u, c in t.items():
                pair = self((w[r], u[0]))
                if not pair:
                    continue
                total += self(w[:r] + u[1:]) * pair * c * weight
        return total

    def to_json_obj(self, degree: int) -> dict:
        out = {}
        for m in range(degree + 1):
            for w in itertools.product(range(self.model.n), repeat=m):
                out[",".join(map(str, w))] = str(self(w))
        return {"model": self.model.name, "degree": degree, "moments": out}


def moment_table(model) -> MomentTable:
    hit = model.cache.get("moments")
    if hit is None:
        hit = model.cache.setdefault("moments", MomentTable(model))
    return hit


def z_moment(model, word) -> QScalar:
    return moment_table(model)(word)


def _z_on_degree(model, m: int) -> dict[int, QScalar]:
    """``Z`` on the basis of ``V_m`` as a row vector."""
    key = ("z_row", m)
    hit = model.cache.get(key)
    if hit is None:
        Z = moment_table(model)
        hit = {k: v for k, w in enumerate(degree_basis(model, m).words) if (v := Z(w))}
        model.cache[key] = hit
    return hit


def _z_vec(model, m: int, vec: dict) -> QScalar:
    row = _z_on_degree(model, m)
    return sum((row[k] * c for k, c in vec.items() if k in row), QScalar(0))


def z_functional(model, e: NormalElement) -> QScalar:
    return sum((_z_vec(model, m, v) for m, v in e.coords.items()), QScalar(0))


def relation_moments(model, m: int) -> list[QScalar]:
    """``Z`` of each degree-``m`` relation (all zero iff Z is well defined there)."""
    Z = moment_table(model)
    out = []
    for r in _quotient(model)._degree_relations(m) if m >= 2 else []:
        out.append(sum((Z(w) * c for w, c in r.items()), QScalar(0)))
    return out


# -- sesquilinear forms ----------------------------------------------------------------


def _lnu(model, use_lambda_nu: bool, m: int) -> QScalar:
    if not use_lambda_nu:
        return QScalar(1)
    return QScalar(model.lambda_nu) ** m


def _form_matrix(model, mb: int, mc: int, use_lambda_nu: bool = True) -> SparseMatrix:
    """``G[k, l] = Z(e_k, e_l)`` for basis elements of ``V_mb`` and ``V_mc``."""
    key = ("form", mb, mc, use_lambda_nu)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    bb, bc = degree_basis(model, mb), degree_basis(model, mc)
    out = SparseMatrix(bb.dim, bc.dim)
    if (mb + mc) % 2 == 0:
        star = star_structure(model, "unitary").block(mb)
        mult = multiplication_block(model, mb, mc)
        zrow = _z_on_degree(model, mb + mc)
        scale = _lnu(model, use_lambda_nu, mb)
        # Z(b* c) with b* = star e_k (coefficients of e_k are 1, so no conjugation)
        for k in range(bb.dim):
            bstar = star.column(k)
            for l in range(bc.dim):
                s = QScalar(0)
                for i, c in bstar.items():
                    for r, v in mult.column(i * bc.dim + l).items():
                        if r in zrow:
                            s += zrow[r] * v * c
                if s:
                    out.set(k, l, s * scale)
    model.cache[key] = out
    return out


def sesquilinear(model, b: NormalElement, c: NormalElement, use_lambda_nu: bool = True) -> QScalar:
    """``Z(b, c) = lambda_nu^|b| Z(b* c)``, antilinear in ``b``."""
    total = QScalar(0)
    for mb, vb in b.coords.items():
        for mc, vc in c.coords.items():
            G = _form_matrix(model, mb, mc, use_lambda_nu)
            for k, x in vb.items():
                row = G.rows.get(k)
                if not row:
                    continue
                for l, y in vc.items():
                    if l in row:
                        total += conjugate(x) * row[l] * y
    return total


def gram_matrix(model, m: int, use_lambda_nu: bool = True) -> SparseMatrix:
    return _form_matrix(model, m, m, use_lambda_nu)


def _parity_block(model, m: int) -> SparseMatrix:
    """``b -> v > S(b star) = theta_v(S^-1(b star))`` on ``V_m`` (as a matrix on conjugated input)."""
    from braidkit.operators import antipode_op
    from braidkit.star_metric import theta_automorphism

    key = ("parity_block", m)
    hit = model.cache.get(key)
    if hit is None:
        S = antipode_op(model).block(m).matrix()
        tv = theta_automorphism(model, "v").block(m).matrix()
        hit = tv @ S.inverse() @ star_structure(model, "coordinate").block(m)
        model.cache[key] = hit
    return hit


def parity_inner_form(model, b: NormalElement, c: NormalElement) -> QScalar:
    """``(b, c)^U = Z((v > S(b star)) c)``, the form with the braided parity built in.

    ``theta_v = v > S^2`` on products, so ``v > S`` is ``theta_v o S^-1``.
    """
    total = QScalar(0)
    for m, v in b.coords.items():
        img = NormalElement(model, {m: _parity_block(model, m).apply({k: conjugate(x) for k, x in v.items()})})
        total += z_functional(model, img * c)
    return total


# -- verification suites ------------------------------------------------------------------


def _worst(values) -> str:
    worst = "0"
    for v in values:
        if v:
            s = str(QScalar(v))
            if worst == "0" or (len(s), s) > (len(worst), worst):
                worst = s
    return worst


def conj_symmetry_residual(model, max_degree: int = 3, use_lambda_nu: bool = True) -> list[SuiteEntry]:
    """``conj Z(c, b) - lambda_nu^|c| / lambda_nu^|b| Z(b, c)`` over basis pairs."""
    out = []
    for mb in range(max_degree + 1):
        vals = []
        for mc in range(max_degree + 1):
            G = _form_matrix(model, mb, mc, use_lambda_nu)
            Gt = _form_matrix(model, mc, mb, use_lambda_nu)
            ratio = _lnu(model, use_lambda_nu, mc) / _lnu(model, use_lambda_nu, mb)
            vals.extend((conjugate(Gt[l, k]) - ratio * G[k, l])
                        for k in range(G.nrows) for l in range(G.ncols))
        out.append(SuiteEntry("conj Z(c,b) = lambda_nu ratio Z(b,c)", "deformed conjugation symmetry",
                              mb, _worst(vals)))
    return out


def _op_matrix(op, m: int) -> SparseMatrix:
    return op.block(m).matrix()


def _star_dressed_inverse(model, sign: str, m: int) -> tuple[SparseMatrix, int]:
    key = ("lstar_inverse", sign, m)
    hit = model.cache.get(key)
    if hit is None:
        n = model.n
        d = degree_basis(model, m).dim
        B = star_structure(model, "coordinate").block(m)
        Bc = B.map(conjugate)
        big = SparseMatrix(n * d, n * d)
        for a in range(n):
            for b in range(n):
                K = B @ _op_matrix(rotation_op(model, a, b, sign), m).map(conjugate) @ Bc
                for r, c, v in K.entries():
                    big.set(a * d + r, b * d + c, v)
        hit = (big.inverse(), d)
        model.cache[key] = hit
    return hit


def starred_rotation(model, sign: str, i: int, j: int, m: int) -> SparseMatrix:
    """Action of ``(l^(+-)^i_j)*`` on ``V_m``.

    The coordinate star intertwines ``h`` with ``S(h*)``, so the family
    ``star o l^a_b o star`` represents ``S`` of the starred generators.  Since the
    ``l`` have matrix coproduct, ``S`` is undone by block inversion and the star
    of ``l^i_j`` is block ``(i, j)`` of the inverse.  On real type I models this
    equals ``S l^(-+)^j_i``.
    """
    inv, d = _star_dressed_inverse(model, sign, m)
    out = SparseMatrix(d, d)
    for r in range(d):
        for col, v in inv.rows.get(i * d + r, {}).items():
            if j * d <= col < (j + 1) * d:
                out.set(r, col - j * d, v)
    return out


def antipode_rotation(model, sign: str, i: int, j: int, m: int) -> SparseMatrix:
    """``S l^(sign)^i_j`` on ``V_m`` from the inverse of the block matrix ``[l^a_b]``."""
    key = ("lS_inverse", sign, m)
    hit = model.cache.get(key)
    if hit is None:
        n = model.n
        d = degree_basis(model, m).dim
        big = SparseMatrix(n * d, n * d)
        for a in range(n):
            for b in range(n):
                for r, c, v in _op_matrix(rotation_op(model, a, b, sign), m).entries():
                    big.set(a * d + r, b * d + c, v)
        hit = (big.inverse(), d)
        model.cache[key] = hit
    inv, d = hit
    out = SparseMatrix(d, d)
    for r in range(d):
        for col, v in inv.rows.get(i * d + r, {}).items():
            if j * d <= col < (j + 1) * d:
                out.set(r, col - j * d, v)
    return out


def _starred_derivative(model, i: int, m: int, conjugate_: bool = False) -> SparseMatrix:
    """``(d^i)*`` on ``V_m``: type I ``eta_ia d^a``, type II ``eta^{ibar a} eta_ab d^b``."""
    n = model.n
    eta, eu = model.eta, model.eta_upper
    coeffs: dict[int, QScalar] = {}
    if model.star_type == "I":
        coeffs = {a: eta[i, a] for a in range(n) if eta[i, a]}
    else:
        ib = model.bar[i]
        for b in range(n):
            s = sum((eu[ib, a] * eta[a, b] for a in range(n)), QScalar(0))
            if s:
                coeffs[b] = s
    dims = (degree_basis(model, m - 1).dim, degree_basis(model, m).dim) if m else (0, 1)
    out = SparseMatrix(*dims)
    for a, c in coeffs.items():
        out = out + _op_matrix(derivative_op(model, a, conjugate_), m).scale(c)
    return out


def _pair(model, G: SparseMatrix, left: SparseMatrix, k: int, right_vec: dict) -> QScalar:
    """``Z(left e_k, right_vec)`` with ``left`` an operator block (antilinear slot)."""
    s = QScalar(0)
    for r, x in left.column(k).items():
        row = G.rows.get(r)
        if not row:
            continue
        for l, y in right_vec.items():
            if l in row:
                s += conjugate(x) * row[l] * y
    return s


def adjointness_residual(model, max_total_degree: int = 4, use_lambda_nu: bool = True) -> list[SuiteEntry]:
    """Residuals of the adjointness of ``l^(+-)`` and of ``(d, -dbar)`` under ``Z( , )``.

    One entry per total degree ``|b| + |c|`` and identity.
    """
    n = model.n
    l2 = QScalar(model.lambda_squared)
    eu = model.eta_upper
    rows: dict[tuple[str, int], list] = {}
    for total in range(max_total_degree + 1):
        for mb in range(total + 1):
            mc = total - mb
            db, dc = degree_basis(model, mb).dim, degree_basis(model, mc).dim
            ident_c = {l: {l: QScalar(1)} for l in range(dc)}
            # rotations: Z(l* b, c) = Z(b, l c), both sides stay in degrees (mb, mc)
            if mb == mc or (mb + mc) % 2 == 0:
                G = _form_matrix(model, mb, mc, use_lambda_nu)
                for sign in "+-":
                    vals = rows.setdefault((f"l{sign}", total), [])
                    for i in range(n):
                        for j in range(n):
                            Ls = starred_rotation(model, sign, i, j, mb)
                            Lc = _op_matrix(rotation_op(model, i, j, sign), mc)
                            for k in range(db):
                                for l in range(dc):
                                    lhs = _pair(model, G, Ls, k, ident_c[l])
                                    rhs = _pair(model, G, SparseMatrix.identity(db, QScalar(1)), k, Lc.column(l))
                                    vals.append(lhs - rhs)
            # derivatives: Z(d* b, c) = -Z(b, dbar c) + Z(b, .Psi(x_a (x) c)) eta^{ai} lambda^{2|c|}
            vals = rows.setdefault(("d", total), [])
            if mb == 0 or (mb + mc) % 2 == 0:
                continue
            G1 = _form_matrix(model, mb - 1, mc, use_lambda_nu)
            G2 = _form_matrix(model, mb, mc - 1, use_lambda_nu) if mc >= 1 else None
            G3 = _form_matrix(model, mb, mc + 1, use_lambda_nu)
            psi = braiding_psi(model, 1, mc)
            mult = multiplication_block(model, mc, 1)
            idb = SparseMatrix.identity(db, QScalar(1))
            for i in range(n):
                Ds = _starred_derivative(model, i, mb)
                Db = _op_matrix(derivative_op(model, i, True), mc) if mc else None
                for l in range(dc):
                    corr: dict = {}
                    for a in range(n):
                        e = eu[a, i]
                        if e:
                            img = mult.apply(psi.apply({a * dc + l: QScalar(1)}))
                            vec_axpy(corr, img, e * l2 ** mc)
                    for k in range(db):
                        lhs = _pair(model, G1, Ds, k, {l: QScalar(1)})
                        rhs = _pair(model, G3, idb, k, corr)
                        if G2 is not None:
                            rhs -= _pair(model, G2, idb, k, Db.column(l))
                        vals.append(lhs - rhs)
    out = []
    names = {"l+": ("adjointness of l+", "l+ adjoint to its star"),
             "l-": ("adjointness of l-", "l- adjoint to its star"),
             "d": ("adjointness of d and -dbar", "d adjoint to -dbar up to the Gaussian term")}
    for (name, total), vals in sorted(rows.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        ident, anchor = names[name]
        out.append(SuiteEntry(ident, anchor, total, _worst(vals)))
    return out


def _gaussian_term(model, i: int, l: int, mc: int) -> dict:
    """``.Psi(x_a (x) e_l) eta^{ai} lambda^{2 mc}`` as a vector in ``V_{mc+1}``."""
    dc = degree_basis(model, mc).dim
    psi = braiding_psi(model, 1, mc)
    mult = multiplication_block(model, mc, 1)
    l2 = QScalar(model.lambda_squared) ** mc
    out: dict = {}
    for a in range(model.n):
        e = model.eta_upper[a, i]
        if e:
            vec_axpy(out, mult.apply(psi.apply({a * dc + l: QScalar(1)})), e * l2)
    return out


def parity_adjointness_residual(model, max_total_degree: int = 3) -> list[SuiteEntry]:
    """``(p^i* b, c)^U - (b, p^i c)^U - (b, .Psi(x_a (x) c))^U eta^{ai} lambda^{2|c|}``, ``p = -dbar``."""
    n = model.n
    vals: dict[int, list] = {}
    for total in range(max_total_degree + 1):
        cur = vals.setdefault(total, [])
        for mb in range(1, total + 1):
            mc = total - mb
            if (mb + mc) % 2 == 0:
                continue
            db, dc = degree_basis(model, mb).dim, degree_basis(model, mc).dim
            for i in range(n):
                Ds = _starred_derivative(model, i, mb, True)
                Db = _op_matrix(derivative_op(model, i, True), mc) if mc else None
                for k in range(db):
                    b = NormalElement(model, {mb: {k: QScalar(1)}})
                    pb = NormalElement(model, {mb - 1: Ds.column(k)}).scale(-1)
                    for l in range(dc):
                        c = NormalElement(model, {mc: {l: QScalar(1)}})
                        pc = NormalElement(model, {mc - 1: Db.column(l)}).scale(-1) if mc else NormalElement(model)
                        g = NormalElement(model, {mc + 1: _gaussian_term(model, i, l, mc)})
                        cur.append(parity_inner_form(model, pb, c) - parity_inner_form(model, b, pc)
                                   - parity_inner_form(model, b, g))
    return [SuiteEntry("p self-adjoint under the parity form", "fundamental action unitary for the parity form",
                       t, _worst(v)) for t, v in sorted(vals.items())]
