"""Star structures on the coordinates and the theta automorphisms.

Both stars are antilinear anti-automorphisms, built on free words (reverse the
word, map each letter by a degree-1 matrix) and checked against the relations.
A star block ``B`` acts as ``v -> B conj(v)`` on basis coordinates.
"""

from __future__ import annotations

from braidkit.braided_space import NormalElement, _quotient, degree_basis, reduce_tensor
from braidkit.linalg import SparseMatrix, vec_axpy
from braidkit.operators import (
    GradedOperator,
    LamBlock,
    SuiteEntry,
    _memo_op,
    matrix_action_op,
    mu_rule,
)
from braidkit.models import TYPE_I
from braidkit.rmatrix import NotRibbonScalar
from braidkit.scalars import QScalar, conjugate

__all__ = [
    "NoStarStructure",
    "antipode_squared_rotation",
    "delstar_residual",
    "StarStructure",
    "star_coordinate",
    "star_structure",
    "star_unitary_coordinate",
    "theta_automorphism",
    "theta_star_consistency",
]


class NoStarStructure(ValueError):
    pass


def _conj_vec(v: dict) -> dict:
    return {i: conjugate(c) for i, c in v.items()}


def _conj_matrix(m: SparseMatrix) -> SparseMatrix:
    return m.map(conjugate)


class StarStructure:
    """An antilinear anti-multiplicative map fixed by its values on generators.

    ``images[i]`` maps ``a`` to the coefficient of ``x_a`` in ``x_i`` starred.
    """

    def __init__(self, model, images: dict[int, dict[int, object]], label: str):
        self.model = model
        self.images = images
        self.label = label
        self._blocks: dict[int, SparseMatrix] = {}

    def lift(self, w: tuple) -> dict:
        t = {(): QScalar(1)}
        for k in reversed(w):
            nt: dict = {}
            for u, c in t.items():
                for a, v in self.images[k].items():
                    vec_axpy(nt, {u + (a,): v}, c)
            t = nt
        return t

    def block(self, m: int) -> SparseMatrix:
        hit = self._blocks.get(m)
        if hit is None:
            b = degree_basis(self.model, m)
            hit = SparseMatrix(b.dim, b.dim)
            for col, w in enumerate(b.words):
                for r, c in reduce_tensor(self.model, self.lift(w)).get(m, {}).items():
                    hit.add_to(r, col, c)
            self._blocks[m] = hit
        return hit

    def __call__(self, e: NormalElement) -> NormalElement:
        return NormalElement(self.model, {m: self.block(m).apply(_conj_vec(v)) for m, v in e.coords.items()})

    def well_defined(self, m: int) -> bool:
        """Whether the free lift maps the degree-``m`` relations into the relations."""
        if m < 2:
            return True
        for r in _quotient(self.model)._degree_relations(m):
            img: dict = {}
            for w, c in r.items():
                vec_axpy(img, self.lift(w), conjugate(c))
            if reduce_tensor(self.model, img):
                return False
        return True

    def square(self, m: int) -> SparseMatrix:
        """The linear map ``star o star`` on degree ``m``."""
        B = self.block(m)
        return B @ _conj_matrix(B)


def _require_star(model) -> None:
    if model.eta is None or model.star_type is None:
        raise NoStarStructure(f"{model.name} has no metric-defined star structure")


def star_structure(model, kind: str = "coordinate") -> StarStructure:
    """``kind="coordinate"`` is the star dual to the momentum star; ``"unitary"`` the standard one.

    coordinate: type I ``x_i -> x_a eta^{ia}``, type II ``x_i -> x_b eta_{ibar a} eta^{ab}``.
    unitary:    type I ``x_i -> x_a eta^{ai}``, type II ``x_i -> x_ibar``.
    """
    _require_star(model)
    key = ("star", kind)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    n = model.n
    eta, eu = model.eta, model.eta_upper
    images: dict[int, dict[int, object]] = {}
    for i in range(n):
        img: dict = {}
        if kind == "coordinate" and model.star_type == "I":
            img = {a: eu[i, a] for a in range(n) if eu[i, a]}
        elif kind == "coordinate":
            ib = model.bar[i]
            for b in range(n):
                s = sum((eta[ib, a] * eu[a, b] for a in range(n)), QScalar(0))
                if s:
                    img[b] = s
        elif kind == "unitary" and model.star_type == "I":
            img = {a: eu[a, i] for a in range(n) if eu[a, i]}
        elif kind == "unitary":
            img = {model.bar[i]: QScalar(1)}
        else:
            raise ValueError(f"unknown star kind {kind!r}")
        images[i] = img
    hit = StarStructure(model, images, "star" if kind == "coordinate" else "*")
    model.cache[key] = hit
    return hit


def star_coordinate(model, e: NormalElement) -> NormalElement:
    return star_structure(model, "coordinate")(e)


def star_unitary_coordinate(model, e: NormalElement) -> NormalElement:
    return star_structure(model, "unitary")(e)


# -- theta automorphisms ------------------------------------------------------------------


def theta_automorphism(model, which: str) -> GradedOperator:
    """``theta_v``, ``theta_u`` or ``theta_nu`` extended multiplicatively (``which`` in v, u, nu)."""
    if model.theta is None:
        raise NotRibbonScalar(f"{model.name} has no ribbon data")
    n = model.n
    if which in ("v", "u"):
        M = model.theta.v if which == "v" else model.theta.u
        mats = {k: {a: M[a, k] for a in range(n) if M[a, k]} for k in range(n)}
    elif which == "nu":
        mats = {k: {k: model.lambda_nu} for k in range(n)}
    else:
        raise ValueError(f"unknown theta {which!r}")
    return _memo_op(model, ("theta", which), lambda: matrix_action_op(model, mats, f"theta_{which}"))


def theta_star_consistency(model, max_degree: int = 3) -> list[SuiteEntry]:
    """Residuals of ``theta_v(b star) = b* lambda_nu^m`` and ``(theta_v o star)^2 = uv > S^4``."""
    star = star_structure(model, "coordinate")
    uni = star_structure(model, "unitary")
    tv = theta_automorphism(model, "v")
    tu = theta_automorphism(model, "u")
    rule = mu_rule(model)
    out = []
    for m in range(max_degree + 1):
        V = tv.block(m).matrix()
        lhs = V @ star.block(m)
        res = lhs - uni.block(m).scale(model.lambda_nu ** m)
        out.append(SuiteEntry("theta_v star = star_unitary lambda_nu^m", "theta_v intertwines the two stars",
                              m, LamBlock.plain(res, 0, rule).largest_entry()))
        # theta_alpha = alpha > S^2 on products, so uv > S^4 is theta_u o theta_v
        sq = lhs @ _conj_matrix(lhs)
        res2 = sq - tu.block(m).matrix() @ V
        out.append(SuiteEntry("(theta_v star)^2 = uv S^4", "square of theta_v o star",
                              m, LamBlock.plain(res2, 0, rule).largest_entry()))
    return out


# -- star of the derivative -----------------------------------------------------------------


def _block_transpose(big: SparseMatrix, d: int) -> SparseMatrix:
    out = SparseMatrix(big.nrows, big.ncols)
    for r, c, v in big.entries():
        a, rr = divmod(r, d)
        b, cc = divmod(c, d)
        out.set(b * d + rr, a * d + cc, v)
    return out


def _block(big: SparseMatrix, a: int, b: int, d: int) -> SparseMatrix:
    out = SparseMatrix(d, d)
    for r in range(d):
        for c, v in big.rows.get(a * d + r, {}).items():
            if b * d <= c < (b + 1) * d:
                out.set(r, c - b * d, v)
    return out


def antipode_squared_rotation(model, sign: str, m: int) -> tuple[SparseMatrix, int]:
    """Block matrix whose block ``(a, b)`` is ``S^2 l^(sign)^a_b`` on ``V_m``.

    ``S l`` is the block inverse of ``[l^a_b]``; the family ``S l`` has the
    opposite matrix coproduct, so its antipode is the block-transposed inverse.
    """
    from braidkit.operators import rotation_op

    n = model.n
    d = degree_basis(model, m).dim
    big = SparseMatrix(n * d, n * d)
    for a in range(n):
        for b in range(n):
            for r, c, v in rotation_op(model, a, b, sign).block(m).matrix().entries():
                big.set(a * d + r, b * d + c, v)
    return _block_transpose(_block_transpose(big.inverse(), d).inverse(), d), d


def delstar_residual(model, max_degree: int = 3, dilaton_sign: int = 1) -> list[SuiteEntry]:
    """``(d^i f) star - lambda^(s xi) S^2 l-^a_i > dbar_a (f star)`` with ``s = dilaton_sign``.

    Stated for real type I models.  ``f`` runs over the basis of ``V_m``.
    """
    from braidkit.operators import derivative_op, lowered_derivative_op

    if model.star_type != TYPE_I:
        raise NoStarStructure(f"{model.name}: the exchange is stated for real type I stars only")
    if model.lam is None:
        raise NoStarStructure(f"{model.name}: lambda is not in Q(q)")
    star = star_structure(model, "coordinate")
    rule = mu_rule(model)
    out = []
    for m in range(1, max_degree + 1):
        X, d = antipode_squared_rotation(model, "-", m - 1)
        B = star.block(m)
        scale = QScalar(model.lam) ** (dilaton_sign * (m - 1))
        worst = "0"
        for i in range(model.n):
            lhs = star.block(m - 1) @ _conj_matrix(derivative_op(model, i).block(m).matrix())
            rhs = SparseMatrix(lhs.nrows, lhs.ncols)
            for a in range(model.n):
                rhs = rhs + _block(X, a, i, d) @ lowered_derivative_op(model, a, True).block(m).matrix() @ B
            s = LamBlock.plain(lhs - rhs.scale(scale), 0, rule).largest_entry()
            if s != "0" and (worst == "0" or (len(s), s) > (len(worst), worst)):
                worst = s
        out.append(SuiteEntry("star of d", "star exchanges d with an l- dressed dbar", m, worst))
    return out
