"""R-matrix toolkit.

Index convention: an :class:`RMatrix` on ``C^n (x) C^n`` stores entries
``R^i_j^k_l`` as the ``(i*n + k, j*n + l)`` entry of an ``n^2 x n^2`` matrix, so
the row multi-index is ``(i, k)`` and the column multi-index is ``(j, l)``.
Multi-indices of the 4-dimensional matrix models flatten as ``(i0, i1) -> i0*n + i1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import flint

from braidkit.linalg import SingularMatrix, SparseMatrix, field_inverse, nullspace
from braidkit.scalars import QScalar, parse_qscalar, q as Q_GEN, specialize

__all__ = [
    "AmbiguousMetric",
    "DimensionError",
    "HeckeResult",
    "MetricSolution",
    "NoCanonicalRoot",
    "NoMetric",
    "NotHecke",
    "NotRibbonScalar",
    "RMatrix",
    "SingularSecondInverse",
    "ThetaData",
    "assemble_big_matrices",
    "embed",
    "flip",
    "hecke_check",
    "mixed_relations_residual",
    "metric_residuals",
    "qybe_residual",
    "second_inverse",
    "solve_metric_and_lambda",
    "theta_matrices",
]


class DimensionError(ValueError):
    pass


class SingularSecondInverse(ArithmeticError):
    pass


class NotRibbonScalar(ValueError):
    pass


class NoCanonicalRoot(ValueError):
    pass


class NoMetric(ValueError):
    pass


class AmbiguousMetric(ValueError):
    pass


class NotHecke(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RMatrix:
    """An ``n^2 x n^2`` matrix in ``M_n (x) M_n``."""

    n: int
    mat: SparseMatrix

    def __post_init__(self):
        if self.mat.shape != (self.n * self.n, self.n * self.n):
            raise DimensionError(f"expected {self.n**2}x{self.n**2}, got {self.mat.shape}")

    @classmethod
    def from_entries(cls, n: int, entries: dict[tuple[int, int, int, int], object]) -> "RMatrix":
        m = SparseMatrix(n * n, n * n)
        for (i, j, k, l), v in entries.items():
            m.add_to(i * n + k, j * n + l, v)
        return cls(n, m)

    @classmethod
    def identity(cls, n: int) -> "RMatrix":
        return cls(n, SparseMatrix.identity(n * n))

    def __getitem__(self, ijkl: tuple[int, int, int, int]):
        i, j, k, l = ijkl
        n = self.n
        return self.mat.get(i * n + k, j * n + l)

    def entries(self) -> Iterable[tuple[tuple[int, int, int, int], object]]:
        n = self.n
        for r, c, v in self.mat.entries():
            i, k = divmod(r, n)
            j, l = divmod(c, n)
            yield (i, j, k, l), v

    def __eq__(self, other) -> bool:
        return isinstance(other, RMatrix) and self.n == other.n and self.mat == other.mat

    __hash__ = None

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        _same_n(self, other)
        return RMatrix(self.n, self.mat @ other.mat)

    def __add__(self, other: "RMatrix") -> "RMatrix":
        _same_n(self, other)
        return RMatrix(self.n, self.mat + other.mat)

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        _same_n(self, other)
        return RMatrix(self.n, self.mat - other.mat)

    def scale(self, c) -> "RMatrix":
        return RMatrix(self.n, self.mat.scale(c))

    def inverse(self) -> "RMatrix":
        return RMatrix(self.n, self.mat.inverse())

    def t2(self) -> "RMatrix":
        """Transpose in the second tensor factor: ``(R^t2)^i_j^k_l = R^i_j^l_k``."""
        return RMatrix.from_entries(self.n, {(i, j, l, k): v for (i, j, k, l), v in self.entries()})

    def t1(self) -> "RMatrix":
        return RMatrix.from_entries(self.n, {(j, i, k, l): v for (i, j, k, l), v in self.entries()})

    def r21(self) -> "RMatrix":
        """``P R P``: ``(R_21)^i_j^k_l = R^k_l^i_j``."""
        return RMatrix.from_entries(self.n, {(k, l, i, j): v for (i, j, k, l), v in self.entries()})

    def pr(self) -> "RMatrix":
        """``P R``: ``(PR)^i_j^k_l = R^k_j^i_l``."""
        return RMatrix.from_entries(self.n, {(k, j, i, l): v for (i, j, k, l), v in self.entries()})

    def map(self, fn) -> "RMatrix":
        return RMatrix(self.n, self.mat.map(fn))

    def specialize(self, q0) -> "RMatrix":
        return self.map(lambda v: specialize(v, q0))

    # -- serialization -------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {"i": i, "j": j, "k": k, "l": l, "value": str(v)}
                for (i, j, k, l), v in self.entries()
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RMatrix":
        n = int(obj["n"])
        entries = {}
        for e in obj["entries"]:
            idx = (int(e["i"]), int(e["j"]), int(e["k"]), int(e["l"]))
            if not all(0 <= x < n for x in idx):
                raise DimensionError(f"index {idx} out of range for n={n}")
            val = e["value"]
            entries[idx] = parse_qscalar(val) if isinstance(val, str) else QScalar(val)
        return cls.from_entries(n, entries)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "RMatrix":
        return cls.from_json_obj(json.loads(text))


def _same_n(a: RMatrix, b: RMatrix) -> None:
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: {a.n} vs {b.n}")


def flip(n: int) -> RMatrix:
    """The permutation matrix ``P^i_j^k_l = delta^i_l delta^k_j``."""
    return RMatrix.from_entries(n, {(i, j, j, i): 1 for i in range(n) for j in range(n)})


def embed(R: RMatrix, K: int, a: int, b: int) -> SparseMatrix:
    """``R_{ab}`` acting on factors ``a`` (first) and ``b`` (second) of ``(C^n)^{(x)K}``.

    Factor positions are 0-based; ``a`` and ``b`` need not be adjacent or ordered.
    """
    n = R.n
    if a == b or not (0 <= a < K and 0 <= b < K):
        raise ValueError("invalid factor positions")
    cols: dict[tuple[int, int], list[tuple[int, int, object]]] = {}
    for (i, j, k, l), v in R.entries():
        cols.setdefault((j, l), []).append((i, k, v))
    weights = [n ** (K - 1 - p) for p in range(K)]
    out = SparseMatrix(n**K, n**K)
    for t in itertools.product(range(n), repeat=K):
        col = sum(x * w for x, w in zip(t, weights))
        base = col - t[a] * weights[a] - t[b] * weights[b]
        for i, k, v in cols.get((t[a], t[b]), ()):
            out.rows.setdefault(base + i * weights[a] + k * weights[b], {})[col] = v
    return out


def qybe_residual(R: RMatrix) -> SparseMatrix:
    """``R12 R13 R23 - R23 R13 R12`` on ``(C^n)^{(x)3}``."""
    r12, r13, r23 = embed(R, 3, 0, 1), embed(R, 3, 0, 2), embed(R, 3, 1, 2)
    return r12 @ r13 @ r23 - r23 @ r13 @ r12


def mixed_relations_residual(Rp: RMatrix, R: RMatrix) -> list[SparseMatrix]:
    """Residuals of the four compatibility equations for the pair ``(R', R)``:

    ``R'12 R13 R23 = R23 R13 R'12``, ``R12 R13 R'23 = R'23 R13 R12``, the QYBE for
    ``R`` and ``(PR + 1)(PR' - 1) = 0``.
    """
    if Rp.n != R.n:
        raise DimensionError(f"R' has n={Rp.n} but R has n={R.n}")
    rp12, rp23 = embed(Rp, 3, 0, 1), embed(Rp, 3, 1, 2)
    r12, r13, r23 = embed(R, 3, 0, 1), embed(R, 3, 0, 2), embed(R, 3, 1, 2)
    one = SparseMatrix.identity(R.n**2)
    hecke = (R.pr().mat + one) @ (Rp.pr().mat - one)
    return [
        rp12 @ r13 @ r23 - r23 @ r13 @ rp12,
        r12 @ r13 @ rp23 - rp23 @ r13 @ r12,
        r12 @ r13 @ r23 - r23 @ r13 @ r12,
        hecke,
    ]


# -- Hecke condition -------------------------------------------------------------


@dataclass(frozen=True)
class HeckeResult:
    holds: bool
    eigenvalues: tuple[QScalar, QScalar] | None


def _poly_sqrt(p: flint.fmpz_poly):
    if p.is_zero():
        return p
    sign = 1
    if p.leading_coefficient() < 0:
        p, sign = -p, -1
    try:
        r = p.sqrt()
    except Exception:
        return None
    if r is None or r * r != p:
        return None
    return r if sign == 1 else None


def qscalar_sqrt(s: QScalar) -> QScalar | None:
    """Square root in Q(q) if one exists (positive leading coefficient choice)."""
    s = QScalar(s)
    if s.is_zero():
        return s
    if s.shift % 2:
        return None
    nd = _poly_sqrt(s.numerator * s.denominator)
    if nd is None:
        return None
    return QScalar.monomial(1, s.shift // 2) * QScalar._raw(nd, flint.fmpz_poly([1]), 0) / QScalar._raw(
        s.denominator, flint.fmpz_poly([1]), 0)


def _sort_key_at_one(s: QScalar):
    for q0 in (1, 2, Fraction(3, 2)):
        try:
            return float(specialize(s, q0))
        except Exception:
            continue
    return 0.0


def hecke_check(R: RMatrix) -> HeckeResult:
    """Test whether ``PR`` has a quadratic minimal polynomial with distinct roots.

    Roots are returned with the one that is larger at ``q = 1`` first.
    """
    M = R.pr().mat
    one = SparseMatrix.identity(M.nrows)
    M2 = M @ M
    # unknowns (c0, c1, c2): c0 I + c1 M + c2 M^2 = 0, one equation per entry
    rows: dict[tuple[int, int], dict[int, object]] = {}
    for idx, mat in enumerate((one, M, M2)):
        for i, j, v in mat.entries():
            rows.setdefault((i, j), {})[idx] = v
    ns = nullspace(list(rows.values()), 3)
    if len(ns) != 1 or not ns[0].get(2):
        return HeckeResult(False, None)
    vec = ns[0]
    c2 = vec[2]
    c1 = QScalar(vec.get(1, 0)) / c2
    c0 = QScalar(vec.get(0, 0)) / c2
    disc = c1 * c1 - 4 * c0
    root = qscalar_sqrt(disc)
    if root is None or root.is_zero():
        return HeckeResult(False, None)
    a = (-c1 + root) / 2
    b = (-c1 - root) / 2
    if _sort_key_at_one(a) < _sort_key_at_one(b):
        a, b = b, a
    return HeckeResult(True, (a, b))


# -- second inverse and theta data ------------------------------------------------


def second_inverse(R: RMatrix) -> RMatrix:
    """``((R^t2)^-1)^t2``."""
    try:
        return R.t2().inverse().t2()
    except SingularMatrix as exc:
        raise SingularSecondInverse("R^t2 is not invertible") from exc


@dataclass(frozen=True)
class ThetaData:
    v: SparseMatrix
    u: SparseMatrix
    lambda_nu: QScalar


def monomial_sqrt(s) -> QScalar:
    """Square root of ``c q^(2k)`` with ``c`` a positive rational square."""
    mono = QScalar(s).as_monomial()
    if mono is None:
        raise NoCanonicalRoot(f"{s} is not a monomial")
    c, e = mono
    if e % 2 or c <= 0:
        raise NoCanonicalRoot(f"{s} has no monomial square root")
    num, den = _isqrt(c.numerator), _isqrt(c.denominator)
    if num is None or den is None:
        raise NoCanonicalRoot(f"{s} has no rational square root")
    return QScalar.monomial(Fraction(num, den), e // 2)


def _isqrt(x: int):
    import math

    r = math.isqrt(x)
    return r if r * r == x else None


def theta_matrices(R: RMatrix, dilaton_factor=1) -> ThetaData:
    """``v^i_j = Rt^i_a^a_j`` and ``u^i_j = Rt^a_j^i_a`` from the second inverse ``Rt``.

    Both are multiplied by ``dilaton_factor``; ``lambda_nu`` is the canonical
    monomial square root of the scalar ``uv``.
    """
    n = R.n
    Rt = second_inverse(R)
    v = SparseMatrix(n, n)
    u = SparseMatrix(n, n)
    for (i, j, k, l), val in Rt.entries():
        if j == k:  # Rt^i_a^a_l
            v.add_to(i, l, val * dilaton_factor)
        if i == l:  # Rt^a_j^k_a -> u^k_j
            u.add_to(k, j, val * dilaton_factor)
    uv = u @ v
    scalar = uv.get(0, 0)
    if uv != SparseMatrix.identity(n, 1).scale(scalar) or not scalar:
        raise NotRibbonScalar("uv is not a nonzero scalar matrix")
    return ThetaData(v, u, monomial_sqrt(scalar))


# -- quantum metric ----------------------------------------------------------------


@dataclass(frozen=True)
class MetricSolution:
    eta: SparseMatrix
    lambda_squared: QScalar


def metric_residuals(R: RMatrix, eta: SparseMatrix, lambda_squared) -> tuple[SparseMatrix, SparseMatrix]:
    """Residuals of the two quantum metric identities

    ``eta_ia Rinv^a_j^k_l = lam^2 R^a_i^k_l eta_aj`` and
    ``eta_ka R^i_j^a_l = lam^-2 Rinv^i_j^a_k eta_al``,
    each returned as an ``n^2 x n^2`` array indexed like an RMatrix (i,j,k,l).
    """
    n = R.n
    Rinv = R.inverse()
    lam2 = lambda_squared
    res1, res2 = {}, {}
    for i, j, k, l in itertools.product(range(n), repeat=4):
        lhs = 0
        rhs = 0
        for a in range(n):
            lhs = lhs + eta.get(i, a) * Rinv[a, j, k, l]
            rhs = rhs + R[a, i, k, l] * eta.get(a, j)
        res1[(i, j, k, l)] = lhs - lam2 * rhs
        lhs = 0
        rhs = 0
        for a in range(n):
            lhs = lhs + eta.get(k, a) * R[i, j, a, l]
            rhs = rhs + Rinv[i, j, a, k] * eta.get(a, l)
        res2[(i, j, k, l)] = lhs - rhs / lam2
    return RMatrix.from_entries(n, res1).mat, RMatrix.from_entries(n, res2).mat


def _metric_equations(R: RMatrix, Rinv: RMatrix, lam2) -> list[dict[int, object]]:
    n = R.n
    rows = []
    for i, j, k, l in itertools.product(range(n), repeat=4):
        # unknown eta_xy -> column x*n+y
        r1: dict[int, object] = {}
        r2: dict[int, object] = {}
        for a in range(n):
            c = Rinv[a, j, k, l]
            if c:
                r1[i * n + a] = r1.get(i * n + a, 0) + c
            c = R[a, i, k, l]
            if c:
                r1[a * n + j] = r1.get(a * n + j, 0) - lam2 * c
            c = R[i, j, a, l]
            if c:
                r2[k * n + a] = r2.get(k * n + a, 0) + c
            c = Rinv[i, j, a, k]
            if c:
                r2[a * n + l] = r2.get(a * n + l, 0) - c / lam2
        for r in (r1, r2):
            r = {x: v for x, v in r.items() if v}
            if r:
                rows.append(r)
    return rows


def _normalise_eta(eta: SparseMatrix) -> SparseMatrix:
    i, j, v = next(iter(eta.entries()))
    return eta.scale(field_inverse(v))


def solve_metric_and_lambda(R: RMatrix, exponents: range = range(-8, 9)) -> MetricSolution:
    """Find the invertible ``eta`` and the monomial ``lambda^2 = q^k`` solving the
    quantum metric identities.

    ``eta`` is scaled so its first nonzero entry (row-major) is 1.
    """
    n = R.n
    Rinv = R.inverse()
    found: list[MetricSolution] = []
    for k in exponents:
        lam2 = QScalar.monomial(1, k)
        ns = nullspace(_metric_equations(R, Rinv, lam2), n * n)
        if not ns:
            continue
        if len(ns) > 1:
            raise AmbiguousMetric(f"metric solution space has dimension {len(ns)} at lambda^2 = {lam2}")
        eta = SparseMatrix(n, n)
        for idx, v in ns[0].items():
            eta.set(idx // n, idx % n, v)
        try:
            eta.inverse()
        except SingularMatrix:
            continue
        found.append(MetricSolution(_normalise_eta(eta), lam2))
    if not found:
        raise NoMetric("no invertible quantum metric with monomial lambda^2")
    if len(found) > 1:
        raise AmbiguousMetric(
            "metric exists for several lambda^2: " + ", ".join(str(f.lambda_squared) for f in found))
    return found[0]


# -- 4-dimensional matrix models ----------------------------------------------------


def hecke_standard_scale(R: RMatrix) -> QScalar:
    """Factor ``c`` such that ``P(cR)`` has eigenvalues ``q`` and ``-q^-1``."""
    res = hecke_check(R)
    if not res.holds:
        raise NotHecke("R is not q-Hecke")
    a, b = res.eigenvalues
    # want c*a / (c*b) = -q^2 with c*b = -q^-1
    if a / b != -Q_GEN * Q_GEN:
        raise NotHecke(f"eigenvalue ratio {a / b} is not -q^2")
    return -1 / (Q_GEN * b)


def assemble_big_matrices(R: RMatrix, layout: str) -> tuple[RMatrix, RMatrix]:
    """Multi-index matrices ``(R', R)`` on ``I = (i0, i1) -> i0*n + i1`` for the
    2x2-matrix layouts ``"euclidean"`` and ``"minkowski"``.

    ``R`` is first rescaled so that ``PR`` has eigenvalues ``q, -q^-1``.  The
    covector relations ``x1 x2 = x2 x1 R'`` and braid statistics
    ``x1' x2 = x2 x1' R`` then reproduce

    * euclidean: ``R21 p1 p2 = p2 p1 R`` and ``p1' p2 = R p2 p1' R``;
    * minkowski: ``R21 p1 R p2 = p2 R21 p1 R`` and ``R^-1 p1' R p2 = p2 R21 p1' R``.
    """
    from braidkit.matrixforms import big_matrices

    c = hecke_standard_scale(R)
    return big_matrices(R.scale(c), layout)
