"""Built-in braided-space models and the validation gate for custom ones."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from braidkit.linalg import SparseMatrix
from braidkit.rmatrix import (
    AmbiguousMetric,
    NoCanonicalRoot,
    NoMetric,
    RMatrix,
    ThetaData,
    assemble_big_matrices,
    hecke_check,
    hecke_standard_scale,
    metric_residuals,
    mixed_relations_residual,
    monomial_sqrt,
    qybe_residual,
    solve_metric_and_lambda,
    theta_matrices,
)
from braidkit.scalars import QScalar, parse_qscalar, q

__all__ = [
    "ModelSpec",
    "ModelValidationError",
    "UnknownModel",
    "build_model",
    "gl_seed",
    "load_model",
    "model_names",
]

VECTOR, EUCLIDEAN, MINKOWSKI = "vector", "euclidean", "minkowski"
TYPE_I, TYPE_II = "I", "II"


class UnknownModel(KeyError):
    pass


class ModelValidationError(ValueError):
    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(eq=False)
class ModelSpec:
    """Data of one braided covector space ``V(R', R)`` and its symmetry.

    ``lam`` is the normalisation constant when it lies in Q(q); ``lambda_squared``
    is always recorded when a metric exists.  For matrix layouts ``seed`` is the
    2-dimensional R-matrix normalized to eigenvalues ``q, -q^-1``.
    """

    name: str
    n: int
    R: RMatrix
    Rprime: RMatrix
    eta: SparseMatrix | None = None
    lambda_squared: QScalar | None = None
    lam: QScalar | None = None
    theta: ThetaData | None = None
    star_type: str | None = None
    bar: tuple[int, ...] | None = None
    layout: str = VECTOR
    seed: RMatrix | None = None
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def lambda_nu(self) -> QScalar | None:
        return self.theta.lambda_nu if self.theta else None

    @property
    def eta_upper(self) -> SparseMatrix:
        """``eta^{ij}``, the inverse transpose of ``eta_{ij}``."""
        hit = self.cache.get("eta_upper")
        if hit is None:
            hit = self.eta.inverse().transpose()
            self.cache["eta_upper"] = hit
        return hit

    @property
    def has_metric(self) -> bool:
        return self.eta is not None

    def to_json_obj(self) -> dict:
        def mat(m):
            if m is None:
                return None
            return [[str(QScalar(v)) for v in row] for row in m.to_dense(0)]

        return {
            "name": self.name,
            "n": self.n,
            "R": self.R.to_json_obj(),
            "Rprime": self.Rprime.to_json_obj(),
            "eta": mat(self.eta),
            "lambda_squared": None if self.lambda_squared is None else str(self.lambda_squared),
            "lambda_nu": None if self.lambda_nu is None else str(self.lambda_nu),
            "v": mat(self.theta.v) if self.theta else None,
            "u": mat(self.theta.u) if self.theta else None,
            "star_type": self.star_type,
            "bar": list(self.bar) if self.bar else None,
            "layout": self.layout,
        }


# -- seeds ------------------------------------------------------------------------------


def gl_seed(n: int) -> RMatrix:
    """Standard gl_n R-matrix scaled by ``q`` so that ``(PR - q^2)(PR + 1) = 0``."""
    e = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                e[(i, i, i, i)] = q
            else:
                e[(i, i, j, j)] = QScalar(1)
            if i > j:
                e[(i, j, j, i)] = q - 1 / q
    return RMatrix.from_entries(n, e).scale(q)


# -- validation ---------------------------------------------------------------------------


def _normalise_eta(eta: SparseMatrix) -> SparseMatrix:
    """Rescale so that ``eta`` at ``q = 1`` is finite with entries in {0, 1, -1}."""
    from braidkit.scalars import PoleAtSpecialization, specialize

    for _, _, v in eta.entries():
        cand = eta.scale(1 / QScalar(v))
        try:
            vals = [specialize(x, 1) for _, _, x in cand.entries()]
        except PoleAtSpecialization:
            continue
        if all(x in (0, 1, -1) for x in vals):
            return cand
    _, _, v = next(iter(eta.entries()))
    return eta.scale(1 / QScalar(v))


def validate(model: ModelSpec) -> ModelSpec:
    """Run the structural battery; raise :class:`ModelValidationError` on failure."""
    for k, res in enumerate(mixed_relations_residual(model.Rprime, model.R)):
        if not res.is_zero():
            raise ModelValidationError(f"compatibility equation {k + 1} fails", res)
    if model.eta is not None:
        for k, res in enumerate(metric_residuals(model.R, model.eta, model.lambda_squared)):
            if not res.is_zero():
                raise ModelValidationError(f"metric identity {k + 1} fails", res)
    if model.seed is not None and not hecke_check(model.seed).holds:
        raise ModelValidationError("seed is not q-Hecke")
    return model


def _attach_metric(model: ModelSpec, required: bool) -> None:
    try:
        sol = solve_metric_and_lambda(model.R)
    except (NoMetric, AmbiguousMetric):
        if required:
            raise
        return
    model.eta = _normalise_eta(sol.eta)
    model.lambda_squared = sol.lambda_squared
    try:
        model.lam = monomial_sqrt(sol.lambda_squared)
    except NoCanonicalRoot:
        model.lam = None


def _quantum_plane(n: int) -> ModelSpec:
    R = gl_seed(n)
    model = ModelSpec(name=f"quantum_plane:{n}", n=n, R=R, Rprime=R.scale(q**-2))
    _attach_metric(model, required=False)
    if model.eta is not None:
        model.star_type = TYPE_I
    model.theta = theta_matrices(R)
    return validate(model)


def _matrix_model(layout: str) -> ModelSpec:
    seed = gl_seed(2)
    Rp, Rb = assemble_big_matrices(seed, layout)
    name = "q_euclidean_4" if layout == EUCLIDEAN else "q_minkowski_4"
    model = ModelSpec(name=name, n=4, R=Rb, Rprime=Rp, layout=layout,
                      seed=seed.scale(hecke_standard_scale(seed)))
    _attach_metric(model, required=True)
    model.theta = theta_matrices(Rb)
    if layout == EUCLIDEAN:
        model.star_type = TYPE_I
    else:
        model.star_type = TYPE_II
        model.bar = tuple((i % 2) * 2 + i // 2 for i in range(4))
    return validate(model)


_CATALOG: dict[str, Callable[[], ModelSpec]] = {
    "quantum_plane:2": lambda: _quantum_plane(2),
    "quantum_plane:3": lambda: _quantum_plane(3),
    "q_euclidean_4": lambda: _matrix_model(EUCLIDEAN),
    "q_minkowski_4": lambda: _matrix_model(MINKOWSKI),
}

_BUILT: dict[str, ModelSpec] = {}


def model_names() -> list[str]:
    return sorted(_CATALOG)


def build_model(name: str, fresh: bool = False) -> ModelSpec:
    """Return the validated built-in model ``name`` (shared instance unless ``fresh``)."""
    ctor = _CATALOG.get(name)
    if ctor is None:
        raise UnknownModel(name)
    if fresh:
        return ctor()
    model = _BUILT.get(name)
    if model is None:
        model = _BUILT[name] = ctor()
    return model


def load_model(text: str, name: str = "custom") -> ModelSpec:
    """Custom model from JSON ``{"R": <rmatrix>, "Rprime": <rmatrix>}``.

    A bare R-matrix object is also accepted, in which case ``R' = R / mu`` with
    ``mu`` the larger Hecke eigenvalue.
    """
    obj = json.loads(text)
    if "R" in obj:
        R = RMatrix.from_json_obj(obj["R"])
        if "Rprime" in obj:
            Rp = RMatrix.from_json_obj(obj["Rprime"])
        else:
            Rp = _default_rprime(R)
    else:
        R = RMatrix.from_json_obj(obj)
        Rp = _default_rprime(R)
    if qybe_residual(R).is_zero() is False:
        raise ModelValidationError("R does not satisfy the QYBE", qybe_residual(R))
    model = ModelSpec(name=obj.get("name", name) if isinstance(obj, dict) else name, n=R.n, R=R, Rprime=Rp)
    _attach_metric(model, required=False)
    if model.eta is not None:
        model.star_type = TYPE_I
        try:
            model.theta = theta_matrices(R)
        except Exception:
            model.theta = None
    return validate(model)


def _default_rprime(R: RMatrix) -> RMatrix:
    res = hecke_check(R)
    if not res.holds:
        raise ModelValidationError("cannot infer R' for a non-Hecke R")
    return R.scale(1 / res.eigenvalues[0])
