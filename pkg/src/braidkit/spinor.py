"""Rotation generators of the two-copy symmetry acting on matrix-layout coordinates.

Coordinates are ``x_I`` with ``I = (i0, i1) -> i0*n + i1`` read as a matrix entry.
The copy with generators ``L+-`` acts on the row index, the copy with ``M+-`` on the
column index:

    L+^i_j > x^k_l = mu^-1 (R21^-1)^i_j^k_b x^b_l      L-^i_j > x^k_l = mu R^i_j^k_b x^b_l
    M+^i_j > x^k_l = mu x^k_b R21^i_j^b_l              M-^i_j > x^k_l = mu^-1 x^k_b (R^-1)^i_j^b_l

with ``mu = lambda^(1/2)`` and ``R`` the Hecke-normalized seed.  Products use the
matrix coproduct of each copy.  In the Minkowski layout the coproduct is twisted,
``chi Delta(h) chi^-1`` with ``chi = R_23^-1`` (first leg in the ``M`` copy, second
in the ``L`` copy), which on ``V_1 (x) W`` reads
``chi(x^k_l (x) w) = x^k_b (x) (L-^b_l > w)``.
"""

from __future__ import annotations

import itertools

from braidkit.braided_space import degree_basis
from braidkit.linalg import SparseMatrix, kron

__all__ = ["GENERATORS", "free_action", "small_generator_op"]

GENERATORS = ("L+", "L-", "M+", "M-")
_MU = {"L+": -1, "L-": 1, "M+": 1, "M-": -1}


def _degree_one(model, g: str, i: int, j: int) -> SparseMatrix:
    seed = model.seed
    n = seed.n
    N = n * n
    mats = model.cache.get("seed_mats")
    if mats is None:
        mats = {"R": seed, "R21": seed.r21(), "Rinv": seed.inverse(), "R21inv": seed.r21().inverse()}
        model.cache["seed_mats"] = mats
    out = SparseMatrix(N, N)
    for k in range(n):
        for l in range(n):
            col = k * n + l
            for b in range(n):
                if g == "L+":
                    v, row = mats["R21inv"][i, j, k, b], b * n + l
                elif g == "L-":
                    v, row = mats["R"][i, j, k, b], b * n + l
                elif g == "M+":
                    v, row = mats["R21"][i, j, b, l], k * n + b
                else:
                    v, row = mats["Rinv"][i, j, b, l], k * n + b
                if v:
                    out.add_to(row, col, v)
    return out


def free_action(model, g: str, i: int, j: int, m: int) -> SparseMatrix:
    """Action on the free tensor power ``V_1^(x)m`` with the factor ``mu^(+-m)`` removed."""
    if model.seed is None:
        raise ValueError(f"{model.name} has no matrix layout")
    key = ("spinor", g, i, j, m)
    hit = model.cache.get(key)
    if hit is not None:
        return hit
    n = model.seed.n
    N = n * n
    if m == 0:
        out = SparseMatrix.identity(1, 1 if i == j else 0)
        if i != j:
            out = SparseMatrix(1, 1)
    elif m == 1:
        out = _degree_one(model, g, i, j)
    else:
        out = SparseMatrix(N ** m, N ** m)
        for a in range(n):
            out = out + kron(free_action(model, g, i, a, 1), free_action(model, g, a, j, m - 1))
        if model.layout == "minkowski":
            chi = _chi(model, m)
            out = chi @ out @ _chi_inverse(model, m)
    model.cache[key] = out
    return out


def _chi(model, m: int) -> SparseMatrix:
    key = ("spinor_chi", m)
    hit = model.cache.get(key)
    if hit is None:
        n = model.seed.n
        N = n * n
        hit = SparseMatrix(N ** m, N ** m)
        for b in range(n):
            for l in range(n):
                shift = SparseMatrix(N, N)
                for k in range(n):
                    shift.add_to(k * n + b, k * n + l, 1)
                hit = hit + kron(shift, free_action(model, "L-", b, l, m - 1))
        model.cache[key] = hit
    return hit


def _chi_inverse(model, m: int) -> SparseMatrix:
    key = ("spinor_chi_inv", m)
    hit = model.cache.get(key)
    if hit is None:
        hit = _chi(model, m).inverse()
        model.cache[key] = hit
    return hit


def small_generator_op(model, g: str, i: int, j: int):
    """The generator ``g^i_j`` (``g`` in ``L+, L-, M+, M-``) as a graded operator."""
    from braidkit.operators import GradedOperator, LamBlock, _memo_op, mu_rule

    if g not in GENERATORS:
        raise ValueError(f"unknown generator {g!r}")
    n = model.seed.n if model.seed is not None else 0
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("generator index out of range")

    def build(m):
        b = degree_basis(model, m)
        free = free_action(model, g, i, j, m)
        N = model.n
        out = SparseMatrix(b.dim, b.dim)
        for col, w in enumerate(b.words):
            src = 0
            for letter in w:
                src = src * N + letter
            img = {r: row[src] for r, row in free.rows.items() if src in row}
            for r, c in b.reduction.apply(img).items():
                out.add_to(r, col, c)
        return LamBlock.plain(out, _MU[g] * m, mu_rule(model))

    def lift(w):
        free = free_action(model, g, i, j, len(w))
        N = model.n
        src = 0
        for letter in w:
            src = src * N + letter
        words = list(itertools.product(range(N), repeat=len(w)))
        return {words[r]: row[src] for r, row in free.rows.items() if src in row}

    return _memo_op(model, ("spinor", g, i, j),
                    lambda: GradedOperator(model, 0, build, f"{g}^{i}_{j}", lift))
