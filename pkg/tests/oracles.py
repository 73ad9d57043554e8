"""Independent dense reference computations over Q at a fixed rational q."""

from __future__ import annotations

import itertools
from fractions import Fraction

from braidkit.scalars import specialize

Q0 = Fraction(3)


def dense(mat, q0=Q0) -> list[list[Fraction]]:
    return [[specialize(v, q0) if v != 0 else Fraction(0) for v in row] for row in mat.to_dense(0)]


def r_tensor(R, q0=Q0) -> dict:
    """``{(i, j, k, l): R^i_j^k_l}`` at ``q = q0``."""
    n = R.n
    out = {}
    for i, j, k, l in itertools.product(range(n), repeat=4):
        v = R[i, j, k, l]
        out[i, j, k, l] = specialize(v, q0) if v != 0 else Fraction(0)
    return out


def as_matrix(t: dict, n: int) -> list[list[Fraction]]:
    """Rows ``(i, k)``, columns ``(j, l)``."""
    M = [[Fraction(0)] * (n * n) for _ in range(n * n)]
    for (i, j, k, l), v in t.items():
        M[i * n + k][j * n + l] = v
    return M


def from_matrix(M, n: int) -> dict:
    return {(i, j, k, l): M[i * n + k][j * n + l] for i, j, k, l in itertools.product(range(n), repeat=4)}


def inverse(M: list[list[Fraction]]) -> list[list[Fraction]]:
    """Gauss-Jordan over Q."""
    size = len(M)
    A = [list(row) + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(M)]
    for c in range(size):
        p = next(r for r in range(c, size) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(size):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[size:] for row in A]


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def rank(rows: list[list[Fraction]]) -> int:
    A = [list(r) for r in rows]
    rk, ncols = 0, len(A[0]) if A else 0
    for c in range(ncols):
        p = next((r for r in range(rk, len(A)) if A[r][c] != 0), None)
        if p is None:
            continue
        A[rk], A[p] = A[p], A[rk]
        for r in range(len(A)):
            if r != rk and A[r][c] != 0:
                f = A[r][c] / A[rk][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rk])]
        rk += 1
    return rk


def theta_oracle(R, q0=Q0):
    """``v`` and ``u`` from an explicit dense second inverse."""
    n = R.n
    t = r_tensor(R, q0)
    t2 = {(i, j, l, k): v for (i, j, k, l), v in t.items()}
    inv = from_matrix(inverse(as_matrix(t2, n)), n)
    rt = {(i, j, l, k): v for (i, j, k, l), v in inv.items()}
    v = [[sum(rt[i, a, a, j] for a in range(n)) for j in range(n)] for i in range(n)]
    u = [[sum(rt[a, j, i, a] for a in range(n)) for j in range(n)] for i in range(n)]
    return v, u


def quadratic_relation_rank(Rp, q0=Q0) -> int:
    """Rank of the span of ``x_i x_k - x_l x_j R'^j_i^l_k`` in degree 2 (the relation ideal)."""
    n = Rp.n
    t = r_tensor(Rp, q0)
    rows = []
    for i, k in itertools.product(range(n), repeat=2):
        row = [Fraction(0)] * (n * n)
        row[i * n + k] += 1
        for j, l in itertools.product(range(n), repeat=2):
            row[l * n + j] -= t[j, i, l, k]
        rows.append(row)
    return rank(rows)


def quotient_dimension(Rp, m: int, q0=Q0) -> int:
    """``n^m`` minus the rank of the degree-``m`` part of the ideal spanned by the quadratic relations."""
    n = Rp.n
    t = r_tensor(Rp, q0)
    rels = []
    for i, k in itertools.product(range(n), repeat=2):
        rel = {(i, k): Fraction(1)}
        for j, l in itertools.product(range(n), repeat=2):
            if t[j, i, l, k]:
                rel[(l, j)] = rel.get((l, j), 0) - t[j, i, l, k]
        rels.append(rel)
    weights = [n ** (m - 1 - p) for p in range(m)]
    rows = []
    for p in range(m - 1):
        for left in itertools.product(range(n), repeat=p):
            for right in itertools.product(range(n), repeat=m - 2 - p):
                for rel in rels:
                    row = [Fraction(0)] * (n**m)
                    for pair, c in rel.items():
                        w = left + pair + right
                        row[sum(x * y for x, y in zip(w, weights))] += c
                    rows.append(row)
    return n**m - (rank(rows) if rows else 0)
