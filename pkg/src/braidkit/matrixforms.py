"""Coefficient matching for matrix-form braided linear spaces.

A 2x2-block relation such as ``R21 p1 R p2 = p2 R21 p1 R`` is expanded as a
product of ``n^2 x n^2`` matrices whose entries are linear combinations of
two-letter words in the generators ``p_I``, ``I = (i0, i1) -> i0*n + i1``.
Solving the resulting linear system for one word order in terms of the other
yields the multi-index matrices of the equivalent covector description.
"""

from __future__ import annotations

from braidkit.linalg import SingularMatrix, SparseMatrix
from braidkit.rmatrix import RMatrix

__all__ = ["big_matrices", "word_chain", "solve_exchange"]

# chain factors: ("R", RMatrix) numeric, ("p1", tag) or ("p2", tag) symbolic
Factor = tuple


def _numeric(R: RMatrix) -> list[list[dict]]:
    N = R.n * R.n
    out = [[{} for _ in range(N)] for _ in range(N)]
    for r, c, v in R.mat.entries():
        out[r][c] = {(): v}
    return out


def _symbolic(n: int, slot: int, tag: str) -> list[list[dict]]:
    """``p`` in tensor slot 1 or 2 as an ``n^2 x n^2`` matrix of letters."""
    N = n * n
    out = [[{} for _ in range(N)] for _ in range(N)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if slot == 1 and b == d:
                        out[a * n + b][c * n + d] = {((tag, a * n + c),): 1}
                    elif slot == 2 and a == c:
                        out[a * n + b][c * n + d] = {((tag, b * n + d),): 1}
    return out


def _matmul(x, y):
    N = len(x)
    out = [[{} for _ in range(N)] for _ in range(N)]
    for i in range(N):
        for k in range(N):
            xe = x[i][k]
            if not xe:
                continue
            for j in range(N):
                ye = y[k][j]
                if not ye:
                    continue
                acc = out[i][j]
                for w1, c1 in xe.items():
                    for w2, c2 in ye.items():
                        w = w1 + w2
                        v = acc.get(w, 0) + c1 * c2
                        if v:
                            acc[w] = v
                        else:
                            acc.pop(w, None)
    return out


def word_chain(n: int, factors: list[Factor]) -> list[list[dict]]:
    """Evaluate a matrix product; each entry maps a word to its coefficient."""
    mats = []
    for kind, data in factors:
        if kind == "R":
            mats.append(_numeric(data))
        else:
            mats.append(_symbolic(n, 1 if kind == "p1" else 2, data))
    out = mats[0]
    for m in mats[1:]:
        out = _matmul(out, m)
    return out


def solve_exchange(n: int, lhs: list[Factor], rhs: list[Factor], first: str, second: str) -> RMatrix:
    """Solve ``lhs = rhs`` for the ordered words ``first_I second_J`` of ``lhs``.

    The right side must consist of words ``second_B first_A``; the returned
    multi-index matrix ``M`` satisfies ``first_I second_J = sum second_B first_A M^A_I^B_J``.
    """
    N = n * n
    L = word_chain(n, lhs)
    Rr = word_chain(n, rhs)
    A = SparseMatrix(N * N, N * N)
    B = SparseMatrix(N * N, N * N)
    for r in range(N):
        for c in range(N):
            e = r * N + c
            for w, v in L[r][c].items():
                (t1, I), (t2, J) = w
                if (t1, t2) != (first, second):
                    raise ValueError(f"unexpected word order {t1}{t2} on left side")
                A.add_to(e, I * N + J, v)
            for w, v in Rr[r][c].items():
                (t1, Bi), (t2, Ai) = w
                if (t1, t2) != (second, first):
                    raise ValueError(f"unexpected word order {t1}{t2} on right side")
                B.add_to(e, Bi * N + Ai, v)
    try:
        M = A.inverse() @ B
    except SingularMatrix as exc:
        raise ValueError("left side does not determine the ordered products") from exc
    entries = {}
    for row, col, v in M.entries():
        I, J = divmod(row, N)
        Bi, Ai = divmod(col, N)
        entries[(Ai, I, Bi, J)] = v
    return RMatrix.from_entries(N, entries)


def big_matrices(R: RMatrix, layout: str) -> tuple[RMatrix, RMatrix]:
    """``(R', R)`` multi-index matrices for a Hecke-normalized ``R``."""
    n = R.n
    R21 = R.r21()
    Rinv = R.inverse()
    if layout == "euclidean":
        rel = ([("R", R21), ("p1", "x"), ("p2", "x")],
               [("p2", "x"), ("p1", "x"), ("R", R)])
        stat = ([("p1", "y"), ("p2", "x")],
                [("R", R), ("p2", "x"), ("p1", "y"), ("R", R)])
    elif layout == "minkowski":
        rel = ([("R", R21), ("p1", "x"), ("R", R), ("p2", "x")],
               [("p2", "x"), ("R", R21), ("p1", "x"), ("R", R)])
        stat = ([("R", Rinv), ("p1", "y"), ("R", R), ("p2", "x")],
                [("p2", "x"), ("R", R21), ("p1", "y"), ("R", R)])
    else:
        raise ValueError(f"unknown layout {layout!r}")
    # relations: x_I x_J = x_B x_A R'^A_I^B_J with the same letter on both sides
    Rp = _solve_relation(n, *rel)
    # statistics: primed letters sit in the second tensor factor, so
    # y_I x_J is Psi(x_I (x) x_J) and x_B y_A is x_B (x) x_A
    Rb = solve_exchange(n, stat[0], stat[1], "y", "x")
    return Rp, Rb


def _solve_relation(n: int, lhs: list[Factor], rhs: list[Factor]) -> RMatrix:
    # tag the two copies of p so that word order is visible, then identify
    lhs = [(k, ("a" if k == "p1" else "b")) if k != "R" else (k, d) for k, d in lhs]
    rhs = [(k, ("a" if k == "p1" else "b")) if k != "R" else (k, d) for k, d in rhs]
    return solve_exchange(n, lhs, rhs, "a", "b")
