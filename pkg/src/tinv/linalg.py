"""Exact linear algebra helpers: field rank/solve, integer HNF and SNF.

Matrices are dense lists of lists (sizes here are small after scanning);
integer routines use textbook fraction-free eliminations.
"""

from __future__ import annotations

from fractions import Fraction


# -- field operations (domain objects from .ring: QQ or GF(p)) -------------


def f_rank(dom, rows) -> int:
    if not rows or not rows[0]:
        return 0
    A = [list(r) for r in rows]
    m, n = len(A), len(A[0])
    rank = 0
    col = 0
    for col in range(n):
        piv = None
        for i in range(rank, m):
            if not dom.is_zero(A[i][col]):
                piv = i
                break
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = dom.inv(A[rank][col])
        A[rank] = [dom.mul(x, inv) for x in A[rank]]
        for i in range(m):
            if i != rank and not dom.is_zero(A[i][col]):
                f = A[i][col]
                A[i] = [dom.sub(x, dom.mul(f, y)) for x, y in zip(A[i], A[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def f_solve(dom, rows, rhs):
    """One solution x of A x = b over the field, or None."""
    if not rows:
        return [] if all(dom.is_zero(v) for v in rhs) else None
    m, n = len(rows), len(rows[0])
    A = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    pivots = []
    rank = 0
    for col in range(n):
        piv = None
        for i in range(rank, m):
            if not dom.is_zero(A[i][col]):
                piv = i
                break
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = dom.inv(A[rank][col])
        A[rank] = [dom.mul(x, inv) for x in A[rank]]
        for i in range(m):
            if i != rank and not dom.is_zero(A[i][col]):
                f = A[i][col]
                A[i] = [dom.sub(x, dom.mul(f, y)) for x, y in zip(A[i], A[rank])]
        pivots.append(col)
        rank += 1
    for i in range(rank, m):
        if not dom.is_zero(A[i][n]):
            return None
    x = [dom.of_int(0)] * n
    for r, col in enumerate(pivots):
        x[col] = A[r][n]
    return x


# -- integer routines -------------------------------------------------------


def hnf_cols(Ain):
    """Column-style Hermite form: returns (H, U) with H = A @ U, U unimodular.

    H has columns of decreasing support (staircase by rows).
    """
    if not Ain:
        return [], []
    A = [list(r) for r in Ain]
    m, n = len(A), len(A[0])
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def colop_add(j, k, q):
        # col_j += q * col_k
        for i in range(m):
            A[i][j] += q * A[i][k]
        for i in range(n):
            U[i][j] += q * U[i][k]

    def colop_swap(j, k):
        for i in range(m):
            A[i][j], A[i][k] = A[i][k], A[i][j]
        for i in range(n):
            U[i][j], U[i][k] = U[i][k], U[i][j]

    def colop_neg(j):
        for i in range(m):
            A[i][j] = -A[i][j]
        for i in range(n):
            U[i][j] = -U[i][j]

    r = 0
    for row in range(m):
        if r == n:
            break
        # gcd out the row entries in columns >= r
        while True:
            nz = [j for j in range(r, n) if A[row][j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(A[row][j]))
            if jmin != r:
                colop_swap(r, jmin)
            done = True
            for j in range(r + 1, n):
                if A[row][j] != 0:
                    q = A[row][j] // A[row][r]
                    colop_add(j, r, -q)
                    if A[row][j] != 0:
                        done = False
            if done:
                break
        if A[row][r] if r < n else 0:
            if A[row][r] < 0:
                colop_neg(r)
            r += 1
    return A, U


def z_solve(Ain, b):
    """Integer solution x of A x = b, or None."""
    if not Ain:
        return [] if all(v == 0 for v in b) else None
    m, n = len(Ain), len(Ain[0])
    if n == 0:
        return [] if all(v == 0 for v in b) else None
    H, U = hnf_cols(Ain)
    # solve H y = b by forward substitution over the staircase
    y = [0] * n
    col = 0
    rem = list(b)
    for row in range(m):
        if col < n and H[row][col] != 0:
            if rem[row] % H[row][col] != 0:
                return None
            q = rem[row] // H[row][col]
            y[col] = q
            for i in range(m):
                rem[i] -= q * H[i][col]
            col += 1
        elif rem[row] != 0:
            return None
    if any(v != 0 for v in rem):
        return None
    # x = U y
    x = [sum(U[i][j] * y[j] for j in range(n)) for i in range(n)]
    return x


def z_kernel(Ain):
    """Basis (list of vectors) of the integer kernel of A."""
    if not Ain or not Ain[0]:
        n = len(Ain[0]) if Ain else 0
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    m, n = len(Ain), len(Ain[0])
    H, U = hnf_cols(Ain)
    out = []
    for j in range(n):
        if all(H[i][j] == 0 for i in range(m)):
            out.append([U[i][j] for i in range(n)])
    return out


def smith_normal_form(Ain):
    """(D, S, T) with D = S A T in Smith form; S, T unimodular."""
    A = [list(r) for r in Ain]
    m = len(A)
    n = len(A[0]) if A else 0
    S = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    T = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_add(i, k, q):
        A[i] = [a + q * b for a, b in zip(A[i], A[k])]
        S[i] = [a + q * b for a, b in zip(S[i], S[k])]

    def col_add(j, k, q):
        for r in range(m):
            A[r][j] += q * A[r][k]
        for r in range(n):
            T[r][j] += q * T[r][k]

    def row_swap(i, k):
        A[i], A[k] = A[k], A[i]
        S[i], S[k] = S[k], S[i]

    def col_swap(j, k):
        for r in range(m):
            A[r][j], A[r][k] = A[r][k], A[r][j]
        for r in range(n):
            T[r][j], T[r][k] = T[r][k], T[r][j]

    def row_neg(i):
        A[i] = [-a for a in A[i]]
        S[i] = [-a for a in S[i]]

    t = 0
    while t < min(m, n):
        # find pivot: smallest nonzero abs value in A[t:, t:]
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < best):
                    best = abs(A[i][j])
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        row_swap(t, i)
        col_swap(t, j)
        if A[t][t] < 0:
            row_neg(t)
        done = True
        for i in range(t + 1, m):
            if A[i][t] % A[t][t] != 0:
                done = False
            row_add(i, t, -(A[i][t] // A[t][t]))
        for j in range(t + 1, n):
            if A[t][j] % A[t][t] != 0:
                done = False
            col_add(j, t, -(A[t][j] // A[t][t]))
        if not done:
            continue
        if any(A[i][t] != 0 for i in range(t + 1, m)) or any(
            A[t][j] != 0 for j in range(t + 1, n)
        ):
            continue
        # divisibility sweep
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            row_add(t, bad, 1)
            continue
        t += 1
    return A, S, T


def z_homology_ranks(d_in, d_out, size):
    """(free rank, torsion list) of ker(d_out)/im(d_in).

    d_out: matrix with `size` columns; d_in: matrix with `size` rows.
    """
    if size == 0:
        return 0, []
    ker = z_kernel(d_out) if d_out else [
        [1 if i == j else 0 for j in range(size)] for i in range(size)
    ]
    k = len(ker)
    if k == 0:
        return 0, []
    if not d_in or not d_in[0]:
        return k, []
    # express image columns in the kernel basis
    ncols = len(d_in[0])
    K = [[ker[j][i] for j in range(k)] for i in range(size)]  # size x k
    coords = []
    for c in range(ncols):
        b = [d_in[i][c] for i in range(size)]
        x = z_solve(K, b)
        if x is None:
            raise ArithmeticError("image not contained in kernel")
        coords.append(x)
    M = [[coords[c][r] for c in range(ncols)] for r in range(k)]  # k x ncols
    D, S, T = smith_normal_form(M)
    diag = [D[i][i] for i in range(min(k, ncols))]
    rank_im = sum(1 for v in diag if v != 0)
    torsion = [abs(v) for v in diag if v not in (0, 1, -1)]
    return k - rank_im, torsion
