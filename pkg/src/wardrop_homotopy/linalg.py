"""Exact rational matrix kernel for reduced Laplacians.

Matrices are lists of rows of ``Fraction``.  Reduced vectors and matrices
drop the source coordinate.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .costs import CONSTANT, InverseCost
from .errors import SingularMatrixError, ValidationError
from .network import Network

Matrix = list[list[Fraction]]


def identity(k: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]


def mat_vec(A: Matrix, v: Sequence) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) for row in A]


def vec_mat(v: Sequence, A: Matrix) -> list[Fraction]:
    k = len(A[0]) if A else 0
    out = [Fraction(0)] * k
    for vi, row in zip(v, A):
        if vi:
            for j, a in enumerate(row):
                if a:
                    out[j] += vi * a
    return out


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    return [vec_mat(row, B) for row in A]


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def conductance_matrix(
    net: Network,
    inverses: Sequence[InverseCost],
    region: Sequence[int],
    allow_constant: bool = False,
) -> tuple[list[Optional[Fraction]], list[Optional[Fraction]]]:
    """Per-edge conductivity and offset of the selected inverse segments.

    Constant segments have neither; they are reported as ``None``.
    """
    cs: list[Optional[Fraction]] = []
    ds: list[Optional[Fraction]] = []
    for e in range(net.m):
        seg = inverses[e][region[e]]
        if seg.kind == CONSTANT:
            if not allow_constant:
                raise ValidationError(f"edge {net.edge_ids[e]} sits on a constant piece but the extension is off")
            cs.append(None)
            ds.append(None)
        else:
            cs.append(seg.c)
            ds.append(seg.d)
    return cs, ds


def reduced_laplacian(net: Network, conductances: Sequence[Fraction]) -> Matrix:
    """Gamma C Gamma^T with the source row and column removed."""
    k = net.n - 1
    L = [[Fraction(0)] * k for _ in range(k)]
    for (u, w), c in zip(net.edges, conductances):
        if c is None:
            raise ValueError("constant segments have no conductance")
        if not c:
            continue
        iu, iw = u - 1, w - 1
        if iu >= 0:
            L[iu][iu] += c
        if iw >= 0:
            L[iw][iw] += c
        if iu >= 0 and iw >= 0:
            L[iu][iw] -= c
            L[iw][iu] -= c
    return L


def invert_spd(A: Matrix) -> Matrix:
    """Exact inverse by fraction-free Gauss-Jordan elimination.

    The matrix is scaled to integers, reduced with Bareiss' exact-division
    scheme on ``[B | I]`` and the adjugate is divided by the determinant at
    the end.  Row exchanges handle zero pivots, so any nonsingular matrix is
    accepted.
    """
    k = len(A)
    if k == 0:
        return []
    scale = 1
    for row in A:
        for a in row:
            scale = lcm(scale, Fraction(a).denominator)
    M = [[int(Fraction(a) * scale) for a in row] + [int(i == j) for j in range(k)] for i, row in enumerate(A)]
    prev = 1
    for p in range(k):
        if M[p][p] == 0:
            swap = next((r for r in range(p + 1, k) if M[r][p] != 0), None)
            if swap is None:
                raise SingularMatrixError("matrix is singular")
            M[p], M[swap] = M[swap], M[p]
        piv = M[p][p]
        rowp = M[p]
        for i in range(k):
            if i == p:
                continue
            rowi = M[i]
            f = rowi[p]
            M[i] = [(piv * rowi[j] - f * rowp[j]) // prev for j in range(2 * k)]
        prev = piv
    # the left block is now det(B) * I
    return [[Fraction(M[i][k + j] * scale, M[i][i]) for j in range(k)] for i in range(k)]


def sherman_morrison_update(H: Matrix, g: Sequence, dc) -> Matrix:
    """Inverse of ``L + dc g g^T`` given ``H = L^{-1}``.

    Raises :class:`SingularMatrixError` when ``1 + dc g^T H g`` vanishes.
    """
    dc = Fraction(dc)
    if dc == 0:
        return [row[:] for row in H]
    u = mat_vec(H, g)
    w = vec_mat(g, H)
    denom = 1 + dc * dot(g, u)
    if denom == 0:
        raise SingularMatrixError("rank-one update makes the matrix singular")
    f = dc / denom
    return _rank_one_sub(H, u, w, f)


def sherman_morrison_limit(H: Matrix, g: Sequence) -> Matrix:
    """Limit of the rank-one update as the added conductance tends to infinity.

    Returns ``(I - H g g^T / (g^T H g)) H``, which annihilates ``g`` from
    both sides.
    """
    u = mat_vec(H, g)
    w = vec_mat(g, H)
    q = dot(g, u)
    if q == 0:
        raise SingularMatrixError("g^T H g vanishes; the limit is undefined")
    return _rank_one_sub(H, u, w, 1 / q)


def _rank_one_sub(H: Matrix, u: Sequence, w: Sequence, f: Fraction) -> Matrix:
    out = []
    for i, row in enumerate(H):
        fu = f * u[i]
        if fu:
            out.append([h - fu * wj if wj else h for h, wj in zip(row, w)])
        else:
            out.append(row[:])
    return out


def active_components(net: Network, conductances: Sequence[Optional[Fraction]]) -> list[int]:
    """Component label per vertex for the subgraph of active edges.

    An edge is active when its conductivity is positive or it sits on a
    constant segment (``None``).  Labels are the smallest vertex index in
    each component.
    """
    parent = list(range(net.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (u, w), c in zip(net.edges, conductances):
        if c is None or c > 0:
            a, b = find(u), find(w)
            if a != b:
                parent[max(a, b)] = min(a, b)
    return [find(v) for v in range(net.n)]


def component_sets(labels: Sequence[int]) -> list[set[int]]:
    groups: dict[int, set[int]] = {}
    for v, r in enumerate(labels):
        groups.setdefault(r, set()).add(v)
    return [groups[k] for k in sorted(groups)]


def rref_solve(A: Matrix, b: Sequence, free_values: Optional[Sequence] = None) -> list[Fraction]:
    """Solve ``A z = b`` exactly by reduced row echelon form.

    Free variables of an underdetermined system take ``free_values`` (zero
    by default).  Raises :class:`SingularMatrixError` when inconsistent.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [[Fraction(a) for a in A[i]] + [Fraction(b[i])] for i in range(rows)]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [a * inv for a in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * p for a, p in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if M[i][cols] != 0:
            raise SingularMatrixError("linear system is inconsistent")
    z = [Fraction(0)] * cols
    pivot_set = set(pivots)
    for c in range(cols):
        if c not in pivot_set and free_values is not None:
            z[c] = Fraction(free_values[c])
    for i, c in enumerate(pivots):
        val = M[i][cols]
        for j in range(cols):
            if j not in pivot_set and z[j] and M[i][j]:
                val -= M[i][j] * z[j]
        z[c] = val
    return z
