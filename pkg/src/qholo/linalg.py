"""Dense linear algebra over the rational-function field."""

from __future__ import annotations

from typing import Hashable, Sequence

from .field import RationalFunction, ZERO_RF, ONE_RF

__all__ = ["Echelon", "nullspace", "solve", "rank_of"]


def _size(c: RationalFunction) -> int:
    return c.size()


class Echelon:
    """Incremental row echelon form that remembers how rows were combined.

    ``add(vec, label)`` either stores ``vec`` (returns ``None``) or returns
    coefficients ``{label: c}`` with ``vec = sum c * stored_vec[label]``.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[tuple[int, list[RationalFunction], dict]] = []

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: Sequence[RationalFunction]):
        v = list(vec)
        combo: dict = {}
        for piv, row, rc in self.rows:
            c = v[piv]
            if c.is_zero():
                continue
            for j in range(self.dim):
                if not row[j].is_zero():
                    v[j] = v[j] - c * row[j]
            for lab, a in rc.items():
                t = c * a
                combo[lab] = combo[lab] + t if lab in combo else t
        return v, combo

    def add(self, vec: Sequence[RationalFunction], label: Hashable):
        v, combo = self.reduce(vec)
        nz = [j for j in range(self.dim) if not v[j].is_zero()]
        if not nz:
            return {lab: c for lab, c in combo.items() if not c.is_zero()}
        piv = min(nz, key=lambda j: (_size(v[j]), j))
        inv = v[piv].inverse()
        row = [x * inv for x in v]
        rc = {lab: -c * inv for lab, c in combo.items()}
        rc[label] = inv
        # keep earlier rows reduced with respect to the new pivot
        new_rows = []
        for p, r, c0 in self.rows:
            f = r[piv]
            if not f.is_zero():
                r = [a - f * b for a, b in zip(r, row)]
                c0 = dict(c0)
                for lab, a in rc.items():
                    t = f * a
                    c0[lab] = c0[lab] - t if lab in c0 else -t
            new_rows.append((p, r, c0))
        new_rows.append((piv, row, rc))
        self.rows = new_rows
        return None


def nullspace(A: Sequence[Sequence[RationalFunction]], ncols: int | None = None) -> list[list[RationalFunction]]:
    """Basis of the right kernel ``{x : A x = 0}``."""
    rows = [list(r) for r in A]
    n = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    pivots: list[int] = []
    r = 0
    for col in range(n):
        cand = [i for i in range(r, len(rows)) if not rows[i][col].is_zero()]
        if not cand:
            continue
        best = min(cand, key=lambda i: (_size(rows[i][col]), i))
        rows[r], rows[best] = rows[best], rows[r]
        inv = rows[r][col].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [a - f * b if not b.is_zero() else a for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        x = [ZERO_RF() for _ in range(n)]
        x[fc] = ONE_RF()
        for i, pc in enumerate(pivots):
            x[pc] = -rows[i][fc]
        basis.append(x)
    return basis


def solve(A: Sequence[Sequence[RationalFunction]], b: Sequence[RationalFunction]):
    """One solution of ``A x = b`` or ``None``; also returns a kernel basis."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [-bi] for row, bi in zip(A, b)]
    ker = nullspace(aug, n + 1)
    pivot = next((v for v in ker if not v[n].is_zero()), None)
    if pivot is None:
        return None, [v[:n] for v in ker]
    inv = pivot[n].inverse()
    part = [x * inv for x in pivot[:n]]
    hom = []
    for v in ker:
        if v is pivot:
            continue
        f = v[n] * inv
        hom.append([a - f * b for a, b in zip(v[:n], pivot[:n])] if not f.is_zero() else v[:n])
    return part, hom


def rank_of(A: Sequence[Sequence[RationalFunction]]) -> int:
    if not A:
        return 0
    n = len(A[0])
    return n - len(nullspace(A, n))
