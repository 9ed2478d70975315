"""Exact sparse linear algebra over Q with dict-backed vectors.

Vectors are maps from hashable coordinate labels to nonzero Fractions.
Label order (given explicitly per span) makes pivoting deterministic.
"""

from __future__ import annotations

from fractions import Fraction

Q = Fraction


def vec_add(a: dict, b: dict, cb=1) -> dict:
    """a + cb*b with zero coefficients dropped."""
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + cb * v
        if nv == 0:
            out.pop(k, None)
        else:
            out[k] = nv
    return out


def vec_scale(a: dict, c) -> dict:
    c = Q(c)
    if c == 0:
        return {}
    return {k: v * c for k, v in a.items()}


class Echelon:
    """Row echelon span of Q-vectors with a fixed total order on labels."""

    def __init__(self, label_key=None):
        # pivot label -> normalized row (pivot coefficient 1)
        self.rows: dict = {}
        self._key = label_key if label_key is not None else (lambda x: x)

    def reduce(self, v: dict) -> dict:
        v = dict(v)
        changed = True
        while changed:
            changed = False
            for label in sorted(v, key=self._key):
                if label in self.rows:
                    v = vec_add(v, self.rows[label], -v[label])
                    changed = True
                    break
        return v

    def insert(self, v: dict) -> dict | None:
        """Add v to the span; returns the normalized new row or None."""
        v = self.reduce(v)
        if not v:
            return None
        piv = min(v, key=self._key)
        row = vec_scale(v, Q(1) / v[piv])
        self.rows[piv] = row
        return row

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)

    @property
    def dim(self) -> int:
        return len(self.rows)


def kernel_basis(columns: list[dict], label_key=None) -> list[dict]:
    """Kernel of the linear map sending unit vector i to columns[i].

    Returns combination dicts {column index: coefficient}, reduced so the
    result is deterministic for a fixed column order.
    """
    ech = Echelon(label_key)
    # track the expression of each inserted row in terms of input columns
    history: dict = {}
    kernel: list[dict] = []
    for i, col in enumerate(columns):
        v = dict(col)
        combo = {i: Q(1)}
        changed = True
        while changed:
            changed = False
            for label in sorted(v, key=ech._key):
                if label in ech.rows:
                    c = v[label]
                    v = vec_add(v, ech.rows[label], -c)
                    combo = vec_add(combo, history[label], -c)
                    changed = True
                    break
        if not v:
            kernel.append(combo)
        else:
            piv = min(v, key=ech._key)
            inv = Q(1) / v[piv]
            ech.rows[piv] = vec_scale(v, inv)
            history[piv] = vec_scale(combo, inv)
    return kernel
