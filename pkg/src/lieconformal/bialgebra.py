"""Coalgebra layer on the enveloping vertex algebra.

The coproduct splits an ordered word over all position subsets; both
halves of a split stay ordered, so no rewriting is involved and the
subset expansion is an independent cross-check path against the product
machinery.  Primitive elements are found by an exact kernel computation
over a bounded word span.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement

from .enveloping import EnvelopingAlgebra, UElem, VACUUM, Word
from .linalg import kernel_basis

Q = Fraction


class TensorElem:
    """Rational combination of pairs of ordered words."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        ts = {}
        if terms:
            for k, c in terms.items():
                c = Q(c)
                if c != 0:
                    ts[k] = c
        self.terms = ts

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, TensorElem) and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            nc = out.get(k, 0) + c
            if nc == 0:
                out.pop(k, None)
            else:
                out[k] = nc
        res = TensorElem()
        res.terms = out
        return res

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "TensorElem":
        c = Q(c)
        if c == 0:
            return TensorElem()
        res = TensorElem()
        res.terms = {k: v * c for k, v in self.terms.items()}
        return res

    def iadd(self, key, c) -> None:
        nc = self.terms.get(key, 0) + c
        if nc == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = nc

    def flip(self) -> "TensorElem":
        res = TensorElem()
        res.terms = {(b, a): c for (a, b), c in self.terms.items()}
        return res

    def __repr__(self):
        return f"TensorElem({self.terms!r})"


def _word_splits(word: Word):
    """All (left, right) subsequence splits of an ordered word."""
    n = len(word)
    for mask in range(1 << n):
        left = tuple(word[i] for i in range(n) if mask >> i & 1)
        right = tuple(word[i] for i in range(n) if not mask >> i & 1)
        yield left, right


def coproduct(u: UElem) -> TensorElem:
    out = TensorElem()
    for word, c in u.terms.items():
        for left, right in _word_splits(word):
            out.iadd((left, right), c)
    return out


def counit(u: UElem) -> Q:
    return u.terms.get(VACUUM, Q(0))


def is_primitive(u: UElem) -> bool:
    expected = TensorElem()
    for w, c in u.terms.items():
        expected.iadd((w, VACUUM), c)
        expected.iadd((VACUUM, w), c)
    return coproduct(u) == expected


def primitives_up_to(alg: EnvelopingAlgebra, max_len: int, depth: int) -> list[UElem]:
    """Basis of the primitive part of the bounded word span."""
    keys = alg.basis.keys_up_to_depth(depth)
    words = [VACUUM]
    for length in range(1, max_len + 1):
        words.extend(tuple(w) for w in combinations_with_replacement(keys, length))
    columns = []
    for w in words:
        resid = coproduct(UElem.monomial(w))
        resid.iadd((w, VACUUM), Q(-1))
        resid.iadd((VACUUM, w), Q(-1))
        columns.append(resid.terms)
    basis = []
    for combo in kernel_basis(columns):
        basis.append(UElem({words[i]: c for i, c in combo.items()}))
    return basis


def tensor_nth(alg: EnvelopingAlgebra, s: TensorElem, t: TensorElem, n: int,
               window_bound: int | None = None) -> TensorElem:
    """Integer-indexed product of the two-factor vertex algebra.

    The inner index range is finite through the per-factor vanishing
    bounds; ``window_bound`` optionally caps the absolute index range.
    """
    out = TensorElem()
    for (u1, u2), c1 in s.terms.items():
        e_u1, e_u2 = UElem.monomial(u1), UElem.monomial(u2)
        for (v1, v2), c2 in t.terms.items():
            e_v1, e_v2 = UElem.monomial(v1), UElem.monomial(v2)
            n1 = alg.trunc_bound(e_u1, e_v1)
            n2 = alg.trunc_bound(e_u2, e_v2)
            lo, hi = n - n2, n1 - 1
            if window_bound is not None:
                lo = max(lo, -window_bound)
                hi = min(hi, window_bound)
            c = c1 * c2
            for m in range(lo, hi + 1):
                p1 = alg.nth(e_u1, e_v1, m)
                if not p1:
                    continue
                p2 = alg.nth(e_u2, e_v2, n - m - 1)
                if not p2:
                    continue
                for w1, a in p1.terms.items():
                    for w2, b in p2.terms.items():
                        out.iadd((w1, w2), c * a * b)
    return out


def delta_on_component(t: TensorElem, component: int) -> dict:
    """Apply the coproduct to one tensor slot, giving triple-word terms."""
    out: dict = {}
    for (a, b), c in t.terms.items():
        word = (a, b)[component]
        for left, right in _word_splits(word):
            if component == 0:
                key = (left, right, b)
            else:
                key = (a, left, right)
            nc = out.get(key, 0) + c
            if nc == 0:
                out.pop(key, None)
            else:
                out[key] = nc
    return out


def check_delta_is_vertex_hom(alg: EnvelopingAlgebra, samples, window) -> dict:
    """Verify the coproduct intertwines all products over the window.

    ``samples`` is a list of UElem pairs; ``window`` an inclusive (lo, hi)
    index range.  Returns a JSON-ready report dict.
    """
    from .render import uelem_text

    lo, hi = window
    entries = []
    ok = True
    for u, v in samples:
        du, dv = coproduct(u), coproduct(v)
        for n in range(lo, hi + 1):
            prod = alg.nth(u, v, n)
            lhs = coproduct(prod)
            rhs = tensor_nth(alg, du, dv, n)
            resid = lhs - rhs
            ce = counit(prod) - (counit(u) * counit(v) if n == -1 else Q(0))
            good = resid.is_zero() and ce == 0
            ok = ok and good
            entries.append(
                {
                    "left": uelem_text(alg.basis, u),
                    "right": uelem_text(alg.basis, v),
                    "n": n,
                    "pass": good,
                    "residual_terms": len(resid.terms),
                    "counit_residual": str(ce),
                }
            )
            if not good:
                return {"pass": False, "checks": entries}
    return {"pass": ok, "checks": entries}
