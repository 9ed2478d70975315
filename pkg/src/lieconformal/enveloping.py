"""Enveloping vertex algebra of a presented Lie conformal algebra.

Elements are rational combinations of weakly increasing words over an
ordered basis of the underlying algebra.  Arbitrary words are rewritten
into this form with commutator corrections; brackets of composite words
are computed by the two recursion rules that peel one basis letter at a
time, and the remaining integer-indexed products come from derivative
shifts of the word product.

All operations are pure; the caches keyed by words are idempotent and
may be shared across threads or dropped at any time.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .core import CVec, LcaPresentation, binom_z
from .filtration import RawBasis

Q = Fraction
Word = tuple

VACUUM: Word = ()


class UElem:
    """Finite rational combination of ordered basis words."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        ts = {}
        if terms:
            for w, c in terms.items():
                c = Q(c)
                if c != 0:
                    ts[w] = c
        self.terms = ts

    @classmethod
    def monomial(cls, word: Word, c=1) -> "UElem":
        return cls({tuple(word): c})

    @classmethod
    def vacuum(cls, c=1) -> "UElem":
        return cls({VACUUM: c})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, UElem) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __add__(self, other: "UElem") -> "UElem":
        out = dict(self.terms)
        for w, c in other.terms.items():
            nc = out.get(w, 0) + c
            if nc == 0:
                out.pop(w, None)
            else:
                out[w] = nc
        res = UElem()
        res.terms = out
        return res

    def __neg__(self) -> "UElem":
        res = UElem()
        res.terms = {w: -c for w, c in self.terms.items()}
        return res

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "UElem":
        c = Q(c)
        if c == 0:
            return UElem()
        res = UElem()
        res.terms = {w: v * c for w, v in self.terms.items()}
        return res

    def iadd_scaled(self, other: "UElem", c=1) -> None:
        if c == 0:
            return
        for w, v in other.terms.items():
            nc = self.terms.get(w, 0) + v * c
            if nc == 0:
                self.terms.pop(w, None)
            else:
                self.terms[w] = nc

    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __repr__(self):
        return f"UElem({self.terms!r})"


ZERO_U = UElem()


class ULPoly:
    """Polynomial in the bracket variable with UElem coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        cs = {}
        if coeffs:
            for n, v in coeffs.items():
                if v:
                    cs[n] = v
        self.coeffs = cs

    @property
    def degree(self) -> int:
        return max(self.coeffs, default=-1)

    def coeff(self, n: int) -> UElem:
        return self.coeffs.get(n, ZERO_U)

    def is_zero(self) -> bool:
        return not self.coeffs

    def add_term(self, n: int, v: UElem, c=1) -> None:
        if not v or c == 0:
            return
        cur = self.coeffs.get(n)
        if cur is None:
            cur = UElem()
            self.coeffs[n] = cur
        cur.iadd_scaled(v, c)
        if not cur:
            del self.coeffs[n]

    def __eq__(self, other):
        return isinstance(other, ULPoly) and self.coeffs == other.coeffs


class EnvelopingAlgebra:
    """Vertex algebra structure on the ordered-word span of a presentation."""

    def __init__(self, pres: LcaPresentation, basis=None):
        self.pres = pres
        self.basis = basis if basis is not None else RawBasis(pres)
        self._lie_memo: dict = {}
        self._straighten_memo: dict = {}
        self._bracket_memo: dict = {}
        self._nop_memo: dict = {}
        self._partial_memo: dict = {}

    # -- embedding ----------------------------------------------------------

    def embed(self, v: CVec) -> UElem:
        """Conformal vector as a combination of single-letter words."""
        out = UElem()
        for key, c in self.basis.expand(v).items():
            out.iadd_scaled(UElem.monomial((key,)), c)
        return out

    def letter(self, key) -> UElem:
        return UElem.monomial((key,))

    def pi(self, u: UElem) -> CVec:
        """Single-letter part mapped back to the algebra; kills the vacuum."""
        out = CVec()
        for w, c in u.terms.items():
            if len(w) == 1:
                out = out + self.basis.vector(w[0]).scale(c)
        return out

    # -- ordered-word rewriting ----------------------------------------------

    def _lie(self, ka, kb) -> UElem:
        memo = self._lie_memo
        key = (ka, kb)
        if key not in memo:
            vec = self.pres.lie_bracket(self.basis.vector(ka), self.basis.vector(kb))
            memo[key] = self.embed(vec)
        return memo[key]

    def straighten(self, word) -> UElem:
        word = tuple(word)
        memo = self._straighten_memo
        cached = memo.get(word)
        if cached is not None:
            return cached
        pos = None
        for i in range(len(word) - 1):
            if word[i] > word[i + 1]:
                pos = i
                break
        if pos is None:
            res = UElem.monomial(word)
        else:
            swapped = word[:pos] + (word[pos + 1], word[pos]) + word[pos + 2 :]
            res = self.straighten(swapped)
            br = self._lie(word[pos], word[pos + 1])
            acc = UElem()
            for bw, c in br.terms.items():
                sub = self.straighten(word[:pos] + bw + word[pos + 2 :])
                acc.iadd_scaled(sub, c)
            res = res + acc
        memo[word] = res
        return res

    def mul(self, u: UElem, v: UElem) -> UElem:
        """Associative product (concatenate, then rewrite)."""
        out = UElem()
        for wu, cu in u.terms.items():
            for wv, cv in v.terms.items():
                out.iadd_scaled(self.straighten(wu + wv), cu * cv)
        return out

    # -- translation operator ---------------------------------------------------

    def _partial_word(self, word: Word) -> UElem:
        memo = self._partial_memo
        cached = memo.get(word)
        if cached is not None:
            return cached
        out = UElem()
        for i, key in enumerate(word):
            dvec = self.pres.partial(self.basis.vector(key))
            for k2, c in self.basis.expand(dvec).items():
                out.iadd_scaled(self.straighten(word[:i] + (k2,) + word[i + 1 :]), c)
        memo[word] = out
        return out

    def partial(self, u: UElem) -> UElem:
        out = UElem()
        for w, c in u.terms.items():
            out.iadd_scaled(self._partial_word(w), c)
        return out

    def partial_pow(self, u: UElem, times: int) -> UElem:
        for _ in range(times):
            u = self.partial(u)
        return u

    def partial_div(self, u: UElem, times: int) -> UElem:
        return self.partial_pow(u, times).scale(Q(1, math.factorial(times)))

    # -- lambda bracket -----------------------------------------------------------

    def bracket(self, u: UElem, v: UElem) -> ULPoly:
        out = ULPoly()
        for wu, cu in u.terms.items():
            for wv, cv in v.terms.items():
                part = self._bracket_words(wu, wv)
                c = cu * cv
                for n, val in part.coeffs.items():
                    out.add_term(n, val, c)
        return out

    def _bracket_words(self, wu: Word, wv: Word) -> ULPoly:
        memo = self._bracket_memo
        key = (wu, wv)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if not wu or not wv:
            res = ULPoly()
        elif len(wu) == 1 and len(wv) == 1:
            base = self.pres.bracket(self.basis.vector(wu[0]), self.basis.vector(wv[0]))
            res = ULPoly()
            for n, vec in base.coeffs.items():
                res.add_term(n, self.embed(vec))
        elif len(wu) == 1:
            res = self._left_peel(wu[0], wv)
        else:
            res = self._right_peel(wu, wv)
        memo[key] = res
        return res

    def _left_peel(self, a, wv: Word) -> ULPoly:
        """Bracket of a letter with a longer word, peeling the word's head."""
        b, rest = wv[0], wv[1:]
        out = ULPoly()
        ab = self._bracket_words((a,), (b,))
        rest_elem = UElem.monomial(rest)
        for n, r in ab.coeffs.items():
            out.add_term(n, self.mul(r, rest_elem))
        ac = self._bracket_words((a,), rest)
        b_elem = UElem.monomial((b,))
        for n, r in ac.coeffs.items():
            out.add_term(n, self.mul(b_elem, r))
        # definite integral of the nested bracket
        for n, r in ab.coeffs.items():
            inner = self.bracket(r, rest_elem)
            for m, s in inner.coeffs.items():
                out.add_term(n + m + 1, s, Q(1, m + 1))
        return out

    def _right_peel(self, wu: Word, wv: Word) -> ULPoly:
        """Bracket of a longer word with anything, peeling the head letter."""
        a, rest = wu[0], wu[1:]
        a_elem = UElem.monomial((a,))
        rest_elem = UElem.monomial(rest)
        out = ULPoly()
        # derivative-shifted head against the tail bracket; the shift carries
        # the full derivative power with a plain binomial weight (the
        # divided-power variant fails the coefficient Jacobi suite)
        bw = self._bracket_words(rest, wv)
        for n, q in bw.coeffs.items():
            for s in range(n + 1):
                left = self.partial_pow(a_elem, s)
                out.add_term(n - s, self.nop(left, q), math.comb(n, s))
        av = self._bracket_words((a,), wv)
        for n, p in av.coeffs.items():
            for s in range(n + 1):
                left = self.partial_pow(rest_elem, s)
                out.add_term(n - s, self.nop(left, p), math.comb(n, s))
        # integral term with the substituted variable
        for n, p in av.coeffs.items():
            inner = self.bracket(rest_elem, p)
            for m, r in inner.coeffs.items():
                for s in range(n + 1):
                    c = Q((-1) ** s * math.comb(n, s), m + s + 1)
                    out.add_term(n - s + m + s + 1, r, c)
        return out

    # -- ordered product and integer-indexed products ------------------------------

    def nop(self, u: UElem, v: UElem) -> UElem:
        out = UElem()
        for wu, cu in u.terms.items():
            for wv, cv in v.terms.items():
                out.iadd_scaled(self._nop_words(wu, wv), cu * cv)
        return out

    def _nop_words(self, wu: Word, wv: Word) -> UElem:
        memo = self._nop_memo
        key = (wu, wv)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if len(wu) <= 1:
            res = self.straighten(wu + wv)
        else:
            a, rest = wu[0], wu[1:]
            a_elem = UElem.monomial((a,))
            rest_elem = UElem.monomial(rest)
            v_elem = UElem.monomial(wv)
            res = self.nop(a_elem, self._nop_words(rest, wv))
            wv_poly = self._bracket_words(rest, wv)
            av_poly = self._bracket_words((a,), wv)
            top = max(wv_poly.degree, av_poly.degree)
            for m in range(top + 1):
                fact = math.factorial(m)
                rm = wv_poly.coeff(m).scale(fact)
                if rm:
                    res = res + self.nop(self.partial_div(a_elem, m + 1), rm)
                am = av_poly.coeff(m).scale(fact)
                if am:
                    res = res + self.nop(self.partial_div(rest_elem, m + 1), am)
        memo[key] = res
        return res

    def nth(self, u: UElem, v: UElem, n: int) -> UElem:
        if n >= 0:
            return self.bracket(u, v).coeff(n).scale(math.factorial(n))
        return self.nop(self.partial_div(u, -n - 1), v)

    def trunc_bound(self, u: UElem, v: UElem) -> int:
        """Exact N with the n-th product zero for all n >= N."""
        return self.bracket(u, v).degree + 1

    def y_window(self, u: UElem, v: UElem, lo: int, hi: int):
        """Products for n in [lo, hi] plus the vanishing bound."""
        products = {n: self.nth(u, v, n) for n in range(lo, hi + 1)}
        return products, self.trunc_bound(u, v)

    # -- coefficient Jacobi identity ------------------------------------------------

    def borcherds_check(self, u: UElem, v: UElem, w: UElem, l: int, t: int, j: int):
        """Whether the coefficient identity holds, with its residual."""
        resid = self.borcherds_residual(u, v, w, l, t, j)
        return resid.is_zero(), resid

    def borcherds_residual(self, u: UElem, v: UElem, w: UElem, l: int, t: int, j: int) -> UElem:
        """Residual of the three-sum coefficient identity; zero when it holds."""
        out = UElem()
        n_vw = self.trunc_bound(v, w)
        i = 0
        while j + i < n_vw:
            c = binom_z(l, i)
            if c:
                inner = self.nth(v, w, j + i)
                if inner:
                    out.iadd_scaled(self.nth(u, inner, t + l - i), (-1) ** i * c)
            i += 1
        n_uw = self.trunc_bound(u, w)
        i = 0
        while t + i < n_uw:
            c = binom_z(l, i)
            if c:
                inner = self.nth(u, w, t + i)
                if inner:
                    out.iadd_scaled(self.nth(v, inner, j + l - i), -((-1) ** (l + i)) * c)
            i += 1
        n_uv = self.trunc_bound(u, v)
        i = 0
        while l + i < n_uv:
            c = binom_z(t, i)
            if c:
                inner = self.nth(u, v, l + i)
                if inner:
                    out.iadd_scaled(self.nth(inner, w, t + j - i), -c)
            i += 1
        return out
