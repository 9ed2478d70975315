"""Integration of nilpotent presentations into polynomial product structures.

A nilpotent presentation gives the coordinate space a family of exact
polynomial products, one per integer index: the coefficient on a pair of
exponent multi-indices is the single-letter part of the corresponding
enveloping product, divided by the multi-index factorials, and the
nilpotency degree prunes everything of higher total degree.  Products of
concrete rational points are finite sums; the identity element is the
origin.

Tables fill lazily per cell and never change once computed, so sharing a
structure across threads is safe as long as the cell caches are treated
as idempotent inserts.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement

from .core import CVec, LcaPresentation, binom_z
from .enveloping import EnvelopingAlgebra, UElem
from .errors import AxiomFailure, NotNilpotent
from .filtration import AdaptedBasis, LowerCentralSeries
from .lawtable import midx_from_word, midx_norm, midx_factorial, word_from_midx

Q = Fraction

Point = dict  # basis key -> nonzero Fraction


def point_key(p: Point) -> tuple:
    return tuple(sorted(p.items()))


def point_add(a: Point, b: Point) -> Point:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + v
        if nv == 0:
            out.pop(k, None)
        else:
            out[k] = nv
    return out


def point_scale(a: Point, c) -> Point:
    c = Q(c)
    if c == 0:
        return {}
    return {k: v * c for k, v in a.items()}


class ProductResult:
    """Window of point products plus the index past which all vanish."""

    def __init__(self, slices: dict, bound: int):
        self.slices = slices
        self.bound = bound


class VertexManifold:
    """Product tables of an integrated nilpotent presentation."""

    def __init__(self, pres: LcaPresentation, series: LowerCentralSeries,
                 basis: AdaptedBasis, env: EnvelopingAlgebra):
        self.pres = pres
        self.series = series
        self.basis = basis
        self.env = env
        self.N = series.nilpotency_degree
        self._table: dict = {}
        self._bounds: dict = {}
        self._composed_memo: dict = {}
        self._pairs_memo: dict = {}

    # -- table cells ------------------------------------------------------

    def pair_bound(self, k, kp) -> int:
        key = (k, kp)
        if key not in self._bounds:
            u = UElem.monomial(word_from_midx(k))
            v = UElem.monomial(word_from_midx(kp))
            self._bounds[key] = self.env.trunc_bound(u, v)
        return self._bounds[key]

    def table_entry(self, k, kp, n: int) -> Point:
        """Adapted coordinates of the normalized single-letter product part."""
        key = (k, kp, n)
        cached = self._table.get(key)
        if cached is None:
            if midx_norm(k) + midx_norm(kp) > self.N:
                cached = {}
            else:
                u = UElem.monomial(word_from_midx(k))
                v = UElem.monomial(word_from_midx(kp))
                vec = self.env.pi(self.env.nth(u, v, n))
                norm = Q(1, midx_factorial(k) * midx_factorial(kp))
                cached = {
                    pos: c * norm for pos, c in self.basis.expand(vec).items()
                }
            self._table[key] = cached
        return cached

    def _pairs_for(self, supp_left, supp_right):
        """Exponent pairs over the given supports with total degree <= N."""
        left, right = tuple(sorted(supp_left)), tuple(sorted(supp_right))
        cached = self._pairs_memo.get((left, right))
        if cached is not None:
            return cached
        lefts = [()]
        for s in range(1, self.N + 1):
            lefts.extend(combinations_with_replacement(left, s))
        out = []
        for wl in lefts:
            room = self.N - len(wl)
            out.append((midx_from_word(wl), ()))
            for s in range(1, room + 1):
                for wr in combinations_with_replacement(right, s):
                    out.append((midx_from_word(wl), midx_from_word(wr)))
        pairs = [(k, kp) for (k, kp) in out if not (k == () and kp == ())]
        self._pairs_memo[(left, right)] = pairs
        return pairs

    # -- products of points ----------------------------------------------------

    @staticmethod
    def _power(p: Point, m) -> Q:
        out = Q(1)
        for pos, e in m:
            c = p.get(pos, Q(0))
            if c == 0:
                return Q(0)
            out *= c ** e
        return out

    def product(self, a: Point, b: Point, n: int) -> Point:
        out: Point = {}
        for k, kp in self._pairs_for(a.keys(), b.keys()):
            ca = self._power(a, k)
            if ca == 0:
                continue
            cb = self._power(b, kp)
            if cb == 0:
                continue
            for pos, c in self.table_entry(k, kp, n).items():
                nv = out.get(pos, 0) + c * ca * cb
                if nv == 0:
                    out.pop(pos, None)
                else:
                    out[pos] = nv
        return out

    def truncation_bound(self, a: Point, b: Point) -> int:
        """Index with all higher products of the two points zero."""
        supp = sorted(set(a) | set(b))
        bound = 0
        for k, kp in self._pairs_for(supp, supp):
            bound = max(bound, self.pair_bound(k, kp))
        return bound

    def product_window(self, a: Point, b: Point, lo: int, hi: int) -> ProductResult:
        slices = {n: self.product(a, b, n) for n in range(lo, hi + 1)}
        return ProductResult(slices, self.truncation_bound(a, b))

    def exponential_element(self, a: Point) -> UElem:
        """Degree-truncated coordinate exponential in the enveloping algebra."""
        out = UElem.vacuum()
        supp = sorted(a)
        for s in range(1, self.N + 1):
            for w in combinations_with_replacement(supp, s):
                m = midx_from_word(w)
                c = self._power(a, m) / midx_factorial(m)
                if c != 0:
                    out.iadd_scaled(UElem.monomial(word_from_midx(m)), c)
        return out

    # -- composed products (series substituted into a polynomial slot) -----------

    def _series_coeff(self, b: Point, c: Point, n: int) -> Point:
        return self.product(b, c, n)

    def _inner_series(self, b: Point, c: Point, q: int, n_bc: int) -> dict:
        """Product series coefficients over the range a convolution can touch."""
        lo_m = q + 1 - self.N * max(n_bc, 1)
        inner: dict = {}
        for m in range(lo_m, n_bc):
            w = self.product(b, c, m)
            if w:
                inner[m] = w
        return inner

    def composed(self, a: Point, b: Point, c: Point, p: int, q: int) -> Point:
        """Coefficient q of the product of a with the (b, c) product series."""
        key = ("second", point_key(a), point_key(b), point_key(c), p, q)
        cached = self._composed_memo.get(key)
        if cached is not None:
            return cached
        n_bc = self.truncation_bound(b, c)
        out: Point = {}
        inner = self._inner_series(b, c, q, n_bc)
        supp_inner = sorted({pos for w in inner.values() for pos in w})
        for k, kp in self._pairs_for(a.keys(), supp_inner):
            ca = self._power(a, k)
            if ca == 0:
                continue
            conv = self._conv(kp, q, inner, n_bc)
            if conv == 0:
                continue
            for pos, cc in self.table_entry(k, kp, p).items():
                nv = out.get(pos, 0) + cc * ca * conv
                if nv == 0:
                    out.pop(pos, None)
                else:
                    out[pos] = nv
        self._composed_memo[key] = out
        return out

    def composed_first(self, a: Point, b: Point, c: Point, p: int, q: int) -> Point:
        """Coefficient q of the product of the (a, b) series with point c."""
        key = ("first", point_key(a), point_key(b), point_key(c), p, q)
        cached = self._composed_memo.get(key)
        if cached is not None:
            return cached
        n_ab = self.truncation_bound(a, b)
        out: Point = {}
        inner = self._inner_series(a, b, q, n_ab)
        supp_inner = sorted({pos for w in inner.values() for pos in w})
        for k, kp in self._pairs_for(supp_inner, c.keys()):
            cc_dir = self._power(c, kp)
            if cc_dir == 0:
                continue
            conv = self._conv(k, q, inner, n_ab)
            if conv == 0:
                continue
            for pos, cc in self.table_entry(k, kp, p).items():
                nv = out.get(pos, 0) + cc * cc_dir * conv
                if nv == 0:
                    out.pop(pos, None)
                else:
                    out[pos] = nv
        self._composed_memo[key] = out
        return out

    def _conv(self, kp, q: int, inner: dict, n_bc: int) -> Q:
        factors = word_from_midx(kp)
        return self._conv_rec(factors, q, inner, n_bc)

    def _conv_rec(self, factors, q: int, inner: dict, n_bc: int) -> Q:
        if not factors:
            return Q(1) if q == -1 else Q(0)
        first, rest = factors[0], factors[1:]
        rest_max = (n_bc - 1) * len(rest) + len(rest) - 1 if rest else -1
        total = Q(0)
        m = (q - 1 - rest_max) if rest else q
        while m <= n_bc - 1:
            w = inner.get(m)
            if w:
                head = w.get(first, Q(0))
                if head != 0:
                    tail = self._conv_rec(rest, q - m - 1, inner, n_bc)
                    if tail != 0:
                        total += head * tail
            m += 1
        return total

    # -- axiom suite ------------------------------------------------------------

    def jacobi_residual(self, a: Point, b: Point, c: Point, l: int, t: int, j: int) -> Point:
        out: Point = {}
        n_bc = self.truncation_bound(b, c)
        i = 0
        while j + i < self.N * max(n_bc, 1) + 1:
            cf = binom_z(l, i)
            if cf:
                term = self.composed(a, b, c, t + l - i, j + i)
                out = point_add(out, point_scale(term, Q((-1) ** i * cf)))
            i += 1
        n_ac = self.truncation_bound(a, c)
        i = 0
        while t + i < self.N * max(n_ac, 1) + 1:
            cf = binom_z(l, i)
            if cf:
                term = self.composed(b, a, c, j + l - i, t + i)
                out = point_add(out, point_scale(term, Q(-((-1) ** (l + i)) * cf)))
            i += 1
        n_ab = self.truncation_bound(a, b)
        i = 0
        while l + i < self.N * max(n_ab, 1) + 1:
            cf = binom_z(t, i)
            if cf:
                term = self.composed_first(a, b, c, t + j - i, l + i)
                out = point_add(out, point_scale(term, Q(-cf)))
            i += 1
        return out

    def check_axioms(self, sample_count: int, seed: int, window, coord_bound: int = 4) -> dict:
        """Randomized verification of the four product axioms."""
        import random

        rng = random.Random(seed)
        lo, hi = window
        self.basis.ensure_depth(2)
        keys = self.basis.keys_up_to_depth(2)

        def sample_point() -> Point:
            supp = rng.sample(keys, k=min(len(keys), rng.randint(1, 3)))
            out = {}
            for pos in supp:
                num = rng.randint(-coord_bound, coord_bound)
                den = rng.randint(1, 3)
                if num:
                    out[pos] = Q(num, den)
            return out

        points = [sample_point() for _ in range(sample_count)]
        checks = []

        # weak truncation through the stored polynomial coefficients
        trunc_ok = True
        for a in points[: min(8, len(points))]:
            b = points[(points.index(a) + 1) % len(points)]
            bound = self.truncation_bound(a, b)
            for n in range(bound, bound + 5):
                if self.product(a, b, n):
                    trunc_ok = False
        checks.append({"axiom": "weak_truncation", "pass": trunc_ok})

        # identity element on the left
        left_ok = True
        for a in points:
            for n in range(lo, hi + 1):
                expect = a if n == -1 else {}
                if self.product({}, a, n) != expect:
                    left_ok = False
        checks.append({"axiom": "left_identity", "pass": left_ok})

        # creation against the identity element
        create_ok = True
        for a in points:
            for n in range(0, hi + 1):
                if self.product(a, {}, n):
                    create_ok = False
            if self.product(a, {}, -1) != a:
                create_ok = False
        checks.append({"axiom": "creation", "pass": create_ok})

        jac_ok = True
        witness = None
        triples = [
            (points[i % len(points)], points[(i + 1) % len(points)], points[(i + 2) % len(points)])
            for i in range(min(6, sample_count))
        ]
        for (a, b, c) in triples:
            for l in (-1, 0, 1):
                for t in (-1, 0, 1):
                    for j in (-1, 0, 1):
                        r = self.jacobi_residual(a, b, c, l, t, j)
                        if r:
                            jac_ok = False
                            witness = {
                                "ltj": [l, t, j],
                                "points": [
                                    {self.basis.label(k): str(v) for k, v in p.items()}
                                    for p in (a, b, c)
                                ],
                            }
                            break
                    if not jac_ok:
                        break
                if not jac_ok:
                    break
            if not jac_ok:
                break
        entry = {"axiom": "jacobi", "pass": jac_ok}
        if witness:
            entry["witness"] = witness
        checks.append(entry)

        return {"pass": all(c["pass"] for c in checks), "checks": checks}

    # -- tangent structure -------------------------------------------------------

    def tangent_presentation(self) -> tuple[LcaPresentation, dict]:
        """Presentation read back from the degree-(1, 1) table slices.

        Returns the presentation over the original generators together
        with the basis change (adapted label -> conformal vector).
        """
        pres = self.pres
        ngen = len(pres.generators)
        coords = [self.basis.expand(CVec.unit((g, 0))) for g in range(ngen)]
        brackets = {}
        for i in range(ngen):
            for j in range(i, ngen):
                poly = {}
                top = 0
                for u in coords[i]:
                    for v in coords[j]:
                        top = max(top, self.pair_bound(((u, 1),), ((v, 1),)))
                for n in range(top):
                    acc = CVec()
                    for u, cu in coords[i].items():
                        for v, cv in coords[j].items():
                            cell = self.table_entry(((u, 1),), ((v, 1),), n)
                            for pos, c in cell.items():
                                acc = acc + self.basis.vector(pos).scale(c * cu * cv)
                    if acc:
                        poly[n] = acc.scale(Q(1, math.factorial(n)))
                if poly:
                    brackets[(i, j)] = poly
        from .core import LPoly

        table = {k: LPoly({n: v.coeffs for n, v in p.items()}) for k, p in brackets.items()}
        recon = LcaPresentation(pres.name, pres.generators, table)
        change = {
            self.basis.label(bv.key): bv.vec for bv in self.basis.issued
        }
        return recon, change

    def translation_slice_consistent(self, depth: int = 2) -> bool:
        """Creation slice of the table reproduces the derivative action."""
        for key in self.basis.keys_up_to_depth(depth):
            cell = self.table_entry(((key, 1),), (), -2)
            vec = CVec(dict(cell.items()))
            expected = self.basis.expand(self.pres.partial(self.basis.vector(key)))
            if dict(vec.coeffs) != expected:
                return False
        return True


def integrate(pres: LcaPresentation) -> VertexManifold:
    """Product structure of a nilpotent presentation; exact and lazy."""
    report = pres.check_axioms()
    if not report.ok:
        raise AxiomFailure(f"{pres.name!r} fails the axiom checks", report)
    series = LowerCentralSeries(pres)
    if not series.nilpotent:
        raise NotNilpotent(
            f"{pres.name!r} is not nilpotent; series stabilizes nonzero",
            series.stable_generators(),
        )
    basis = AdaptedBasis(pres, series)
    basis.ensure_depth(2)
    env = EnvelopingAlgebra(pres, basis)
    return VertexManifold(pres, series, basis, env)
