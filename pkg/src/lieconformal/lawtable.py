"""Truncated coefficient tables of the dual vertex structure.

For every output basis position l and integer index n in a window, the
table stores the coefficients of the paired-variable power series whose
plain monomial ``X^k Y^k'`` carries ``<l-component of e_k (n) e_k'>``
divided by the factorials of both exponent multi-indices.  The divided
powers make the degree-(1, 1) slice reproduce the structure constants
on the nose, and the axiom checks below operate on the tables alone.

Monomial bookkeeping: a multi-index is a sorted tuple of (basis key,
positive exponent) pairs; composed-series polynomials live over slotted
variables (slot, basis key) with slots numbering the argument groups.

Each table cell is a pure function of the product caches, so extraction
may be parallelized over cells; report assembly is a deterministic
reduction independent of completion order.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from itertools import combinations_with_replacement

from .enveloping import EnvelopingAlgebra, UElem
from .errors import TruncationInsufficient

Q = Fraction

MIdx = tuple  # sorted ((key, exp), ...)
EMPTY: MIdx = ()


def midx_from_word(word) -> MIdx:
    out: dict = {}
    for k in word:
        out[k] = out.get(k, 0) + 1
    return tuple(sorted(out.items()))


def word_from_midx(m: MIdx) -> tuple:
    out = []
    for k, e in m:
        out.extend([k] * e)
    return tuple(sorted(out))


def midx_norm(m: MIdx) -> int:
    return sum(e for _, e in m)


def midx_factorial(m: MIdx) -> int:
    out = 1
    for _, e in m:
        out *= math.factorial(e)
    return out


def _poly_mul(p1: dict, p2: dict, cap: int) -> dict:
    """Product of slotted polynomials, dropping degree above cap."""
    out: dict = {}
    for m1, c1 in p1.items():
        d1 = sum(e for _, e in m1)
        for m2, c2 in p2.items():
            if d1 + sum(e for _, e in m2) > cap:
                continue
            merged: dict = dict(m1)
            for v, e in m2:
                merged[v] = merged.get(v, 0) + e
            key = tuple(sorted(merged.items()))
            nc = out.get(key, 0) + c1 * c2
            if nc == 0:
                out.pop(key, None)
            else:
                out[key] = nc
    return out


def _poly_iadd(acc: dict, p: dict, c=1) -> None:
    for m, v in p.items():
        nc = acc.get(m, 0) + v * c
        if nc == 0:
            acc.pop(m, None)
        else:
            acc[m] = nc


def _slot_monomial(m: MIdx, slot: int) -> tuple:
    return tuple(((slot, k), e) for k, e in m)


class LawTable:
    """Coefficient law of a presentation, truncated in degree, depth, index."""

    def __init__(self, algebra: str, degree: int, depth: int, window, positions):
        self.algebra = algebra
        self.degree = degree
        self.depth = depth
        self.window = (int(window[0]), int(window[1]))
        self.positions = list(positions)  # ordered basis keys of the slice
        self.pos_index = {k: i for i, k in enumerate(self.positions)}
        self.labels: dict = {}
        # (l key, n) -> {(k, k'): coefficient}
        self.entries: dict = {}
        # (k, k') -> exact vanishing bound of the underlying product
        self.pair_bounds: dict = {}
        # degrees |k|+|k'| whose products had output positions beyond depth
        self.overflow_degrees: set = set()

    # -- storage -------------------------------------------------------------

    def add_entry(self, l, n: int, k: MIdx, kp: MIdx, c: Q) -> None:
        if c == 0:
            return
        cell = self.entries.setdefault((l, n), {})
        cell[(k, kp)] = cell.get((k, kp), Q(0)) + c
        if cell[(k, kp)] == 0:
            del cell[(k, kp)]
            if not cell:
                del self.entries[(l, n)]

    def coefficient(self, l, n: int, k: MIdx, kp: MIdx) -> Q:
        return self.entries.get((l, n), {}).get((k, kp), Q(0))

    def series_entry(self, l, n: int) -> dict:
        return self.entries.get((l, n), {})

    def max_index_for(self, l) -> int:
        return max((n for (pl, n) in self.entries if pl == l), default=self.window[0] - 1)

    def domain_pairs(self):
        return sorted(self.pair_bounds)

    @property
    def complete_above(self) -> bool:
        """All domain products certifiably vanish above the window top."""
        hi = self.window[1]
        return all(b - 1 <= hi for b in self.pair_bounds.values())

    # -- serialization ----------------------------------------------------------

    def _midx_json(self, m: MIdx) -> dict:
        return {self.labels[k]: e for k, e in m}

    def to_json(self) -> dict:
        label_order = {k: i for i, k in enumerate(self.positions)}
        entries = []
        for (l, n), cell in self.entries.items():
            for (k, kp), c in cell.items():
                entries.append((label_order[l], n, k, kp, c))
        entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
        out_entries = [
            {
                "l": self.labels[self.positions[li]],
                "n": n,
                "k": self._midx_json(k),
                "kprime": self._midx_json(kp),
                "coeff": str(c),
            }
            for (li, n, k, kp, c) in entries
        ]
        bounds = [
            [self._midx_json(k), self._midx_json(kp), b]
            for (k, kp), b in sorted(self.pair_bounds.items())
            if b > 0
        ]
        return {
            "algebra": self.algebra,
            "degree": self.degree,
            "depth": self.depth,
            "window": list(self.window),
            "basis": [self.labels[k] for k in self.positions],
            "entries": out_entries,
            "bounds": bounds,
            "overflow_degrees": sorted(self.overflow_degrees),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc: dict) -> "LawTable":
        basis = list(doc["basis"])
        table = cls(doc["algebra"], doc["degree"], doc["depth"], doc["window"], basis)
        table.labels = {k: k for k in basis}
        index = {lab: lab for lab in basis}

        def midx(d):
            return tuple(sorted((index[lab], e) for lab, e in d.items()))

        for e in doc["entries"]:
            table.add_entry(e["l"], e["n"], midx(e["k"]), midx(e["kprime"]), Q(e["coeff"]))
        for k, kp, b in doc.get("bounds", []):
            table.pair_bounds[(midx(k), midx(kp))] = b
        table.overflow_degrees = set(doc.get("overflow_degrees", []))
        return table


def extract_law(env: EnvelopingAlgebra, degree: int, depth: int, window) -> LawTable:
    """Fill the table from the enveloping products over the stated ranges."""
    basis = env.basis
    positions = basis.keys_up_to_depth(depth)
    table = LawTable(env.pres.name, degree, depth, window, positions)
    table.labels = {k: basis.label(k) for k in positions}
    lo, hi = table.window
    pos_set = set(positions)

    midxes = [EMPTY]
    for size in range(1, degree + 1):
        midxes.extend(
            midx_from_word(w) for w in combinations_with_replacement(positions, size)
        )
    for k in midxes:
        dk = midx_norm(k)
        u = UElem.monomial(word_from_midx(k))
        for kp in midxes:
            if dk + midx_norm(kp) > degree:
                continue
            v = UElem.monomial(word_from_midx(kp))
            norm = Q(1, midx_factorial(k) * midx_factorial(kp))
            poly = env.bracket(u, v)
            bound = poly.degree + 1
            table.pair_bounds[(k, kp)] = bound
            for n in range(lo, hi + 1):
                if n >= bound:
                    break
                if n >= 0:
                    prod = poly.coeff(n).scale(math.factorial(n))
                else:
                    prod = env.nth(u, v, n)
                for word, c in prod.terms.items():
                    if len(word) != 1:
                        continue
                    l = word[0]
                    if l in pos_set:
                        table.add_entry(l, n, k, kp, c * norm)
                    else:
                        table.overflow_degrees.add(dk + midx_norm(kp))
    return table


# -- identity-slice checks --------------------------------------------------------


def check_identities(table: LawTable) -> dict:
    """Left and right identity slices of the law."""
    failures = []
    lo, hi = table.window
    for (l, n), cell in sorted(
        table.entries.items(), key=lambda kv: (table.pos_index[kv[0][0]], kv[0][1])
    ):
        for (k, kp), c in sorted(cell.items()):
            if k == EMPTY:
                expected = Q(1) if (n == -1 and kp == ((l, 1),)) else Q(0)
                if c != expected:
                    failures.append(
                        {"side": "left", "l": table.labels[l], "n": n, "coeff": str(c)}
                    )
            if kp == EMPTY:
                if n >= 0:
                    failures.append(
                        {"side": "right", "l": table.labels[l], "n": n, "coeff": str(c)}
                    )
                elif n == -1 and c != (Q(1) if k == ((l, 1),) else Q(0)):
                    failures.append(
                        {"side": "right", "l": table.labels[l], "n": n, "coeff": str(c)}
                    )
    # the identity slices themselves must be present
    for l in table.positions:
        if table.coefficient(l, -1, EMPTY, ((l, 1),)) != 1:
            failures.append({"side": "left", "l": table.labels[l], "n": -1, "coeff": "missing"})
        if table.coefficient(l, -1, ((l, 1),), EMPTY) != 1:
            failures.append({"side": "right", "l": table.labels[l], "n": -1, "coeff": "missing"})
    left_ok = all(f["side"] != "left" for f in failures)
    right_ok = all(f["side"] != "right" for f in failures)
    return {"left_identity": left_ok, "right_identity": right_ok, "failures": failures}


def check_convergence_bound(table: LawTable, r: int, index_set) -> dict:
    """Least window index past which the (r, I)-relevant coefficients vanish."""
    idx = set(index_set)

    def relevant(k, kp):
        if midx_norm(k) + midx_norm(kp) > r:
            return False
        return all(p in idx for p, _ in k) and all(p in idx for p, _ in kp)

    top = -1
    for (l, n), cell in table.entries.items():
        if n < 0:
            continue
        if any(relevant(k, kp) for (k, kp) in cell):
            top = max(top, n)
    candidate = top + 1
    certified = all(
        b - 1 <= table.window[1]
        for (k, kp), b in table.pair_bounds.items()
        if relevant(k, kp)
    )
    if not certified:
        return {"found": False, "reason": "window too small to certify vanishing"}
    return {"found": True, "bound": candidate}


# -- composed-series machinery ----------------------------------------------------


class _Composer:
    """Coefficient-level composition of law series over slotted variables."""

    def __init__(self, table: LawTable, cap: int):
        self.table = table
        self.cap = cap
        self.lo, self.hi = table.window
        self._maxn: dict = {}
        for (l, n), cell in table.entries.items():
            if any(midx_norm(k) + midx_norm(kp) <= cap for k, kp in cell):
                if n > self._maxn.get(l, self.lo - 1):
                    self._maxn[l] = n
        self._conv_memo: dict = {}
        # certified stops for composed inner series: the largest index at
        # which any substituted multi-index seen in the stored cells can
        # still contribute, per substitution side
        self.qmax_second = -1
        self.qmax_first = -1
        for (_l, _n), cell in table.entries.items():
            for (k, kp) in cell:
                if midx_norm(k) + midx_norm(kp) > cap:
                    continue
                self.qmax_first = max(self.qmax_first, self._conv_bound(k))
                self.qmax_second = max(self.qmax_second, self._conv_bound(kp))

    def _conv_bound(self, m: MIdx) -> int:
        if not m:
            return -1
        total = 0
        size = 0
        for pos, e in m:
            total += self.maxn(pos) * e
            size += e
        return total + size - 1

    def maxn(self, pos) -> int:
        return self._maxn.get(pos, self.lo - 1)

    def base_series(self, pos, n: int, slots) -> dict:
        """Law series of one position as a slotted polynomial."""
        if n > self.hi or n < self.lo:
            raise TruncationInsufficient(
                f"series index {n} for position {self.table.labels.get(pos, pos)} "
                f"outside window {self.table.window}"
            )
        out: dict = {}
        for (k, kp), c in self.table.series_entry(pos, n).items():
            if midx_norm(k) + midx_norm(kp) > self.cap:
                continue
            mono = tuple(sorted(_slot_monomial(k, slots[0]) + _slot_monomial(kp, slots[1])))
            _poly_iadd(out, {mono: c})
        return out

    def conv(self, factors: tuple, q: int, slots) -> dict:
        """x-coefficient q of the product of position series."""
        if not factors:
            return {(): Q(1)} if q == -1 else {}
        key = (factors, q, slots)
        cached = self._conv_memo.get(key)
        if cached is not None:
            return cached
        first, rest = factors[0], factors[1:]
        rest_max = sum(self.maxn(p) for p in rest) + len(rest) - 1 if rest else -1
        out: dict = {}
        m = q - 1 - rest_max if rest else q
        lo_needed = m
        if lo_needed < self.lo:
            raise TruncationInsufficient(
                f"composition needs index {lo_needed} below window {self.table.window}"
            )
        while m <= self.maxn(first):
            head = self.base_series(first, m, slots)
            if head:
                tail = self.conv(rest, q - m - 1, slots)
                if tail:
                    for mono, c in _poly_mul(head, tail, self.cap).items():
                        _poly_iadd(out, {mono: c})
            m += 1
        self._conv_memo[key] = out
        return out

    def composed(self, l, outer_n: int, inner_n: int, direct_slot: int,
                 inner_slots, substitute_first: bool) -> dict:
        """One mixed coefficient of the law applied to a law.

        ``direct_slot`` receives the unsubstituted multi-index; the other
        multi-index is substituted by the composed series over
        ``inner_slots`` and the ``inner_n`` coefficient is taken.
        """
        if outer_n > self.max_outer_index():
            return {}
        if outer_n > self.hi or outer_n < self.lo:
            raise TruncationInsufficient(
                f"outer index {outer_n} outside window {self.table.window}"
            )
        out: dict = {}
        for (k, kp), c in self.table.series_entry(l, outer_n).items():
            direct, subst = (kp, k) if substitute_first else (k, kp)
            if midx_norm(direct) + midx_norm(subst) > self.cap:
                continue
            factors = word_from_midx(subst)
            inner = self.conv(factors, inner_n, inner_slots)
            if not inner:
                continue
            direct_poly = {tuple(_slot_monomial(direct, direct_slot)): Q(1)}
            _poly_iadd(out, _poly_mul(direct_poly, inner, self.cap), c)
        return out

    def max_outer_index(self) -> int:
        return max(self._maxn.values(), default=self.lo - 1)


def _guard_table(table: LawTable, cap: int) -> None:
    # Window and degree coverage are certified here; depth sufficiency is
    # not table-decidable (missing deep-argument cells would surface as a
    # nonzero residual, not a false pass) and is cross-checked against the
    # enveloping products in the test suite.
    if cap > table.degree:
        raise TruncationInsufficient(
            f"check degree {cap} exceeds table degree {table.degree}"
        )
    if not table.complete_above:
        raise TruncationInsufficient(
            "table window too small to certify vanishing above its top"
        )


def check_law_jacobi(table: LawTable, samples, cap: int, out_positions=None) -> dict:
    """Coefficient identity of the law at sampled integer triples.

    Verifies, for every output position and every monomial of total
    degree at most ``cap``, the three binomial-weighted composition sums.
    """
    from .core import binom_z

    _guard_table(table, cap)
    comp = _Composer(table, cap)
    positions = out_positions if out_positions is not None else table.positions
    entries = []
    ok = True
    for (l, t, j) in samples:
        for pos in positions:
            resid: dict = {}
            # first composition sum
            i = 0
            while True:
                if l >= 0 and i > l:
                    break
                q = j + i
                if q > comp.qmax_second:
                    break
                c = binom_z(l, i)
                if c:
                    term = comp.composed(pos, t + l - i, q, 0, (1, 2), False)
                    _poly_iadd(resid, term, Q((-1) ** i * c))
                i += 1
            # second sum, outer and inner arguments exchanged
            i = 0
            while True:
                if l >= 0 and i > l:
                    break
                p = t + i
                if p > comp.qmax_second:
                    break
                c = binom_z(l, i)
                if c:
                    term = comp.composed(pos, j + l - i, p, 1, (0, 2), False)
                    _poly_iadd(resid, term, Q(-((-1) ** (l + i)) * c))
                i += 1
            # third sum, the inner law in the first argument
            i = 0
            while True:
                m = l + i
                if m > comp.qmax_first:
                    break
                c = binom_z(t, i)
                if c:
                    term = comp.composed(pos, t + j - i, m, 2, (0, 1), True)
                    _poly_iadd(resid, term, Q(-c))
                i += 1
            good = not resid
            ok = ok and good
            entries.append(
                {
                    "ltj": [l, t, j],
                    "l": table.labels.get(pos, str(pos)),
                    "pass": good,
                    "residual_monomials": len(resid),
                }
            )
            if not good:
                return {"pass": False, "checks": entries}
    return {"pass": ok, "checks": entries}


def check_law_hom(alpha: dict, src: LawTable, dst: LawTable) -> dict:
    """Whether a constant-free substitution intertwines two laws.

    ``alpha`` maps destination positions to polynomials over source
    positions, given as {midx over src keys: coefficient}.
    """
    for pos, poly in alpha.items():
        if EMPTY in poly and poly[EMPTY] != 0:
            raise ValueError("law homomorphisms have zero constant term")
    cap = min(src.degree, dst.degree)
    if not src.complete_above:
        raise TruncationInsufficient(
            "source window too small to certify vanishing above its top"
        )
    comp = _Composer(src, cap)
    lo = max(src.window[0], dst.window[0])
    hi = min(src.window[1], dst.window[1])
    entries = []
    ok = True

    def alpha_poly(pos, slot):
        out = {}
        for m, c in alpha.get(pos, {}).items():
            if midx_norm(m) > cap:
                continue
            _poly_iadd(out, {tuple(_slot_monomial(m, slot)): Q(c)})
        return out

    for dpos in dst.positions:
        apoly = alpha.get(dpos, {})
        for n in range(lo, hi + 1):
            # alpha applied to the source law series
            lhs: dict = {}
            for m, c in apoly.items():
                factors = word_from_midx(m)
                _poly_iadd(lhs, comp.conv(factors, n, (0, 1)), Q(c))
            # destination law with substituted arguments
            rhs: dict = {}
            for (k, kp), c in dst.series_entry(dpos, n).items():
                if midx_norm(k) + midx_norm(kp) > cap:
                    continue
                poly = {(): Q(1)}
                for p, e in k:
                    for _ in range(e):
                        poly = _poly_mul(poly, alpha_poly(p, 0), cap)
                for p, e in kp:
                    for _ in range(e):
                        poly = _poly_mul(poly, alpha_poly(p, 1), cap)
                _poly_iadd(rhs, poly, c)
            resid = dict(lhs)
            _poly_iadd(resid, rhs, -1)
            good = not resid
            ok = ok and good
            entries.append(
                {
                    "target": dst.labels.get(dpos, str(dpos)),
                    "n": n,
                    "pass": good,
                    "residual_monomials": len(resid),
                }
            )
            if not good and len(entries) > 400:
                return {"pass": False, "checks": entries}
    return {"pass": ok, "checks": entries}
