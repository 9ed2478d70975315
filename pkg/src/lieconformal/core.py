"""Finitely presented Lie conformal algebras over Q.

Elements are finite rational combinations of divided-power symbols
``(g, d)`` standing for the d-th divided derivative of generator g.  The
bracket of two generators is a polynomial in the formal variable lambda
with such combinations as coefficients; everything else (derivative
shifts, antisymmetry-derived entries, products of composite elements) is
computed from the presentation table.

Values are immutable once constructed and operations are pure functions
of their inputs, so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

Q = Fraction
Symbol = tuple  # (generator index, depth)


def binom_z(n: int, k: int) -> int:
    """Binomial coefficient with integer (possibly negative) upper index."""
    if k < 0:
        return 0
    num = 1
    for s in range(k):
        num *= n - s
    return num // math.factorial(k)


class CVec:
    """Finite rational combination of divided-power basis symbols."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        cs = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Q(v)
                if v != 0:
                    cs[k] = v
        self.coeffs = cs

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, CVec) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.key())

    def key(self):
        return tuple(sorted(self.coeffs.items()))

    def __add__(self, other: "CVec") -> "CVec":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            nv = out.get(k, 0) + v
            if nv == 0:
                out.pop(k, None)
            else:
                out[k] = nv
        res = CVec()
        res.coeffs = out
        return res

    def __neg__(self) -> "CVec":
        res = CVec()
        res.coeffs = {k: -v for k, v in self.coeffs.items()}
        return res

    def __sub__(self, other: "CVec") -> "CVec":
        return self + (-other)

    def scale(self, c) -> "CVec":
        c = Q(c)
        if c == 0:
            return CVec()
        res = CVec()
        res.coeffs = {k: v * c for k, v in self.coeffs.items()}
        return res

    @classmethod
    def unit(cls, sym: Symbol, c=1) -> "CVec":
        return cls({sym: c})

    def max_depth(self) -> int:
        return max((d for (_, d) in self.coeffs), default=0)

    def __repr__(self):
        return f"CVec({self.coeffs!r})"


ZERO_VEC = CVec()


class LPoly:
    """Polynomial in one formal variable with CVec coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        cs = {}
        if coeffs:
            for n, v in coeffs.items():
                if isinstance(v, dict):
                    v = CVec(v)
                if v:
                    cs[n] = v
        self.coeffs = cs

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return max(self.coeffs, default=-1)

    def coeff(self, n: int) -> CVec:
        return self.coeffs.get(n, ZERO_VEC)

    def __eq__(self, other):
        return isinstance(other, LPoly) and self.coeffs == other.coeffs

    def __add__(self, other: "LPoly") -> "LPoly":
        out = dict(self.coeffs)
        for n, v in other.coeffs.items():
            nv = out.get(n, ZERO_VEC) + v
            if nv:
                out[n] = nv
            else:
                out.pop(n, None)
        res = LPoly()
        res.coeffs = out
        return res

    def __neg__(self) -> "LPoly":
        res = LPoly()
        res.coeffs = {n: -v for n, v in self.coeffs.items()}
        return res

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LPoly":
        c = Q(c)
        if c == 0:
            return LPoly()
        res = LPoly()
        res.coeffs = {n: v.scale(c) for n, v in self.coeffs.items()}
        return res

    def shift_degree(self, p: int) -> "LPoly":
        res = LPoly()
        res.coeffs = {n + p: v for n, v in self.coeffs.items()}
        return res

    def add_term(self, n: int, v: CVec) -> None:
        if not v:
            return
        nv = self.coeffs.get(n, ZERO_VEC) + v
        if nv:
            self.coeffs[n] = nv
        else:
            self.coeffs.pop(n, None)


class LMPoly:
    """Polynomial in two formal variables with CVec coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self):
        self.coeffs: dict = {}

    def add_term(self, i: int, j: int, v: CVec) -> None:
        if not v:
            return
        key = (i, j)
        nv = self.coeffs.get(key, ZERO_VEC) + v
        if nv:
            self.coeffs[key] = nv
        else:
            self.coeffs.pop(key, None)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, LMPoly) and self.coeffs == other.coeffs


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    torsion: int | None = None  # order m means the m-th derivative vanishes

    @property
    def is_free(self) -> bool:
        return self.torsion is None


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: tuple | None = None
    residual: object | None = None


@dataclass
class AxiomReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class LcaPresentation:
    """Generators, torsion orders and the generator bracket table.

    Brackets are stored only for index pairs (i, j) with i <= j in
    declaration order; the transposed entries are derived from the
    stored ones, so they are never written by callers.
    """

    def __init__(self, name: str, generators, brackets):
        self.name = name
        self.generators: list[GeneratorSpec] = list(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        self._index = {g.name: i for i, g in enumerate(self.generators)}
        self.brackets: dict = {}
        for (i, j), poly in brackets.items():
            if not (0 <= i <= j < len(self.generators)):
                raise ValueError(f"bracket key ({i}, {j}) out of order or range")
            if not isinstance(poly, LPoly):
                poly = LPoly(poly)
            for vec in poly.coeffs.values():
                for sym in vec.coeffs:
                    if not self.symbol_valid(sym):
                        raise ValueError(f"invalid symbol {sym} in bracket ({i},{j})")
            if poly:
                self.brackets[(i, j)] = poly

    # -- structure -------------------------------------------------------

    def gen_index(self, name: str) -> int:
        return self._index[name]

    def gen_name(self, i: int) -> str:
        return self.generators[i].name

    def symbol_valid(self, sym: Symbol) -> bool:
        g, d = sym
        if not (0 <= g < len(self.generators)) or d < 0:
            return False
        t = self.generators[g].torsion
        return t is None or d < t

    def generator_vector(self, name: str) -> CVec:
        return CVec.unit((self.gen_index(name), 0))

    def symbols_up_to(self, depth: int) -> list[Symbol]:
        out = []
        for g, spec in enumerate(self.generators):
            top = depth if spec.is_free else min(depth, spec.torsion - 1)
            for d in range(top + 1):
                out.append((g, d))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, LcaPresentation)
            and self.generators == other.generators
            and self.brackets == other.brackets
        )

    # -- derivative action ------------------------------------------------

    def partial_div(self, v: CVec, times: int) -> CVec:
        """Divided derivative of order ``times`` in the symbol basis."""
        if times < 0:
            raise ValueError("negative derivative order")
        if times == 0:
            return v
        out = {}
        for (g, d), c in v.coeffs.items():
            nd = d + times
            t = self.generators[g].torsion
            if t is not None and nd >= t:
                continue
            coeff = c * math.comb(nd, times)
            key = (g, nd)
            out[key] = out.get(key, 0) + coeff
        return CVec(out)

    def partial(self, v: CVec) -> CVec:
        return self.partial_div(v, 1)

    def partial_pow(self, v: CVec, times: int) -> CVec:
        """Full (undivided) derivative power."""
        return self.partial_div(v, times).scale(math.factorial(times))

    # -- lambda bracket ----------------------------------------------------

    def _stored_bracket(self, i: int, j: int) -> LPoly:
        return self.brackets.get((i, j), LPoly())

    def antisym_image(self, poly: LPoly) -> LPoly:
        """The bracket the antisymmetry axiom assigns to the swapped pair."""
        out = LPoly()
        for n, vec in poly.coeffs.items():
            sign = (-1) ** n
            for s in range(n + 1):
                c = -sign * math.comb(n, s) * math.factorial(s)
                out.add_term(n - s, self.partial_div(vec, s).scale(c))
        return out

    def gen_bracket(self, i: int, j: int) -> LPoly:
        if i <= j:
            return self._stored_bracket(i, j)
        return self.antisym_image(self._stored_bracket(j, i))

    def bracket(self, v: CVec, w: CVec) -> LPoly:
        """Bilinear divided-power extension of the generator table."""
        out = LPoly()
        for (g, d), cv in v.coeffs.items():
            for (h, dp), cw in w.coeffs.items():
                base = self.gen_bracket(g, h)
                if not base:
                    continue
                scale = cv * cw
                # derivative on the right argument
                for s in range(dp + 1):
                    c1 = Q(1, math.factorial(dp - s))
                    for n, vec in base.coeffs.items():
                        shifted = self.partial_div(vec, s)
                        if not shifted:
                            continue
                        # derivative power on the left argument
                        c = scale * c1 * Q((-1) ** d, math.factorial(d))
                        out.add_term(n + dp - s + d, shifted.scale(c))
        return out

    def nth_product(self, v: CVec, w: CVec, n: int) -> CVec:
        if n < 0:
            raise ValueError("negative products live in the enveloping algebra")
        return self.bracket(v, w).coeff(n).scale(math.factorial(n))

    def lie_bracket(self, v: CVec, w: CVec) -> CVec:
        """Bracket of the underlying Lie algebra (definite lambda integral)."""
        out = ZERO_VEC
        for n, vec in self.bracket(v, w).coeffs.items():
            c = Q((-1) ** n * math.factorial(n))
            out = out + self.partial_div(vec, n + 1).scale(c)
        return out

    # -- axiom verification --------------------------------------------------

    def _torsion_residual(self, i: int, j: int, poly: LPoly) -> LPoly | None:
        """Derivative-compatibility residual forced by torsion arguments."""
        gi, gj = self.generators[i], self.generators[j]
        if gi.torsion is not None and poly:
            # the bracket of a vanishing derivative power must vanish
            return poly.shift_degree(gi.torsion).scale((-1) ** gi.torsion)
        if gj.torsion is not None and poly:
            m = gj.torsion
            out = LPoly()
            for s in range(m + 1):
                c = math.comb(m, s)
                for n, vec in poly.coeffs.items():
                    out.add_term(n + m - s, self.partial_pow(vec, s).scale(c))
            return out if out else None
        return None

    def check_axioms(self) -> AxiomReport:
        checks = []

        seq = CheckResult("sesquilinearity", True)
        for (i, j), poly in sorted(self.brackets.items()):
            resid = self._torsion_residual(i, j, poly)
            if resid is not None and not resid.is_zero():
                seq = CheckResult("sesquilinearity", False, (i, j), resid)
                break
        checks.append(seq)

        anti = CheckResult("antisymmetry", True)
        ngen = len(self.generators)
        for i in range(ngen):
            for j in range(i, ngen):
                vi = CVec.unit((i, 0))
                vj = CVec.unit((j, 0))
                resid = self.bracket(vi, vj) - self.antisym_image(self.bracket(vj, vi))
                if not resid.is_zero():
                    anti = CheckResult("antisymmetry", False, (i, j), resid)
                    break
            if not anti.passed:
                break
        checks.append(anti)

        jac = CheckResult("jacobi", True)
        for i in range(ngen):
            for j in range(ngen):
                for k in range(ngen):
                    resid = self.jacobi_residual(
                        CVec.unit((i, 0)), CVec.unit((j, 0)), CVec.unit((k, 0))
                    )
                    if not resid.is_zero():
                        jac = CheckResult("jacobi", False, (i, j, k), resid)
                        break
                if not jac.passed:
                    break
            if not jac.passed:
                break
        checks.append(jac)

        return AxiomReport(checks)

    def jacobi_residual(self, a: CVec, b: CVec, c: CVec) -> LMPoly:
        """Two-variable residual of the conformal Jacobi identity."""
        out = LMPoly()
        # bracket of the bracket, evaluated at the summed variable
        ab = self.bracket(a, b)
        for n, vec in ab.coeffs.items():
            inner = self.bracket(vec, c)
            for m, w in inner.coeffs.items():
                for s in range(m + 1):
                    out.add_term(n + s, m - s, w.scale(math.comb(m, s)))
        # nested bracket with the outer arguments swapped
        ac = self.bracket(a, c)
        for n, vec in ac.coeffs.items():
            outer = self.bracket(b, vec)
            for m, w in outer.coeffs.items():
                out.add_term(n, m, w)
        # the double bracket both are compared against
        bc = self.bracket(b, c)
        for m, vec in bc.coeffs.items():
            outer = self.bracket(a, vec)
            for n, w in outer.coeffs.items():
                out.add_term(n, m, -w)
        return out


def build_presentation(name: str, generators, brackets=None) -> LcaPresentation:
    """Convenience constructor taking names instead of indices.

    ``generators`` is a list of (name, torsion-or-None); ``brackets`` maps
    (left name, right name) to {lambda degree: {(name, depth): coeff}}.
    """
    specs = [GeneratorSpec(n, t) for n, t in generators]
    index = {g.name: i for i, g in enumerate(specs)}
    table = {}
    for (ln, rn), poly in (brackets or {}).items():
        key = (index[ln], index[rn])
        conv = {}
        for deg, vec in poly.items():
            conv[deg] = {(index[gn], d): Q(c) for (gn, d), c in vec.items()}
        table[key] = LPoly(conv)
    return LcaPresentation(name, specs, table)
