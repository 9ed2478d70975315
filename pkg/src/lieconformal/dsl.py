"""Declarative text format for algebra presentations.

The format is small enough for a hand-written recursive-descent parser;
every diagnostic carries a byte span and line/column of its origin.

    # rank-one example
    algebra heisenberg {
      generators { a: free; k: torsion(1); }
      bracket [a, a] = lambda*k;
    }

Bracket expressions are sums of products of rational constants, the
variable ``lambda``, the derivative symbol ``D`` and generator names,
with ``^`` for natural powers.  ``D`` is an operator: lowering requires
it to act from the left on the generator of its monomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import GeneratorSpec, LPoly, LcaPresentation

Q = Fraction


@dataclass(frozen=True)
class SourceSpan:
    begin: int
    end: int
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass
class Diagnostic:
    message: str
    span: SourceSpan

    def __str__(self):
        return f"{self.span}: {self.message}"


class DslError(Exception):
    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Token:
    kind: str  # name, int, punct, eof
    text: str
    span: SourceSpan


_PUNCT = ("[", "]", "{", "}", "(", ")", ",", ";", ":", "=", "+", "-", "*", "^", "/")


def tokenize(text: str) -> list[Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start, sl, sc = i, line, col
        if ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
                col += 1
            toks.append(Token("int", text[start:i], SourceSpan(start, i, sl, sc)))
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
                col += 1
            toks.append(Token("name", text[start:i], SourceSpan(start, i, sl, sc)))
            continue
        if ch in _PUNCT:
            i += 1
            col += 1
            toks.append(Token("punct", ch, SourceSpan(start, i, sl, sc)))
            continue
        raise DslError(Diagnostic(f"unexpected character {ch!r}", SourceSpan(start, start + 1, sl, sc)))
    toks.append(Token("eof", "", SourceSpan(n, n, line, col)))
    return toks


# -- expression AST -----------------------------------------------------------

# nodes: ("num", Q, span) | ("sym", name, span) | ("neg", node, span)
#        | ("add", [nodes], span) | ("mul", [nodes], span) | ("pow", node, int, span)


@dataclass
class BracketDecl:
    left: str
    right: str
    expr: object
    span: SourceSpan


@dataclass
class GeneratorDecl:
    name: str
    torsion: int | None
    span: SourceSpan


@dataclass
class AlgebraFile:
    name: str
    generators: list
    brackets: list
    span: SourceSpan


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    # -- token helpers ----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, expected: str):
        t = self.peek()
        got = t.text or "end of input"
        raise DslError(Diagnostic(f"expected {expected}, found {got!r}", t.span))

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(text if text is not None else kind)
        return self.next()

    def accept(self, kind: str, text: str | None = None):
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    # -- grammar -----------------------------------------------------------

    def parse_algebra(self) -> AlgebraFile:
        start = self.expect("name", "algebra")
        name = self.expect("name").text
        self.expect("punct", "{")
        self.expect("name", "generators")
        self.expect("punct", "{")
        gens = []
        seen = set()
        while not self.accept("punct", "}"):
            gname = self.expect("name")
            if gname.text in seen:
                raise DslError(Diagnostic(f"duplicate generator {gname.text!r}", gname.span))
            seen.add(gname.text)
            self.expect("punct", ":")
            kind = self.expect("name")
            torsion = None
            if kind.text == "torsion":
                self.expect("punct", "(")
                m = self.expect("int")
                torsion = int(m.text)
                if torsion < 1:
                    raise DslError(Diagnostic("torsion order must be positive", m.span))
                self.expect("punct", ")")
            elif kind.text != "free":
                raise DslError(Diagnostic("expected 'free' or 'torsion(m)'", kind.span))
            self.expect("punct", ";")
            gens.append(GeneratorDecl(gname.text, torsion, gname.span))
        brackets = []
        while not self.accept("punct", "}"):
            kw = self.expect("name", "bracket")
            self.expect("punct", "[")
            left = self.expect("name").text
            self.expect("punct", ",")
            right = self.expect("name").text
            self.expect("punct", "]")
            self.expect("punct", "=")
            expr = self.parse_expr()
            self.expect("punct", ";")
            brackets.append(BracketDecl(left, right, expr, kw.span))
        self.expect("eof")
        return AlgebraFile(name, gens, brackets, start.span)

    def parse_expr(self):
        span = self.peek().span
        terms = []
        negate = bool(self.accept("punct", "-"))
        node = self.parse_term()
        terms.append(("neg", node, span) if negate else node)
        while True:
            if self.accept("punct", "+"):
                terms.append(self.parse_term())
            elif self.accept("punct", "-"):
                t = self.parse_term()
                terms.append(("neg", t, t[-1]))
            else:
                break
        if len(terms) == 1:
            return terms[0]
        return ("add", terms, span)

    def parse_term(self):
        span = self.peek().span
        factors = [self.parse_factor()]
        while self.accept("punct", "*"):
            factors.append(self.parse_factor())
        if len(factors) == 1:
            return factors[0]
        return ("mul", factors, span)

    def parse_factor(self):
        node = self.parse_atom()
        if self.accept("punct", "^"):
            e = self.expect("int")
            return ("pow", node, int(e.text), node[-1])
        return node

    def parse_atom(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            num = int(t.text)
            if self.accept("punct", "/"):
                den = self.expect("int")
                return ("num", Q(num, int(den.text)), t.span)
            return ("num", Q(num), t.span)
        if t.kind == "name":
            self.next()
            return ("sym", t.text, t.span)
        if t.kind == "punct" and t.text == "(":
            self.next()
            node = self.parse_expr()
            self.expect("punct", ")")
            return node
        self.fail("a number, name or parenthesized expression")


def parse_algebra(text: str) -> AlgebraFile:
    return Parser(text).parse_algebra()


# -- lowering ------------------------------------------------------------------

# a monomial during expansion: (coefficient, lambda power, ordered symbol list)


def _expand(node) -> list:
    kind = node[0]
    if kind == "num":
        return [(node[1], 0, [])]
    if kind == "sym":
        if node[1] == "lambda":
            return [(Q(1), 1, [])]
        return [(Q(1), 0, [(node[1], node[2])])]
    if kind == "neg":
        return [(-c, p, syms) for (c, p, syms) in _expand(node[1])]
    if kind == "add":
        out = []
        for sub in node[1]:
            out.extend(_expand(sub))
        return out
    if kind == "mul":
        out = [(Q(1), 0, [])]
        for sub in node[1]:
            expanded = _expand(sub)
            nxt = []
            for (c1, p1, s1) in out:
                for (c2, p2, s2) in expanded:
                    nxt.append((c1 * c2, p1 + p2, s1 + s2))
            out = nxt
        return out
    if kind == "pow":
        base = _expand(node[1])
        out = [(Q(1), 0, [])]
        for _ in range(node[2]):
            nxt = []
            for (c1, p1, s1) in out:
                for (c2, p2, s2) in base:
                    nxt.append((c1 * c2, p1 + p2, s1 + s2))
            out = nxt
        return out
    raise AssertionError(kind)


def _lower_expr(expr, gen_index, torsion, span, allow_lambda=True):
    """Expression to {lambda degree: {(gen, depth): coeff}} plus warnings."""
    poly: dict = {}
    warnings = []
    for (coeff, lpow, syms) in _expand(expr):
        if coeff == 0:
            continue
        if lpow > 0 and not allow_lambda:
            raise DslError(Diagnostic("lambda is not allowed here", span))
        dcount = 0
        gen = None
        gen_span = span
        seen_gen = False
        for (name, sp) in syms:
            if name == "D":
                if seen_gen:
                    raise DslError(
                        Diagnostic("derivative operator must be applied to the left of a generator", sp)
                    )
                dcount += 1
            else:
                if name not in gen_index:
                    raise DslError(Diagnostic(f"unknown identifier {name!r}", sp))
                if seen_gen:
                    raise DslError(
                        Diagnostic("every monomial must contain exactly one generator", sp)
                    )
                seen_gen = True
                gen = name
                gen_span = sp
        if not seen_gen:
            raise DslError(
                Diagnostic("every monomial must contain exactly one generator", span)
            )
        g = gen_index[gen]
        t = torsion[g]
        if t is not None and dcount >= t:
            warnings.append(
                Diagnostic(
                    f"derivative power {dcount} annihilates torsion generator {gen!r}; term dropped",
                    gen_span,
                )
            )
            continue
        vec = poly.setdefault(lpow, {})
        key = (g, dcount)
        # full derivative power in divided-power coordinates
        vec[key] = vec.get(key, Q(0)) + coeff * math.factorial(dcount)
    cleaned = {}
    for lpow, vec in poly.items():
        vec = {k: c for k, c in vec.items() if c != 0}
        if vec:
            cleaned[lpow] = vec
    return cleaned, warnings


def lower(ast: AlgebraFile):
    """AlgebraFile to a presentation; returns (presentation, warnings)."""
    gen_index = {g.name: i for i, g in enumerate(ast.generators)}
    torsion = [g.torsion for g in ast.generators]
    table = {}
    warnings = []
    for decl in ast.brackets:
        for side in (decl.left, decl.right):
            if side not in gen_index:
                raise DslError(Diagnostic(f"unknown identifier {side!r}", decl.span))
        i, j = gen_index[decl.left], gen_index[decl.right]
        if i > j:
            raise DslError(
                Diagnostic(
                    f"bracket [{decl.left}, {decl.right}] must be stated as "
                    f"[{decl.right}, {decl.left}]; transposed entries are derived",
                    decl.span,
                )
            )
        if (i, j) in table:
            raise DslError(
                Diagnostic(f"bracket [{decl.left}, {decl.right}] declared twice", decl.span)
            )
        poly, warns = _lower_expr(decl.expr, gen_index, torsion, decl.span)
        warnings.extend(warns)
        if poly:
            table[(i, j)] = LPoly(poly)
    specs = [GeneratorSpec(g.name, g.torsion) for g in ast.generators]
    return LcaPresentation(ast.name, specs, table), warnings


def load_presentation(text: str):
    return lower(parse_algebra(text))


# -- emitter -------------------------------------------------------------------


def emit_algebra(pres: LcaPresentation) -> str:
    from .render import lpoly_text

    lines = [f"algebra {pres.name} {{"]
    gens = []
    for g in pres.generators:
        kind = "free" if g.is_free else f"torsion({g.torsion})"
        gens.append(f"{g.name}: {kind};")
    lines.append("  generators { " + " ".join(gens) + " }")
    for (i, j) in sorted(pres.brackets):
        expr = lpoly_text(pres, pres.brackets[(i, j)])
        lines.append(f"  bracket [{pres.gen_name(i)}, {pres.gen_name(j)}] = {expr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- command-line mini grammars ---------------------------------------------------


def parse_vector(text: str, pres: LcaPresentation):
    """Bracket-expression syntax without lambda, as a conformal vector."""
    parser = Parser(text)
    expr = parser.parse_expr()
    parser.expect("eof")
    gen_index = {g.name: i for i, g in enumerate(pres.generators)}
    torsion = [g.torsion for g in pres.generators]
    poly, _ = _lower_expr(
        expr, gen_index, torsion, SourceSpan(0, len(text), 1, 1), allow_lambda=False
    )
    from .core import CVec

    return CVec(poly.get(0, {}))


def _parse_letter(tok: str, pres: LcaPresentation):
    name, depth = tok, 0
    if "[" in tok:
        if not tok.endswith("]"):
            raise DslError(Diagnostic(f"malformed basis letter {tok!r}", SourceSpan(0, 0, 1, 1)))
        name, rest = tok.split("[", 1)
        depth = int(rest[:-1])
    try:
        g = pres.gen_index(name)
    except KeyError:
        raise DslError(Diagnostic(f"unknown generator {name!r}", SourceSpan(0, 0, 1, 1)))
    sym = (g, depth)
    if not pres.symbol_valid(sym):
        raise DslError(Diagnostic(f"invalid depth for generator {name!r}", SourceSpan(0, 0, 1, 1)))
    return sym


def parse_word(text: str, pres: LcaPresentation) -> tuple:
    """Ordered-word syntax: ``:a a k:``, a bare letter, or ``1``."""
    text = text.strip()
    if text == "1":
        return ()
    if text.startswith(":") and text.endswith(":") and len(text) >= 2:
        inner = text[1:-1].strip()
        letters = inner.split()
    else:
        letters = [text]
    return tuple(sorted(_parse_letter(tok, pres) for tok in letters))


def parse_point(text: str, pres: LcaPresentation) -> dict:
    """Assignments ``a[0]=3/2`` separated by commas; ``0`` is the origin."""
    text = text.strip()
    out: dict = {}
    if text in ("", "0"):
        return out
    for piece in text.split(","):
        piece = piece.strip()
        if "=" not in piece:
            raise DslError(
                Diagnostic(f"expected coordinate assignment, found {piece!r}", SourceSpan(0, 0, 1, 1))
            )
        lhs, rhs = piece.split("=", 1)
        sym = _parse_letter(lhs.strip(), pres)
        val = Q(rhs.strip())
        if val != 0:
            out[sym] = out.get(sym, Q(0)) + val
    return {k: v for k, v in out.items() if v != 0}
