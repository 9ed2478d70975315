"""Command-line driver.

Exit codes: 0 success / all checks pass, 1 a verification failed,
2 parse or usage error, 3 the presentation is not nilpotent,
4 a truncated table cannot certify a check.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction

from . import dsl, render
from .bialgebra import coproduct, counit, primitives_up_to
from .core import CVec
from .enveloping import EnvelopingAlgebra, UElem
from .errors import AxiomFailure, NotNilpotent, TruncationInsufficient
from .lawtable import (
    LawTable,
    check_convergence_bound,
    check_identities,
    check_law_jacobi,
    extract_law,
)
from .manifold import integrate

Q = Fraction

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_NILPOTENT = 3
EXIT_TRUNCATION = 4


def _window(text: str) -> tuple[int, int]:
    lo, hi = text.split("..", 1)
    return int(lo), int(hi)


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    pres, warnings = dsl.load_presentation(text)
    return pres, warnings


def _maybe_file(arg: str) -> str:
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if isinstance(doc, dict) and "coords" in doc:
            return ", ".join(f"{k}={v}" for k, v in sorted(doc["coords"].items()))
        if isinstance(doc, dict) and "word" in doc:
            return ":" + " ".join(doc["word"]) + ":" if doc["word"] else "1"
        raise dsl.DslError(
            dsl.Diagnostic(f"unrecognized JSON argument in {arg[1:]!r}", dsl.SourceSpan(0, 0, 1, 1))
        )
    return arg


def _vector_json(pres, v: CVec) -> dict:
    return {f"{pres.gen_name(g)}[{d}]": str(c) for (g, d), c in sorted(v.coeffs.items())}


def _uelem_json(basis, u: UElem) -> list:
    out = []
    for word in sorted(u.terms):
        out.append({"word": [basis.label(k) for k in word], "coeff": str(u.terms[word])})
    return out


def _report_lines(pres, report) -> list[str]:
    lines = []
    for c in report.checks:
        lines.append(f"{c.name}: {'pass' if c.passed else 'fail'}")
        if not c.passed:
            names = tuple(pres.gen_name(i) for i in c.witness)
            lines.append(f"  witness: {names}")
            if hasattr(c.residual, "coeffs") and not isinstance(c.residual, CVec):
                try:
                    lines.append("  residual: " + render.lpoly_text(pres, c.residual))
                except Exception:
                    lines.append("  residual: " + render.lmpoly_text(pres, c.residual))
    return lines


def _report_json(pres, report) -> dict:
    out = []
    for c in report.checks:
        entry = {"name": c.name, "pass": c.passed}
        if not c.passed:
            entry["witness"] = [pres.gen_name(i) for i in c.witness]
        out.append(entry)
    return {"algebra": pres.name, "checks": out, "pass": report.ok}


class _Emitter:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []
        self.doc = None

    def text(self, *lines: str):
        self.lines.extend(lines)

    def payload(self, doc):
        self.doc = doc

    def render(self) -> str:
        if self.fmt == "json":
            return json.dumps(self.doc, indent=1, sort_keys=True) + "\n"
        return "\n".join(self.lines) + ("\n" if self.lines else "")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(
        prog="lcv",
        parents=[common],
        description="Exact computations with Lie conformal algebras and their vertex structures.",
        epilog=(
            "Vector expressions use the bracket syntax without lambda, e.g. 'D*L + 3*C'. "
            "Ordered words are ':a a k:' with optional depth suffixes like 'a[1]', a bare "
            "letter, or '1' for the vacuum. Points are comma-separated assignments "
            "'a[0]=3/2, k[0]=-1'. Point and word arguments also accept @FILE with the "
            "JSON forms {\"coords\": {...}} and {\"word\": [...]}."
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="verify the algebra axioms")
    p.add_argument("file")

    p = sub.add_parser("bracket", parents=[common], help="bracket of two vectors")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = sub.add_parser("nth", parents=[common], help="nonnegative product of two vectors")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("nop", parents=[common], help="ordered product of two words")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = sub.add_parser("yprod", parents=[common], help="window of integer-indexed products")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--window", type=_window, required=True)

    p = sub.add_parser("coproduct", parents=[common], help="coproduct of a word")
    p.add_argument("file")
    p.add_argument("--elem", required=True)

    p = sub.add_parser("primitives", parents=[common], help="primitive basis of a word span")
    p.add_argument("file")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)

    p = sub.add_parser("fvl", parents=[common], help="extract the coefficient law table")
    p.add_argument("file")
    p.add_argument("--deg", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--window", type=_window, required=True)
    p.add_argument("--check-identities", action="store_true")
    p.add_argument("--check-jacobi", type=int, default=None, metavar="DEG")
    p.add_argument("--out", default=None)

    p = sub.add_parser("integrate", parents=[common], help="integrate a nilpotent presentation")
    p.add_argument("file")

    p = sub.add_parser("eval", parents=[common], help="products of two points")
    p.add_argument("file")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--window", type=_window, required=True)
    p.add_argument(
        "--float",
        action="store_true",
        dest="as_float",
        help="render coordinates as floats (approximate; the core stays exact)",
    )

    p = sub.add_parser("verify-manifold", parents=[common], help="randomized product axiom suite")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--window", type=_window, default=(-4, 4))

    p = sub.add_parser("roundtrip", parents=[common], help="tangent structure reproduces the input")
    p.add_argument("file")

    return ap


def run(argv) -> tuple[int, str]:
    """Execute one command; returns (exit code, output text)."""
    parser = _build_parser()
    buf = io.StringIO()
    try:
        with redirect_stdout(buf), redirect_stderr(buf):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return (EXIT_USAGE if code not in (0,) else 0), buf.getvalue()

    em = _Emitter(args.format)
    try:
        code = _dispatch(args, em)
    except dsl.DslError as exc:
        return EXIT_USAGE, "\n".join(str(d) for d in exc.diagnostics) + "\n"
    except FileNotFoundError as exc:
        return EXIT_USAGE, f"cannot open {exc.filename!r}\n"
    except (ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
        return EXIT_USAGE, f"invalid argument: {exc}\n"
    except NotNilpotent as exc:
        return EXIT_NOT_NILPOTENT, _not_nilpotent_text(exc)
    except TruncationInsufficient as exc:
        return EXIT_TRUNCATION, f"truncation insufficient: {exc}\n"
    except AxiomFailure as exc:
        return EXIT_CHECK_FAILED, f"axiom failure: {exc}\n"
    return code, em.render()


def _not_nilpotent_text(exc: NotNilpotent) -> str:
    lines = [f"not nilpotent: {exc}"]
    rendered = getattr(exc, "rendered", None)
    if rendered is None:
        rendered = [str(sorted(v.coeffs.items())) for v in exc.stable_generators]
    for txt in rendered:
        lines.append(f"  stable: {txt}")
    return "\n".join(lines) + "\n"


def _dispatch(args, em: _Emitter) -> int:
    cmd = args.command
    pres, warnings = _load(args.file)
    for w in warnings:
        em.text(f"warning: {w}")

    if cmd == "check":
        report = pres.check_axioms()
        em.text(*_report_lines(pres, report))
        em.payload(_report_json(pres, report))
        return EXIT_OK if report.ok else EXIT_CHECK_FAILED

    if cmd == "bracket":
        v = dsl.parse_vector(args.left, pres)
        w = dsl.parse_vector(args.right, pres)
        poly = pres.bracket(v, w)
        em.text(render.lpoly_text(pres, poly))
        em.payload(
            {
                "lambda_poly": {
                    str(n): _vector_json(pres, vec) for n, vec in sorted(poly.coeffs.items())
                }
            }
        )
        return EXIT_OK

    if cmd == "nth":
        v = dsl.parse_vector(args.left, pres)
        w = dsl.parse_vector(args.right, pres)
        out = pres.nth_product(v, w, args.n)
        em.text(render.vector_text(pres, out))
        em.payload({"vector": _vector_json(pres, out)})
        return EXIT_OK

    alg = EnvelopingAlgebra(pres)

    if cmd == "nop":
        left = UElem.monomial(dsl.parse_word(_maybe_file(args.left), pres))
        right = UElem.monomial(dsl.parse_word(_maybe_file(args.right), pres))
        out = alg.nop(left, right)
        em.text(render.uelem_text(alg.basis, out))
        em.payload({"element": _uelem_json(alg.basis, out)})
        return EXIT_OK

    if cmd == "yprod":
        left = UElem.monomial(dsl.parse_word(_maybe_file(args.left), pres))
        right = UElem.monomial(dsl.parse_word(_maybe_file(args.right), pres))
        lo, hi = args.window
        products, bound = alg.y_window(left, right, lo, hi)
        for n in range(lo, hi + 1):
            em.text(f"n={n}: " + render.uelem_text(alg.basis, products[n]))
        em.text(f"bound: {bound}")
        em.payload(
            {
                "bound": bound,
                "products": {str(n): _uelem_json(alg.basis, products[n]) for n in products},
            }
        )
        return EXIT_OK

    if cmd == "coproduct":
        elem = UElem.monomial(dsl.parse_word(_maybe_file(args.elem), pres))
        tens = coproduct(elem)
        parts = []
        for (a, b) in sorted(tens.terms):
            c = tens.terms[(a, b)]
            lhs = render.word_text(alg.basis, a)
            rhs = render.word_text(alg.basis, b)
            prefix = "" if c == 1 else f"{c}*"
            parts.append(f"{prefix}{lhs} (x) {rhs}")
        em.text(" + ".join(parts) if parts else "0")
        em.text(f"counit: {counit(elem)}")
        em.payload(
            {
                "tensor": [
                    {
                        "left": [alg.basis.label(k) for k in a],
                        "right": [alg.basis.label(k) for k in b],
                        "coeff": str(tens.terms[(a, b)]),
                    }
                    for (a, b) in sorted(tens.terms)
                ],
                "counit": str(counit(elem)),
            }
        )
        return EXIT_OK

    if cmd == "primitives":
        basis = primitives_up_to(alg, args.max_len, args.depth)
        for u in basis:
            em.text(render.uelem_text(alg.basis, u))
        em.payload({"primitives": [_uelem_json(alg.basis, u) for u in basis]})
        return EXIT_OK

    if cmd == "fvl":
        table = extract_law(alg, args.deg, args.depth, args.window)
        doc = table.to_json()
        failed = False
        reports = {}
        if args.check_identities:
            rep = check_identities(table)
            reports["identities"] = rep
            em.text(f"left identity: {'pass' if rep['left_identity'] else 'fail'}")
            em.text(f"right identity: {'pass' if rep['right_identity'] else 'fail'}")
            for f in rep["failures"]:
                em.text(f"  fail: {f}")
            failed = failed or not (rep["left_identity"] and rep["right_identity"])
        if args.check_jacobi is not None:
            samples = [(l, t, j) for l in (-1, 0, 1) for t in (-1, 0, 1) for j in (-1, 0, 1)]
            rep = check_law_jacobi(table, samples, args.check_jacobi)
            reports["jacobi"] = {"pass": rep["pass"]}
            em.text(f"jacobi (degree {args.check_jacobi}): {'pass' if rep['pass'] else 'fail'}")
            failed = failed or not rep["pass"]
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
            em.text(f"table written to {args.out}")
        else:
            em.text(f"entries: {sum(len(c) for c in table.entries.values())}")
        doc["reports"] = reports
        em.payload(doc)
        return EXIT_CHECK_FAILED if failed else EXIT_OK

    # remaining commands integrate the presentation
    try:
        manifold = integrate(pres)
    except NotNilpotent as exc:
        exc.rendered = [render.vector_text(pres, v) for v in exc.stable_generators]
        raise

    if cmd == "integrate":
        theta_table = {
            manifold.basis.label(bv.key): bv.weight for bv in manifold.basis.issued
        }
        change = {
            manifold.basis.label(bv.key): _vector_json(pres, bv.vec)
            for bv in manifold.basis.issued
        }
        em.text(f"nilpotency degree: {manifold.N}")
        for bv in manifold.basis.issued:
            em.text(f"  {manifold.basis.label(bv.key)}: weight {bv.weight}")
        em.payload({"N": manifold.N, "theta_table": theta_table, "basis_change": change})
        return EXIT_OK

    if cmd == "eval":
        a_vec = CVec(dsl.parse_point(_maybe_file(args.a), pres))
        b_vec = CVec(dsl.parse_point(_maybe_file(args.b), pres))
        a = manifold.basis.expand(a_vec)
        b = manifold.basis.expand(b_vec)
        lo, hi = args.window
        result = manifold.product_window(a, b, lo, hi)
        slices_json = {}
        for n in range(lo, hi + 1):
            pt = result.slices[n]
            vec = CVec()
            for key, c in pt.items():
                vec = vec + manifold.basis.vector(key).scale(c)
            if args.as_float:
                txt = ", ".join(
                    f"{pres.gen_name(g)}[{d}]={float(c):.12g}"
                    for (g, d), c in sorted(vec.coeffs.items())
                ) or "0"
            else:
                txt = render.vector_coord_text(pres, vec)
            em.text(f"n={n}: {txt}")
            slices_json[str(n)] = {"coords": _vector_json(pres, vec)}
        em.text(f"bound: {result.bound}")
        em.payload({"bound": result.bound, "slices": slices_json})
        return EXIT_OK

    if cmd == "verify-manifold":
        lo, hi = args.window
        report = manifold.check_axioms(args.samples, args.seed, (lo, hi))
        for c in report["checks"]:
            em.text(f"{c['axiom']}: {'pass' if c['pass'] else 'fail'}")
        em.payload(report)
        return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED

    if cmd == "roundtrip":
        recon, change = manifold.tangent_presentation()
        same = recon == pres
        em.text(f"roundtrip: {'pass' if same else 'fail'}")
        for bv in manifold.basis.issued:
            label = manifold.basis.label(bv.key)
            em.text(f"  {label} = " + render.vector_text(pres, change[label]))
        em.payload(
            {
                "pass": same,
                "basis_change": {
                    label: _vector_json(pres, vec) for label, vec in sorted(change.items())
                },
            }
        )
        return EXIT_OK if same else EXIT_CHECK_FAILED

    raise AssertionError(cmd)


def main() -> None:
    code, text = run(sys.argv[1:])
    sys.stdout.write(text)
    raise SystemExit(code)
