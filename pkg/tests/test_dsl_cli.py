import json
from fractions import Fraction as Q
from pathlib import Path

import golden
import pytest

from lieconformal import dsl
from lieconformal.cli import run
from lieconformal.core import CVec, LPoly

DATA = Path(__file__).parent / "data"

GOLDEN_FILES = [
    "heisenberg.lca",
    "virasoro.lca",
    "abelian1.lca",
    "abelian2.lca",
    "n3current.lca",
    "mixed.lca",
]


def read(name):
    return (DATA / name).read_text()


class TestParsing:
    def test_heisenberg_source(self):
        ast = dsl.parse_algebra(read("heisenberg.lca"))
        assert ast.name == "heisenberg"
        assert [(g.name, g.torsion) for g in ast.generators] == [("a", None), ("k", 1)]
        assert len(ast.brackets) == 1

    def test_golden_files_lower_to_golden_presentations(self):
        builders = {
            "heisenberg.lca": golden.heisenberg,
            "virasoro.lca": golden.virasoro,
            "abelian1.lca": golden.abelian1,
            "abelian2.lca": golden.abelian2,
            "n3current.lca": golden.n3_current,
            "mixed.lca": golden.mixed,
        }
        for name, build in builders.items():
            pres, warnings = dsl.load_presentation(read(name))
            assert not warnings
            assert pres == build(), name

    def test_syntax_error_has_span(self):
        with pytest.raises(dsl.DslError) as err:
            dsl.parse_algebra("algebra x { generators { a: free }")
        diag = err.value.diagnostics[0]
        assert diag.span.line >= 1 and diag.span.begin <= len("algebra x { generators { a: free }")

    def test_duplicate_generator(self):
        src = "algebra x { generators { a: free; a: free; } }"
        with pytest.raises(dsl.DslError) as err:
            dsl.parse_algebra(src)
        assert "duplicate" in str(err.value)

    def test_every_diagnostic_span_is_inside_source(self):
        bad_sources = [
            "algebra x { generators { a: free; } bracket [a, a] = lambda; }",
            "algebra x { generators { a: free; } bracket [a, a] = b; }",
            "algebra x { generators { a: free; b: free; } bracket [b, a] = a; }",
            "algebra x { generators { a: free; } bracket [a, a] = a*D; }",
            "algebra x { generators { a: }",
        ]
        for src in bad_sources:
            with pytest.raises(dsl.DslError) as err:
                pres, _ = dsl.load_presentation(src)
            for diag in err.value.diagnostics:
                assert 0 <= diag.span.begin <= diag.span.end <= len(src)


class TestLowering:
    def test_expression_normalization(self):
        src = (
            "algebra v { generators { L: free; C: torsion(1); } "
            "bracket [L, L] = (D + 2*lambda)*L + (1/12)*lambda^3*C; }"
        )
        pres, warnings = dsl.load_presentation(src)
        assert not warnings
        assert pres.brackets[(0, 0)] == LPoly(
            {0: {(0, 1): 1}, 1: {(0, 0): 2}, 3: {(1, 0): Q(1, 12)}}
        )

    def test_monomial_without_generator(self):
        src = "algebra x { generators { a: free; } bracket [a, a] = lambda; }"
        with pytest.raises(dsl.DslError) as err:
            dsl.load_presentation(src)
        assert "exactly one generator" in str(err.value)

    def test_transposed_bracket_rejected(self):
        src = "algebra x { generators { a: free; b: free; } bracket [b, a] = a; }"
        with pytest.raises(dsl.DslError) as err:
            dsl.load_presentation(src)
        assert "must be stated as [a, b]" in str(err.value)

    def test_torsion_annihilation_warns(self):
        src = (
            "algebra x { generators { a: free; k: torsion(1); } "
            "bracket [a, a] = lambda*k + lambda*D^2*k; }"
        )
        pres, warnings = dsl.load_presentation(src)
        assert warnings and "annihilates" in warnings[0].message
        assert pres.brackets[(0, 0)] == LPoly({1: {(1, 0): 1}})

    def test_right_applied_derivative_rejected(self):
        src = "algebra x { generators { a: free; } bracket [a, a] = lambda*a*D; }"
        with pytest.raises(dsl.DslError) as err:
            dsl.load_presentation(src)
        assert "left of a generator" in str(err.value)


class TestEmit:
    def test_parse_print_roundtrip(self):
        for name in GOLDEN_FILES:
            pres, _ = dsl.load_presentation(read(name))
            text = dsl.emit_algebra(pres)
            pres2, _ = dsl.load_presentation(text)
            assert pres2 == pres, name
            # printing is a fixed point after one normalization pass
            assert dsl.emit_algebra(pres2) == text


class TestMiniGrammars:
    def test_vector_expressions(self):
        pres = golden.virasoro()
        v = dsl.parse_vector("D*L + 3*C", pres)
        assert v == CVec({(0, 1): 1, (1, 0): 3})
        v = dsl.parse_vector("(1/2)*D^2*L", pres)
        assert v == CVec({(0, 2): 1})
        with pytest.raises(dsl.DslError):
            dsl.parse_vector("lambda*L", pres)

    def test_words(self):
        pres = golden.heisenberg()
        assert dsl.parse_word("1", pres) == ()
        assert dsl.parse_word("a", pres) == ((0, 0),)
        assert dsl.parse_word(":a a k:", pres) == ((0, 0), (0, 0), (1, 0))
        assert dsl.parse_word(":a[1] a:", pres) == ((0, 0), (0, 1))
        with pytest.raises(dsl.DslError):
            dsl.parse_word(":a q:", pres)
        with pytest.raises(dsl.DslError):
            dsl.parse_word(":k[2]:", pres)

    def test_points(self):
        pres = golden.heisenberg()
        assert dsl.parse_point("0", pres) == {}
        assert dsl.parse_point("a[0]=3/2, k[0]=-1", pres) == {
            (0, 0): Q(3, 2),
            (1, 0): Q(-1),
        }
        with pytest.raises(dsl.DslError):
            dsl.parse_point("a[0]", pres)


class TestCli:
    def test_exit_codes(self, tmp_path):
        assert run(["check", str(DATA / "heisenberg.lca")])[0] == 0
        assert run(["check", str(DATA / "badheis.lca")])[0] == 1
        assert run(["check", str(DATA / "badsyntax.lca")])[0] == 2
        assert run(["nonsense-command"])[0] == 2
        assert run(["integrate", str(DATA / "virasoro.lca")])[0] == 3
        code, _ = run(
            ["fvl", str(DATA / "heisenberg.lca"), "--deg", "2", "--depth", "1",
             "--window=-2..1", "--check-jacobi", "2"]
        )
        assert code == 4

    def test_check_text_output(self):
        code, text = run(["check", str(DATA / "heisenberg.lca")])
        assert code == 0
        assert "antisymmetry: pass" in text and "jacobi: pass" in text
        code, text = run(["check", str(DATA / "badheis.lca")])
        assert code == 1
        assert "antisymmetry: fail" in text and "2*k" in text

    def test_eval_example(self):
        code, text = run(
            ["eval", str(DATA / "heisenberg.lca"), "--a", "a[0]=1", "--b", "a[0]=1",
             "--window=-2..2"]
        )
        assert code == 0
        assert "n=1: k[0]=1" in text

    def test_json_outputs_validate(self):
        jsonschema = pytest.importorskip("jsonschema")
        report_schema = {
            "type": "object",
            "required": ["algebra", "checks", "pass"],
            "properties": {
                "algebra": {"type": "string"},
                "pass": {"type": "boolean"},
                "checks": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "pass"],
                        "properties": {"name": {"type": "string"}, "pass": {"type": "boolean"}},
                    },
                },
            },
        }
        code, text = run(["check", str(DATA / "heisenberg.lca"), "--format", "json"])
        assert code == 0
        jsonschema.validate(json.loads(text), report_schema)

        table_schema = {
            "type": "object",
            "required": ["algebra", "degree", "depth", "window", "entries"],
            "properties": {
                "algebra": {"type": "string"},
                "degree": {"type": "integer"},
                "depth": {"type": "integer"},
                "window": {
                    "type": "array", "items": {"type": "integer"},
                    "minItems": 2, "maxItems": 2,
                },
                "entries": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["l", "n", "k", "kprime", "coeff"],
                        "properties": {
                            "l": {"type": "string"},
                            "n": {"type": "integer"},
                            "k": {"type": "object", "additionalProperties": {"type": "integer"}},
                            "kprime": {"type": "object", "additionalProperties": {"type": "integer"}},
                            "coeff": {"type": "string", "pattern": "^-?[0-9]+(/[0-9]+)?$"},
                        },
                    },
                },
            },
        }
        code, text = run(
            ["fvl", str(DATA / "heisenberg.lca"), "--deg", "2", "--depth", "2",
             "--window=-6..6", "--format", "json"]
        )
        assert code == 0
        jsonschema.validate(json.loads(text), table_schema)

        point_schema = {
            "type": "object",
            "required": ["bound", "slices"],
            "properties": {
                "bound": {"type": "integer"},
                "slices": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "required": ["coords"],
                        "properties": {
                            "coords": {
                                "type": "object",
                                "additionalProperties": {"type": "string"},
                            }
                        },
                    },
                },
            },
        }
        code, text = run(
            ["eval", str(DATA / "heisenberg.lca"), "--a", "a[0]=1", "--b", "a[0]=1",
             "--window=-2..2", "--format", "json"]
        )
        assert code == 0
        jsonschema.validate(json.loads(text), point_schema)

        summary_schema = {
            "type": "object",
            "required": ["N", "theta_table", "basis_change"],
            "properties": {
                "N": {"type": "integer"},
                "theta_table": {"type": "object", "additionalProperties": {"type": "integer"}},
                "basis_change": {"type": "object"},
            },
        }
        code, text = run(["integrate", str(DATA / "mixed.lca"), "--format", "json"])
        assert code == 0
        jsonschema.validate(json.loads(text), summary_schema)

    def test_deterministic_reruns(self):
        argvs = [
            ["verify-manifold", str(DATA / "heisenberg.lca"), "--samples", "6",
             "--seed", "11", "--window=-3..3", "--format", "json"],
            ["fvl", str(DATA / "heisenberg.lca"), "--deg", "2", "--depth", "2",
             "--window=-6..6", "--format", "json"],
            ["integrate", str(DATA / "mixed.lca"), "--format", "json"],
            ["roundtrip", str(DATA / "n3current.lca")],
        ]
        for argv in argvs:
            first = run(argv)
            second = run(argv)
            assert first == second

    def test_verify_manifold_passes(self):
        code, text = run(
            ["verify-manifold", str(DATA / "heisenberg.lca"), "--samples", "8",
             "--seed", "2", "--window=-4..4"]
        )
        assert code == 0
        assert "jacobi: pass" in text

    def test_fvl_writes_table(self, tmp_path):
        out = tmp_path / "table.json"
        code, text = run(
            ["fvl", str(DATA / "heisenberg.lca"), "--deg", "2", "--depth", "2",
             "--window=-8..6", "--check-identities", "--check-jacobi", "2",
             "--out", str(out)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["algebra"] == "heisenberg"
        assert any(e["n"] == 1 and e["l"] == "k[0]" for e in doc["entries"])

    def test_roundtrip_command(self):
        for name in ["heisenberg.lca", "abelian2.lca", "n3current.lca", "mixed.lca"]:
            code, text = run(["roundtrip", str(DATA / name)])
            assert code == 0, (name, text)
            assert "roundtrip: pass" in text


def test_empty_generator_block_parses():
    pres, _ = dsl.load_presentation("algebra none { generators { } }")
    assert pres.generators == []
    assert pres.check_axioms().ok


def test_cli_rejects_bad_values():
    code, text = run(["nth", str(DATA / "heisenberg.lca"), "--left", "a",
                      "--right", "a", "--n", "-1"])
    assert code == 2 and "invalid argument" in text
    code, text = run(["eval", str(DATA / "heisenberg.lca"), "--a", "a[0]=x",
                      "--b", "0", "--window=-1..1"])
    assert code == 2
