import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixppl.dsl import ast as A
from mixppl.dsl import format_expr, format_model, load_model, parse, parse_expr, resolve, tokenize
from mixppl.dsl.lexer import KEYWORDS
from mixppl.errors import (LexError, MixWeightError, OriginSignatureError, ParseError, ResolveError,
                           StaticCycleError, TypeMismatchError, UnknownIdentifierError)

from .listings import GPA_LISTING, SCALE_LISTING, AIRCRAFT_WITH_DATA


def kinds(text):
    return [(t.kind, t.value) for t in tokenize(text)]


class TestTokenize:
    def test_observation_line(self):
        assert kinds("obs GPA(David) = 4;") == [
            ("keyword", "obs"), ("ident", "GPA"), ("op", "("), ("ident", "David"), ("op", ")"),
            ("op", "="), ("int", 4), ("op", ";")]

    def test_empty(self):
        assert tokenize("") == []

    def test_timestep_literal(self):
        assert kinds("@0") == [("timestep", 0)]

    def test_comments_and_positions(self):
        toks = tokenize("random Real X ~ Gaussian(0, 1); // trailing\n  query X;")
        assert [t.text for t in toks][-3:] == ["query", "X", ";"]
        assert (toks[-3].line, toks[-3].column) == (2, 3)

    def test_reals(self):
        assert kinds("0.9998 1e-05 2.5E3") == [("real", 0.9998), ("real", 1e-05), ("real", 2500.0)]

    def test_illegal_character(self):
        with pytest.raises(LexError) as err:
            tokenize("random Real X ~\n  Gaussian(0, 1) $")
        assert (err.value.line, err.value.column) == (2, 18)


class TestParse:
    def test_gpa_listing(self):
        m = parse(GPA_LISTING)
        assert m.type_decls == ("Applicant", "Country")
        assert sum(len(d.expanded()) for d in m.distinct_decls) == 3
        assert len(m.number_stmts) == 1
        assert len(m.origin_decls) == 1
        assert len(m.random_fns) == 2
        assert len(m.obs_stmts) == 1
        assert len(m.query_stmts) == 1

    def test_scale_listing(self):
        m = parse(SCALE_LISTING)
        assert (len(m.fixed_fns), len(m.random_fns), len(m.obs_stmts), len(m.query_stmts)) == (1, 3, 1, 1)

    def test_aircraft_listing(self):
        m = parse(AIRCRAFT_WITH_DATA)
        assert list(m.distinct_decls[0].expanded()) == [f"R[{i}]" for i in range(6)]
        assert [q.binding for q in m.query_stmts] == [("Timestep", "t"), ("Timestep", "t")]

    def test_truncated_statement(self):
        with pytest.raises(ParseError) as err:
            parse("random Real X ~")
        assert "expected" in str(err.value)

    def test_expected_token_position(self):
        with pytest.raises(ParseError) as err:
            parse("random Real X ~ Gaussian(0, 1)\nquery X;")
        assert err.value.line == 2

    def test_query_equals_is_equality(self):
        q = parse("query Nationality(David) = USA;").query_stmts[0]
        assert q.expr == A.BinOp("==", A.Call("Nationality", (A.Name("David"),)), A.Name("USA"))

    def test_precedence(self):
        assert parse_expr("1 + 2 * 3") == A.BinOp("+", A.IntLit(1), A.BinOp("*", A.IntLit(2), A.IntLit(3)))
        assert parse_expr("!a && b || c") == A.BinOp(
            "||", A.BinOp("&&", A.UnaryOp("!", A.Name("a")), A.Name("b")), A.Name("c"))

    def test_comparisons_do_not_chain(self):
        with pytest.raises(ParseError):
            parse_expr("a < b < c")

    def test_set_comprehension_with_filter(self):
        e = parse_expr("{a for Applicant a : GPA(a) > 3}")
        assert isinstance(e, A.SetComp) and e.cond is not None

    def test_nested_if(self):
        e = parse_expr("if a then 1 else if b then 2 else 3")
        assert isinstance(e.orelse, A.If)


class TestRoundTrip:
    @pytest.mark.parametrize("text", [GPA_LISTING, SCALE_LISTING, AIRCRAFT_WITH_DATA])
    def test_listing(self, text):
        ast = parse(text)
        assert parse(format_model(ast)) == ast

    def test_printer_is_canonical(self):
        ast = parse(GPA_LISTING)
        once = format_model(ast)
        assert format_model(parse(once)) == once


_IDENTS = st.text(string.ascii_letters, min_size=1, max_size=6).filter(
    lambda s: s not in KEYWORDS and s not in ("prev",))


def _exprs():
    leaves = st.one_of(
        st.integers(0, 10**6).map(A.IntLit),
        st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(A.RealLit),
        st.booleans().map(A.BoolLit),
        st.just(A.NullLit()),
        st.integers(0, 50).map(A.TimestepLit),
        _IDENTS.map(A.Name),
    )

    def grow(children):
        return st.one_of(
            st.builds(A.BinOp, st.sampled_from(["+", "-", "*", "/", "==", "!=", "<", "<=", ">", ">=",
                                                "&&", "||"]), children, children),
            st.builds(A.UnaryOp, st.sampled_from(["-", "!"]), children),
            st.builds(A.If, children, children, children),
            st.builds(A.Call, _IDENTS, st.lists(children, min_size=1, max_size=3).map(tuple)),
        )

    return st.recursive(leaves, grow, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_exprs())
def test_expression_round_trip(e):
    assert parse_expr(format_expr(e)) == e


class TestResolve:
    def test_gpa(self):
        m = resolve(parse(GPA_LISTING))
        assert [n.id for n in m.number_stmts] == ["#Applicant(Nationality)"]
        assert m.functions["GPA"].kind == "random"
        assert m.functions["Nationality"].kind == "origin"
        assert m.functions["David"].ret_type == "Applicant"
        assert not m.batchable

    def test_scale_is_vectorisable(self):
        assert resolve(parse(SCALE_LISTING)).batchable

    def test_static_cycle(self):
        with pytest.raises(StaticCycleError):
            resolve(parse("random Real A ~ Gaussian(B, 1); random Real B ~ Gaussian(A, 1); query A;"))

    def test_self_loop(self):
        with pytest.raises(StaticCycleError):
            resolve(parse("random Real A ~ Gaussian(A, 1); query A;"))

    def test_mix_weights_must_sum_to_one(self):
        with pytest.raises(MixWeightError):
            resolve(parse("random Real X ~ Mix({0 -> 0.5, 1 -> 0.6}); query X;"))

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError):
            resolve(parse("random Real X ~ Gaussian(mu, 1); query X;"))

    def test_type_mismatch(self):
        with pytest.raises(TypeMismatchError):
            resolve(parse("random Bool X ~ Gaussian(0, 1); query X;"))

    def test_origin_signature(self):
        src = ("type A, B; origin B g(B); #A(g = b) ~ Poisson(1); query 1;")
        with pytest.raises(OriginSignatureError):
            resolve(parse(src))

    def test_unguarded_prev(self):
        with pytest.raises(ResolveError, match="prev"):
            resolve(parse("random Real X(Timestep t) ~ Gaussian(X(prev(t)), 1); query X(@1);"))

    def test_guarded_prev(self):
        resolve(parse("random Real X(Timestep t) ~ if t == @0 then Gaussian(0, 1) "
                      "else Gaussian(X(prev(t)), 1); query X(@1);"))

    def test_timestep_recursion_is_not_a_static_cycle(self):
        load_model(AIRCRAFT_WITH_DATA)

    def test_null_evidence_rejected(self):
        with pytest.raises(TypeMismatchError):
            resolve(parse("type C; distinct C a; random C X ~ UniformChoice({c for C c}); obs X = null; query 1;"))

    def test_serialisation_is_deterministic(self):
        assert resolve(parse(GPA_LISTING)).serialize() == resolve(parse(GPA_LISTING)).serialize()

    def test_aliases(self):
        m = load_model("random Real X ~ mixed({UniformReal(0, 1) -> 0.5, 1 -> 0.5});"
                       "random Bool B ~ Bernoulli(0.3); random Real Z ~ PointMass(2.0);"
                       "random Real T ~ TruncatedGaussian(0, 1, -1, 1); query X;")
        assert set(m.functions) == {"X", "B", "Z", "T"}


def test_bundled_models_resolve():
    from mixppl.dsl import bundled_models

    names = bundled_models()
    assert {"gpa", "gpa_two_country", "scale", "scale_ssm", "aircraft", "aircraft_model"} <= set(names)
    for name in names:
        load_model(name)
