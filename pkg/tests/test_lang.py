import numpy as np
import pytest

from gausslang.errors import ContractError, ParseError, TypeCheckError
from gausslang.generate import random_program
from gausslang.lang import (
    REAL,
    UNIT,
    PairType,
    desugar,
    implicit_context,
    load_program,
    parse,
    pretty,
    typecheck,
    vector_type,
)
from gausslang.lang.parser import tokenize
from gausslang.lang.syntax import (
    WILDCARD,
    Add,
    Cond,
    Const,
    Let,
    LetPair,
    MatrixLit,
    MatVec,
    Neg,
    Normal,
    NormalParams,
    Observe,
    Pair,
    Scale,
    Seq,
    Sub,
    Unit,
    Var,
    free_vars,
    is_core,
    size,
    subterms,
)
from gausslang.linalg import psd_root
from gausslang.opsem import observable, run

from conftest import chained_lets

EXAMPLE = "let (x, y) = (normal(), normal()) in x =:= y; x + y"


# -------------------------------------------------------------------
# parse
# -------------------------------------------------------------------
def test_parse_let_condition_sequence():
    t = parse("let x = normal() in x =:= 0.0; x")
    assert t == Let("x", Normal(), Seq(Cond(Var("x"), Const(0.0)), Var("x")))


def test_parse_unit():
    assert parse("()") == Unit()


def test_parse_pair_pattern():
    t = parse(EXAMPLE)
    assert t == LetPair(
        "x",
        "y",
        Pair(Normal(), Normal()),
        Seq(Cond(Var("x"), Var("y")), Add(Var("x"), Var("y"))),
    )


def test_parse_arithmetic():
    assert parse("0.5 · normal() + 1.0") == Add(Scale(0.5, Normal()), Const(1.0))
    assert parse("2 * x - y") == Sub(Scale(2.0, Var("x")), Var("y"))
    assert parse("-x") == Neg(Var("x"))
    assert parse("-2.5") == Const(-2.5)
    assert parse("1e-3 · x") == Scale(1e-3, Var("x"))
    assert parse("2 · 3 · x") == Scale(2.0, Scale(3.0, Var("x")))


def test_parse_tuples_and_vectors():
    assert parse("(1, 2, 3)") == Pair(Const(1.0), Pair(Const(2.0), Const(3.0)))
    assert parse("[1, 2]") == Pair(Const(1.0), Const(2.0))
    assert parse("(x)") == Var("x")


def test_parse_matrix_sugar():
    t = parse("[[1, 0], [2, 1]] · (x, y)")
    assert t == MatVec(MatrixLit(((1.0, 0.0), (2.0, 1.0))), Pair(Var("x"), Var("y")))
    t = parse("normal([0, 0], [[1, 1], [1, 1]])")
    assert isinstance(t, NormalParams) and t.variance.shape == (2, 2)
    assert parse("normal(1, 4)") == NormalParams(Const(1.0), 4.0)


def test_parse_observe_and_comments():
    t = parse("# prior\nlet x = normal() in\nobserve(normal(x, 1), 2.0); x  # done")
    assert t == Let("x", Normal(), Seq(Observe(NormalParams(Var("x"), 1.0), Const(2.0)), Var("x")))


def test_parse_keeps_locations():
    t = parse("let x = normal() in\n  x + y")
    assert t.loc == (1, 1)
    assert t.body.loc == (2, 5)
    assert t.body.left.loc == (2, 3)


@pytest.mark.parametrize(
    "source, line, column",
    [
        ("let x = in x", 1, 9),
        ("normal(", 1, 8),
        ("x $ y", 1, 3),
        ("(1, 2", 1, 6),
        ("let x = 1\nin x y", 2, 6),
        ("x · y", 1, 1),
    ],
)
def test_parse_errors_carry_locations(source, line, column):
    with pytest.raises(ParseError) as err:
        parse(source)
    assert (err.value.line, err.value.column) == (line, column)


def test_wildcard_can_be_bound_but_not_used():
    assert parse("let _ = 0 =:= 0 in 1") == Let(WILDCARD, Cond(Const(0.0), Const(0.0)), Const(1.0))
    with pytest.raises(ParseError):
        parse("let _ = 1 in _")


def test_ragged_matrix_is_rejected():
    with pytest.raises(ParseError):
        parse("[[1, 2], [3]] · x")


def test_tokenize_maps_star_to_dot():
    assert [t.text for t in tokenize("2 * x")] == ["2", "·", "x", ""]


# -------------------------------------------------------------------
# typecheck
# -------------------------------------------------------------------
def test_typecheck_accepts():
    assert typecheck(parse(EXAMPLE)).ty == REAL
    assert typecheck(parse("0.5 · normal() + 1.0")).ty == REAL
    assert typecheck(parse("(normal(), ())")).ty == PairType(REAL, UNIT)
    assert typecheck(parse("x =:= 1"), {"x": REAL}).ty == UNIT
    assert typecheck(parse("[[1, 2, 3]] · v"), {"v": vector_type(3)}).ty == REAL


@pytest.mark.parametrize(
    "source, rule",
    [
        ("normal() =:= ()", "cond"),
        ("() + 1", "add"),
        ("2 · ()", "scale"),
        ("y", "var"),
        ("let (a, b) = normal() in a", "let-pair"),
        ("normal(); 1", "seq"),
        ("observe(normal(), ())", "observe"),
        ("normal((1, 2), 1)", "normal"),
        ("[[1, 2]] · 3", "matvec"),
        ("let (a, a) = (1, 2) in a", "let-pair"),
    ],
)
def test_typecheck_rejects(source, rule):
    with pytest.raises(TypeCheckError) as err:
        typecheck(parse(source))
    assert err.value.rule == rule
    assert f"[{rule}]" in str(err.value)


def test_type_errors_are_located():
    with pytest.raises(TypeCheckError) as err:
        typecheck(parse("let x = normal() in\nx =:= ()"))
    assert err.value.line == 2


def test_shadowing_is_lexical():
    t = typecheck(parse("let x = () in let x = 1 in x + x"))
    assert t.ty == REAL


def test_typed_terms_compare_equal_to_untyped():
    t = parse("x + 1")
    assert typecheck(t, {"x": REAL}) == t


# -------------------------------------------------------------------
# desugar
# -------------------------------------------------------------------
def _value(source, context=None):
    psi = observable(run(load_program(source, context)))
    return psi.mean, psi.cov


def test_desugar_scalar_normal():
    t = load_program("normal(0, 4)")
    assert t == Add(Const(0.0), Scale(2.0, Normal()))
    assert is_core(t)


def test_desugar_observe():
    t = load_program("observe(normal(), x)", {"x": REAL})
    assert isinstance(t, Let) and t.bound == Normal()
    assert t.body == Cond(Var("x"), Var(t.name))
    assert "%" in t.name


def test_desugar_matrix_normal():
    mean, cov = _value("normal([1, 2], [[1, 1], [1, 1]])")
    assert np.allclose(mean, [1.0, 2.0])
    assert np.allclose(cov, [[1.0, 1.0], [1.0, 1.0]])
    A = psd_root([[1.0, 1.0], [1.0, 1.0]])
    assert A.shape == (2, 1) and np.allclose(A @ A.T, 1.0)


def test_desugar_matvec_and_subtraction():
    mean, cov = _value("let v = (normal(), normal()) in [[1, 1], [1, -1]] · v")
    assert np.allclose(mean, 0.0)
    assert np.allclose(cov, [[2.0, 0.0], [0.0, 2.0]])
    mean, cov = _value("let x = normal() in x - -x")
    assert np.allclose(cov, [[4.0]])


def test_desugar_vector_observe():
    mean, cov = _value("let v = normal([0, 0], [[1, 0], [0, 1]]) in observe(normal(v, [[1, 0], [0, 1]]), [2, 4]); v")
    assert np.allclose(mean, [1.0, 2.0])
    assert np.allclose(cov, 0.5 * np.eye(2))


def test_desugar_rejects_non_psd_covariance():
    with pytest.raises(ContractError):
        load_program("normal([0, 0], [[1, 2], [2, 1]])")


def test_desugar_needs_types():
    with pytest.raises(ContractError):
        desugar(parse("1"))


def test_desugared_terms_are_core_and_keep_their_type(rng):
    for _ in range(30):
        t = random_program(rng)
        core = desugar(t)
        assert is_core(core) and core.ty == t.ty


def test_implicit_context():
    ctx = implicit_context("let a = y in x =:= a")
    assert list(ctx) == ["x", "y"] and set(ctx.values()) == {REAL}
    assert free_vars(parse("let (a, b) = p in a + c")) == {"p", "c"}


# -------------------------------------------------------------------
# pretty
# -------------------------------------------------------------------
@pytest.mark.parametrize(
    "source",
    [
        EXAMPLE,
        "let x = normal() in x =:= 0.0; x",
        "()",
        "-(2.0)",
        "x - -2.0 + -y",
        "2 · (x + y) - 3 · -x",
        "(let a = 1 in a, (b, ()))",
        "((1, 2), 3)",
        "let x = (0 =:= 1; 2) in x",
        "(let x = 1 in x); y",
        "[[1, 2], [3, 4]] · (a, b)",
        "normal([0, 0], [[2, 1], [1, 2]])",
        "observe(normal(x, 0.25), 1e-05); x =:= y",
        "let (_, b) = (1, 2) in b",
    ],
)
def test_pretty_round_trips(source):
    t = parse(source)
    assert parse(pretty(t)) == t


def test_pretty_round_trips_generated_programs(rng):
    for _ in range(50):
        t = random_program(rng)
        assert parse(pretty(t)) == t


def test_condition_rate_of_generated_programs(rng):
    def conditions(p_cond):
        programs = [random_program(rng, p_cond=p_cond) for _ in range(30)]
        return sum(isinstance(s, Cond) for t in programs for s in subterms(t))

    assert conditions(0.0) == 0
    assert conditions(0.6) > conditions(0.1) > 0


def test_deep_let_chains():
    source = chained_lets(1000)
    t = parse(source)
    assert size(t) == 4 * 1000 + 3
    assert free_vars(t) == set()
    assert implicit_context(source) == {}
    printed = pretty(t)
    assert pretty(parse(printed)) == printed
    core = load_program(source)
    assert is_core(core) and core.ty == REAL
