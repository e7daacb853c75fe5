import pytest

from relred.core import standard
from relred.errors import ParseError, PreconditionError, VerificationError
from relred.formula import (
    Atom,
    Conj,
    Exists,
    ReductionCertificate,
    check_certificate,
    classify,
    evaluate,
    flatten,
    free_vars,
    load_certificate,
    normalize,
    parse,
    render,
    save_certificate,
)

from conftest import make_rel


def test_parse_atom():
    f = parse("P(x, y)")
    assert isinstance(f, Atom)
    assert f.symbol == "P" and f.args == ("x", "y")


def test_parse_conj_and_exists():
    f = parse("exists t . P(x,t) & Q(t,y)")
    assert isinstance(f, Exists)
    assert f.variables == frozenset({"t"})
    assert isinstance(f.body, Conj)


def test_parse_nested_parens():
    f = parse("P(x,t) & (exists s . Q(s,t))")
    assert isinstance(f, Conj)
    assert isinstance(f.parts[1], Exists)


def test_parse_errors():
    for bad in ["", "P(", "exists . P(x)", "p(x)", "P(x) Q(y)", "P(X)"]:
        with pytest.raises(ParseError):
            parse(bad)


def test_render_roundtrip():
    for text in [
        "P(x)",
        "P(x,y) & Q(y,z)",
        "exists t . P(x,t) & Q(t,y)",
        "P(x,t) & (exists s . Q(s,x))",
        "exists t1 t2 . P(t1,t2)",
    ]:
        assert render(parse(render(parse(text)))) == render(parse(text))


def test_exists_rejects_unused_binder():
    with pytest.raises(PreconditionError):
        Exists(("z",), parse("P(x)"))


def test_free_vars():
    f = parse("exists t . P(x,t) & Q(t,y)")
    assert free_vars(f) == frozenset({"x", "y"})


def test_atom_diagonal(d2):
    # repeated variables select the diagonal
    r = make_rel(d2, 2, [("a", "a"), ("a", "b")])
    out = evaluate(parse("R(x,x)"), {"R": r})
    assert out.attrs == ("x",)
    assert out.rows == frozenset({("a",)})


def test_atom_args_align_with_canonical_attr_order(d2):
    r = make_rel(d2, 2, [("a", "b")])
    out = evaluate(parse("R(y,x)"), {"R": r})
    # first argument binds column "1", second column "2"
    assert out.attrs == ("x", "y")
    assert out.rows == frozenset({("b", "a")})


def test_evaluate_identity_chain(d2):
    i3 = standard("identity", 3, d2)
    f = parse("exists t . I3(x1,x2,t) & I3(t,x3,x4)")
    out = evaluate(f, {"I3": i3})
    assert out.rows == standard("identity", 4, d2).rows


def test_evaluate_arity_mismatch(d2):
    r = make_rel(d2, 2, [("a", "b")])
    with pytest.raises(PreconditionError):
        evaluate(parse("R(x,y,z)"), {"R": r})


def test_normalize_prenex():
    f = parse("P(x,t) & (exists s . Q(s,x))")
    g = normalize(f)
    assert isinstance(g, Exists)
    assert render(g).startswith("exists ")


def test_normalize_capture_avoiding():
    # inner bound t must not collide with the outer free t
    f = parse("P(t) & (exists t_0 . Q(t_0,t))")
    params, atoms = flatten(f)
    used = {v for a in atoms for v in a.args}
    assert "t" in used and set(params) <= used
    assert "t" not in params


def test_classify_kinds():
    assert classify(parse("P(x) & Q(y)")).kind == "cartesian"
    assert classify(parse("P(x,y) & Q(y,z)")).kind == "join"
    assert classify(parse("exists t . P(x,t) & Q(t,y)")).kind == "bond"
    c = classify(parse("exists t . P(x,t) & Q(t,y) & S(t,z)"))
    assert c.kind == "pureProjoin" and not c.is_bond
    assert classify(parse("exists t . P(x,t) & Q(t,x,y)")).kind == "projoin"


def test_certificate_verifies_on_construction(d2):
    i2 = standard("identity", 2, d2)
    target = standard("identity", 3, d2)
    f = parse("I2(x1,x2) & I2(x2,x3)")
    cert = ReductionCertificate(
        target, f, {"I2": i2}, {"x1": "1", "x2": "2", "x3": "3"}
    )
    verdict = check_certificate(cert)
    assert verdict.valid and verdict.is_reduction


def test_certificate_rejects_wrong_target(d2):
    i2 = standard("identity", 2, d2)
    wrong = standard("universal", 3, d2)
    with pytest.raises(VerificationError):
        ReductionCertificate(
            wrong, parse("I2(x1,x2) & I2(x2,x3)"), {"I2": i2},
            {"x1": "1", "x2": "2", "x3": "3"},
        )


def test_check_certificate_never_raises(d2):
    i2 = standard("identity", 2, d2)
    target = standard("identity", 3, d2)
    cert = ReductionCertificate(
        target, parse("I2(x1,x2) & I2(x2,x3)"), {"I2": i2},
        {"x1": "1", "x2": "2", "x3": "3"},
    )
    tampered = ReductionCertificate.__new__(ReductionCertificate)
    object.__setattr__(tampered, "target", standard("universal", 3, d2))
    object.__setattr__(tampered, "formula", cert.formula)
    object.__setattr__(tampered, "env", cert.env)
    object.__setattr__(tampered, "var_map", cert.var_map)
    assert not check_certificate(tampered).valid


def test_certificate_bundle_roundtrip(tmp_path, d2):
    i2 = standard("identity", 2, d2)
    target = standard("identity", 3, d2)
    cert = ReductionCertificate(
        target, parse("I2(x1,x2) & I2(x2,x3)"), {"I2": i2},
        {"x1": "1", "x2": "2", "x3": "3"},
    )
    path = save_certificate(cert, str(tmp_path / "bundle"))
    back = load_certificate(path)
    assert back.target.rows == cert.target.rows
    assert render(back.formula) == render(cert.formula)
    assert check_certificate(back).valid
