"""Primitive positive formulas and their evaluation.

The fragment is atoms over named relation symbols, conjunction, and
existential quantification -- nothing else.  Grammar:

    formula := 'exists' varlist '.' formula | conj
    conj    := atom ('&' atom)*
    atom    := SYMBOL '(' var (',' var)* ')'

with variables ``[a-z][a-z0-9_]*`` and symbols ``[A-Z][A-Za-z0-9_]*``.
Evaluation is extensional: an atom's arguments map positionally onto the
canonical attribute order of the relation bound to its symbol, repeated
variables select the diagonal, conjunction joins, and quantification
projects.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from . import core
from .core import Domain, Relation
from .errors import (
    DomainMismatchError,
    ParseError,
    PreconditionError,
    VerificationError,
)

VAR_RE = re.compile(r"[a-z][a-z0-9_]*")
SYMBOL_RE = re.compile(r"[A-Z][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]

    def __post_init__(self):
        if not SYMBOL_RE.fullmatch(self.symbol):
            raise PreconditionError(f"bad relation symbol {self.symbol!r}")
        for v in self.args:
            if not VAR_RE.fullmatch(v):
                raise PreconditionError(f"bad variable {v!r}")


@dataclass(frozen=True)
class Conj:
    parts: tuple["Formula", ...]

    def __post_init__(self):
        if not self.parts:
            raise PreconditionError("empty conjunction")


@dataclass(frozen=True)
class Exists:
    variables: frozenset[str]
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.variables, frozenset):
            object.__setattr__(self, "variables", frozenset(self.variables))
        if not self.variables:
            raise PreconditionError("exists needs at least one variable")
        dangling = self.variables - free_vars(self.body)
        if dangling:
            raise PreconditionError(
                f"quantifier binds variables not free in its body: {sorted(dangling)}"
            )


Formula = Union[Atom, Conj, Exists]


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Conj):
        out: frozenset[str] = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    return free_vars(f.body) - f.variables


def bound_anywhere(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset()
    if isinstance(f, Conj):
        out: frozenset[str] = frozenset()
        for p in f.parts:
            out |= bound_anywhere(p)
        return out
    return f.variables | bound_anywhere(f.body)


def var_key(name: str):
    """Natural sort for variables: x2 before x10."""
    m = re.fullmatch(r"([a-z]+?)(\d+)(_?\d*)", name)
    if m:
        return (m.group(1), int(m.group(2)), name)
    return (name, -1, name)


# ---------------------------------------------------------------------------
# Parsing / rendering
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ParseError(msg, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def word(self, pattern: re.Pattern, what: str) -> str:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group()

    def at_keyword(self, kw: str) -> bool:
        self.skip_ws()
        end = self.pos + len(kw)
        return (
            self.text.startswith(kw, self.pos)
            and (end >= len(self.text) or not self.text[end].isalnum())
        )

    def formula(self) -> Formula:
        if self.at_keyword("exists"):
            self.eat("exists")
            variables = [self.word(VAR_RE, "variable")]
            while self.peek() not in (".", ""):
                if self.peek() == ",":
                    self.eat(",")
                variables.append(self.word(VAR_RE, "variable"))
            self.eat(".")
            return Exists(frozenset(variables), self.formula())
        return self.conj()

    def conj(self) -> Formula:
        parts = [self.primary()]
        while self.peek() == "&":
            self.eat("&")
            if self.at_keyword("exists"):
                parts.append(self.formula())
            else:
                parts.append(self.primary())
        return parts[0] if len(parts) == 1 else Conj(tuple(parts))

    def primary(self) -> Formula:
        if self.peek() == "(":
            self.eat("(")
            inner = self.formula()
            self.eat(")")
            return inner
        return self.atom()

    def atom(self) -> Atom:
        symbol = self.word(SYMBOL_RE, "relation symbol")
        self.eat("(")
        args = [self.word(VAR_RE, "variable")]
        while self.peek() == ",":
            self.eat(",")
            args.append(self.word(VAR_RE, "variable"))
        self.eat(")")
        return Atom(symbol, tuple(args))


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.skip_ws()
    if p.pos != len(p.text):
        p.error("trailing input")
    return f


def render(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.symbol}({','.join(f.args)})"
    if isinstance(f, Conj):
        return " & ".join(
            render(p) if not isinstance(p, Exists) else "(" + render(p) + ")"
            for p in f.parts
        )
    body = render(f.body)
    return f"exists {' '.join(sorted(f.variables, key=var_key))} . {body}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

Environment = Mapping[str, Relation]


def env_domain(env: Environment) -> Domain:
    domains = {r.domain for r in env.values()}
    if len(domains) != 1:
        raise DomainMismatchError("environment relations span multiple domains")
    return next(iter(domains))


def evaluate(
    f: Formula,
    env: Environment,
    free_order: Optional[Sequence[str]] = None,
) -> Relation:
    """The relation of satisfying assignments, with variables as attributes.

    ``free_order``, when given, must list exactly the free variables of
    ``f``; it pins the external variable/position correspondence but does
    not affect the result (attribute order is never semantic).
    """
    if free_order is not None and set(free_order) != set(free_vars(f)):
        raise PreconditionError("free_order does not match the formula's free variables")
    domain = env_domain(env)
    return _eval(f, env, domain)


def _eval(f: Formula, env: Environment, domain: Domain) -> Relation:
    if isinstance(f, Atom):
        try:
            rel = env[f.symbol]
        except KeyError:
            raise PreconditionError(f"unbound relation symbol {f.symbol!r}") from None
        if rel.arity != len(f.args):
            raise PreconditionError(
                f"arity mismatch: {f.symbol} has arity {rel.arity}, atom has {len(f.args)}"
            )
        out_attrs = core.canonical_attrs(set(f.args))
        rows = set()
        for row in rel.rows:
            binding: dict[str, str] = {}
            ok = True
            for var, value in zip(f.args, row):
                if binding.setdefault(var, value) != value:
                    ok = False
                    break
            if ok:
                rows.add(tuple(binding[v] for v in out_attrs))
        return Relation(domain, out_attrs, frozenset(rows))
    if isinstance(f, Conj):
        return core.join([_eval(p, env, domain) for p in f.parts])
    if isinstance(f.body, Conj):
        # project bound variables out as soon as no later conjunct uses
        # them, so intermediate arity stays close to the final arity
        parts = f.body.parts
        keep_always = free_vars(f)
        acc = _eval(parts[0], env, domain)
        for i, p in enumerate(parts[1:], start=2):
            acc = core._join2(acc, _eval(p, env, domain))
            later = frozenset().union(*(free_vars(q) for q in parts[i:])) \
                if i < len(parts) else frozenset()
            needed = keep_always | later
            acc = core.project(acc, acc.scheme & needed)
        return core.project(acc, keep_always)
    body = _eval(f.body, env, domain)
    return core.project(body, free_vars(f))


# ---------------------------------------------------------------------------
# Normal form: exists T . (A1 & ... & Am) with fresh, capture-free binders
# ---------------------------------------------------------------------------


class FreshNames:
    """Deterministic fresh-name supply avoiding a given used set."""

    def __init__(self, used):
        self.used = set(used)

    def fresh(self, base: str) -> str:
        if base not in self.used and VAR_RE.fullmatch(base):
            self.used.add(base)
            return base
        i = 1
        while f"{base}_{i}" in self.used:
            i += 1
        name = f"{base}_{i}"
        self.used.add(name)
        return name


def normalize(f: Formula) -> Formula:
    """Prenex form: one leading quantifier block over a flat conjunction
    of atoms, with bound variables renamed apart."""
    params, atoms = flatten(f)
    body: Formula = atoms[0] if len(atoms) == 1 else Conj(tuple(atoms))
    return Exists(frozenset(params), body) if params else body


def flatten(f: Formula) -> tuple[tuple[str, ...], tuple[Atom, ...]]:
    """The (parameters, atoms) decomposition behind ``normalize``."""
    names = FreshNames(free_vars(f) | bound_anywhere(f))
    params: list[str] = []
    atoms: list[Atom] = []
    _flatten(f, {}, params, atoms, names)
    return tuple(params), tuple(atoms)


def _flatten(f, subst, params, atoms, names):
    if isinstance(f, Atom):
        atoms.append(Atom(f.symbol, tuple(subst.get(v, v) for v in f.args)))
    elif isinstance(f, Conj):
        for p in f.parts:
            _flatten(p, subst, params, atoms, names)
    else:
        inner = dict(subst)
        for v in sorted(f.variables, key=var_key):
            fresh = names.fresh(v)
            inner[v] = fresh
            params.append(fresh)
        _flatten(f.body, inner, params, atoms, names)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifyResult:
    kind: str  # cartesian | join | bond | pureProjoin | projoin
    is_bond: bool
    parameters: int
    factor_count: int
    factor_arities: tuple[int, ...]

    @property
    def max_factor_arity(self) -> int:
        return max(self.factor_arities, default=0)


def classify(f: Formula) -> ClassifyResult:
    """The most specific shape of a (normalized) primitive positive formula.

    A bond needs every variable in at most two atoms, exactly the
    two-atom variables bound, and no variable repeated inside an atom.
    Cartesian products count as bonds with zero parameters.
    """
    params, atoms = flatten(f)
    bound = set(params)
    atom_count: dict[str, int] = {}
    slot_count: dict[str, int] = {}
    repeated_in_atom = False
    for a in atoms:
        distinct = set(a.args)
        if len(distinct) != len(a.args):
            repeated_in_atom = True
        for v in distinct:
            atom_count[v] = atom_count.get(v, 0) + 1
        for v in a.args:
            slot_count[v] = slot_count.get(v, 0) + 1
    shared = {v for v, c in atom_count.items() if c >= 2}
    arities = tuple(len(a.args) for a in atoms)
    is_bond = (
        not repeated_in_atom
        and all(c <= 2 for c in atom_count.values())
        and shared == bound
    )
    if not params:
        kind = "cartesian" if not shared and not repeated_in_atom else "join"
    elif is_bond:
        kind = "bond"
    elif shared == bound:
        kind = "pureProjoin"
    else:
        kind = "projoin"
    return ClassifyResult(kind, is_bond, len(params), len(atoms), arities)


# ---------------------------------------------------------------------------
# Reduction certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionCertificate:
    """A formula plus factor environment whose evaluation equals the target.

    ``var_map`` is the bijection free variable -> target attribute; it is
    verified at construction time.
    """

    target: Relation
    formula: Formula
    env: dict[str, Relation]
    var_map: dict[str, str]

    def __post_init__(self):
        fv = free_vars(self.formula)
        if set(self.var_map) != set(fv):
            raise VerificationError("var_map keys do not match free variables")
        if set(self.var_map.values()) != set(self.target.attrs):
            raise VerificationError("var_map values do not match target scheme")
        if len(set(self.var_map.values())) != len(self.var_map):
            raise VerificationError("var_map is not a bijection")
        got = self.evaluated()
        if not core.equal_relations(got, self.target):
            raise VerificationError("certificate formula does not evaluate to the target")

    def evaluated(self) -> Relation:
        value = evaluate(self.formula, self.env)
        if value.attrs:
            value = core.rename(value, self.var_map)
        elif self.target.attrs:
            raise VerificationError("closed formula cannot certify a non-0-ary target")
        return value


@dataclass(frozen=True)
class CertificateVerdict:
    valid: bool
    classification: Optional[ClassifyResult]
    factor_arities: tuple[int, ...]
    target_arity: int
    is_reduction: bool  # every factor arity strictly below the target's
    note: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "valid": self.valid,
                "kind": self.classification.kind if self.classification else None,
                "is_bond": self.classification.is_bond if self.classification else None,
                "parameters": self.classification.parameters if self.classification else None,
                "factor_arities": list(self.factor_arities),
                "target_arity": self.target_arity,
                "is_reduction": self.is_reduction,
                "note": self.note,
            }
        )


def check_certificate(cert: ReductionCertificate) -> CertificateVerdict:
    """Re-evaluate a certificate and report its shape.  Never raises:
    a tampered certificate yields ``valid=False``."""
    try:
        valid = core.equal_relations(cert.evaluated(), cert.target)
    except Exception:
        valid = False
    try:
        cls = classify(cert.formula)
        arities = cls.factor_arities
    except Exception:
        cls, arities = None, ()
    n = cert.target.arity
    is_reduction = bool(arities) and all(0 < a < n for a in arities)
    note = ""
    if valid and arities and not is_reduction:
        note = "decomposition but not a reduction"
    return CertificateVerdict(valid, cls, arities, n, is_reduction, note)


# ---------------------------------------------------------------------------
# Certificate files: a JSON manifest referencing relation files by
# relative path, plus the formula text and the variable map.
# ---------------------------------------------------------------------------


def save_certificate(cert: ReductionCertificate, outdir: str, name: str = "target") -> str:
    os.makedirs(outdir, exist_ok=True)
    target_file = f"{name}.rel"
    with open(os.path.join(outdir, target_file), "w") as fh:
        fh.write(core.dump_relation(cert.target, name))
    env_files = {}
    for symbol in sorted(cert.env):
        fname = f"{symbol}.rel"
        with open(os.path.join(outdir, fname), "w") as fh:
            fh.write(core.dump_relation(cert.env[symbol], symbol))
        env_files[symbol] = fname
    formula_text = render(cert.formula)
    with open(os.path.join(outdir, "formula.txt"), "w") as fh:
        fh.write(formula_text + "\n")
    manifest = {
        "target": target_file,
        "formula": formula_text,
        "env": env_files,
        "varmap": dict(sorted(cert.var_map.items())),
    }
    path = os.path.join(outdir, "certificate.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_certificate(path: str) -> ReductionCertificate:
    with open(path) as fh:
        manifest = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))

    def load_rel(fname: str) -> Relation:
        with open(os.path.join(base, fname)) as fh:
            return core.load_relation(fh.read())[1]

    target = load_rel(manifest["target"])
    env = {sym: load_rel(fname) for sym, fname in manifest["env"].items()}
    f = parse(manifest["formula"])
    return ReductionCertificate(target, f, env, dict(manifest["varmap"]))
