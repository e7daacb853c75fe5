"""Attributed relations over finite domains.

A relation is a set of tuples over a *scheme* (a finite attribute set),
with every tuple drawing its values from one shared domain.  Tuples are
stored as value vectors aligned with a canonical ordering of the scheme;
the ordering is a storage convention only and never carries meaning.

All values are immutable; every operation returns a fresh relation.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .caps import DEFAULT_CAPS
from .errors import (
    AttributeSchemeError,
    BondabilityError,
    CapExceededError,
    DomainMismatchError,
    ParseError,
    PreconditionError,
    SchemeCollisionError,
)

_NAME_RE = re.compile(r"^[^\s#(),|]+$")


def attr_key(name: str):
    """Canonical sort key: numeric names sort numerically, the rest lexically."""
    if name.isdigit():
        return (0, int(name), name)
    return (1, 0, name)


def canonical_attrs(attrs: Iterable[str]) -> tuple[str, ...]:
    out = sorted(attrs, key=attr_key)
    for a, b in zip(out, out[1:]):
        if a == b:
            raise AttributeSchemeError(f"duplicate attribute {a!r}")
    return tuple(out)


@dataclass(frozen=True)
class Domain:
    """A named finite set of element symbols with a fixed display order."""

    name: str
    elements: tuple[str, ...]

    def __post_init__(self):
        if not self.elements:
            raise PreconditionError("domain must have at least one element")
        if len(set(self.elements)) != len(self.elements):
            raise PreconditionError("domain elements must be distinct")
        for e in self.elements:
            if not _NAME_RE.match(e):
                raise PreconditionError(f"bad element symbol {e!r}")
        if len(self.elements) > DEFAULT_CAPS.max_domain:
            raise PreconditionError(
                f"domain size {len(self.elements)} exceeds cap {DEFAULT_CAPS.max_domain}"
            )
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, element: str) -> bool:
        return element in self.elements


@dataclass(frozen=True)
class Relation:
    """An attributed relation: scheme + tuple set over a domain.

    ``attrs`` is the scheme in canonical order and each row is a value
    vector aligned with it.  The two 0-ary relations are FALSE (no rows)
    and TRUE (the single empty row).
    """

    domain: Domain
    attrs: tuple[str, ...]
    rows: frozenset[tuple[str, ...]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.attrs != canonical_attrs(self.attrs):
            raise AttributeSchemeError("attributes not in canonical order; use Relation.make")
        for row in self.rows:
            if len(row) != len(self.attrs):
                raise AttributeSchemeError("row length does not match scheme")
            for v in row:
                if v not in self.domain:
                    raise PreconditionError(f"value {v!r} not in domain {self.domain.name!r}")

    @staticmethod
    def make(
        domain: Domain,
        attrs: Iterable[str],
        rows: Iterable[Sequence[str] | Mapping[str, str]] = (),
    ) -> "Relation":
        """Build a relation, accepting rows as sequences (in the given
        attribute order) or as attribute->value mappings."""
        given = tuple(attrs)
        canon = canonical_attrs(given)
        out = set()
        for row in rows:
            if isinstance(row, Mapping):
                if set(row) != set(canon):
                    raise AttributeSchemeError("row bindings do not match scheme")
                out.add(tuple(row[a] for a in canon))
            else:
                if len(row) != len(given):
                    raise AttributeSchemeError("row length does not match scheme")
                binding = dict(zip(given, row))
                out.add(tuple(binding[a] for a in canon))
        return Relation(domain, canon, frozenset(out))

    @property
    def scheme(self) -> frozenset[str]:
        return frozenset(self.attrs)

    @property
    def arity(self) -> int:
        return len(self.attrs)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[dict[str, str]]:
        for row in sorted(self.rows):
            yield dict(zip(self.attrs, row))

    def has(self, binding: Mapping[str, str]) -> bool:
        return tuple(binding[a] for a in self.attrs) in self.rows


def true_relation(domain: Domain) -> Relation:
    return Relation(domain, (), frozenset({()}))


def false_relation(domain: Domain) -> Relation:
    return Relation(domain, (), frozenset())


def _same_domain(relations: Sequence[Relation]) -> Domain:
    if not relations:
        raise PreconditionError("need at least one relation")
    domain = relations[0].domain
    for r in relations[1:]:
        if r.domain != domain:
            raise DomainMismatchError(
                f"domains {domain.name!r} and {r.domain.name!r} differ"
            )
    return domain


def standard(
    kind: str,
    scheme: Iterable[str] | int,
    domain: Domain,
    restrict: Optional[Iterable[str]] = None,
) -> Relation:
    """One of the standard relations: empty, universal, identity (all
    members equal) or diversity (members pairwise distinct), optionally
    relativized to a subset of the domain.

    ``scheme`` may be an int n, which stands for attributes "1".."n".
    """
    if isinstance(scheme, int):
        scheme = [str(i + 1) for i in range(scheme)]
    attrs = canonical_attrs(scheme)
    if restrict is None:
        pool: tuple[str, ...] = domain.elements
    else:
        pool = tuple(e for e in domain.elements if e in set(restrict))
        if len(pool) != len(set(restrict)):
            raise PreconditionError("restrict is not a subset of the domain")
    n = len(attrs)
    if kind in ("universal", "diversity"):
        _check_enumerable(n)
    if kind == "empty":
        rows: Iterable[tuple[str, ...]] = ()
    elif kind == "universal":
        rows = itertools.product(pool, repeat=n)
    elif kind == "identity":
        rows = ((e,) * n for e in pool) if n else [()]
    elif kind == "diversity":
        rows = itertools.permutations(pool, n) if n else [()]
    else:
        raise PreconditionError(f"unknown standard relation kind {kind!r}")
    return Relation(domain, attrs, frozenset(rows))


def project(rel: Relation, keep: Iterable[str]) -> Relation:
    keep_attrs = canonical_attrs(keep)
    missing = set(keep_attrs) - rel.scheme
    if missing:
        raise AttributeSchemeError(f"attributes {sorted(missing)} not in scheme")
    idx = [rel.attrs.index(a) for a in keep_attrs]
    rows = frozenset(tuple(row[i] for i in idx) for row in rel.rows)
    return Relation(rel.domain, keep_attrs, rows)


def select(rel: Relation, on: Iterable[str], values: Mapping[str, str] | Sequence[str]) -> Relation:
    """Keep rows whose ``on`` columns equal ``values``, then drop those
    columns; the result scheme is the complement of ``on``."""
    on_attrs = canonical_attrs(on)
    missing = set(on_attrs) - rel.scheme
    if missing:
        raise AttributeSchemeError(f"attributes {sorted(missing)} not in scheme")
    if isinstance(values, Mapping):
        want = tuple(values[a] for a in on_attrs)
    else:
        if len(values) != len(on_attrs):
            raise AttributeSchemeError("selection tuple length mismatch")
        want = tuple(values)
    rest = tuple(a for a in rel.attrs if a not in set(on_attrs))
    on_idx = [rel.attrs.index(a) for a in on_attrs]
    rest_idx = [rel.attrs.index(a) for a in rest]
    rows = frozenset(
        tuple(row[i] for i in rest_idx)
        for row in rel.rows
        if tuple(row[i] for i in on_idx) == want
    )
    return Relation(rel.domain, rest, rows)


def _check_enumerable(arity: int) -> None:
    # the cap guards D^Sigma enumeration, not relation construction:
    # join intermediates may be wider than any enumerated scheme
    if arity > DEFAULT_CAPS.max_arity:
        raise CapExceededError(
            f"arity {arity} exceeds enumeration cap {DEFAULT_CAPS.max_arity}"
        )


def complement(rel: Relation) -> Relation:
    _check_enumerable(rel.arity)
    everything = itertools.product(rel.domain.elements, repeat=rel.arity)
    rows = frozenset(row for row in everything if row not in rel.rows)
    return Relation(rel.domain, rel.attrs, rows)


def rename(rel: Relation, mapping: Mapping[str, str]) -> Relation:
    """Rename attributes via a bijection on the scheme."""
    if set(mapping) != rel.scheme or len(set(mapping.values())) != rel.arity:
        raise AttributeSchemeError("rename mapping is not a bijection on the scheme")
    new_attrs = canonical_attrs(mapping.values())
    # position of old attr carrying each new attr's values
    src = {mapping[a]: i for i, a in enumerate(rel.attrs)}
    idx = [src[a] for a in new_attrs]
    rows = frozenset(tuple(row[i] for i in idx) for row in rel.rows)
    return Relation(rel.domain, new_attrs, rows)


def cartesian(relations: Sequence[Relation]) -> Relation:
    """Concatenate tuples of relations on pairwise disjoint schemes.

    Overlap is an error by design: the product of relations sharing
    attributes is undefined, and callers wanting matching semantics must
    use ``join``.
    """
    domain = _same_domain(relations)
    seen: set[str] = set()
    for r in relations:
        clash = seen & r.scheme
        if clash:
            raise SchemeCollisionError(f"schemes overlap on {sorted(clash)}")
        seen |= r.scheme
    return join(relations)


def join(relations: Sequence[Relation]) -> Relation:
    """Natural join: concatenations of tuples that agree on shared attributes."""
    domain = _same_domain(relations)
    acc = relations[0]
    for r in relations[1:]:
        acc = _join2(acc, r)
    return acc


def _join2(a: Relation, b: Relation) -> Relation:
    shared = canonical_attrs(a.scheme & b.scheme)
    out_attrs = canonical_attrs(a.scheme | b.scheme)
    a_shared = [a.attrs.index(x) for x in shared]
    b_shared = [b.attrs.index(x) for x in shared]
    index: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
    for row in b.rows:
        index.setdefault(tuple(row[i] for i in b_shared), []).append(row)
    a_pos = {x: i for i, x in enumerate(a.attrs)}
    b_pos = {x: i for i, x in enumerate(b.attrs)}
    rows = set()
    for row in a.rows:
        for other in index.get(tuple(row[i] for i in a_shared), ()):
            rows.add(
                tuple(
                    row[a_pos[x]] if x in a_pos else other[b_pos[x]]
                    for x in out_attrs
                )
            )
    return Relation(a.domain, out_attrs, frozenset(rows))


def projoin(relations: Sequence[Relation], keep: Iterable[str]) -> Relation:
    """Projective join: the natural join projected to ``keep``."""
    joined = join(relations)
    return project(joined, keep)


def relative_product(a: Relation, b: Relation) -> Relation:
    """Projoin keeping the symmetric difference of the two schemes; on
    binaries over {x,y} and {y,z} this is relation composition."""
    keep = (a.scheme | b.scheme) - (a.scheme & b.scheme)
    return projoin([a, b], keep)


def bond_eval(relations: Sequence[Relation]) -> Relation:
    """Bond: projoin with every shared attribute projected out.

    Requires bondability -- no attribute may occur in three or more
    factor schemes.
    """
    _same_domain(relations)
    counts: dict[str, int] = {}
    for r in relations:
        for a in r.attrs:
            counts[a] = counts.get(a, 0) + 1
    bad = sorted(a for a, c in counts.items() if c > 2)
    if bad:
        raise BondabilityError(f"attributes {bad} occur in three or more schemes")
    keep = [a for a, c in counts.items() if c == 1]
    return projoin(relations, keep)


def equal_relations(a: Relation, b: Relation) -> bool:
    if a.domain != b.domain:
        raise DomainMismatchError("cannot compare relations over different domains")
    return a.attrs == b.attrs and a.rows == b.rows


def count_tuples(rel: Relation) -> int:
    return len(rel.rows)


# ---------------------------------------------------------------------------
# Text format
#
#   @relation NAME over DOMAIN(e1,e2,...)
#   attr1 attr2 ...          (the single token "." for a 0-ary scheme)
#   v1 v2 ...                (one tuple per line; "." for the empty tuple)
#
# '#' starts a comment; blank lines are ignored.  dump() emits attributes
# in canonical order and rows sorted, so dump(load(text)) is stable.
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(
    r"^@relation\s+(?P<name>\S+)\s+over\s+(?P<dom>[^\s(]+)\((?P<elems>[^)]*)\)\s*$"
)


def dump_relation(rel: Relation, name: str = "R") -> str:
    lines = [
        f"@relation {name} over {rel.domain.name}({','.join(rel.domain.elements)})",
        " ".join(rel.attrs) if rel.attrs else ".",
    ]
    for row in sorted(rel.rows):
        lines.append(" ".join(row) if row else ".")
    return "\n".join(lines) + "\n"


def load_relation(text: str) -> tuple[str, Relation]:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ParseError("empty relation file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise ParseError(f"bad header line: {lines[0]!r}")
    elems = [e.strip() for e in m.group("elems").split(",") if e.strip()]
    domain = Domain(m.group("dom"), tuple(elems))
    if len(lines) < 2:
        raise ParseError("missing attribute line")
    attrs = () if lines[1] == "." else tuple(lines[1].split())
    rows = []
    for line in lines[2:]:
        rows.append(() if line == "." else tuple(line.split()))
    return m.group("name"), Relation.make(domain, attrs, rows)
