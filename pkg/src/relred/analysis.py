"""Exhaustive desk-scale deciders and censuses.

Everything here is exact: degeneracy and join reducibility are decided by
the cardinality/projection tests that characterize them, one-parameter
relative-product reducibility by a Boolean rank search over maximal
all-ones rectangles, and censuses by full enumeration (with an explicit
sampled fallback above the cap).
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import core
from .caps import Caps, DEFAULT_CAPS
from .core import Relation
from .errors import (
    AttributeSchemeError,
    CapExceededError,
    PreconditionError,
    ReductionRefused,
)
from .formula import Atom, Conj, Exists, Formula, ReductionCertificate


# ---------------------------------------------------------------------------
# Degeneracy
# ---------------------------------------------------------------------------


def _bipartitions(attrs: Sequence[str]):
    """Nontrivial bipartitions of the scheme, one representative per
    complementary pair, smaller-then-colex-earlier block first."""
    n = len(attrs)
    for size in range(1, n // 2 + 1):
        for combo in itertools.combinations(range(n), size):
            if size == n - size and 0 not in combo:
                continue  # the complement was already yielded
            left = tuple(attrs[i] for i in combo)
            right = tuple(a for a in attrs if a not in set(left))
            yield left, right


def is_degenerate(rel: Relation) -> Optional[tuple[tuple[str, ...], tuple[str, ...]]]:
    """A witnessing nontrivial bipartition over which the relation is a
    Cartesian product, or None.  Bipartitions suffice: any finer
    factorization refines some bipartition."""
    if rel.arity < 2:
        return None
    for left, right in _bipartitions(rel.attrs):
        if len(core.project(rel, left)) * len(core.project(rel, right)) == len(rel):
            return (left, right)
    return None


def finest_factorization(rel: Relation) -> tuple[tuple[str, ...], ...]:
    """The finest Cartesian factorization, as a tuple of scheme blocks
    (a single block when the relation is non-degenerate)."""
    witness = is_degenerate(rel)
    if witness is None:
        return (rel.attrs,)
    left, right = witness
    return finest_factorization(core.project(rel, left)) + finest_factorization(
        core.project(rel, right)
    )


# ---------------------------------------------------------------------------
# Join reducibility
# ---------------------------------------------------------------------------


def is_join_reducible(rel: Relation) -> Optional[ReductionCertificate]:
    """Exact decision via the canonical test: R is join reducible iff it
    equals the join of all its (n-1)-ary projections.  (Any join
    decomposition can be coarsened to that cover by enlarging factors,
    and factors may be replaced by projections.)"""
    if rel.arity < 2:
        raise PreconditionError("join reducibility needs arity >= 2")
    factors = [core.project(rel, rel.scheme - {i}) for i in rel.attrs]
    if not core.equal_relations(core.join(factors), rel):
        return None
    var = {a: f"x{i + 1}" for i, a in enumerate(rel.attrs)}
    env = {}
    atoms = []
    for j, factor in enumerate(factors, start=1):
        env[f"F{j}"] = factor
        atoms.append(Atom(f"F{j}", tuple(var[a] for a in factor.attrs)))
    f: Formula = atoms[0] if len(atoms) == 1 else Conj(tuple(atoms))
    return ReductionCertificate(rel, f, env, {v: a for a, v in var.items()})


@dataclass(frozen=True)
class IrreducibilityReport:
    """Sufficient-condition checks for join irreducibility.

    condition_i: R is not universal but all proper projections are.
    condition_ii: the complement is nonempty with no universal unary
    projection.  Either one implies join irreducibility.
    """

    condition_i: bool
    condition_ii: bool

    @property
    def implies_irreducible(self) -> bool:
        return self.condition_i or self.condition_ii

    def to_json(self) -> str:
        return json.dumps(
            {
                "condition_i": self.condition_i,
                "condition_ii": self.condition_ii,
                "implies_irreducible": self.implies_irreducible,
            }
        )


def irreducibility_tests(rel: Relation) -> IrreducibilityReport:
    d = rel.domain
    universal = core.standard("universal", rel.attrs, d)
    cond_i = False
    if not core.equal_relations(rel, universal) and rel.arity >= 2:
        cond_i = all(
            len(core.project(rel, c)) == d.size ** len(c)
            for size in range(1, rel.arity)
            for c in itertools.combinations(rel.attrs, size)
        )
    neg = core.complement(rel)
    cond_ii = len(neg) > 0 and all(
        len(core.project(neg, (i,))) < d.size for i in rel.attrs
    )
    return IrreducibilityReport(cond_i, cond_ii)


# ---------------------------------------------------------------------------
# Boolean rank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BooleanMatrix:
    """0-1 matrix with rows stored as column bitmasks, remembering which
    attribute-block value tuples index the rows and columns."""

    row_masks: tuple[int, ...]
    ncols: int
    row_tuples: tuple[tuple[str, ...], ...] = ()
    col_tuples: tuple[tuple[str, ...], ...] = ()

    @property
    def nrows(self) -> int:
        return len(self.row_masks)

    @property
    def ones(self) -> int:
        return sum(m.bit_count() for m in self.row_masks)


def bipartition_matrix(rel: Relation, left: Iterable[str]) -> BooleanMatrix:
    """The relation as a 0-1 matrix indexed by value tuples of the two
    blocks of a bipartition of its scheme."""
    left_c = core.canonical_attrs(left)
    if not set(left_c) < rel.scheme or not left_c:
        raise AttributeSchemeError("left block must be a nonempty proper subset")
    right_c = tuple(a for a in rel.attrs if a not in set(left_c))
    rows = list(itertools.product(rel.domain.elements, repeat=len(left_c)))
    cols = list(itertools.product(rel.domain.elements, repeat=len(right_c)))
    col_index = {t: i for i, t in enumerate(cols)}
    li = [rel.attrs.index(a) for a in left_c]
    ri = [rel.attrs.index(a) for a in right_c]
    masks = {t: 0 for t in rows}
    for row in rel.rows:
        masks[tuple(row[i] for i in li)] |= 1 << col_index[tuple(row[i] for i in ri)]
    return BooleanMatrix(
        tuple(masks[t] for t in rows), len(cols), tuple(rows), tuple(cols)
    )


def _maximal_rectangles(m: BooleanMatrix) -> list[tuple[int, int]]:
    """All maximal all-ones rectangles as (row_mask, col_mask) pairs.
    Column sets of maximal rectangles are exactly the nonzero AND-closure
    of the row masks."""
    closure: set[int] = set()
    frontier = {mask for mask in m.row_masks if mask}
    while frontier:
        closure |= frontier
        frontier = {
            a & b for a in frontier for b in m.row_masks if a & b and a & b not in closure
        }
    rects = []
    for cols in closure:
        rows = 0
        for i, mask in enumerate(m.row_masks):
            if mask & cols == cols:
                rows |= 1 << i
        rects.append((rows, cols))
    # drop rectangles contained in another
    out = []
    for r, c in rects:
        if not any(
            (r2 | r, c2 | c) == (r2, c2) and (r2, c2) != (r, c) for r2, c2 in rects
        ):
            out.append((r, c))
    out.sort()
    return out


def boolean_rank_at_most(
    m: BooleanMatrix, k: int, caps: Caps = DEFAULT_CAPS
) -> Optional[list[tuple[int, int]]]:
    """Exact test: is the matrix an OR of at most k all-ones rectangles?
    Returns a witnessing cover (row_mask, col_mask list) when it is.
    Restricting the search to maximal rectangles loses no covers, and
    every rectangle lies inside the support, so covers are exact."""
    if k < 0:
        raise PreconditionError("rank bound must be >= 0")
    if m.nrows * m.ncols > caps.rank_max_cells:
        raise CapExceededError(
            f"matrix has {m.nrows * m.ncols} cells > cap {caps.rank_max_cells}"
        )
    if m.ones > caps.rank_max_ones:
        raise CapExceededError(f"matrix has {m.ones} ones > cap {caps.rank_max_ones}")
    ones = [
        (i, j)
        for i, mask in enumerate(m.row_masks)
        for j in range(m.ncols)
        if mask >> j & 1
    ]
    if not ones:
        return []
    rects = _maximal_rectangles(m)

    def covered(cell, rect):
        i, j = cell
        r, c = rect
        return r >> i & 1 and c >> j & 1

    def dfs(uncovered, budget, chosen):
        if not uncovered:
            return list(chosen)
        if budget == 0:
            return None
        cell = uncovered[0]
        for rect in rects:
            if covered(cell, rect):
                rest = [x for x in uncovered if not covered(x, rect)]
                found = dfs(rest, budget - 1, chosen + [rect])
                if found is not None:
                    return found
        return None

    return dfs(ones, k, [])


def rel_prod_reducible2(
    rel: Relation, left: Iterable[str], caps: Caps = DEFAULT_CAPS
) -> Optional[ReductionCertificate]:
    """Is R a relative product of two lower-arity relations over the given
    bipartition, i.e. R(x) = exists t [A(x_left, t) & B(t, x_right)]?

    Decided exactly by Boolean rank <= d of the bipartition matrix: the
    parameter t sorts the tuples into at most d all-ones rectangles."""
    m = bipartition_matrix(rel, left)
    cover = boolean_rank_at_most(m, rel.domain.size, caps)
    if cover is None:
        return None
    left_c = core.canonical_attrs(left)
    right_c = tuple(a for a in rel.attrs if a not in set(left_c))
    t_attr = "t1"
    while t_attr in rel.scheme:
        t_attr += "_"
    a_rows = []
    b_rows = []
    for label, (rmask, cmask) in zip(rel.domain.elements, cover):
        for i, t in enumerate(m.row_tuples):
            if rmask >> i & 1:
                a_rows.append(dict(zip(left_c, t)) | {t_attr: label})
        for j, t in enumerate(m.col_tuples):
            if cmask >> j & 1:
                b_rows.append(dict(zip(right_c, t)) | {t_attr: label})
    a_rel = Relation.make(rel.domain, left_c + (t_attr,), a_rows)
    b_rel = Relation.make(rel.domain, right_c + (t_attr,), b_rows)
    var = {a: f"x{i + 1}" for i, a in enumerate(rel.attrs)}
    var_all = dict(var, **{t_attr: "t1"})
    atoms = (
        Atom("F1", tuple(var_all[a] for a in a_rel.attrs)),
        Atom("F2", tuple(var_all[a] for a in b_rel.attrs)),
    )
    f = Exists(frozenset({"t1"}), Conj(atoms))
    return ReductionCertificate(
        rel, f, {"F1": a_rel, "F2": b_rel}, {v: a for a, v in var.items()}
    )


# ---------------------------------------------------------------------------
# One-parameter ternary projoins
# ---------------------------------------------------------------------------


def one_param_ternary_projoin(
    rel: Relation, caps: Caps = DEFAULT_CAPS
) -> Optional[ReductionCertificate]:
    """Exact one-parameter projoin decision for ternaries whose proper
    projections are all universal.

    Under that hypothesis any one-parameter reduction condenses to
    R(x1,x2,x3) = exists t [F1(t,x1) & F2(t,x2) & F3(t,x3)], i.e. R must
    be a union of at most d unary-product boxes.  Without the hypothesis
    a negative answer would not be conclusive, so we refuse.
    """
    if rel.arity != 3:
        raise PreconditionError("one-parameter box decision is for ternaries")
    d = rel.domain
    for size in (1, 2):
        for combo in itertools.combinations(rel.attrs, size):
            if len(core.project(rel, combo)) != d.size ** size:
                raise ReductionRefused(
                    "hypothesis",
                    f"projection onto {list(combo)} is not universal; "
                    "the condensed one-parameter form need not capture all reductions",
                    projection=list(combo),
                )
    if (2 ** d.size - 1) ** 3 > 2 * 10 ** 6:
        raise CapExceededError("box enumeration too large for this domain size")
    subsets = []
    for chosen in range(1, 2 ** d.size):
        subsets.append(tuple(e for i, e in enumerate(d.elements) if chosen >> i & 1))
    pos = {a: i for i, a in enumerate(rel.attrs)}
    rows = rel.rows
    boxes = []
    for a_set in subsets:
        for b_set in subsets:
            for c_set in subsets:
                if all(
                    (x, y, z) in rows
                    for x in a_set
                    for y in b_set
                    for z in c_set
                ):
                    boxes.append((frozenset(a_set), frozenset(b_set), frozenset(c_set)))
    maximal = [
        box
        for box in boxes
        if not any(
            other != box and all(b <= o for b, o in zip(box, other))
            for other in boxes
        )
    ]
    maximal.sort(key=lambda box: tuple(sorted(b) for b in box))

    def dfs(uncovered, budget, chosen):
        if not uncovered:
            return list(chosen)
        if budget == 0:
            return None
        cell = uncovered[0]
        for box in maximal:
            if all(cell[i] in box[i] for i in range(3)):
                rest = [
                    c for c in uncovered if not all(c[i] in box[i] for i in range(3))
                ]
                found = dfs(rest, budget - 1, chosen + [box])
                if found is not None:
                    return found
        return None

    cover = dfs(sorted(rows), d.size, [])
    if cover is None:
        return None
    t_attr = "t1"
    while t_attr in rel.scheme:
        t_attr += "_"
    var = {a: f"x{i + 1}" for i, a in enumerate(rel.attrs)}
    env = {}
    atoms = []
    for i, attr in enumerate(rel.attrs):
        factor_rows = [
            {t_attr: label, attr: v}
            for label, box in zip(d.elements, cover)
            for v in sorted(box[i])
        ]
        factor = Relation.make(d, (t_attr, attr), factor_rows)
        env[f"F{i + 1}"] = factor
        atoms.append(Atom(f"F{i + 1}", tuple(
            "t1" if a == t_attr else var[a] for a in factor.attrs
        )))
    f = Exists(frozenset({"t1"}), Conj(tuple(atoms)))
    return ReductionCertificate(rel, f, env, {v: a for a, v in var.items()})


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------

CENSUS_CSV_HEADER = "d,n,total,degenerate,join_reducible,bound_ndeg,bound_njred,mode,samples"


@dataclass(frozen=True)
class CensusRow:
    d: int
    n: int
    total: int
    degenerate: int
    join_reducible: int
    bound_ndeg: int
    bound_njred: int
    mode: str = "exact"
    samples: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "n": self.n,
                "total": self.total,
                "degenerate": self.degenerate,
                "join_reducible": self.join_reducible,
                "bound_ndeg": self.bound_ndeg,
                "bound_njred": self.bound_njred,
                "mode": self.mode,
                "samples": self.samples,
            }
        )

    def to_csv_row(self) -> str:
        return ",".join(
            str(x)
            for x in (
                self.d,
                self.n,
                self.total,
                self.degenerate,
                self.join_reducible,
                self.bound_ndeg,
                self.bound_njred,
                self.mode,
                self.samples if self.samples is not None else "",
            )
        )


def _census_bounds(d: int, n: int) -> tuple[int, int]:
    ndeg = 2 ** (d + d ** (n - 1) - 1) * sum(math.comb(n, k) for k in range(1, n))
    njred = 2 ** (n * d ** (n - 1))
    return ndeg, njred


class _CensusSpace:
    """Precomputed projection index maps for bitmask enumeration of all
    n-ary relations on a d-element domain."""

    def __init__(self, d: int, n: int):
        self.d, self.n = d, n
        self.cells = list(itertools.product(range(d), repeat=n))
        self.ncells = len(self.cells)
        # bipartitions: (left positions, projection index maps for both sides)
        self.bipartitions = []
        for size in range(1, n // 2 + 1):
            for combo in itertools.combinations(range(n), size):
                if size == n - size and 0 not in combo:
                    continue
                rest = tuple(i for i in range(n) if i not in combo)
                self.bipartitions.append(
                    (self._proj_map(combo), self._proj_map(rest))
                )
        # (n-1)-ary projection maps for the join test
        self.join_maps = [
            self._proj_map(tuple(j for j in range(n) if j != i)) for i in range(n)
        ]

    def _proj_map(self, positions: tuple[int, ...]) -> list[int]:
        index: dict[tuple[int, ...], int] = {}
        out = []
        for cell in self.cells:
            key = tuple(cell[i] for i in positions)
            out.append(index.setdefault(key, len(index)))
        return out

    def is_degenerate(self, mask: int) -> bool:
        if self.n < 2:
            return False
        cells_in = [i for i in range(self.ncells) if mask >> i & 1]
        size = len(cells_in)
        for lmap, rmap in self.bipartitions:
            left = {lmap[i] for i in cells_in}
            right = {rmap[i] for i in cells_in}
            if len(left) * len(right) == size:
                return True
        return False

    def is_join_reducible(self, mask: int) -> bool:
        if self.n < 2:
            return False
        proj_masks = []
        for pmap in self.join_maps:
            pm = 0
            for i in range(self.ncells):
                if mask >> i & 1:
                    pm |= 1 << pmap[i]
            proj_masks.append(pm)
        for i in range(self.ncells):
            if not mask >> i & 1:
                if all(pm >> pmap[i] & 1 for pm, pmap in zip(proj_masks, self.join_maps)):
                    return False  # join adds a cell not in R
        return True


def census(d: int, n: int, caps: Caps = DEFAULT_CAPS) -> CensusRow:
    """Exact census of all 2^(d^n) n-ary relations on a d-element domain:
    how many are degenerate, how many join reducible, against the crude
    counting bounds."""
    if d ** n > caps.max_census_cells:
        raise CapExceededError(
            f"d^n = {d ** n} exceeds census cap {caps.max_census_cells}; "
            "use census_sampled instead"
        )
    space = _CensusSpace(d, n)
    deg = jred = 0
    for mask in range(2 ** space.ncells):
        if space.is_degenerate(mask):
            deg += 1
        if space.is_join_reducible(mask):
            jred += 1
    bound_ndeg, bound_njred = _census_bounds(d, n)
    assert deg <= bound_ndeg, "degenerate count exceeds its counting bound"
    assert jred <= bound_njred, "join-reducible count exceeds its counting bound"
    assert deg <= jred, "every Cartesian factorization is a join reduction"
    return CensusRow(d, n, 2 ** space.ncells, deg, jred, bound_ndeg, bound_njred)


def census_sampled(d: int, n: int, samples: int, seed: int = 0) -> CensusRow:
    """Sampled census: counts over `samples` uniformly drawn relation
    bitmasks.  Counts are per-sample, not extrapolated."""
    space = _CensusSpace(d, n)
    rng = random.Random(seed)
    deg = jred = 0
    for _ in range(samples):
        mask = rng.getrandbits(space.ncells)
        if space.is_degenerate(mask):
            deg += 1
        if space.is_join_reducible(mask):
            jred += 1
    bound_ndeg, bound_njred = _census_bounds(d, n)
    return CensusRow(
        d, n, 2 ** space.ncells, deg, jred, bound_ndeg, bound_njred,
        mode="sampled", samples=samples,
    )


# ---------------------------------------------------------------------------
# Ternary oracle suite
# ---------------------------------------------------------------------------


def ternary_oracle_suite(rel: Relation, caps: Caps = DEFAULT_CAPS) -> list[dict]:
    """Evidence bundle for a ternary: degeneracy, identity comparison, and
    the one-parameter box oracle with its ternarity consequences."""
    if rel.arity != 3:
        raise PreconditionError("oracle suite is for ternaries")
    evidence: list[dict] = []
    witness = is_degenerate(rel)
    evidence.append(
        {
            "test": "degeneracy",
            "verdict": witness is not None,
            "witness": [list(b) for b in witness] if witness else None,
        }
    )
    if witness is not None:
        evidence.append({"test": "ternarity", "conclusion": "ter = 0", "value": 0})
        return evidence
    identity = core.standard("identity", rel.attrs, rel.domain)
    if core.equal_relations(rel, identity):
        evidence.append(
            {"test": "identity", "verdict": True,
             "conclusion": "ter = ter_I3 = 1", "value": 1}
        )
        return evidence
    evidence.append({"test": "identity", "verdict": False})
    universal = core.standard("universal", rel.attrs, rel.domain)
    if core.equal_relations(rel, universal):
        evidence.append({"test": "universal", "verdict": True,
                         "note": "reducible but of no reductive interest"})
    try:
        cert = one_param_ternary_projoin(rel, caps)
    except ReductionRefused as e:
        evidence.append(
            {"test": "oneParamTernaryProjoin", "verdict": "inapplicable",
             "reason": e.reason}
        )
        return evidence
    if cert is not None:
        evidence.append(
            {"test": "oneParamTernaryProjoin", "verdict": True,
             "conclusion": "ter_I3 <= 1 via single-teridentity bond"}
        )
    else:
        # a single-teridentity subternaric bond would condense to exactly
        # this one-parameter binary projoin; with parity, ter_I3 >= 3
        evidence.append(
            {"test": "oneParamTernaryProjoin", "verdict": False,
             "conclusion": "ter_I3 >= 3", "ter_i3_lower": 3}
        )
    return evidence
