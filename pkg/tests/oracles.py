"""Brute-force reference implementations used to cross-check the library.

Everything here works on plain tuples and sets so that the answers do not
depend on any code path under test.
"""

import itertools


def proj(rows, idxs):
    return {tuple(t[i] for i in idxs) for t in rows}


def cylinder(rows, idxs, cells):
    """All full tuples whose restriction to idxs appears in the projection."""
    p = proj(rows, idxs)
    return {t for t in cells if tuple(t[i] for i in idxs) in p}


def join_cover_reducible(rows, elems, n):
    """Search every family of proper projections whose join gives back R.

    Returns True when some family of projections onto proper nonempty
    position subsets, jointly covering all positions, joins to exactly R.
    """
    cells = list(itertools.product(elems, repeat=n))
    subsets = []
    for r in range(1, n):
        subsets.extend(itertools.combinations(range(n), r))
    cyls = {s: cylinder(rows, s, cells) for s in subsets}
    rowset = set(rows)
    for size in range(1, len(subsets) + 1):
        for family in itertools.combinations(subsets, size):
            covered = set()
            for s in family:
                covered.update(s)
            if covered != set(range(n)):
                continue
            joined = set(cells)
            for s in family:
                joined &= cyls[s]
            if joined == rowset:
                return True
    return False


def fagin_join_equals(rows, elems, n, m_idxs, block_idxs):
    """Does the join of the projections onto m u block_i reconstruct R?"""
    cells = itertools.product(elems, repeat=n)
    rowset = set(rows)
    pieces = [tuple(sorted(set(m_idxs) | set(b))) for b in block_idxs]
    projs = [proj(rows, p) for p in pieces]
    joined = {
        t
        for t in cells
        if all(tuple(t[i] for i in p) in pr for p, pr in zip(pieces, projs))
    }
    return joined == rowset


def expected_ternary_count(params, atoms):
    """Predicted number of trivalent vertices in the explicated bond graph.

    ``atoms`` is a list of (symbol, args) pairs, ``params`` the bound
    variables of the normalized formula.  Counts: one relay per extra slot
    beyond two for shared bound variables, one per extra slot beyond one
    for shared free variables, plus every predicate box left with exactly
    three slots once confined bound variables are absorbed.
    """
    params = set(params)
    slots = {}
    atoms_of = {}
    for i, (_, args) in enumerate(atoms):
        for v in args:
            slots[v] = slots.get(v, 0) + 1
            atoms_of.setdefault(v, set()).add(i)
    total = 0
    absorbed = [0] * len(atoms)
    for v, m in slots.items():
        if v in params and len(atoms_of[v]) == 1:
            # confined: diagonalized and projected away inside its atom
            absorbed[next(iter(atoms_of[v]))] += m
        elif v in params:
            if m >= 3:
                total += m - 2
        else:
            if m >= 2:
                total += m - 1
    for i, (_, args) in enumerate(atoms):
        if len(args) - absorbed[i] == 3:
            total += 1
    return total
