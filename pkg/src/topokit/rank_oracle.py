"""Reduction-free persistence oracle built from persistent Betti numbers.

For sublevel complexes ``K_s`` (values <= the s-th distinct value) the
persistent Betti number is

    beta_p(s, t) = dim Z_p(K_s) - dim(B_p(K_t) restricted to C_p(K_s))
                 = (n_p(s) - rank d_p(K_s)) - (rank d_{p+1}(K_t) - rank P_s d_{p+1}(K_t))

where ``P_s`` keeps only the rows of p-simplices outside ``K_s``. Pair
multiplicities then follow by inclusion-exclusion. Only ranks over Z/2 are
used; no column reduction with pairing is involved. Pairs of zero persistence
are invisible to ranks, so the oracle reports off-diagonal pairs only.
"""
import numpy as np

from .exceptions import ComplexTooLarge
from .persistence import diagram_from_triples

MAX_SIMPLICES = 200


def _prefix_ranks(columns):
    """Rank of the first j columns for j = 0..len(columns), columns as int bitsets."""
    basis = {}
    ranks = [0]
    for col in columns:
        while col:
            low = col.bit_length() - 1
            b = basis.get(low)
            if b is None:
                basis[low] = col
                break
            col ^= b
        ranks.append(len(basis))
    return ranks


def betti_rank_oracle(fc):
    """Off-diagonal persistence pairs of ``fc`` computed from rank arithmetic alone."""
    n = len(fc)
    if n > MAX_SIMPLICES:
        raise ComplexTooLarge(f"{n} simplices; the oracle handles at most {MAX_SIMPLICES}")
    if n == 0:
        return diagram_from_triples([])
    simp, vals = fc.simplices, fc.values
    levels = np.unique(vals)
    V = len(levels)
    level_of = np.searchsorted(levels, vals)
    top = max(len(s) for s in simp) - 1

    by_dim = {p: [i for i in range(n) if len(simp[i]) == p + 1] for p in range(top + 2)}
    row_pos = {p: {simp[i]: r for r, i in enumerate(idx)} for p, idx in by_dim.items()}

    def boundary_cols(p):
        """Columns of d_p as bitsets over (p-1)-simplices, in filtration order."""
        if p == 0:
            return [0] * len(by_dim[0])
        rows = row_pos[p - 1]
        cols = []
        for i in by_dim[p]:
            s = simp[i]
            bits = 0
            for drop in range(len(s)):
                bits |= 1 << rows[s[:drop] + s[drop + 1:]]
            cols.append(bits)
        return cols

    def count_upto(p, s):
        """Number of p-simplices with level <= s (s = -1 means none)."""
        return int(np.sum(level_of[by_dim[p]] <= s)) if by_dim[p] else 0

    triples = []
    for p in range(top + 1):
        dp_ranks = _prefix_ranks(boundary_cols(p))
        up_cols = boundary_cols(p + 1)
        up_ranks = _prefix_ranks(up_cols)

        cache = {}

        def beta(s, t):
            key = (s, t)
            if key in cache:
                return cache[key]
            m = count_upto(p, s)
            z = m - dp_ranks[m]
            if t < 0:
                return z
            c = count_upto(p + 1, t)
            mask = ~((1 << m) - 1)
            projected = _prefix_ranks([col & mask for col in up_cols[:c]])[-1]
            cache[key] = z - (up_ranks[c] - projected)
            return cache[key]

        birth_levels = sorted(set(level_of[by_dim[p]]))
        for s in birth_levels:
            for t in range(s + 1, V):
                mu = beta(s, t - 1) - beta(s, t) - beta(s - 1, t - 1) + beta(s - 1, t)
                triples += [(p, float(levels[s]), float(levels[t]))] * mu
            mu_inf = beta(s, V - 1) - beta(s - 1, V - 1)
            triples += [(p, float(levels[s]), float("inf"))] * mu_inf
    return diagram_from_triples(sorted(triples))
