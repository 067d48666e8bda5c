"""Distances and matchings between persistence diagrams.

All distances are diagonal-augmented: a point may be matched to its
orthogonal projection ``((b + d) / 2, (b + d) / 2)`` on the diagonal. Points
are compared within a homology dimension only. Exact optimal matchings come
from :func:`scipy.optimize.linear_sum_assignment`; the ``brute_force_*``
functions enumerate matchings exhaustively and serve as test oracles.
"""
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .exceptions import DiagramTooLarge, UncappedInfiniteBar
from .persistence import PersistenceDiagram, alpha_persistence, diagram_from_triples

_BIG = 1e300


def _as_diagram(d):
    if isinstance(d, PersistenceDiagram):
        return d
    arr = np.asarray(d, dtype=np.float64).reshape(-1, 2)
    return diagram_from_triples([(0, b, e) for b, e in arr])


def _dim_arrays(dA, dB, dims=None):
    dA, dB = _as_diagram(dA), _as_diagram(dB)
    for d in (dA, dB):
        if any(p.is_essential for p in d.pairs):
            raise UncappedInfiniteBar("cap infinite bars before computing distances")
    if dims is None:
        dims = sorted({p.dim for p in dA.pairs} | {p.dim for p in dB.pairs})
    return [(dim, dA.as_array(dim), dB.as_array(dim)) for dim in dims]


def _pair_cost(A, B, q):
    diff = np.abs(A[:, None, :] - B[None, :, :])
    if np.isinf(q):
        return diff.max(axis=2)
    return (diff ** q).sum(axis=2)


def _diag_cost(A, q):
    half = np.abs(A[:, 1] - A[:, 0]) / 2.0
    if np.isinf(q):
        return half
    return 2.0 * half ** q


def _augmented_cost(A, B, q):
    """Square cost matrix over A + diag(B) rows and B + diag(A) columns."""
    m, n = len(A), len(B)
    C = np.zeros((m + n, n + m))
    C[:m, :n] = _pair_cost(A, B, q)
    C[:m, n:] = _BIG
    C[:m, n:][np.arange(m), np.arange(m)] = _diag_cost(A, q)
    C[m:, :n] = _BIG
    C[m:, :n][np.arange(n), np.arange(n)] = _diag_cost(B, q)
    return C


def wasserstein(dA, dB, q=2.0, dims=None):
    """q-Wasserstein distance: ``(min over matchings of sum |db|^q + |dd|^q)^(1/q)``.

    Costs of all requested dimensions are added before taking the root.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if np.isinf(q):
        return bottleneck(dA, dB, dims)
    total = 0.0
    for _, A, B in _dim_arrays(dA, dB, dims):
        if len(A) + len(B) == 0:
            continue
        C = _augmented_cost(A, B, q)
        r, c = linear_sum_assignment(C)
        total += C[r, c].sum()
    return float(total ** (1.0 / q))


def _bottleneck_dim(A, B):
    m, n = len(A), len(B)
    if m + n == 0:
        return 0.0
    C = _augmented_cost(A, B, np.inf)
    candidates = np.unique(C[C < _BIG])
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((C <= candidates[mid]).astype(np.int8))
        matched = maximum_bipartite_matching(graph, perm_type="column")
        if np.all(matched >= 0):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck(dA, dB, dims=None):
    """Bottleneck distance (L-infinity ground metric), maximized over dimensions."""
    return max((_bottleneck_dim(A, B) for _, A, B in _dim_arrays(dA, dB, dims)), default=0.0)


def _common_cap(dA, dB):
    cap = max(dA.max_value, dB.max_value)
    return dA.capped(cap), dB.capped(cap)


def topo_diff(X, X_hat, dims=(0, 1), q=2.0):
    """Sum over ``dims`` of the q-Wasserstein distance between alpha diagrams of two clouds.

    Infinite bars of both diagrams are capped at the larger of the two largest
    filtration values, so matching essential classes cost nothing.
    """
    dA, dB = _common_cap(alpha_persistence(X), alpha_persistence(X_hat))
    return sum(wasserstein(dA, dB, q, dims=[dim]) for dim in dims)


def total_persistence(diagram, k=1.0):
    """Sum of ``(death - birth) ** k`` over all points."""
    d = _as_diagram(diagram)
    if any(p.is_essential for p in d.pairs):
        raise UncappedInfiniteBar("cap infinite bars before computing total persistence")
    return float(sum((p.death - p.birth) ** k for p in d.pairs))


@dataclass(frozen=True)
class DiagramPointRef:
    """A diagram point: ``side`` is "pred" or "gt", ``index`` its position in ``pairs``.

    ``index is None`` denotes the diagonal.
    """

    side: str
    index: int = None

    @property
    def is_diagonal(self):
        return self.index is None


DIAGONAL = DiagramPointRef("diagonal")


@dataclass(frozen=True)
class Matching:
    pairs: tuple
    cost: float

    def target_of(self, gt_index):
        for src, dst in self.pairs:
            if src.index == gt_index:
                return dst
        raise KeyError(gt_index)


def off_diagonal(diagram):
    """Indices of the points of ``diagram`` with positive persistence."""
    return [i for i, p in enumerate(diagram.pairs) if p.death > p.birth]


def injective_matching_cost(pred, gt):
    """Cheapest injection from the off-diagonal ground-truth points into ``pred``.

    Each ground-truth point goes to a distinct point of ``pred`` (same
    dimension) or to its own diagonal projection, at cost ``db^2 + dd^2``.
    Predicted points left unmatched cost nothing. Both diagrams must be finite.
    """
    pred, gt = _as_diagram(pred), _as_diagram(gt)
    for d in (pred, gt):
        if any(p.is_essential for p in d.pairs):
            raise UncappedInfiniteBar("cap infinite bars before matching")
    pairs, cost = [], 0.0
    gt_idx = off_diagonal(gt)
    for dim in sorted({gt.pairs[i].dim for i in gt_idx}):
        gi = [i for i in gt_idx if gt.pairs[i].dim == dim]
        pi = [i for i, p in enumerate(pred.pairs) if p.dim == dim]
        G = np.array([(gt.pairs[i].birth, gt.pairs[i].death) for i in gi])
        P = np.array([(pred.pairs[i].birth, pred.pairs[i].death) for i in pi]).reshape(-1, 2)
        m, n = len(gi), len(pi)
        C = np.full((m, n + m), _BIG)
        C[:, :n] = _pair_cost(G, P, 2.0)
        C[np.arange(m), n + np.arange(m)] = _diag_cost(G, 2.0)
        rows, cols = linear_sum_assignment(C)
        for r, c in zip(rows, cols):
            target = DiagramPointRef("pred", pi[c]) if c < n else DIAGONAL
            pairs.append((DiagramPointRef("gt", gi[r]), target))
            cost += C[r, c]
    return Matching(tuple(pairs), float(cost))


def _partial_matchings(m, n):
    """Yield every partial matching between range(m) and range(n) as a tuple of (i, j)."""
    def rec(i, used):
        if i == m:
            yield ()
            return
        for rest in rec(i + 1, used):
            yield rest
        for j in range(n):
            if j not in used:
                for rest in rec(i + 1, used | {j}):
                    yield ((i, j),) + rest
    yield from rec(0, frozenset())


def brute_force_diagram_distance(dA, dB, q=2.0, dims=None, max_points=6):
    """Exhaustive diagonal-augmented matching distance (q may be ``inf``)."""
    total, worst = 0.0, 0.0
    for _, A, B in _dim_arrays(dA, dB, dims):
        if max(len(A), len(B)) > max_points:
            raise DiagramTooLarge(f"brute force handles at most {max_points} points per dimension")
        PC = _pair_cost(A, B, q) if len(A) and len(B) else np.zeros((len(A), len(B)))
        dA_cost, dB_cost = _diag_cost(A, q), _diag_cost(B, q)
        best = np.inf
        for match in _partial_matchings(len(A), len(B)):
            used_a = {i for i, _ in match}
            used_b = {j for _, j in match}
            costs = [PC[i, j] for i, j in match]
            costs += [dA_cost[i] for i in range(len(A)) if i not in used_a]
            costs += [dB_cost[j] for j in range(len(B)) if j not in used_b]
            value = max(costs, default=0.0) if np.isinf(q) else sum(costs)
            best = min(best, value)
        if np.isinf(q):
            worst = max(worst, best)
        else:
            total += best
    return float(worst if np.isinf(q) else total ** (1.0 / q))


def brute_force_injective_cost(pred, gt, max_points=6):
    """Exhaustive minimum over injections of off-diagonal gt points into pred or the diagonal."""
    pred, gt = _as_diagram(pred), _as_diagram(gt)
    total = 0.0
    gt_idx = off_diagonal(gt)
    for dim in sorted({gt.pairs[i].dim for i in gt_idx}):
        G = [gt.pairs[i] for i in gt_idx if gt.pairs[i].dim == dim]
        P = [p for p in pred.pairs if p.dim == dim]
        if len(G) > max_points:
            raise DiagramTooLarge("too many ground-truth points for brute force")
        slots = list(range(len(P))) + [None] * len(G)
        best = np.inf
        for choice in set(permutations(slots, len(G))):
            cost = 0.0
            for g, j in zip(G, choice):
                if j is None:
                    cost += (g.death - g.birth) ** 2 / 2.0
                else:
                    cost += (g.birth - P[j].birth) ** 2 + (g.death - P[j].death) ** 2
            best = min(best, cost)
        total += best
    return float(total)
