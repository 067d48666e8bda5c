"""Filtrations, boundary-matrix reduction and persistence diagrams over Z/2."""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from . import geometry
from .exceptions import MissingVertexValue, NonMonotoneFiltration, TopoKitError
from .validation import check_cloud, check_k_triple

GABRIEL_RTOL = 1e-10


def _sort_key(simplex, value):
    return (value, len(simplex), simplex)


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices in filtration order with their values.

    ``simplices`` is sorted by (value, dimension, vertex tuple). Lower-star
    complexes carry ``argmax``, the vertex whose value each simplex takes;
    alpha complexes carry ``source``, the simplex whose squared circumradius
    each simplex takes, and the ``points`` they were built from.
    """

    simplices: tuple
    values: np.ndarray
    argmax: np.ndarray = None
    source: tuple = None
    points: np.ndarray = None
    kind: str = "generic"

    @classmethod
    def from_unsorted(cls, simplices, values, argmax=None, source=None, points=None,
                      kind="generic"):
        simplices = [tuple(int(v) for v in s) for s in simplices]
        values = np.asarray(values, dtype=np.float64)
        order = sorted(range(len(simplices)), key=lambda i: _sort_key(simplices[i], values[i]))
        return cls(
            simplices=tuple(simplices[i] for i in order),
            values=values[order],
            argmax=None if argmax is None else np.asarray(argmax)[order],
            source=None if source is None else tuple(source[i] for i in order),
            points=points,
            kind=kind,
        )

    def __len__(self):
        return len(self.simplices)

    @cached_property
    def index(self):
        return {s: i for i, s in enumerate(self.simplices)}

    @cached_property
    def dims(self):
        return np.array([len(s) - 1 for s in self.simplices], dtype=int)

    @property
    def order(self):
        """Processing order; simplices are stored already sorted."""
        return np.arange(len(self.simplices))

    @property
    def max_value(self):
        return float(self.values.max()) if len(self.values) else 0.0

    def validate(self):
        """Raise NonMonotoneFiltration unless faces precede and do not exceed cofaces."""
        return self._validated

    @cached_property
    def _validated(self):
        index = self.index
        for j, s in enumerate(self.simplices):
            if len(s) < 2:
                continue
            for face in combinations(s, len(s) - 1):
                i = index.get(face)
                if i is None:
                    raise NonMonotoneFiltration(f"face {face} of {s} is missing")
                if self.values[i] > self.values[j] or i > j:
                    raise NonMonotoneFiltration(
                        f"face {face} (value {self.values[i]}) enters after {s} "
                        f"(value {self.values[j]})")
        return True


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_simplex: tuple = None
    death_simplex: tuple = None
    birth_vertex: int = None
    death_vertex: int = None

    @property
    def persistence(self):
        return self.death - self.birth

    @property
    def is_essential(self):
        return not np.isfinite(self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: tuple
    max_value: float = 0.0
    complex: FilteredComplex = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def in_dim(self, dim):
        return [p for p in self.pairs if p.dim == dim]

    def as_array(self, dim=None):
        """``(n, 2)`` array of (birth, death); all dimensions when ``dim`` is None."""
        rows = [(p.birth, p.death) for p in self.pairs if dim is None or p.dim == dim]
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    def triples(self, min_persistence=None):
        """Sorted (dim, birth, death) tuples, optionally dropping short pairs."""
        out = [(p.dim, p.birth, p.death) for p in self.pairs
               if min_persistence is None or p.persistence > min_persistence]
        return sorted(out)

    def capped(self, cap=None):
        """Copy with infinite deaths replaced by ``cap`` (default: the largest filtration value)."""
        cap = self.max_value if cap is None else float(cap)
        vertex = _cap_vertex(self.complex)
        pairs = tuple(
            PersistencePair(p.dim, p.birth, cap, p.birth_simplex, None, p.birth_vertex, vertex)
            if p.is_essential else p
            for p in self.pairs)
        return PersistenceDiagram(pairs, self.max_value, self.complex)


def _cap_vertex(fc):
    """Lowest-index vertex attaining the largest lower-star value (None otherwise)."""
    if fc is None or fc.argmax is None or len(fc) == 0:
        return None
    vmax = fc.values.max()
    return int(min(s[0] for s, v in zip(fc.simplices, fc.values) if len(s) == 1 and v == vmax))


def diagram_from_triples(triples):
    """Build a bare diagram from (dim, birth, death) rows."""
    pairs = tuple(PersistencePair(int(d), float(b), float(e)) for d, b, e in triples)
    finite = [v for p in pairs for v in (p.birth, p.death) if np.isfinite(v)]
    return PersistenceDiagram(pairs, max(finite, default=0.0))


def _all_faces(top):
    """All faces of the given maximal simplices, grouped by dimension (0..k)."""
    top = np.asarray(top)
    k = top.shape[1] - 1
    faces = {}
    for size in range(1, k + 2):
        rows = np.concatenate([top[:, list(c)] for c in combinations(range(k + 1), size)])
        faces[size - 1] = np.unique(rows, axis=0)
    return faces


def _complex_of_hull(points, keep):
    """Maximal Delaunay simplices of ``points[keep]`` in its own affine hull."""
    U = points[keep]
    k = geometry.affine_dimension(U)
    if k == 0:
        return keep[:1, None]
    if k == 1:
        axis = np.linalg.svd(U - U.mean(axis=0))[2][0]
        order = np.argsort((U - U[0]) @ axis, kind="stable")
        return np.sort(np.stack([keep[order[:-1]], keep[order[1:]]], axis=1), axis=1)
    if k < points.shape[1]:
        basis = np.linalg.svd(U - U.mean(axis=0))[2][:k]
        Y = (U - U.mean(axis=0)) @ basis.T
    else:
        Y = U
    return keep[geometry.delaunay(Y)]


def alpha_filtration(points, strict=False):
    """Alpha filtration of a 2D or 3D point cloud.

    Values are squared radii: a simplex whose smallest circumsphere is empty of
    the opposite vertices of its cofaces enters at its squared circumradius;
    otherwise it enters with its earliest coface. Duplicate points are merged.
    Point sets that do not span the ambient space are triangulated inside their
    affine hull (alpha values are intrinsic), unless ``strict`` is set, in which
    case :class:`~topokit.exceptions.DegenerateInput` is raised.
    """
    X = check_cloud(points)
    keep, _ = geometry.dedup_points(X)
    if strict:
        top = geometry.delaunay(X)
    else:
        top = _complex_of_hull(X, keep)
    faces = _all_faces(top)
    kmax = max(faces)

    alpha = {}
    source = {}
    prev = None  # faces, values and sources of dimension j + 1
    for j in range(kmax, -1, -1):
        F = faces[j]
        if j == 0:
            a = np.zeros(len(F))
            src = [tuple(int(v) for v in f) for f in F]
        else:
            centers, r2, _ = geometry.circumspheres(X[F], cond_limit=np.inf)
            if prev is None:
                a, src = r2, [tuple(int(v) for v in f) for f in F]
            else:
                a, src = _propagate(F, centers, r2, prev, X)
        for f, v, s in zip(F, a, src):
            key = tuple(int(x) for x in f)
            alpha[key] = float(v)
            source[key] = s
        prev = (F, a, src)

    simplices = list(alpha)
    fc = FilteredComplex.from_unsorted(
        simplices, [alpha[s] for s in simplices], source=[source[s] for s in simplices],
        points=X, kind="alpha")
    fc.validate()
    return fc


def _row_keys(rows, base):
    keys = np.zeros(len(rows), dtype=np.int64)
    for c in range(rows.shape[1]):
        keys = keys * base + rows[:, c]
    return keys


def _coface_table(F, cofaces, base):
    """For every (coface, dropped vertex): index of the face in ``F`` and the opposite vertex."""
    kp1 = cofaces.shape[1]
    face_idx, cof_idx, opp = [], [], []
    fkeys = _row_keys(F, base)
    for drop in range(kp1):
        rows = np.delete(cofaces, drop, axis=1)
        face_idx.append(np.searchsorted(fkeys, _row_keys(rows, base)))
        cof_idx.append(np.arange(len(cofaces)))
        opp.append(cofaces[:, drop])
    return np.concatenate(face_idx), np.concatenate(cof_idx), np.concatenate(opp)


def _propagate(F, centers, r2, prev, X):
    """Alpha values of ``F`` given the values of its cofaces."""
    Fc, ac, srcc = prev
    face_idx, cof_idx, opp = _coface_table(F, Fc, len(X))
    diff = X[opp] - centers[face_idx]
    inside = np.einsum("md,md->m", diff, diff) < r2[face_idx] * (1.0 - GABRIEL_RTOL)
    attached = np.zeros(len(F), dtype=bool)
    attached[face_idx[inside]] = True

    # earliest coface per face, ties to the lowest coface index
    order = np.lexsort((cof_idx, ac[cof_idx], face_idx))
    first = np.ones(len(order), dtype=bool)
    first[1:] = face_idx[order][1:] != face_idx[order][:-1]
    best_cof = np.full(len(F), -1)
    best_cof[face_idx[order][first]] = cof_idx[order][first]
    has_cof = best_cof >= 0
    best = np.where(has_cof, ac[np.maximum(best_cof, 0)], np.inf)

    own = ~attached & (r2 <= best)
    a = np.where(own, r2, best)
    src = [tuple(int(x) for x in f) if own[i] else srcc[best_cof[i]] for i, f in enumerate(F)]
    return a, src


def lower_star_filtration(simplices, vertex_values):
    """Lower-star filtration: each simplex takes the largest value among its vertices.

    Ties for the maximizing vertex go to the lowest index; that vertex is kept
    in ``argmax`` for gradient attribution.
    """
    vals = np.asarray(vertex_values, dtype=np.float64).ravel()
    simplices = [tuple(sorted(int(v) for v in s)) for s in simplices]
    seen = set(simplices)
    for s in simplices:
        if len(s) > 1:
            for face in combinations(s, len(s) - 1):
                if face not in seen:
                    raise TopoKitError(f"complex is not closed: face {face} of {s} missing")
    values, argmax = [], []
    for s in simplices:
        if max(s) >= len(vals) or min(s) < 0:
            raise MissingVertexValue(f"no value for a vertex of {s}")
        sv = vals[list(s)]
        if not np.all(np.isfinite(sv)):
            raise MissingVertexValue(f"non-finite value on a vertex of {s}")
        top = sv.max()
        values.append(top)
        argmax.append(next(v for v, x in zip(s, sv) if x == top))
    return FilteredComplex.from_unsorted(simplices, values, argmax=argmax, kind="lower_star")


def reduce_boundary(fc):
    """Column-reduce the Z/2 boundary matrix; returns ``(pairs, essentials)`` as index lists."""
    index = fc.index
    pivot_of = {}
    pairs = []
    for j, s in enumerate(fc.simplices):
        if len(s) == 1:
            continue
        col = 0
        for face in combinations(s, len(s) - 1):
            col |= 1 << index[face]
        while col:
            low = col.bit_length() - 1
            other = pivot_of.get(low)
            if other is None:
                pivot_of[low] = col
                pairs.append((low, j))
                break
            col ^= other
    negative = {j for _, j in pairs}
    positive_paired = {i for i, _ in pairs}
    essentials = [i for i in range(len(fc)) if i not in negative and i not in positive_paired]
    return pairs, essentials


def compute_persistence(fc):
    """Persistence diagram of a monotone filtered complex (standard column reduction)."""
    fc.validate()
    raw_pairs, essentials = reduce_boundary(fc)
    simp, vals, am = fc.simplices, fc.values, fc.argmax

    def vertex(i):
        return None if am is None else int(am[i])

    out = [PersistencePair(len(simp[i]) - 1, float(vals[i]), float(vals[j]), simp[i], simp[j],
                           vertex(i), vertex(j)) for i, j in raw_pairs]
    out += [PersistencePair(len(simp[i]) - 1, float(vals[i]), float("inf"), simp[i], None,
                            vertex(i), None) for i in essentials]
    out.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_simplex))
    return PersistenceDiagram(tuple(out), fc.max_value, fc)


def alpha_persistence(points, strict=False):
    return compute_persistence(alpha_filtration(points, strict=strict))


def betti_numbers(diagram, alpha):
    """Betti numbers (b0, b1, b2) at scale ``alpha``: pairs with birth <= alpha < death."""
    counts = [0, 0, 0]
    for p in diagram.pairs:
        if p.dim < 3 and p.birth <= alpha < p.death:
            counts[p.dim] += 1
    return tuple(counts)


@dataclass(frozen=True)
class TruncatedBarcode:
    """Top-k longest finite bars per dimension.

    ``bars[i]`` is a ``(<= k_i, 2)`` array sorted by persistence, descending;
    ``members[i]`` holds the matching capped :class:`PersistencePair` objects.
    """

    bars: tuple
    k: tuple
    members: tuple = field(default=None, compare=False, repr=False)

    def to_diagram(self):
        rows = [(i, b, d) for i in range(3) for b, d in self.bars[i]]
        return diagram_from_triples(rows)

    def __eq__(self, other):
        return (isinstance(other, TruncatedBarcode) and self.k == other.k
                and all(np.array_equal(a, b) for a, b in zip(self.bars, other.bars)))

    def __hash__(self):
        return hash((self.k, tuple(map(bytes, (np.ascontiguousarray(b) for b in self.bars)))))


def truncate_topk(diagram, k, cap=None):
    """Keep the ``k[i]`` longest bars in each dimension ``i``.

    Infinite bars are first capped at ``cap`` (default: the diagram's largest
    filtration value). Persistence ties are broken by birth, then death.
    """
    k = check_k_triple(k)
    capped = diagram.capped(cap)
    bars, members = [], []
    for dim in range(3):
        pts = sorted(capped.in_dim(dim), key=lambda p: (-(p.death - p.birth), p.birth, p.death))
        pts = pts[:k[dim]]
        bars.append(np.array([(p.birth, p.death) for p in pts], dtype=np.float64).reshape(-1, 2))
        members.append(tuple(pts))
    return TruncatedBarcode(tuple(bars), k, tuple(members))
