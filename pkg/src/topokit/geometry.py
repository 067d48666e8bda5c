"""Delaunay triangulation, circumspheres, Voronoi cell vertices and PCA plane fitting.

Triangulations are delegated to Qhull (through :mod:`scipy.spatial`); everything
else is computed here. Points are plain ``(n, d)`` float arrays with ``d`` in
{2, 3}; simplices are tuples of strictly increasing point indices.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .exceptions import DegenerateInput, DegenerateSimplex, RankDeficient
from .validation import check_cloud

DEDUP_TOL = 1e-12
COND_LIMIT = 1e12
GRAM_COND_LIMIT = 1e6
VERTEX_MERGE_TOL = 1e-9


def affine_dimension(points, rel_tol=1e-9):
    """Dimension of the affine hull of ``points`` (0 for a single point)."""
    P = np.asarray(points, dtype=np.float64)
    if len(P) <= 1:
        return 0
    s = np.linalg.svd(P - P[0], compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def dedup_points(points, tol=DEDUP_TOL):
    """Merge points closer than ``tol``.

    Returns ``(keep, inverse)``: indices of the representative points (the lowest
    index of each cluster, ascending) and, for every input point, the position of
    its representative in ``keep``.
    """
    P = np.asarray(points, dtype=np.float64)
    n = len(P)
    parent = np.arange(n)
    if n > 1:
        pairs = cKDTree(P).query_pairs(r=tol, output_type="ndarray")

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in pairs:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        for i in range(n):
            parent[i] = find(i)
    keep = np.unique(parent)
    inverse = np.searchsorted(keep, parent)
    return keep, inverse


def circumspheres(P, cond_limit=COND_LIMIT):
    """Smallest circumspheres of a batch of simplices.

    ``P`` has shape ``(m, k + 1, d)``: ``m`` simplices with ``k + 1`` vertices each.
    The sphere center is constrained to the affine hull of the simplex, so lower
    dimensional simplices get their smallest circumscribing sphere.

    Raises :class:`DegenerateSimplex` for coincident vertices, or when the squared
    condition number of the length-normalized edge matrix exceeds ``cond_limit``
    from every choice of base vertex. Pass ``np.inf`` to accept thin but non-flat
    simplices; their spheres are then only as accurate as the conditioning allows.

    Returns ``(centers, radius_sq, bary)`` where ``bary`` holds the barycentric
    coordinates of each center with respect to the simplex vertices.
    """
    P = np.asarray(P, dtype=np.float64)
    m, kp1, d = P.shape
    if kp1 == 1:
        return P[:, 0, :].copy(), np.zeros(m), np.ones((m, 1))
    D2 = np.sum((P[:, :, None, :] - P[:, None, :, :]) ** 2, axis=-1)
    if np.any(D2[:, ~np.eye(kp1, dtype=bool)] == 0.0):
        raise DegenerateSimplex("simplex has coincident vertices")
    # squared condition numbers of the unit edge matrix seen from each base vertex
    perms = np.array([[b] + [i for i in range(kp1) if i != b] for b in range(kp1)])
    conds = np.stack([np.linalg.cond(_unit_edges(P[:, p])[0]) for p in perms], axis=1) ** 2
    # A needle triangle looks singular from its sharp corner but not from the others.
    best = np.argmin(conds, axis=1)
    if np.any(~(conds[np.arange(m), best] <= cond_limit)):
        raise DegenerateSimplex("simplex vertices are affinely dependent")
    easy = conds[:, 0] <= GRAM_COND_LIMIT
    perm = np.where(easy[:, None], perms[0], perms[best])
    Q = np.take_along_axis(P, perm[:, :, None], axis=1)
    E = Q[:, 1:, :] - Q[:, :1, :]
    lam = np.empty((m, kp1 - 1))
    lam[easy] = _gram_coords(E[easy])
    lam[~easy] = _qr_coords(E[~easy])
    offset = np.einsum("mi,mid->md", lam, E)
    centers = Q[:, 0, :] + offset
    radius_sq = np.einsum("md,md->m", offset, offset)
    bary = np.empty((m, kp1))
    np.put_along_axis(bary, perm, np.concatenate([1.0 - lam.sum(axis=1, keepdims=True), lam],
                                                 axis=1), axis=1)
    return centers, radius_sq, bary


def _gram_coords(E):
    """Edge coefficients of the circumcenter offset from the Jacobi-scaled Gram system.

    Exact on symmetric inputs such as lattice squares, so well-conditioned
    simplices use it.
    """
    G = E @ np.transpose(E, (0, 2, 1))
    rhs = 0.5 * np.einsum("mii->mi", G)
    s = np.sqrt(2.0 * rhs)
    Gs = G / (s[:, :, None] * s[:, None, :])
    return np.linalg.solve(Gs, (rhs / s)[..., None])[..., 0] / s


def _qr_coords(E):
    """Same coefficients through a QR factorization of the edges.

    The offset x solves e_i . x = |e_i|^2 / 2 inside the edge span. With
    E^T = q r, x = q y where r^T y = |e|^2 / 2, and x = E^T r^-1 y. Errors scale
    with the conditioning of E rather than its square.
    """
    q, r = np.linalg.qr(np.transpose(E, (0, 2, 1)))
    y = np.linalg.solve(np.transpose(r, (0, 2, 1)), 0.5 * np.sum(E * E, axis=2)[..., None])
    return np.linalg.solve(r, y)[..., 0]


def _unit_edges(Q):
    """Edges from ``Q[:, 0]`` to the other vertices, normalized, and their lengths."""
    E = Q[:, 1:, :] - Q[:, :1, :]
    s = np.linalg.norm(E, axis=2)
    return E / s[..., None], s


def circumsphere(simplex, points):
    """Center and squared radius of the smallest sphere through ``simplex``'s vertices."""
    X = np.asarray(points, dtype=np.float64)
    c, r2, _ = circumspheres(X[list(simplex)][None])
    return c[0], float(r2[0])


def circumradius_sq_gradient(P, cond_limit=COND_LIMIT):
    """Gradient of the squared circumradius with respect to each vertex.

    For vertices ``p_j`` with circumcenter ``c = sum_j w_j p_j`` the derivative is
    ``2 w_j (p_j - c)``. Returns an array shaped like ``P``.
    """
    P = np.asarray(P, dtype=np.float64)
    c, _, w = circumspheres(P, cond_limit)
    return 2.0 * w[..., None] * (P - c[:, None, :])


def delaunay(points):
    """Maximal simplices of the Delaunay triangulation, as an ``(T, d + 1)`` int array.

    Duplicate points (within 1e-12) are merged first; a merged point is
    represented by its lowest index. Raises :class:`DegenerateInput` when the
    points do not affinely span the ambient space.
    """
    X = check_cloud(points)
    n, d = X.shape
    keep, _ = dedup_points(X)
    if len(keep) < d + 1:
        raise DegenerateInput(f"need at least {d + 1} distinct points in {d}D, got {len(keep)}")
    U = X[keep]
    if affine_dimension(U) < d:
        raise DegenerateInput(f"points do not span {d}D; drop a dimension")
    try:
        tri = Delaunay(U)
    except QhullError as exc:
        raise DegenerateInput(str(exc)) from exc
    simplices = np.sort(tri.simplices, axis=1)
    # Qhull's "Qt" option triangulates cospherical facets and may leave zero-volume cells
    E = U[simplices[:, 1:]] - U[simplices[:, :1]]
    vol = np.abs(np.linalg.det(E))
    scale = np.ptp(U, axis=0).max() ** d
    simplices = simplices[vol > 1e-12 * scale]
    simplices = keep[simplices]
    order = np.lexsort(simplices.T[::-1])
    return simplices[order]


def voronoi_cell_vertices(points, site, max_distance=None):
    """Finite vertices of the Voronoi cell of ``points[site]``.

    These are the circumcenters of the Delaunay simplices incident to the site,
    merged within 1e-9 times the extent of ``points`` and sorted
    lexicographically. With ``max_distance``, any vertex farther than that from
    the site is dropped, which also removes the far-away circumcenters of nearly
    flat hull simplices.
    """
    X = check_cloud(points)
    simplices = delaunay(X)
    keep, inverse = dedup_points(X)
    rep = keep[inverse[site]]
    incident = simplices[np.any(simplices == rep, axis=1)]
    if len(incident) == 0:
        return np.empty((0, X.shape[1]))
    centers, _, _ = circumspheres(X[incident])
    if max_distance is not None:
        dist = np.linalg.norm(centers - X[site], axis=1)
        centers = centers[dist <= max_distance]
    return merge_close(centers, VERTEX_MERGE_TOL * max(np.ptp(X, axis=0).max(), 1e-300))


def merge_close(points, tol):
    """Lexicographically sorted points with near-duplicates (within ``tol``) removed."""
    P = np.asarray(points, dtype=np.float64)
    if len(P) == 0:
        return P
    keep, _ = dedup_points(P, tol)
    P = P[keep]
    return P[np.lexsort(P.T[::-1])]


@dataclass(frozen=True)
class PcaFrame:
    """Local plane: ``origin`` plus an orthonormal ``basis`` (2 x 3, rows u1, u2)."""

    origin: np.ndarray
    basis: np.ndarray
    explained_variance: np.ndarray

    def project(self, points):
        return (np.asarray(points, dtype=np.float64) - self.origin) @ self.basis.T

    def lift(self, coords):
        return self.origin + np.asarray(coords, dtype=np.float64) @ self.basis


def pca_3to2(neighborhood):
    """Fit a plane to a 3D neighborhood and project onto it.

    The frame is centered on the first point (not the centroid) so that
    :func:`lift_2to3` inverts the projection exactly. The basis is the top two
    eigenvectors of the neighborhood covariance.
    """
    X = check_cloud(neighborhood, dims=(3,), min_points=3)
    cov = np.cov(X, rowvar=False, bias=True)
    evals, evecs = np.linalg.eigh(cov)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    if evals[0] <= 0.0 or evals[1] < 1e-12 * evals[0]:
        raise RankDeficient("neighborhood is collinear; no plane to fit")
    basis = evecs[:, :2].T.copy()
    # deterministic orientation: largest-magnitude component of each axis positive
    for row in basis:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    frame = PcaFrame(origin=X[0].copy(), basis=basis,
                     explained_variance=np.clip(evals[:2], 0.0, None))
    return frame, frame.project(X)


def lift_2to3(v2, frame):
    """Map plane coordinates back to 3D: ``origin + v.x * u1 + v.y * u2``."""
    return frame.lift(v2)
