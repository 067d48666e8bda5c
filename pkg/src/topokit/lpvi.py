"""Local persistent Voronoi interpolation of sparse 3D point clouds.

Each unvisited point proposes the Voronoi vertices of its K-neighborhood as
new points. They are accepted when the neighborhood's alpha diagram barely
moves (TopoDiff below ``tau``); otherwise the point falls back to a 2D Voronoi
interpolation inside the PCA plane of a smaller K'-neighborhood.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .exceptions import (CloudTooSmall, DegenerateInput, DegenerateSimplex, KTooLarge,
                         RankDeficient)
from .metrics import topo_diff
from .validation import check_cloud

log = logging.getLogger(__name__)

MERGE_TOL = 1e-9  # relative to the cloud's extent


@dataclass(frozen=True)
class LpviConfig:
    K: int = 16
    K_prime: int = 8
    tau: float = 0.5
    locality_factor: float = 2.0

    def __post_init__(self):
        if not self.K >= self.K_prime >= 3:
            raise ValueError(f"need K >= K' >= 3, got K={self.K}, K'={self.K_prime}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.locality_factor > 0:
            raise ValueError("locality_factor must be positive")


@dataclass
class Neighborhood:
    """What happened at one processed center."""

    center: int
    branch: str  # "3d", "2d" or "skipped"
    neighbors: tuple
    radius: float  # distance to the K-th neighbor
    topo_diff: float = None
    candidates: np.ndarray = None  # points proposed by the accepted branch
    added: tuple = ()  # row indices into the output cloud
    frame: geometry.PcaFrame = None
    reason: str = ""


@dataclass
class LpviReport:
    accepted_3d: int = 0
    fallback_2d: int = 0
    skipped: int = 0
    points_added: int = 0
    neighborhoods: list = field(default_factory=list)

    @property
    def processed(self):
        return len(self.neighborhoods)

    @property
    def topo_diffs(self):
        return [(nb.center, nb.topo_diff) for nb in self.neighborhoods if nb.topo_diff is not None]


def knn(points, center, k):
    """Indices of the ``k`` nearest neighbors of ``points[center]``, excluding the center.

    Sorted by distance; equal distances are ordered by index.
    """
    X = np.asarray(points, dtype=np.float64)
    if not 0 <= k < len(X):
        raise KTooLarge(f"k={k} needs at least {k + 1} points, got {len(X)}")
    d2 = np.sum((X - X[center]) ** 2, axis=1)
    idx = np.arange(len(X))
    order = np.lexsort((idx, d2))
    order = order[order != center]
    return order[:k]


def _scaled(P, origin, scale):
    return (P - origin) / scale


def lpvi(points, cfg=None):
    """Densify a 3D cloud. Returns ``(augmented, report)``.

    ``augmented`` holds the input points unchanged followed by the added ones.
    Centers are processed in ascending index order; a point marked visited by
    an earlier neighborhood is never a center itself.
    """
    cfg = cfg or LpviConfig()
    X = check_cloud(points, dims=(3,))
    m = len(X)
    if m < cfg.K + 1:
        raise CloudTooSmall(f"LPVI with K={cfg.K} needs at least {cfg.K + 1} points, got {m}")

    merge_tol = MERGE_TOL * max(np.ptp(X, axis=0).max(), 1e-300)
    visited = np.zeros(m, dtype=bool)
    added = []
    report = LpviReport()

    def commit(nb, candidates):
        rows = []
        for p in candidates:
            if added and np.min(np.linalg.norm(np.asarray(added) - p, axis=1)) <= merge_tol:
                continue
            added.append(p)
            rows.append(m + len(added) - 1)
        nb.candidates = np.asarray(candidates).reshape(-1, 3)
        nb.added = tuple(rows)

    for l in range(m):
        if visited[l]:
            continue
        visited[l] = True
        nbrs = knn(X, l, cfg.K)
        radius = float(np.linalg.norm(X[nbrs[-1]] - X[l]))
        reach = cfg.locality_factor * radius
        nb = Neighborhood(center=l, branch="3d", neighbors=tuple(int(i) for i in nbrs),
                          radius=radius)
        local = X[np.concatenate([[l], nbrs])]

        if radius > 0 and geometry.affine_dimension(local) == 3:
            try:
                cand = geometry.voronoi_cell_vertices(local, 0, max_distance=reach)
                nb.topo_diff = topo_diff(_scaled(local, X[l], radius),
                                         _scaled(np.vstack([local, cand]), X[l], radius))
            except (DegenerateInput, DegenerateSimplex) as exc:
                log.debug("3D branch unavailable at center %d: %s", l, exc)
            else:
                if nb.topo_diff < cfg.tau:
                    visited[nbrs] = True
                    commit(nb, cand)
                    report.accepted_3d += 1
                    report.neighborhoods.append(nb)
                    continue

        nb = _planar_branch(X, l, cfg, nb, reach)
        if nb.branch == "2d":
            visited[list(nb.neighbors)] = True
            commit(nb, nb.candidates)
            report.fallback_2d += 1
        else:
            log.debug("LPVI skipped center %d: %s", l, nb.reason)
            report.skipped += 1
        report.neighborhoods.append(nb)

    report.points_added = len(added)
    out = np.vstack([X, np.asarray(added).reshape(-1, 3)])
    return out, report


def _planar_branch(X, l, cfg, nb, reach):
    """2D Voronoi interpolation in the PCA plane of the K'-neighborhood."""
    nbrs = knn(X, l, cfg.K_prime)
    nb.neighbors = tuple(int(i) for i in nbrs)
    local = X[np.concatenate([[l], nbrs])]
    try:
        frame, flat = geometry.pca_3to2(local)
        cand2 = geometry.voronoi_cell_vertices(flat, 0, max_distance=reach)
    except (RankDeficient, DegenerateInput, DegenerateSimplex) as exc:
        nb.branch, nb.reason = "skipped", str(exc)
        return nb
    nb.branch = "2d"
    nb.frame = frame
    nb.candidates = np.array([geometry.lift_2to3(v, frame) for v in cand2]).reshape(-1, 3)
    return nb
