"""Topological image loss on RGB point sets, with analytic gradients.

Pixels become points of the RGB cube, both images get alpha persistence
diagrams, each diagram keeps its ``k_i`` longest bars per dimension, and the
j-th longest rendered bar is compared with the j-th longest ground-truth bar.
Per-dimension squared differences are weighted by the share of ground-truth
bars kept in that dimension.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import geometry
from .exceptions import DimensionMismatch
from .persistence import alpha_filtration, compute_persistence, truncate_topk
from .validation import check_image, check_k_triple

log = logging.getLogger(__name__)

RGB_CAP = 3.0  # squared diameter of the unit RGB cube; caps essential bars


@dataclass(frozen=True)
class RgbPointSet:
    """Distinct pixel colors plus, for each, the (row, col) pixels that carry it."""

    points: np.ndarray
    pixel_index: tuple
    shape: tuple

    def __len__(self):
        return len(self.points)


def sampling_stride(height, width, max_points):
    stride = 1
    while -(-height // stride) * -(-width // stride) > max_points:
        stride += 1
    return stride


def reshape_to_rgb(img, max_points=1024):
    """Flatten an H x W x 3 image into distinct RGB points.

    Images with more than ``max_points`` pixels are subsampled on a regular
    grid with the smallest stride that fits. Identical colors are merged and
    keep every pixel that carries them.
    """
    Y = check_image(img)
    H, W, _ = Y.shape
    s = sampling_stride(H, W, max_points)
    rows, cols = np.meshgrid(np.arange(0, H, s), np.arange(0, W, s), indexing="ij")
    rows, cols = rows.ravel(), cols.ravel()
    flat = Y[rows, cols]
    keep, inverse = geometry.dedup_points(flat)
    pixel_index = tuple(
        np.stack([rows[inverse == i], cols[inverse == i]], axis=1) for i in range(len(keep)))
    return RgbPointSet(flat[keep], pixel_index, (H, W))


@dataclass(frozen=True)
class PersLossValue:
    total: float
    per_dim_terms: tuple
    weights: tuple
    matching: tuple  # per dim: tuple of (rendered slot, gt slot); None marks a diagonal pad
    critical: tuple = ()  # (dim, birth source, death source) of each kept rendered bar


@dataclass(frozen=True)
class PersLossGradient:
    d_pixels: np.ndarray


def _padded(bars_r, bars_g):
    """Pair bars by rank; the shorter side is padded with the other's diagonal projections."""
    n = max(len(bars_r), len(bars_g))
    R, Gt, slots = np.zeros((n, 2)), np.zeros((n, 2)), []
    for j in range(n):
        r = bars_r[j] if j < len(bars_r) else None
        g = bars_g[j] if j < len(bars_g) else None
        R[j] = r if r is not None else np.full(2, g.mean())
        Gt[j] = g if g is not None else np.full(2, r.mean())
        slots.append((j if r is not None else None, j if g is not None else None))
    return R, Gt, tuple(slots)


def persloss_from_barcodes(pb, pb_hat, critical=()):
    """Loss between a rendered barcode ``pb`` and a ground-truth barcode ``pb_hat``."""
    counts = np.array([len(b) for b in pb_hat.bars], dtype=np.float64)
    weights = counts / counts.sum() if counts.sum() > 0 else np.zeros(3)
    terms, matching = [], []
    for i in range(3):
        R, Gt, slots = _padded(pb.bars[i], pb_hat.bars[i])
        terms.append(float(np.sum((R - Gt) ** 2)))
        matching.append(slots)
    total = float(np.dot(weights, terms))
    return PersLossValue(total, tuple(terms), tuple(float(w) for w in weights),
                         tuple(matching), critical)


def _barcode(rgb, k):
    if geometry.affine_dimension(rgb.points) < 3:
        log.info("RGB point set is affinely degenerate; using its affine hull")
    fc = alpha_filtration(rgb.points)
    return fc, truncate_topk(compute_persistence(fc), k, cap=RGB_CAP)


@lru_cache(maxsize=16)
def _cached_gt(data, shape, k, max_points):
    rgb = reshape_to_rgb(np.frombuffer(data).reshape(shape), max_points)
    return _barcode(rgb, k)[1]


def gt_barcode(gt, k, max_points=1024):
    """Truncated barcode of a ground-truth image (memoized; ground truth never changes)."""
    Y = np.ascontiguousarray(check_image(gt))
    return _cached_gt(Y.tobytes(), Y.shape, check_k_triple(k), max_points)


def _check_pair(rendered, gt):
    R, G = check_image(rendered), check_image(gt)
    if R.shape != G.shape:
        raise DimensionMismatch(f"rendered image {R.shape[:2]} vs ground truth {G.shape[:2]}")
    return R, G


def persloss(rendered, gt, k=(3, 2, 1), max_points=1024):
    """PersLoss between a rendered image and its ground truth (both H x W x 3 in [0, 1])."""
    R, G = _check_pair(rendered, gt)
    k = check_k_triple(k)
    fc, pb = _barcode(reshape_to_rgb(R, max_points), k)
    return persloss_from_barcodes(pb, gt_barcode(G, k, max_points), _critical(fc, pb))


def _critical(fc, pb):
    return tuple((dim, _source(fc, p.birth_simplex), _source(fc, p.death_simplex))
                 for dim in range(3) for p in pb.members[dim])


def _source(fc, simplex):
    return None if simplex is None else fc.source[fc.index[simplex]]


def persloss_gradient(rendered, gt, k=(3, 2, 1), max_points=1024):
    """Loss value and its gradient with respect to the rendered pixel colors.

    A bar's birth and death are squared circumradii of the simplices their
    critical simplices took their alpha values from; the chain rule runs
    through those circumradii to the RGB points, and each point's gradient is
    shared equally by the pixels merged into it. Capped deaths are constant.
    """
    R, G = _check_pair(rendered, gt)
    k = check_k_triple(k)
    rgb = reshape_to_rgb(R, max_points)
    fc, pb = _barcode(rgb, k)
    pb_hat = gt_barcode(G, k, max_points)
    value = persloss_from_barcodes(pb, pb_hat, _critical(fc, pb))

    d_points = np.zeros_like(rgb.points)
    for i in range(3):
        w = value.weights[i]
        if w == 0.0:
            continue
        R_bars, G_bars, slots = _padded(pb.bars[i], pb_hat.bars[i])
        for j, (r_slot, _) in enumerate(slots):
            if r_slot is None:
                continue
            pair = pb.members[i][r_slot]
            coef_b = 2.0 * w * (R_bars[j, 0] - G_bars[j, 0])
            coef_d = 2.0 * w * (R_bars[j, 1] - G_bars[j, 1])
            _accumulate(d_points, rgb.points, _source(fc, pair.birth_simplex), coef_b)
            _accumulate(d_points, rgb.points, _source(fc, pair.death_simplex), coef_d)

    d_pixels = np.zeros(R.shape)
    for i, pix in enumerate(rgb.pixel_index):
        d_pixels[pix[:, 0], pix[:, 1]] += d_points[i] / len(pix)
    return value, PersLossGradient(d_pixels)


def _accumulate(out, points, simplex, coef):
    if simplex is None or len(simplex) < 2 or coef == 0.0:
        return
    idx = list(simplex)
    out[idx] += coef * geometry.circumradius_sq_gradient(points[idx][None], np.inf)[0]
