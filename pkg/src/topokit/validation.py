"""Input validation helpers shared by the functional API and the estimators."""
import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ImageTooSmall


def check_cloud(points, dims=(2, 3), min_points=1):
    """Return ``points`` as a finite float64 array of shape (n, d) with d in ``dims``."""
    X = check_array(points, dtype=np.float64, ensure_min_samples=min_points,
                    ensure_all_finite=True)
    if X.shape[1] not in dims:
        raise ValueError(f"expected points with {' or '.join(map(str, dims))} "
                         f"coordinates, got {X.shape[1]}")
    return X


def check_image(img):
    """Return an (H, W, 3) float64 image with channels in [0, 1]."""
    Y = np.asarray(img, dtype=np.float64)
    if Y.ndim != 3 or Y.shape[2] != 3:
        raise ValueError(f"expected an H x W x 3 image, got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("image contains non-finite values")
    if Y.min(initial=0.0) < 0.0 or Y.max(initial=0.0) > 1.0:
        raise ValueError("image channels must lie in [0, 1]")
    if Y.shape[0] * Y.shape[1] < 4:
        raise ImageTooSmall(f"image has {Y.shape[0] * Y.shape[1]} pixels, need at least 4")
    return Y


def check_k_triple(k):
    k = tuple(int(v) for v in k)
    if len(k) != 3 or min(k) < 0:
        raise ValueError(f"k must be three nonnegative counts, got {k}")
    return k
