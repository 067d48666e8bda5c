"""scikit-learn style wrappers around the functional API."""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .lpvi import LpviConfig, lpvi
from .optimizer import OptimizerConfig, ToyProblem, optimize
from .persistence import alpha_filtration, betti_numbers, compute_persistence
from .validation import check_cloud


class AlphaPersistence(TransformerMixin, BaseEstimator):
    """Alpha persistence of a point cloud.

    ``fit`` stores the filtration and diagram of ``X``. ``transform`` returns
    the diagram of ``X`` as an ``(n_pairs, 3)`` array of (dim, birth, death),
    keeping pairs with persistence above ``min_persistence``.
    """

    def __init__(self, strict=False, min_persistence=None):
        self.strict = strict
        self.min_persistence = min_persistence

    def _diagram(self, X):
        fc = alpha_filtration(check_cloud(X), strict=self.strict)
        return fc, compute_persistence(fc)

    def fit(self, X, y=None):
        self.filtration_, self.diagram_ = self._diagram(X)
        self.n_features_in_ = self.filtration_.points.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "diagram_")
        _, diagram = self._diagram(X)
        return np.array(diagram.triples(self.min_persistence), dtype=np.float64).reshape(-1, 3)

    def betti(self, alpha):
        """Betti numbers of the fitted cloud's alpha complex at ``alpha``."""
        check_is_fitted(self, "diagram_")
        return betti_numbers(self.diagram_, alpha)


class LPVIInterpolator(TransformerMixin, BaseEstimator):
    """Topology-guarded densification of a 3D cloud.

    ``transform`` returns the input points followed by the added ones; the
    report of the most recent run is kept in ``report_``.
    """

    def __init__(self, K=16, K_prime=8, tau=0.5, locality_factor=2.0):
        self.K = K
        self.K_prime = K_prime
        self.tau = tau
        self.locality_factor = locality_factor

    def _config(self):
        return LpviConfig(self.K, self.K_prime, self.tau, self.locality_factor)

    def fit(self, X, y=None):
        self.augmented_, self.report_ = lpvi(X, self._config())
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "report_")
        out, self.report_ = lpvi(X, self._config())
        return out

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).augmented_


class TopologyAwareFitter(RegressorMixin, BaseEstimator):
    """Fits vertex values on a fixed complex to targets under a topological penalty.

    ``fit(X, y)`` takes the initial values ``X`` (or None to start at ``y``)
    and the targets ``y``; ``predict`` returns the fitted values ``W_``.
    """

    def __init__(self, simplices=(), lambda_topo=1.0, epsilon=0.01, eta="auto", max_iters=10000,
                 persloss_period=200, supv_weight=1.0):
        self.simplices = simplices
        self.lambda_topo = lambda_topo
        self.epsilon = epsilon
        self.eta = eta
        self.max_iters = max_iters
        self.persloss_period = persloss_period
        self.supv_weight = supv_weight

    def fit(self, X, y):
        y = np.asarray(y, dtype=np.float64).ravel()
        self.problem_ = ToyProblem(self.simplices, y, self.supv_weight)
        cfg = OptimizerConfig(self.lambda_topo, self.epsilon, self.eta, self.max_iters,
                              self.persloss_period)
        W0 = None if X is None else np.asarray(X, dtype=np.float64).ravel()
        if W0 is not None and W0.shape != y.shape:
            raise ValueError(f"initial values have shape {W0.shape}, targets {y.shape}")
        result = optimize(self.problem_, cfg, W0)
        self.W_, self.trace_, self.stop_reason_ = result.W, result.trace, result.stop_reason
        self.eta_, self.constants_ = result.eta, result.constants
        self.n_iter_ = len(result.trace)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "W_")
        return self.W_.copy()
