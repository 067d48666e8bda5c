"""Gradient descent on a topology-aware total loss over a fixed simplicial complex.

The model is the identity: parameters ``W`` are the vertex values of a
lower-star filtration, clamped to [0, 1]. The loss is

    G(W) = supv_weight * |W - target|^2 + lambda_topo * L_topo(W)

where ``L_topo`` is the cheapest injective matching of the target diagram's
off-diagonal points into the current diagram. Within an iteration the
*configuration* (diagram, matching, and the birth/death vertices of the
matched points) is frozen; it is refreshed after the step. Each iteration
therefore records three numbers, G_t(W_t) -> G_t(W_{t+1}) -> G_{t+1}(W_{t+1}).
"""
import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .exceptions import NonFiniteLoss
from .metrics import injective_matching_cost, off_diagonal
from .persistence import compute_persistence, lower_star_filtration


def face_closure(simplices):
    """All faces of the given simplices, ordered by (dimension, vertices)."""
    out = set()
    for s in simplices:
        s = tuple(sorted(int(v) for v in s))
        for size in range(1, len(s) + 1):
            out.update(combinations(s, size))
    return tuple(sorted(out, key=lambda s: (len(s), s)))


@dataclass(frozen=True)
class ToyProblem:
    """Fixed complex (closed under faces on construction) with target vertex values."""

    simplices: tuple
    target_values: np.ndarray
    supv_weight: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.target_values, dtype=np.float64)
        if t.min(initial=0.0) < 0.0 or t.max(initial=0.0) > 1.0:
            raise ValueError("target values must lie in [0, 1]")
        object.__setattr__(self, "target_values", t)
        object.__setattr__(self, "simplices", face_closure(self.simplices))

    @property
    def n_vertices(self):
        return len(self.target_values)

    def diagram(self, W):
        """Lower-star diagram of ``W``; infinite bars capped at ``max(W)``."""
        return compute_persistence(lower_star_filtration(self.simplices, W)).capped()

    @cached_property
    def target_diagram(self):
        return self.diagram(self.target_values)

    @cached_property
    def B(self):
        return len(off_diagonal(self.target_diagram))


@dataclass(frozen=True)
class OptimizerConfig:
    lambda_topo: float = 1.0
    epsilon: float = 0.01
    eta: object = "auto"
    max_iters: int = 10000
    persloss_period: int = 200

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.lambda_topo < 0:
            raise ValueError("lambda_topo must be nonnegative")
        if self.eta != "auto" and not float(self.eta) > 0:
            raise ValueError("eta must be positive or 'auto'")
        if self.persloss_period < 1:
            raise ValueError("persloss_period must be >= 1")


@dataclass(frozen=True)
class TheoremConstants:
    l0: float
    l1: float
    l2: float
    B: int
    lambda_topo: float

    @property
    def C0(self):
        return self.l0 + self.lambda_topo * self.B

    @property
    def C1(self):
        return self.l1 + 2 * self.lambda_topo * self.B

    @property
    def C2(self):
        return self.l2 + 5 * self.lambda_topo * self.B

    def iteration_bound(self, epsilon):
        return math.ceil(2 * self.C0 / epsilon)


def estimate_constants(problem, lambda_topo=1.0):
    """Bounds for the quadratic supervision loss on [0, 1]^n plus B = |target diagram|."""
    n, w = problem.n_vertices, problem.supv_weight
    return TheoremConstants(l0=w * n, l1=2 * w * math.sqrt(n), l2=2 * w, B=problem.B,
                            lambda_topo=lambda_topo)


def step_size_bound(c, epsilon):
    """Largest step size allowed by the convergence theorem."""
    lam, B = c.lambda_topo, c.B
    smooth = 2 * c.l2 + 10 * lam * B
    if smooth <= 0:
        raise ValueError("step size is unbounded: no curvature from either loss term")
    if lam * B == 0:
        return 1.0 / smooth
    return min(1.0 / smooth, epsilon / (4096 * lam ** 2 * B ** 2))


@dataclass(frozen=True)
class Configuration:
    """Frozen matching: for each target point, the predicted point's critical vertices."""

    matching: object
    terms: tuple  # (gt birth, gt death, birth vertex, death vertex); vertices None on the diagonal

    def topo_loss(self, W):
        total = 0.0
        for b, d, vb, vd in self.terms:
            if vb is None:
                total += (d - b) ** 2 / 2.0
            else:
                total += (b - W[vb]) ** 2 + (d - W[vd]) ** 2
        return total

    def topo_grad(self, W):
        g = np.zeros_like(W)
        for b, d, vb, vd in self.terms:
            if vb is not None:
                g[vb] += 2.0 * (W[vb] - b)
                g[vd] += 2.0 * (W[vd] - d)
        return g


def configuration(problem, W):
    """Diagram of ``W`` and its optimal injective matching against the target diagram."""
    pred, gt = problem.diagram(W), problem.target_diagram
    matching = injective_matching_cost(pred, gt)
    terms = []
    for src, dst in matching.pairs:
        g = gt.pairs[src.index]
        if dst.is_diagonal:
            terms.append((g.birth, g.death, None, None))
        else:
            p = pred.pairs[dst.index]
            terms.append((g.birth, g.death, p.birth_vertex, p.death_vertex))
    return Configuration(matching, tuple(terms))


def supv_loss(problem, W):
    return float(problem.supv_weight * np.sum((W - problem.target_values) ** 2))


def supv_grad(problem, W):
    return 2.0 * problem.supv_weight * (W - problem.target_values)


def total_loss(problem, W, lambda_topo):
    """``(G, matching)`` with the configuration computed at ``W`` itself."""
    W = np.asarray(W, dtype=np.float64)
    conf = configuration(problem, W)
    return supv_loss(problem, W) + lambda_topo * conf.topo_loss(W), conf.matching


@dataclass(frozen=True)
class TraceRow:
    t: int
    G_t_Wt: float
    G_t_Wt1: float
    G_t1_Wt1: float
    step_norm: float
    L_supv: float  # at W_{t+1}
    L_topo_held: float  # configuration t, at W_{t+1}
    L_topo_refreshed: float  # configuration t + 1, at W_{t+1}
    L_topo_start: float  # configuration t, at W_t
    matching_cost: float

    @property
    def step_decrease(self):
        return self.G_t_Wt - self.G_t_Wt1

    @property
    def refresh_change(self):
        return self.G_t1_Wt1 - self.G_t_Wt1


CSV_COLUMNS = ("t", "G_t(W_t)", "G_t(W_t+1)", "G_t+1(W_t+1)", "step_norm", "L_supv",
               "L_topo_held", "L_topo_refreshed")


def fmt(x):
    """Fixed text form for floats in all written files: 17 significant digits."""
    return format(float(x), ".17g")


@dataclass
class LossTrace:
    eta: float
    lambda_topo: float
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.t] + [fmt(v) for v in (r.G_t_Wt, r.G_t_Wt1, r.G_t1_Wt1,
                                                       r.step_norm, r.L_supv, r.L_topo_held,
                                                       r.L_topo_refreshed)])
        return buf.getvalue()


@dataclass(frozen=True)
class OptimizeResult:
    W: np.ndarray
    trace: LossTrace
    stop_reason: str
    eta: float
    constants: TheoremConstants

    @property
    def stop_index(self):
        return self.trace.rows[-1].t if self.trace.rows else 0


def optimize(problem, cfg=None, W0=None):
    """Run the two-step descent until the per-step decrease drops below ``epsilon``.

    ``W0`` defaults to the target values. Each step is projected back onto
    [0, 1]^n. The configuration is refreshed every ``persloss_period`` steps.
    """
    cfg = cfg or OptimizerConfig()
    lam = cfg.lambda_topo
    consts = estimate_constants(problem, lam)
    eta = step_size_bound(consts, cfg.epsilon) if cfg.eta == "auto" else float(cfg.eta)
    W = np.clip(np.asarray(problem.target_values if W0 is None else W0, dtype=np.float64), 0, 1)
    trace = LossTrace(eta=eta, lambda_topo=lam)
    conf = configuration(problem, W)
    reason = "max_iters"
    for t in range(cfg.max_iters):
        topo_start = conf.topo_loss(W)
        G_cur = supv_loss(problem, W) + lam * topo_start
        grad = supv_grad(problem, W) + lam * conf.topo_grad(W)
        W_next = np.clip(W - eta * grad, 0.0, 1.0)
        supv_next = supv_loss(problem, W_next)
        held = conf.topo_loss(W_next)
        new_conf = configuration(problem, W_next) if (t + 1) % cfg.persloss_period == 0 else conf
        refreshed = new_conf.topo_loss(W_next)
        row = TraceRow(t, G_cur, supv_next + lam * held, supv_next + lam * refreshed,
                       float(np.linalg.norm(W_next - W)), supv_next, held, refreshed,
                       topo_start, new_conf.matching.cost)
        trace.rows.append(row)
        if not all(math.isfinite(v) for v in (row.G_t_Wt, row.G_t_Wt1, row.G_t1_Wt1)):
            raise NonFiniteLoss(f"non-finite loss at iteration {t}", trace)
        W, conf = W_next, new_conf
        if row.step_decrease < cfg.epsilon:
            reason = "converged"
            break
    return OptimizeResult(W, trace, reason, eta, consts)


def verify_lemma2(trace, eta=None, slack=1e-9):
    """Per iteration: ``|W_{t+1} - W_t| <= 2 sqrt(eta * (G_t(W_t) - G_t(W_{t+1})))``."""
    eta = trace.eta if eta is None else eta
    return [r.step_norm <= 2 * math.sqrt(eta * max(r.step_decrease, 0.0)) + slack
            for r in trace.rows]


def verify_lemma3(trace, constants, eta=None, slack=1e-9):
    """Per iteration: the refresh moves L_topo by at most ``16 B sqrt(eta * step decrease)``.

    Checked in both directions (a drop and a rise of L_topo at the refresh).
    """
    eta = trace.eta if eta is None else eta
    return [abs(r.L_topo_held - r.L_topo_refreshed)
            <= 16 * constants.B * math.sqrt(eta * max(r.step_decrease, 0.0)) + slack
            for r in trace.rows]


def verify_net_progress(trace, epsilon, slack=1e-12):
    """Every iteration before the last decreases G by at least ``epsilon / 2`` overall."""
    return [r.G_t_Wt - r.G_t1_Wt1 >= epsilon / 2 - slack for r in trace.rows[:-1]]


def verify_fluctuation_structure(trace, slack=1e-12):
    """Gradient steps never increase G; any increase comes from the configuration refresh."""
    return [r.G_t_Wt1 <= r.G_t_Wt + slack for r in trace.rows]
