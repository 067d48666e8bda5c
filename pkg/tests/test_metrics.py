import math

import numpy as np
import pytest
from hypothesis import given

from strategies import diagrams, random_diagram, regular_tetrahedron, square
from topokit.exceptions import DiagramTooLarge, UncappedInfiniteBar
from topokit.metrics import (DIAGONAL, bottleneck, brute_force_diagram_distance,
                             brute_force_injective_cost, injective_matching_cost, off_diagonal,
                             topo_diff, total_persistence, wasserstein)
from topokit.persistence import alpha_persistence, diagram_from_triples


def D(*pairs, dim=0):
    return diagram_from_triples([(dim, b, d) for b, d in pairs])


def test_wasserstein_examples():
    assert wasserstein(D((0, 1)), D((0, 1))) == 0
    assert wasserstein(D((0, 1)), D((0, 2))) == pytest.approx(1.0, abs=1e-15)
    assert wasserstein(D((0, 1)), D()) == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_bottleneck_examples():
    assert bottleneck(D((0, 2)), D((0, 2))) == 0
    assert bottleneck(D((0, 2)), D((0, 2.5))) == 0.5
    assert bottleneck(D((0, 2)), D()) == 1.0


def test_infinite_bars_must_be_capped():
    with pytest.raises(UncappedInfiniteBar):
        wasserstein(D((0, math.inf)), D((0, 1)))
    with pytest.raises(UncappedInfiniteBar):
        bottleneck(D((0, math.inf)), D((0, 1)))


def test_q_infinity_is_bottleneck():
    A, B = D((0, 2), (1, 3)), D((0, 2.5))
    assert wasserstein(A, B, q=math.inf) == bottleneck(A, B)


def test_dimensions_are_not_mixed():
    A = diagram_from_triples([(0, 0, 1)])
    B = diagram_from_triples([(1, 0, 1)])
    assert wasserstein(A, B) == pytest.approx(1.0)  # both points go to the diagonal


def test_brute_force_examples():
    assert brute_force_diagram_distance(D((0, 1)), D((0, 1))) == 0
    # the lone (2, 3) goes to the diagonal: 2 * 0.5^2
    assert brute_force_diagram_distance(D((0, 1), (2, 3)), D((0, 1))) == pytest.approx(
        math.sqrt(0.5))


def test_brute_force_size_limit():
    big = D(*[(0, i + 1) for i in range(7)])
    with pytest.raises(DiagramTooLarge):
        brute_force_diagram_distance(big, D())


@pytest.mark.parametrize("seed", range(60))
def test_oracle_agreement(seed):
    rng = np.random.default_rng(seed)
    A, B = random_diagram(rng), random_diagram(rng)
    assert abs(wasserstein(A, B) - brute_force_diagram_distance(A, B)) < 1e-9
    assert abs(bottleneck(A, B) - brute_force_diagram_distance(A, B, math.inf)) < 1e-9
    assert abs(wasserstein(A, B, q=1) - brute_force_diagram_distance(A, B, 1)) < 1e-9


@given(diagrams(), diagrams(), diagrams())
def test_metric_axioms(A, B, C):
    for dist in (wasserstein, bottleneck):
        assert dist(A, A) == 0
        assert abs(dist(A, B) - dist(B, A)) <= 1e-12
        assert dist(A, C) <= dist(A, B) + dist(B, C) + 1e-9


def test_topo_diff_identity():
    X = np.random.default_rng(0).random((10, 3))
    assert topo_diff(X, X) == 0


def test_topo_diff_square_plus_center_matches_oracle():
    X = square()
    Xh = np.vstack([X, [0.5, 0.5]])
    dA, dB = alpha_persistence(X), alpha_persistence(Xh)
    cap = max(dA.max_value, dB.max_value)
    dA, dB = dA.capped(cap), dB.capped(cap)
    expected = sum(brute_force_diagram_distance(dA, dB, 2, dims=[d]) for d in (0, 1))
    assert topo_diff(X, Xh) == pytest.approx(expected, abs=1e-12)
    assert topo_diff(X, Xh) > 0


def test_topo_diff_tetrahedron_centroid_below_default_tau():
    X = regular_tetrahedron()
    assert 0 < topo_diff(X, np.vstack([X, X.mean(axis=0)])) < 0.5


def test_total_persistence_examples():
    assert total_persistence(D()) == 0
    assert total_persistence(D((0, 1), (0, 2)), 2) == 5


@given(diagrams())
def test_total_persistence_cauchy_schwarz(A):
    assert total_persistence(A, 2) <= total_persistence(A, 1) ** 2 + 1e-9


@given(diagrams())
def test_total_persistence_is_all_diagonal_cost(A):
    # with q = 2 a point's diagonal cost is 2 (pers / 2)^2 = pers^2 / 2
    assert wasserstein(A, D()) ** 2 == pytest.approx(total_persistence(A, 2) / 2, abs=1e-9)


def test_injective_identity():
    A = D((0, 1), (0.5, 2))
    m = injective_matching_cost(A, A)
    assert m.cost == 0
    assert [(s.index, t.index) for s, t in m.pairs] == [(0, 0), (1, 1)]


def test_injective_example():
    m = injective_matching_cost(D((0, 1), (0, 1.5)), D((0, 2)))
    assert m.cost == pytest.approx(0.25)
    assert m.target_of(0).index == 1


def test_injective_empty_pred_goes_to_diagonal():
    m = injective_matching_cost(D(), D((0, 2)))
    assert m.cost == 2.0 and m.target_of(0) == DIAGONAL


def test_injective_ignores_zero_persistence_gt_points():
    m = injective_matching_cost(D(), D((1, 1), (0, 2)))
    assert len(m.pairs) == 1 and off_diagonal(D((1, 1), (0, 2))) == [1]


@pytest.mark.parametrize("seed", range(40))
def test_injective_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    gt = random_diagram(rng, max_points=3)
    pred = random_diagram(rng, max_points=5)
    m = injective_matching_cost(pred, gt)
    assert abs(m.cost - brute_force_injective_cost(pred, gt)) < 1e-9
    targets = [t.index for _, t in m.pairs if not t.is_diagonal]
    assert len(targets) == len(set(targets))


@pytest.mark.parametrize("seed", range(20))
def test_injective_cost_ordering_sanity(seed):
    rng = np.random.default_rng(seed)
    gt, pred = random_diagram(rng), random_diagram(rng)
    m = injective_matching_cost(pred, gt)
    used = {t.index for _, t in m.pairs if not t.is_diagonal}
    unmatched = diagram_from_triples([(p.dim, p.birth, p.death)
                                      for i, p in enumerate(pred.pairs) if i not in used])
    assert m.cost <= wasserstein(pred, gt) ** 2 + total_persistence(unmatched, 2) + 1e-9


def test_arrays_accepted_as_diagrams():
    assert wasserstein(np.array([[0, 1]]), np.array([[0, 2]])) == pytest.approx(1.0)
