import itertools

import numpy as np
import pytest

from flatdpp.diagnostics import (
    ConvergenceCurve,
    brute_force_distribution,
    conditional_density,
    convergence_curve,
    empirical_check,
    eps_ensemble_distribution,
    inclusion_probabilities,
    tv_distance,
)
from flatdpp.ensembles import make_nnp, size_distribution
from flatdpp.flatlimit import fixed_size_limit, scaled_ensemble
from flatdpp.geometry import PointSet, uniform_points
from flatdpp.kernels import builtin_kernel, kernel_matrix
from flatdpp.polybasis import vandermonde
from flatdpp.sampling import sample_projection

GAUSS = builtin_kernel("gaussian")
EXPO = builtin_kernel("exponential")


def random_nnp(n, p, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    V = rng.standard_normal((n, p)) if p else None
    return make_nnp(A @ A.T / n, V)


# ---------------------------------------------------------------------------
# enumeration oracles
# ---------------------------------------------------------------------------


def test_brute_force_identity_is_uniform():
    dist = brute_force_distribution(make_nnp(np.eye(2)))
    assert len(dist.probs) == 4
    for pr in dist.probs.values():
        assert pr == pytest.approx(0.25, rel=1e-12)


def test_brute_force_projection_pairs():
    ps = PointSet([0.0, 1.0, 2.0])
    V = vandermonde(ps, 1)
    dist = brute_force_distribution(make_nnp(np.zeros((3, 3)), V), 2)
    x = ps.coords[:, 0]
    weights = {X: (x[X[1]] - x[X[0]]) ** 2
               for X in itertools.combinations(range(3), 2)}
    Z = sum(weights.values())
    for X, w in weights.items():
        assert dist.prob(X) == pytest.approx(w / Z, rel=1e-12)


def test_brute_force_mass_sums_to_one():
    dist = brute_force_distribution(random_nnp(8, 2, seed=0))
    assert dist.total() == pytest.approx(1.0, abs=1e-10)


def test_brute_force_size_marginal_consistency():
    e = random_nnp(7, 1, seed=1)
    np.testing.assert_allclose(brute_force_distribution(e).size_marginal(),
                               size_distribution(e), atol=1e-10)


def test_enumeration_guards():
    with pytest.raises(ValueError, match="enumeration"):
        brute_force_distribution(make_nnp(np.eye(17)))


# ---------------------------------------------------------------------------
# pre-limit enumeration backends
# ---------------------------------------------------------------------------


def test_eps_backends_agree_at_moderate_eps():
    ps = uniform_points(6, 1, seed=2)
    a = eps_ensemble_distribution(ps, GAUSS, 0.6, m=3, precision="float")
    b = eps_ensemble_distribution(ps, GAUSS, 0.6, m=3, precision="mp")
    assert tv_distance(a, b) <= 1e-9


def test_eps_varying_matches_spectral_size_law():
    # independent route: eigenvalues of the scaled matrix drive the size law
    ps = uniform_points(5, 1, seed=3)
    eps, p, alpha = 0.7, 1, 1.4
    dist = eps_ensemble_distribution(ps, EXPO, eps, p=p, alpha=alpha)
    e = scaled_ensemble(ps, EXPO, eps, p=p, alpha=alpha)
    np.testing.assert_allclose(dist.size_marginal(), size_distribution(e),
                               atol=1e-9)


def test_eps_fixed_size_matches_plain_minor_ratio():
    ps = uniform_points(5, 1, seed=4)
    L = kernel_matrix(EXPO, ps, 0.9)
    dist = eps_ensemble_distribution(ps, EXPO, 0.9, m=2)
    dets = {X: np.linalg.det(L[np.ix_(X, X)])
            for X in itertools.combinations(range(5), 2)}
    Z = sum(dets.values())
    for X, v in dets.items():
        assert dist.prob(X) == pytest.approx(v / Z, rel=1e-10)


def test_deep_flat_regime_uses_mp_and_stays_normalized():
    ps = uniform_points(6, 1, seed=5)
    dist = eps_ensemble_distribution(ps, GAUSS, 1e-3, m=4)
    assert dist.total() == pytest.approx(1.0, abs=1e-10)
    assert min(dist.probs.values()) >= 0.0


# ---------------------------------------------------------------------------
# tv distance
# ---------------------------------------------------------------------------


def test_tv_identical_is_zero():
    d = brute_force_distribution(random_nnp(5, 1, seed=6))
    assert tv_distance(d, d) == 0.0


def test_tv_disjoint_point_masses_is_two():
    assert tv_distance([1.0, 0.0], [0.0, 1.0]) == 2.0


def test_tv_half_mass():
    assert tv_distance([0.5, 0.5], [1.0, 0.0]) == pytest.approx(1.0)


def test_tv_mismatched_spaces():
    with pytest.raises(ValueError):
        tv_distance([1.0], [0.5, 0.5])


# ---------------------------------------------------------------------------
# conditional densities
# ---------------------------------------------------------------------------


def test_conditional_smooth_limit_closed_form():
    Y = np.array([0.1, 0.3, 0.5, 0.9])
    grid = np.linspace(0, 1, 101)
    dens = conditional_density(GAUSS, Y, grid, eps=None)
    ref = np.array([np.prod((x - Y) ** 2) for x in grid])
    ref /= ref.sum()
    np.testing.assert_allclose(dens, ref, atol=1e-12)


def test_conditional_vanishes_on_conditioning_points():
    Y = np.array([0.1, 0.3, 0.5, 0.9])
    grid = np.array([0.3, 0.42])
    dens = conditional_density(GAUSS, Y, grid, eps=None)
    assert dens[0] == 0.0 and dens[1] == pytest.approx(1.0)


def test_conditional_rough_limit_is_adjacent_gap_product():
    Y = np.array([0.1, 0.3, 0.5, 0.9])
    grid = np.linspace(0.0, 1.0, 87)
    dens = conditional_density(EXPO, Y, grid, eps=None)
    ref = []
    for x in grid:
        if np.min(np.abs(x - Y)) < 1e-12:
            ref.append(0.0)
        else:
            ref.append(np.prod(np.diff(np.sort(np.append(Y, x)))))
    ref = np.array(ref)
    ref /= ref.sum()
    np.testing.assert_allclose(dens, ref, atol=1e-12)


def test_conditional_eps_tends_to_limit():
    Y = np.array([0.1, 0.3, 0.5, 0.9])
    grid = np.linspace(0, 1, 60)
    target = conditional_density(EXPO, Y, grid, eps=None)
    gaps = [tv_distance(conditional_density(EXPO, Y, grid, eps=e), target)
            for e in (4.0, 0.5, 0.01)]
    assert gaps[2] <= gaps[0]
    assert gaps[2] <= 5e-3


def test_conditional_shape_validation():
    with pytest.raises(ValueError, match="m - 1"):
        conditional_density(GAUSS, [0.1, 0.2], [0.5], eps=None, m=5)


# ---------------------------------------------------------------------------
# inclusion probabilities
# ---------------------------------------------------------------------------


def test_inclusion_projection_sums_to_rank():
    ps = uniform_points(6, 1, seed=7)
    e = make_nnp(np.zeros((6, 6)), vandermonde(ps, 2))
    incl = inclusion_probabilities(e, m=3)
    assert incl.sum() == pytest.approx(3.0, abs=1e-8)
    np.testing.assert_allclose(incl, np.diag(e.Q @ e.Q.T), atol=1e-8)


def test_inclusion_projective_direction_is_sure():
    e = make_nnp(np.zeros((4, 4)), np.eye(4)[:, :1])
    incl = inclusion_probabilities(e)
    assert incl[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(incl[1:], 0.0, atol=1e-12)


def test_inclusion_varying_matches_enumeration():
    e = random_nnp(6, 2, seed=8)
    np.testing.assert_allclose(inclusion_probabilities(e),
                               brute_force_distribution(e).inclusion_vector(),
                               atol=1e-8)


def test_inclusion_sweep_converges_for_rough_kernels():
    # 20 random unit-interval points, size 5, decreasing-smoothness catalog
    ps = uniform_points(20, 1, seed=7)
    for name in ("exponential", "(1+d)exp(-d)", "(3+3d+d^2)exp(-d)"):
        kern = builtin_kernel(name)
        target = inclusion_probabilities(fixed_size_limit(ps, kern, 5).process, 5)
        incl = eps_ensemble_distribution(ps, kern, 0.1, m=5).inclusion_vector()
        assert np.max(np.abs(incl - target)) <= 0.05


# ---------------------------------------------------------------------------
# convergence curves
# ---------------------------------------------------------------------------


def test_convergence_full_law_last_below_first():
    ps = uniform_points(6, 1, seed=9)
    curve = convergence_curve(ps, GAUSS, [2.0, 0.5, 0.05], "full-law", m=3)
    assert curve.epsilons == [2.0, 0.5, 0.05]
    assert curve.values[-1] <= curve.values[0]


def test_convergence_near_limit_surrogate():
    ps = uniform_points(5, 1, seed=10)
    curve = convergence_curve(ps, GAUSS, [1e-6], "full-law", m=3)
    assert curve.values[0] <= 1e-3


def test_convergence_size_law_mode():
    ps = uniform_points(5, 1, seed=11)
    curve = convergence_curve(ps, EXPO, [1.0, 0.1, 1e-3], "size-law", p=1)
    assert curve.values[-1] <= 0.05
    assert curve.values[-1] <= curve.values[0]


def test_convergence_conditional_mode():
    curve = convergence_curve(
        uniform_points(4, 1, seed=12), EXPO, [2.0, 0.05], "conditional",
        Y=np.array([0.2, 0.5, 0.8]), x_grid=np.linspace(0, 1, 40))
    assert curve.values[1] <= curve.values[0]


def test_convergence_inclusion_mode():
    ps = uniform_points(6, 1, seed=13)
    curve = convergence_curve(ps, EXPO, [2.0, 0.1], "inclusion", m=3)
    assert curve.values[1] <= curve.values[0]
    assert curve.mode == "inclusion"


def test_equal_smoothness_targets_coincide():
    ps = uniform_points(7, 1, seed=14)
    r2a = builtin_kernel("(1+d)exp(-d)")
    r2b = builtin_kernel("sin(d+pi/4)exp(-d)")
    ta = brute_force_distribution(fixed_size_limit(ps, r2a, 4).process, 4)
    tb = brute_force_distribution(fixed_size_limit(ps, r2b, 4).process, 4)
    assert tv_distance(ta, tb) <= 1e-8


def test_convergence_mode_validation():
    ps = uniform_points(4, 1, seed=15)
    with pytest.raises(ValueError):
        convergence_curve(ps, GAUSS, [1.0], "nonsense")
    with pytest.raises(ValueError):
        convergence_curve(ps, GAUSS, [1.0], "full-law")
    with pytest.raises(ValueError):
        ConvergenceCurve([1.0], [0.1, 0.2], "full-law")


# ---------------------------------------------------------------------------
# empirical checks
# ---------------------------------------------------------------------------


def test_empirical_check_deterministic_process():
    U = np.eye(3)[:, :1]
    e = make_nnp(np.zeros((3, 3)), U)
    exact = brute_force_distribution(e)
    tv, size_tv = empirical_check(lambda r: sample_projection(U, r), exact,
                                  500, seed=16)
    assert tv == 0.0 and size_tv == 0.0
