import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coordbeam.scenario import (BeliefSet, DegenerateGeometry, ErrorModel, PositionMatrix,
                                ScenarioConfig, angles_from_positions, build_beliefs,
                                path_cosines, sample_posterior, sample_posterior_batch,
                                sample_position_error, sample_prior, sample_prior_batch,
                                sample_scenario)


def small_config(**kw):
    base = dict(n_ue=8, n_bs=8, m_ue=8, m_bs=8)
    base.update(kw)
    return ScenarioConfig(**base)


def disk_mean_radius_oracle(radius, n, seed=99):
    """Mean distance from the center for uniform points in a disk, by
    rejection from the bounding square (no radial transform involved)."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-radius, radius, size=(int(n * 1.4), 2))
    d = np.hypot(pts[:, 0], pts[:, 1])
    return d[d <= radius][:n].mean()


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(path_power_profile=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError):
        ScenarioConfig(num_paths=2)
    with pytest.raises(ValueError):
        ScenarioConfig(cluster_radius=-1.0)
    with pytest.raises(ValueError):
        ScenarioConfig(n_bs=0)


def test_position_matrix_layout():
    p = PositionMatrix.from_points((0, 0), [(1, 2), (3, 4)], (5, 6))
    assert p.columns.shape == (2, 4)
    np.testing.assert_array_equal(p.reflectors, [[1, 2], [3, 4]])
    np.testing.assert_array_equal(p.ue, [5, 6])
    with pytest.raises(ValueError):
        PositionMatrix(np.array([[0.0, np.nan], [1.0, 1.0]]))


def test_zero_cluster_radius_puts_ues_at_center(rng):
    cfg = small_config(cluster_radius=0.0)
    truth = sample_scenario(cfg, rng)
    for p in truth:
        np.testing.assert_array_equal(p.ue, cfg.cluster_center)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r_cl=st.floats(0.0, 50.0))
def test_ues_stay_inside_cluster(seed, r_cl):
    cfg = small_config(cluster_radius=r_cl, num_ues=4)
    truth = sample_scenario(cfg, np.random.default_rng(seed))
    for p in truth:
        assert np.hypot(*(p.ue - cfg.cluster_center)) <= r_cl * (1 + 1e-12) + 1e-9


def test_mean_ue_distance_matches_disk_moment():
    cfg = small_config(cluster_radius=7.0, num_ues=1)
    draws = sample_prior_batch(cfg, np.random.default_rng(1), 100_000)
    d = np.hypot(*(draws[:, 0, -1, :] - cfg.cluster_center).T).mean()
    assert d == pytest.approx(2 * 7.0 / 3, rel=0.01)
    assert d == pytest.approx(disk_mean_radius_oracle(7.0, 100_000), rel=0.01)


def test_reflectors_and_bs_shared(rng):
    cfg = small_config(num_ues=3)
    truth = sample_scenario(cfg, rng)
    for p in truth[1:]:
        assert np.array_equal(p.reflectors, truth[0].reflectors)
        assert np.array_equal(p.bs, truth[0].bs)
    x0, x1, y0, y1 = cfg.reflector_region
    r = truth[0].reflectors
    assert np.all((r[:, 0] >= x0) & (r[:, 0] <= x1) & (r[:, 1] >= y0) & (r[:, 1] <= y1))


def test_sampling_is_deterministic():
    cfg = small_config()
    a = sample_scenario(cfg, np.random.default_rng(5))
    b = sample_scenario(cfg, np.random.default_rng(5))
    for pa, pb in zip(a, b):
        assert np.array_equal(pa.nodes, pb.nodes)
    em = ErrorModel.per_observer([1.0, 2.0], cfg.num_paths)
    ba = build_beliefs(a, em, np.random.default_rng(6))
    bb = build_beliefs(b, em, np.random.default_rng(6))
    for x, y in zip(ba, bb):
        assert np.array_equal(x.estimates, y.estimates)


def test_angles_collinear_los():
    p = PositionMatrix.from_points((0, 0), np.empty((0, 2)), (100, 0))
    aods, aoas = angles_from_positions(p)
    assert aoas[0] == pytest.approx(0.0)
    assert aods[0] == pytest.approx(np.pi)


def test_angle_of_reflected_path():
    p = PositionMatrix.from_points((0, 0), [(50, 50)], (100, 0))
    aods, aoas = angles_from_positions(p)
    assert aoas[1] == pytest.approx(np.pi / 4)
    assert aods[1] == pytest.approx(3 * np.pi / 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=8, max_size=8))
def test_swapping_endpoints_exchanges_aoa_and_aod(coords):
    pts = np.array(coords).reshape(4, 2)
    if min(np.hypot(*(pts[i] - pts[j])) for i in range(4) for j in range(i)) < 1e-3:
        return
    p = PositionMatrix(pts)
    swapped = PositionMatrix(pts[[3, 1, 2, 0]])
    aods, aoas = angles_from_positions(p)
    aods_s, aoas_s = angles_from_positions(swapped)
    wrap = lambda a, b: np.angle(np.exp(1j * (a - b)))
    np.testing.assert_allclose(wrap(aods_s, aoas), 0, atol=1e-9)
    np.testing.assert_allclose(wrap(aoas_s, aods), 0, atol=1e-9)
    # independent oracle straight from atan2
    bs, ue = pts[0], pts[3]
    for l, target in enumerate([None, pts[1], pts[2]]):
        dep = (bs if target is None else target) - ue
        arr = (ue if target is None else target) - bs
        assert wrap(aods[l], np.arctan2(dep[1], dep[0])) == pytest.approx(0, abs=1e-9)
        assert wrap(aoas[l], np.arctan2(arr[1], arr[0])) == pytest.approx(0, abs=1e-9)
    assert np.all((aods >= 0) & (aods < 2 * np.pi))


def test_path_cosines_agree_with_angles(rng):
    truth = sample_scenario(small_config(), rng)
    for p in truth:
        aods, aoas = angles_from_positions(p)
        ca, cb = path_cosines(p.nodes)
        np.testing.assert_allclose(ca, np.cos(aods), atol=1e-14)
        np.testing.assert_allclose(cb, np.cos(aoas), atol=1e-14)


def test_degenerate_geometry_raises():
    p = PositionMatrix.from_points((0, 0), [(10, 10)], (10, 10))
    with pytest.raises(DegenerateGeometry):
        angles_from_positions(p)
    with pytest.raises(DegenerateGeometry):
        path_cosines(p.nodes)


def test_position_error_support_and_moment():
    rng = np.random.default_rng(3)
    np.testing.assert_array_equal(sample_position_error(0.0, rng), [0.0, 0.0])
    e = np.array([sample_position_error(5.0, rng) for _ in range(2000)])
    assert np.all(np.hypot(e[:, 0], e[:, 1]) <= 5.0)
    # moment check on the batch form of the same sampler
    from coordbeam.scenario import uniform_disk
    big = uniform_disk(np.random.default_rng(4), 5.0, 100_000)
    m = np.hypot(big[:, 0], big[:, 1]).mean()
    assert m == pytest.approx(10 / 3, rel=0.01)
    assert m == pytest.approx(disk_mean_radius_oracle(5.0, 100_000), rel=0.01)
    with pytest.raises(ValueError):
        sample_position_error(-1.0, rng)


def test_beliefs_with_zero_radii_equal_truth(rng):
    cfg = small_config(num_ues=3)
    truth = sample_scenario(cfg, rng)
    beliefs = build_beliefs(truth, ErrorModel.perfect(3, cfg.num_paths), rng)
    stacked = np.stack([p.nodes for p in truth])
    for u, b in enumerate(beliefs):
        assert b.observer == u
        assert np.array_equal(b.estimates, stacked)


def test_belief_errors_respect_radii(rng):
    cfg = small_config(num_ues=3)
    truth = sample_scenario(cfg, rng)
    radii = rng.uniform(0, 10, size=(3, 3, cfg.num_paths + 1))
    beliefs = build_beliefs(truth, ErrorModel(radii), rng)
    stacked = np.stack([p.nodes for p in truth])
    for u, b in enumerate(beliefs):
        err = np.hypot(*(b.estimates - stacked).transpose(2, 0, 1))
        assert np.all(err <= radii[u] * (1 + 1e-12) + 1e-9)


def test_belief_ue_displacement_moment():
    cfg = small_config(num_ues=1, num_paths=1, path_power_profile=(1.0,))
    truth = sample_scenario(cfg, np.random.default_rng(0))
    radii = np.zeros((1, 1, 2))
    radii[0, 0, 1] = 4.0
    em = ErrorModel(radii)
    rng = np.random.default_rng(8)
    d = np.array([build_beliefs(truth, em, rng)[0].estimates[0, 1] for _ in range(100_000)])
    mean = np.hypot(*(d - truth[0].ue).T).mean()
    assert mean == pytest.approx(2 * 4.0 / 3, rel=0.01)


def test_error_model_per_observer():
    em = ErrorModel.per_observer([0.0, 5.0], num_paths=3)
    assert em.radii.shape == (2, 2, 4)
    assert np.all(em.radii[1, :, 1:] == 5.0)
    assert np.all(em.radii[:, :, 0] == 0.0)
    em = ErrorModel.per_observer([0.0, 5.0], num_paths=3, bs_known=False)
    assert np.all(em.radii[1] == 5.0)
    with pytest.raises(ValueError):
        ErrorModel(-np.ones((1, 1, 2)))


def test_prior_matches_scenario_statistics():
    cfg = small_config(cluster_radius=10.0, num_ues=1)
    rng = np.random.default_rng(11)
    a = np.array([sample_scenario(cfg, rng)[0].ue for _ in range(20_000)])
    b = np.array([sample_prior(cfg, rng)[0].ue for _ in range(20_000)])
    da = np.hypot(*(a - cfg.cluster_center).T)
    db = np.hypot(*(b - cfg.cluster_center).T)
    se = np.sqrt(da.var() / da.size + db.var() / db.size)
    assert abs(da.mean() - db.mean()) < 4 * se


def test_prior_degenerate_cluster_and_shared_reflectors(rng):
    cfg = small_config(cluster_radius=0.0, num_ues=3)
    draws = sample_prior_batch(cfg, rng, 50)
    assert np.all(draws[:, :, -1, :] == np.asarray(cfg.cluster_center))
    assert np.all(draws[:, 1:, 1:-1, :] == draws[:, :1, 1:-1, :])


def test_posterior_with_zero_radii_is_the_estimate(rng):
    cfg = small_config(num_ues=2)
    truth = sample_scenario(cfg, rng)
    belief = build_beliefs(truth, ErrorModel.perfect(2, cfg.num_paths), rng)[1]
    post = sample_posterior(belief, cfg, rng)
    for w, p in enumerate(post):
        assert np.array_equal(p.nodes, belief.estimates[w])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.5, 30.0))
def test_posterior_lies_in_likelihood_and_prior_support(seed, r):
    cfg = small_config(num_ues=2)
    rng = np.random.default_rng(seed)
    truth = sample_scenario(cfg, rng)
    belief = build_beliefs(truth, ErrorModel.per_observer([r, r], cfg.num_paths), rng)[0]
    draws = sample_posterior_batch(belief, cfg, rng, 64)
    est = belief.estimates
    center = np.asarray(cfg.cluster_center)
    for w in range(2):
        ue = draws[:, w, -1, :]
        assert np.all(np.hypot(*(ue - est[w, -1]).T) <= r * (1 + 1e-9))
        assert np.all(np.hypot(*(ue - center).T) <= cfg.cluster_radius * (1 + 1e-9))
        # shared reflectors: inside every subject's disk and inside the region
        refl = draws[:, w, 1:-1, :]
        for v in range(2):
            d = np.hypot(*(refl - est[v, 1:-1]).transpose(2, 0, 1))
            assert np.all(d <= r * (1 + 1e-9))
        x0, x1, y0, y1 = cfg.reflector_region
        assert np.all((refl[..., 0] >= x0) & (refl[..., 0] <= x1))
        assert np.all((refl[..., 1] >= y0) & (refl[..., 1] <= y1))
    assert np.array_equal(draws[:, 0, 1:-1], draws[:, 1, 1:-1])


def test_posterior_wide_error_approaches_prior_disk():
    cfg = small_config(num_ues=1, num_paths=1, path_power_profile=(1.0,), cluster_radius=7.0)
    est = np.array([[cfg.bs_position, np.add(cfg.cluster_center, (3.0, -2.0))]])
    radii = np.array([[0.0, 500.0]])
    belief = BeliefSet(0, est, radii)
    draws = sample_posterior_batch(belief, cfg, np.random.default_rng(2), 40_000)
    rho = np.hypot(*(draws[:, 0, -1, :] - cfg.cluster_center).T) / cfg.cluster_radius
    # uniform disk: P(rho <= x) = x^2
    edges = np.linspace(0, 1, 6)
    counts, _ = np.histogram(rho, bins=edges)
    expected = np.diff(edges ** 2) * rho.size
    chi2 = np.sum((counts - expected) ** 2 / expected)
    assert chi2 < 20.5  # chi-square(4) at p = 0.9996
    angle = np.arctan2(*(draws[:, 0, -1, ::-1] - cfg.cluster_center[::-1]).T)
    counts, _ = np.histogram(angle, bins=8, range=(-np.pi, np.pi))
    assert np.sum((counts - rho.size / 8) ** 2 / (rho.size / 8)) < 26.0


def test_posterior_falls_back_to_nearest_support_point():
    cfg = small_config(num_ues=1, num_paths=1, path_power_profile=(1.0,), cluster_radius=5.0)
    center = np.asarray(cfg.cluster_center)
    far = center + np.array([20.0, 0.0])
    belief = BeliefSet(0, np.array([[cfg.bs_position, far]]), np.array([[0.0, 1.0]]))
    draws = sample_posterior_batch(belief, cfg, np.random.default_rng(0), 3)
    np.testing.assert_allclose(draws[:, 0, -1, :], np.tile(center + [5.0, 0.0], (3, 1)))


def test_posterior_collapses_to_center_for_point_cluster(rng):
    cfg = small_config(num_ues=1, num_paths=1, path_power_profile=(1.0,), cluster_radius=0.0)
    belief = BeliefSet(0, np.array([[cfg.bs_position, (1.0, 99.0)]]), np.array([[0.0, 3.0]]))
    draws = sample_posterior_batch(belief, cfg, rng, 4)
    assert np.all(draws[:, 0, -1] == np.asarray(cfg.cluster_center))


def test_belief_set_validation():
    with pytest.raises(ValueError):
        BeliefSet(2, np.zeros((2, 3, 2)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        BeliefSet(0, np.zeros((2, 3, 2)), np.zeros((2, 2)))


def test_config_is_hashable_and_replaceable():
    cfg = small_config()
    cfg2 = dataclasses.replace(cfg, cluster_radius=1.0)
    assert cfg2.cluster_radius == 1.0 and cfg.cluster_radius == 7.0
