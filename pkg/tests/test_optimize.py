import numpy as np
import pytest

from fquant import (Codebook, OptimizerConfig, PathSample, ProcessSpec, assign,
                    distortion, distortion_differential, dual_pairing,
                    lloyd_run, lloyd_step, product_quantizer, quant_error,
                    sample_paths, sgd_run, splitting_init, uniform_space)
from fquant.errors import DivergenceError, OptimizeError
from fquant.optimize import default_config_for
from fquant.path_space import Path


def constant_sample(space, levels):
    return PathSample(values=np.stack(
        [np.full((space.d, space.m), lv) for lv in levels]), seed=0, process_tag="c")


def constant_codebook(space, levels):
    return Codebook(space=space, values=np.stack(
        [np.full((space.d, space.m), lv) for lv in levels]))


def test_lloyd_step_single_cell_mean(unit_space, bm_sample):
    cb = constant_codebook(unit_space, [0.0])
    stepped = lloyd_step(cb, bm_sample, r=2.0)
    np.testing.assert_allclose(stepped.values[0], bm_sample.values.mean(axis=0),
                               rtol=0, atol=1e-15)


def test_lloyd_step_fixed_point_unchanged(unit_space, bm_sample):
    cb = constant_codebook(unit_space, [0.0])
    fixed = lloyd_step(cb, bm_sample, r=2.0)
    again = lloyd_step(fixed, bm_sample, r=2.0)
    np.testing.assert_allclose(again.values, fixed.values, atol=1e-12)


def test_lloyd_two_point_sample_one_step(unit_space):
    sample = constant_sample(unit_space, [-1.0, 1.0])
    init = constant_codebook(unit_space, [-0.5, 0.5])
    stepped = lloyd_step(init, sample, r=2.0)
    np.testing.assert_array_equal(stepped.values, sample.values)


def test_lloyd_step_requires_p2_and_r2(bm_sample, unit_space):
    cb = constant_codebook(unit_space, [0.0])
    with pytest.raises(OptimizeError):
        lloyd_step(Codebook(space=unit_space.with_p(3.0), values=cb.values),
                   bm_sample, r=2.0)
    with pytest.raises(OptimizeError):
        lloyd_step(cb, bm_sample, r=1.5)


def test_lloyd_weighted_centroid_r4(unit_space):
    sample = constant_sample(unit_space, [0.0, 1.0])
    cb = constant_codebook(unit_space, [0.25])
    stepped = lloyd_step(cb, sample, r=4.0)
    # weights ||x - a||^2: 0.25^2 for x=0, 0.75^2 for x=1 (constant paths, unit mass)
    w0, w1 = 0.25 ** 2, 0.75 ** 2
    np.testing.assert_allclose(stepped.values[0], w1 / (w0 + w1), rtol=1e-12)


def test_lloyd_empty_cell_repair(unit_space, bm_sample):
    far = constant_codebook(unit_space, [-0.3, 0.3, 50.0])
    stepped = lloyd_step(far, bm_sample, r=2.0)
    masses = assign(stepped, bm_sample).cell_masses()
    assert np.all(masses > 0)


def test_lloyd_run_monotone_distortion(unit_space, bm_sample):
    cfg = OptimizerConfig(method="lloyd", max_iters=60, tol=1e-12)
    init = constant_codebook(unit_space, [-1.0, -0.3, 0.3, 1.0])
    cb, trace = lloyd_run(cfg, init, bm_sample, r=2.0)
    diffs = np.diff(trace.distortions)
    assert np.all(diffs <= 1e-12)
    assert trace.exit_reason in ("fixed_point", "tol")
    assert trace.exit_residual < 1e-10


def test_lloyd_run_monotone_r3(unit_space, bm_sample):
    cfg = OptimizerConfig(method="lloyd", max_iters=40, tol=1e-12)
    init = constant_codebook(unit_space, [-0.8, 0.0, 0.8])
    cb, trace = lloyd_run(cfg, init, bm_sample, r=3.0)
    assert np.all(np.diff(trace.distortions) <= 1e-10)


def test_lloyd_residual_shrinks_with_tol(unit_space, bm_sample):
    init = constant_codebook(unit_space, [-1.0, -0.3, 0.3, 1.0])
    residuals = []
    for tol in (1e-2, 1e-4, 1e-8):
        cfg = OptimizerConfig(method="lloyd", max_iters=100, tol=tol)
        _, trace = lloyd_run(cfg, init, bm_sample, r=2.0)
        residuals.append(trace.exit_residual)
    assert residuals[2] <= residuals[0] + 1e-15


def test_sgd_quadratic_update_direction(unit_space, bm_sample):
    # p = r = 2: the per-draw update direction is 2 (a - x)
    a = np.zeros((1, 1, unit_space.m))
    cb = Codebook(space=unit_space, values=a)
    diff = distortion_differential(cb, bm_sample, 2.0)
    manual = 2.0 * (a[0] - bm_sample.values).mean(axis=0)
    np.testing.assert_allclose(diff[0], manual, atol=1e-12)
    # the differential vanishes exactly at the sample mean
    at_mean = Codebook(space=unit_space,
                       values=bm_sample.values.mean(axis=0)[None])
    np.testing.assert_allclose(distortion_differential(at_mean, bm_sample, 2.0),
                               0.0, atol=1e-13)


def test_differential_matches_finite_differences(unit_space, rng):
    # Gateaux differential against central differences on a small empirical law
    space = unit_space.with_p(2.5)
    sample = sample_paths(ProcessSpec("brownian"), space, 50, seed=3)
    cb, _ = sgd_run(OptimizerConfig(method="sgd", max_iters=400, tol=1e-14, seed=5),
                    Codebook(space=space, values=sample.values[:3] * 0.8),
                    sample, r=2.5)
    diff = distortion_differential(cb, sample, 2.5)
    g = np.random.default_rng(11)
    for i in range(cb.n):
        h = g.normal(size=(1, space.m))
        direction = Path(values=h)
        pairing = dual_pairing(space, Path(values=diff[i]), direction)
        eps = 1e-6
        up, dn = cb.values.copy(), cb.values.copy()
        up[i] += eps * h
        dn[i] -= eps * h
        fd = (distortion(Codebook(space=space, values=up), sample, 2.5).value
              - distortion(Codebook(space=space, values=dn), sample, 2.5).value) / (2 * eps)
        assert fd == pytest.approx(pairing, rel=1e-4)


def test_sgd_scaled_problem_reproduces_iterates(unit_space, bm_sample):
    # doubling sample and init (p = r = 2) doubles every iterate exactly
    cfg = OptimizerConfig(method="sgd", max_iters=200, tol=1e-30, seed=9,
                          sgd_c0=0.05, sgd_decay=1e-3)
    init = Codebook(space=unit_space, values=bm_sample.values[:3].copy())
    out1, _ = sgd_run(cfg, init, bm_sample, r=2.0)
    doubled = PathSample(values=2.0 * bm_sample.values, seed=0, process_tag="x2")
    init2 = Codebook(space=unit_space, values=2.0 * bm_sample.values[:3])
    out2, _ = sgd_run(cfg, init2, doubled, r=2.0)
    np.testing.assert_array_equal(out2.values, 2.0 * out1.values)


def test_sgd_divergence_carries_trace(unit_space, bm_sample):
    cfg = OptimizerConfig(method="sgd", max_iters=500, tol=1e-30, seed=2,
                          sgd_c0=1e4, sgd_decay=0.0)
    init = Codebook(space=unit_space, values=bm_sample.values[:2].copy())
    with pytest.raises(DivergenceError) as err:
        sgd_run(cfg, init, bm_sample, r=2.0)
    assert err.value.trace is not None
    assert len(err.value.trace.distortions) >= 1


def test_sgd_requires_smooth_norm(unit_space, bm_sample):
    cfg = OptimizerConfig(method="sgd", max_iters=10)
    cb = Codebook(space=unit_space.with_p(1.0), values=bm_sample.values[:2].copy())
    with pytest.raises(OptimizeError):
        sgd_run(cfg, cb, bm_sample, r=2.0)


def test_sgd_r1_rejects_coincident_paths(unit_space, bm_sample):
    cfg = OptimizerConfig(method="sgd", max_iters=10)
    cb = Codebook(space=unit_space, values=bm_sample.values[:2].copy())
    with pytest.raises(OptimizeError):
        sgd_run(cfg, cb, bm_sample, r=1.0)


def test_splitting_init_size_one_is_mean(unit_space, bm_sample):
    cb = splitting_init(bm_sample, unit_space, 1, 2.0, seed=4)
    np.testing.assert_allclose(cb.values[0], bm_sample.values.mean(axis=0),
                               atol=1e-12)


def test_splitting_init_two_point_support(unit_space):
    sample = constant_sample(unit_space, [-1.0, 1.0])
    cb = splitting_init(sample, unit_space, 2, 2.0, seed=4)
    got = sorted(cb.values[:, 0, 0].tolist())
    assert got == [-1.0, 1.0]
    assert quant_error(cb, sample, 2.0) == 0.0


def test_splitting_init_strictly_decreasing(unit_space, bm_sample):
    stages = splitting_init(bm_sample, unit_space, 5, 2.0, seed=4, return_stages=True)
    errs = [quant_error(cb, bm_sample, 2.0) for cb in stages]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert [cb.n for cb in stages] == [1, 2, 3, 4, 5]
    # optimized codebooks keep n distinct atoms with every cell populated
    final = stages[-1]
    assert np.unique(final.values.reshape(final.n, -1), axis=0).shape[0] == final.n
    assert np.all(assign(final, bm_sample).cell_masses() > 0)


def test_product_quantizer_identity_and_sizes(unit_space, rng):
    cb1 = Codebook(space=unit_space, values=rng.normal(size=(2, 1, unit_space.m)))
    assert product_quantizer([cb1]) is cb1
    cb2 = Codebook(space=unit_space, values=rng.normal(size=(3, 1, unit_space.m)))
    prod = product_quantizer([cb1, cb2])
    assert prod.n == 6
    assert prod.space.d == 2
    # atom (i, j) stacks atom i of the first marginal over atom j of the second
    np.testing.assert_array_equal(prod.values[1 * 3 + 2, 0], cb1.values[1, 0])
    np.testing.assert_array_equal(prod.values[1 * 3 + 2, 1], cb2.values[2, 0])


def test_product_quantizer_cap_and_grid_checks(unit_space, rng):
    cb1 = Codebook(space=unit_space, values=rng.normal(size=(3, 1, unit_space.m)))
    with pytest.raises(OptimizeError):
        product_quantizer([cb1, cb1.with_values(cb1.values + 1.0)], cap=4)
    other = uniform_space(2.0, unit_space.m)
    cb_other = Codebook(space=other, values=rng.normal(size=(2, 1, other.m)))
    with pytest.raises(Exception):
        product_quantizer([cb1, cb_other])


def test_product_distortion_additivity():
    # p = 2, d = 2: product-codebook distortion equals the sum of marginal ones
    space = uniform_space(1.0, 65, d=2)
    sample = sample_paths(ProcessSpec("brownian"), space, 2000, seed=17)
    msp = space.marginal()
    marginals = []
    parts = []
    for j in range(2):
        sub = sample.coordinate(j)
        cb = splitting_init(sub, msp, 2, 2.0, seed=20 + j)
        marginals.append(cb)
        parts.append(distortion(cb, sub, 2.0).value)
    prod = product_quantizer(marginals)
    total = distortion(prod, sample, 2.0).value
    assert total == pytest.approx(sum(parts), rel=1e-12)


def test_default_config_dispatch(unit_space):
    assert default_config_for(unit_space, 2.0).method == "lloyd"
    assert default_config_for(unit_space.with_p(2.5), 2.5).method == "sgd"
    assert default_config_for(unit_space, 1.5).method == "sgd"
