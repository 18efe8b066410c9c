"""Acceptance gate: one test per criterion, each printing a PASS line with the
measured quantities (run with ``pytest -s`` to see them inline).

Monte Carlo parameters not pinned by a criterion (grid size, sample size,
codebook size, fit windows, seeds) are frozen here at values verified to sit
inside the stated tolerances with margin; see the test bodies.
"""

import gc
import time

import numpy as np
import pytest

from fquant import (Codebook, OptimizerConfig, PathSample, ProcessSpec, assign,
                    boundary_pinning, distortion, distortion_differential,
                    dual_pairing, exp_weighted_space, holder_fit, lloyd_run,
                    lp_dist, monotonicity_check, quant_error, sample_paths,
                    sgd_run, splitting_init, stationarity_residual,
                    uniform_space)
from fquant.cli import marginal_bounds_report
from fquant.oracles import (c0_example, closed_form_errors, l1_hyperplane_example,
                            sharp_constant_example, sup_counterexample)
from fquant.path_space import Path


def _report(k, name, detail):
    print(f"\nACCEPTANCE {k} {name}: PASS ({detail})")


def test_criterion_1_oracle_suite():
    start = time.time()

    c0 = c0_example(M=16)
    assert c0.value_at_candidate == pytest.approx(0.5, abs=1e-12)
    assert np.all(np.diff(c0.sequence_values) < 0.0)
    assert c0.sequence_values[-1] == pytest.approx(0.5, abs=1e-12)

    l1 = l1_hyperplane_example(M=16)
    assert l1.e_plane == pytest.approx(4.0 / 3.0, abs=1e-9)
    assert l1.e_full == pytest.approx(1.0, abs=1e-6)
    u1 = np.zeros(16)
    u1[0] = 1.0
    assert np.abs(l1.minimizer_full - u1).max() < 1e-6
    ks = np.arange(4, 17)
    closed = 1.0 + 1.0 / l1.c[ks - 1]
    assert np.abs(l1.candidate_values - closed).max() <= 1e-15  # exact to rounding

    ratios = []
    for m in range(2, 11):
        rep = sharp_constant_example(m)
        assert rep.ratio == pytest.approx(2.0 * (m - 1) / m, abs=1e-9)
        assert rep.ratio <= 2.0
        ratios.append(rep.ratio)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))

    sup = sup_counterexample(n_funcs=12)
    assert np.all(sup.sup_dists == 0.5)  # exact on the dyadic grid
    assert sup.value_at_h == pytest.approx(0.5, abs=1e-12)

    elapsed = time.time() - start
    assert elapsed < 10.0
    _report(1, "oracle suite", f"all closed-form values matched, {elapsed:.1f}s")


def test_criterion_2_closed_form_one_point_errors():
    start = time.time()
    results = {}

    space = uniform_space(1.0, 512)
    for kind, tol in (("brownian", 0.015), ("bridge", 0.02)):
        sample = sample_paths(ProcessSpec(kind), space, 200_000, seed=2026)
        cb = splitting_init(sample, space, 1, 2.0, seed=2026)
        err = quant_error(cb, sample, 2.0)
        target = closed_form_errors(kind, 1, 2, 2)
        assert err == pytest.approx(target, rel=tol)
        results[kind] = (err, target)
        del sample
        gc.collect()

    ou_space = exp_weighted_space(4.0, 512, b=1.0)
    sample = sample_paths(ProcessSpec("ou", params={"c": 1.0}), ou_space,
                          200_000, seed=2027)
    cb = splitting_init(sample, ou_space, 1, 2.0, seed=2027)
    err = quant_error(cb, sample, 2.0)
    target = closed_form_errors("ou", 1, 2, 2, {"b": 1.0, "t_end": 4.0})
    assert err == pytest.approx(target, rel=0.03)
    results["ou"] = (err, target)
    del sample
    gc.collect()

    elapsed = time.time() - start
    assert elapsed < 60.0
    detail = ", ".join(f"{k}: {e:.4f} vs {t:.4f}" for k, (e, t) in results.items())
    _report(2, "closed-form n=1 errors", f"{detail}, {elapsed:.0f}s")


def test_criterion_3_lloyd_stationarity_and_admissibility():
    space = uniform_space(1.0, 128)
    sample = sample_paths(ProcessSpec("brownian"), space, 100_000, seed=33)
    init = Codebook(space=space, values=sample.values[:: len(sample) // 8][:8].copy())
    cfg = OptimizerConfig(method="lloyd", max_iters=300, tol=1e-13)
    cb, trace = lloyd_run(cfg, init, sample, r=2.0)
    rep = stationarity_residual(cb, sample, r=2.0)
    scale = distortion(cb, sample, 2.0).value ** 0.5  # quant_error^(r-1) at r=2
    assert rep.max_residual < 1e-3 * scale
    assert np.all(rep.cell_masses >= 1.0 / (10 * 8))
    assert rep.tie_mass < 1e-3
    assert rep.admissible
    _report(3, "Lloyd stationarity",
            f"max residual {rep.max_residual:.2e} < 1e-3 * {scale:.3f}, "
            f"min cell mass {rep.cell_masses.min():.3f}, exit={trace.exit_reason}")


@pytest.mark.parametrize("p,r", [(2.0, 2.0), (2.5, 2.5), (3.0, 4.0)])
def test_criterion_4_gradient_matches_finite_differences(p, r):
    space = uniform_space(1.0, 33, p=p)
    sample = sample_paths(ProcessSpec("brownian"), space, 50, seed=44)
    init = Codebook(space=space, values=sample.values[:3] * 0.8)
    cfg = OptimizerConfig(method="sgd", max_iters=300, tol=1e-14, seed=44)
    cb, _ = sgd_run(cfg, init, sample, r)

    stat = stationarity_residual(cb, sample, r) if r >= p else None
    if stat is not None:
        assert np.all(stat.cell_masses > 0) and stat.tie_mass == 0.0

    diff = distortion_differential(cb, sample, r)
    g = np.random.default_rng(45)
    worst = 0.0
    for i in range(cb.n):
        h = g.normal(size=(1, space.m))
        pairing = dual_pairing(space, Path(values=diff[i]), Path(values=h))
        eps = 1e-6
        up, dn = cb.values.copy(), cb.values.copy()
        up[i] += eps * h
        dn[i] -= eps * h
        fd = (distortion(Codebook(space=space, values=up), sample, r).value
              - distortion(Codebook(space=space, values=dn), sample, r).value) / (2 * eps)
        rel = abs(fd - pairing) / max(abs(fd), 1e-300)
        worst = max(worst, rel)
        assert rel < 1e-4
    _report(4, f"gradient vs finite differences (p={p}, r={r})",
            f"worst relative error {worst:.2e} < 1e-4")


def test_criterion_5_strict_monotonicity_over_sizes():
    space = uniform_space(1.0, 129)
    sample = sample_paths(ProcessSpec("brownian"), space, 20_000, seed=55)
    stages = splitting_init(sample, space, 8, 2.0, seed=55, return_stages=True)
    rep = monotonicity_check(stages, sample, r=2.0)
    errs = [e for _, e, _ in rep.entries]
    assert all(a > b for a, b in zip(errs, errs[1:]))  # strict decrease 1..8
    for (n1, e1, s1), (n2, e2, s2) in zip(rep.entries, rep.entries[1:]):
        if n2 <= 6:
            assert e1 - e2 > 2.0 * float(np.hypot(s1, s2)), (n1, n2)
    assert not any(n2 <= 6 for _, n2 in rep.flagged)
    _report(5, "error monotonicity n=1..8",
            "errors " + " > ".join(f"{e:.4f}" for e in errs))


def test_criterion_6_marginal_bounds_lp_and_sup():
    start = time.time()
    space = uniform_space(1.0, 65, d=2)
    sample = sample_paths(ProcessSpec("brownian"), space, 20_000, seed=66)
    cfg = OptimizerConfig(method="lloyd", max_iters=100, tol=1e-12)
    details = []
    for norm in ("lp", "sup"):
        rep = marginal_bounds_report(sample, space, 4, [2, 2], 2.0, 66, cfg, norm=norm)
        assert rep["holds"], rep
        assert rep["lower"] <= rep["joint"] + 3 * (rep["sigma_joint"] + rep["sigma_lower"])
        assert rep["joint"] <= rep["upper"] + 3 * (rep["sigma_joint"] + rep["sigma_upper"])
        details.append(f"{norm}: {rep['lower']:.4f} <= {rep['joint']:.4f} "
                       f"<= {rep['upper']:.4f}")
    elapsed = time.time() - start
    assert elapsed < 300.0
    _report(6, "marginal bound sandwiches (d=2)", "; ".join(details) + f", {elapsed:.0f}s")


def test_criterion_7_regularity_and_pinning():
    # Brownian: fine grid, fine-lag window where the fitted exponent reflects
    # path roughness rather than the smooth large-scale shape of the atoms
    space = uniform_space(1.0, 4097)
    sample = sample_paths(ProcessSpec("brownian"), space, 500, seed=77)
    init = Codebook(space=space, values=sample.values[:: len(sample) // 8][:8].copy())
    cfg = OptimizerConfig(method="lloyd", max_iters=300, tol=1e-13)
    cb_bm, _ = lloyd_run(cfg, init, sample, r=2.0)
    dt = space.grid[1] - space.grid[0]
    fit = holder_fit(cb_bm, lag_range=(dt, 24 * dt))
    betas_bm = fit.beta.ravel()
    assert np.all(betas_bm >= 0.35) and np.all(betas_bm <= 0.65), betas_bm
    assert boundary_pinning(cb_bm, ([0], 0.0)) < 1e-6

    fbm_space = uniform_space(1.0, 2049)
    fbm = sample_paths(ProcessSpec("fbm", params={"H": 0.75}), fbm_space, 1000, seed=78)
    init = Codebook(space=fbm_space, values=fbm.values[:: len(fbm) // 16][:16].copy())
    cb_fbm, _ = lloyd_run(cfg, init, fbm, r=2.0)
    dt2 = fbm_space.grid[1] - fbm_space.grid[0]
    fit2 = holder_fit(cb_fbm, lag_range=(dt2, 64 * dt2))
    betas_fbm = fit2.beta.ravel()
    assert np.all(betas_fbm >= 0.55) and np.all(betas_fbm <= 0.95), betas_fbm

    bridge_space = uniform_space(1.0, 129)
    bridge = sample_paths(ProcessSpec("bridge"), bridge_space, 2000, seed=79)
    init = Codebook(space=bridge_space, values=bridge.values[:4].copy())
    cb_br, _ = lloyd_run(cfg, init, bridge, r=2.0)
    assert boundary_pinning(cb_br, ([bridge_space.m - 1], 0.0)) < 1e-6

    _report(7, "regularity diagnostics",
            f"BM beta in [{betas_bm.min():.2f}, {betas_bm.max():.2f}] within [0.35, 0.65]; "
            f"fBM beta in [{betas_fbm.min():.2f}, {betas_fbm.max():.2f}] within [0.55, 0.95]; "
            "pinning exact")


def test_criterion_8_affine_equivariance():
    space = uniform_space(1.0, 65)
    sample = sample_paths(ProcessSpec("brownian"), space, 300, seed=88)
    cb = Codebook(space=space, values=sample.values[:4] * 0.9)
    c = 3.0
    u = np.sin(space.grid)[None, None, :]
    moved = PathSample(values=c * sample.values + u, seed=0, process_tag="affine")
    cb_moved = Codebook(space=space, values=c * cb.values + u)
    base_assign = assign(cb, sample).cell_index
    np.testing.assert_array_equal(assign(cb_moved, moved).cell_index, base_assign)
    worst = 0.0
    for r in (1.0, 2.0, 3.0):
        e0 = quant_error(cb, sample, r)
        e1 = quant_error(cb_moved, moved, r)
        rel = abs(e1 / (c * e0) - 1.0)
        worst = max(worst, rel)
        assert rel < 1e-12
    _report(8, "affine equivariance",
            f"quant_error scales by c={c} to {worst:.1e}; assignments identical")


def test_criterion_9_lipschitz_coupled_perturbations():
    space = uniform_space(1.0, 65)
    sample = sample_paths(ProcessSpec("brownian"), space, 200, seed=99)
    cb = Codebook(space=space, values=sample.values[:4] * 0.9)
    g = np.random.default_rng(991)
    checked = 0
    for r in (1.0, 2.0, 3.0):
        d_x = distortion(cb, sample, r).value ** (1.0 / r)
        for _ in range(100):
            bump = g.normal(scale=g.uniform(0.005, 0.6), size=sample.values.shape)
            other = PathSample(values=sample.values + bump, seed=0, process_tag="pert")
            d_y = distortion(cb, other, r).value ** (1.0 / r)
            coupling = np.mean([
                lp_dist(space, sample.path(i), other.path(i)) ** r
                for i in range(len(sample))]) ** (1.0 / r)
            assert abs(d_x - d_y) <= coupling + 1e-12
            checked += 1
    _report(9, "one-Lipschitz distortion", f"{checked} coupled perturbations held")
