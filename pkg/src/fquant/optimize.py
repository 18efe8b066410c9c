"""Codebook optimization: Lloyd fixed-point iteration, stochastic gradient
descent on the distortion differential, greedy splitting initialization, and
cartesian product quantizers.

Lloyd is available exactly where the weighted-centroid fixed point exists
(p = 2, r >= 2); every other smooth (p, r) pair goes through SGD.  Empty cells
are treated as bad iterates, not valid states, and are repaired before each
centroid update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, FquantError, OptimizeError
from .path_space import DiscretePathSpace, PathSample
from .quantize_core import (Codebook, assign, distortion, pairwise_distances,
                            quant_error)
from .rng import derive_rng

EMPTY_CELL_POLICIES = ("split_largest", "resample")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "lloyd"
    max_iters: int = 100
    tol: float = 1e-9               # relative distortion-improvement threshold
    sgd_c0: float | None = None     # step schedule c0 / (1 + decay * k)
    sgd_decay: float | None = None
    empty_cell_policy: str = "split_largest"
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("lloyd", "sgd"):
            raise FquantError(f"unknown method {self.method!r}")
        if self.max_iters < 1:
            raise FquantError("max_iters must be >= 1")
        if not self.tol > 0:
            raise FquantError("tol must be > 0")
        if self.sgd_c0 is not None and not self.sgd_c0 > 0:
            raise FquantError("sgd_c0 must be > 0")
        if self.empty_cell_policy not in EMPTY_CELL_POLICIES:
            raise FquantError(f"unknown empty_cell_policy {self.empty_cell_policy!r}")


@dataclass
class OptimizeTrace:
    distortions: list[float] = field(default_factory=list)
    iterations: int = 0
    exit_residual: float = float("nan")
    empty_cell_events: list[tuple[int, int]] = field(default_factory=list)
    exit_reason: str = ""

    def to_csv(self) -> str:
        lines = ["iteration,distortion,residual"]
        last = len(self.distortions) - 1
        for k, dv in enumerate(self.distortions):
            res = repr(self.exit_residual) if k == last else ""
            lines.append(f"{k},{dv!r},{res}")
        return "\n".join(lines) + "\n"


def _repair_empty_cells(values: np.ndarray, sample: PathSample,
                        space: DiscretePathSpace, r: float, policy: str,
                        events: list, iteration: int):
    """Replace atoms whose cells are empty; returns (values, cell_index, dists)."""
    n = values.shape[0]
    for _ in range(n + 1):
        cb = Codebook(space=space, values=values)
        dists = pairwise_distances(cb, sample)
        idx = np.argmin(dists, axis=1)
        counts = np.bincount(idx, minlength=n)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return values, idx, dists
        dead = int(empty[0])
        events.append((iteration, dead))
        best = dists[np.arange(len(sample)), idx]
        if policy == "split_largest":
            contrib = best ** r
            per_cell = np.bincount(idx, weights=contrib, minlength=n)
            donor = int(np.argmax(per_cell))
            in_donor = np.flatnonzero(idx == donor)
            far = in_donor[int(np.argmax(best[in_donor]))]
            if best[far] <= 0:
                raise OptimizeError("cannot split: donor cell has zero radius "
                                    "(fewer distinct paths than atoms?)")
            new_atom = values[donor] + 0.5 * (sample.values[far] - values[donor])
        else:  # resample: relocate to the path farthest from every atom
            far = int(np.argmax(best))
            if best[far] <= 0:
                raise OptimizeError("cannot resample: every path coincides with an atom")
            new_atom = sample.values[far].copy()
        values = values.copy()
        values[dead] = new_atom
    raise OptimizeError("empty-cell repair did not converge")


def lloyd_step(codebook: Codebook, sample: PathSample, r: float = 2.0,
               empty_cell_policy: str = "split_largest",
               _events: list | None = None, _iteration: int = 0) -> Codebook:
    """One fixed-point update: each atom becomes its cell's weighted centroid.

    Cell weights are ||x - a_i||^(r-2); r = 2 gives the plain cell mean.  Only
    valid on p = 2 spaces with r >= 2, where the centroid condition is the
    stationarity equation in closed form.
    """
    space = codebook.space
    if space.p != 2.0:
        raise OptimizeError(f"lloyd_step requires a p=2 space, got p={space.p}")
    if r < 2.0:
        raise OptimizeError(f"lloyd_step requires r >= 2, got r={r}")
    if len(sample) < 1:
        raise OptimizeError("empty sample")
    events = _events if _events is not None else []
    values, idx, dists = _repair_empty_cells(codebook.values, sample, space, r,
                                             empty_cell_policy, events, _iteration)
    best = dists[np.arange(len(sample)), idx]
    new_values = values.copy()
    for i in range(values.shape[0]):
        sel = idx == i
        cell = sample.values[sel]
        if r == 2.0:
            new_values[i] = cell.mean(axis=0)
        else:
            w = best[sel] ** (r - 2.0)  # paths equal to the atom get weight 0
            total = w.sum()
            if total <= 0:
                continue  # cell is a single coincident path: atom already exact
            new_values[i] = np.tensordot(w, cell, axes=(0, 0)) / total
    return Codebook(space=space, values=new_values)


def lloyd_run(config: OptimizerConfig, init: Codebook, sample: PathSample,
              r: float = 2.0) -> tuple[Codebook, OptimizeTrace]:
    """Iterate lloyd_step until the relative distortion improvement drops below tol."""
    trace = OptimizeTrace()
    cb = init
    prev = distortion(cb, sample, r).value
    trace.distortions.append(prev)
    for k in range(config.max_iters):
        nxt = lloyd_step(cb, sample, r, config.empty_cell_policy,
                         _events=trace.empty_cell_events, _iteration=k)
        cur = distortion(nxt, sample, r).value
        trace.distortions.append(cur)
        trace.iterations = k + 1
        unchanged = np.array_equal(nxt.values, cb.values)
        cb = nxt
        if unchanged:
            trace.exit_reason = "fixed_point"
            break
        if abs(prev - cur) <= config.tol * max(prev, 1e-300):
            trace.exit_reason = "tol"
            break
        prev = cur
    else:
        trace.exit_reason = "max_iters"
    trace.exit_residual = _exit_residual(cb, sample, r)
    return cb, trace


def _exit_residual(cb: Codebook, sample: PathSample, r: float) -> float:
    if r < cb.space.p:
        return float("nan")
    from .diagnostics import stationarity_residual
    return stationarity_residual(cb, sample, r).max_residual


def sgd_run(config: OptimizerConfig, init: Codebook, sample: PathSample,
            r: float) -> tuple[Codebook, OptimizeTrace]:
    """Competitive-learning descent on the distortion differential.

    Each iteration draws one path x, finds its nearest atom a_i and moves that
    atom by -step_k * r ||x - a_i||^(r-1) grad||.||_p(a_i - x), using the dual
    element's grid values as the update direction.  Exits on max_iters or when
    the stationarity residual (checked periodically) drops below tol.
    """
    space = init.space
    if space.p <= 1.0:
        raise OptimizeError(f"sgd_run requires p > 1, got p={space.p}")
    if r < 1.0:
        raise OptimizeError(f"sgd_run requires r >= 1, got r={r}")
    p = space.p
    rng = derive_rng(config.seed, "sgd")
    values = init.values.copy()
    trace = OptimizeTrace()

    d0 = distortion(init, sample, r).value
    trace.distortions.append(d0)
    scale = d0 ** (1.0 / r) if d0 > 0 else 1.0
    if r == 1.0:
        dists = pairwise_distances(init, sample)
        if np.any(dists == 0.0):
            raise OptimizeError("r = 1 needs a sample with no path equal to an atom")
    c0 = config.sgd_c0 if config.sgd_c0 is not None else 0.1 * scale ** (2.0 - r)
    decay = config.sgd_decay if config.sgd_decay is not None else 1.0 / len(sample)
    eval_every = max(1, config.max_iters // 25)
    w = space.weights

    for k in range(config.max_iters):
        x = sample.values[rng.integers(len(sample))]
        diff = values - x[None, :, :]
        acc = ((diff * diff) @ w).sum(axis=1) if p == 2.0 else \
            ((np.abs(diff) ** p) @ w).sum(axis=1)
        dist_all = np.maximum(acc, 0.0) ** (1.0 / p)
        i = int(np.argmin(dist_all))
        dist = dist_all[i]
        if dist > 0.0:
            g = diff[i]
            grad = (np.abs(g) / dist) ** (p - 1.0) * np.sign(g)
            step = c0 / (1.0 + decay * k)
            values[i] -= step * r * dist ** (r - 1.0) * grad
        trace.iterations = k + 1
        if (k + 1) % eval_every == 0 or k + 1 == config.max_iters:
            cb = Codebook(space=space, values=values)
            cur = distortion(cb, sample, r).value
            trace.distortions.append(cur)
            if cur > 10.0 * d0:
                trace.exit_reason = "diverged"
                raise DivergenceError(
                    f"distortion {cur:.6g} exceeded 10x initial {d0:.6g}", trace=trace)
            res = _exit_residual(cb, sample, r)
            if np.isfinite(res) and res < config.tol:
                trace.exit_residual = res
                trace.exit_reason = "tol"
                return cb, trace
    cb = Codebook(space=space, values=values)
    trace.exit_residual = _exit_residual(cb, sample, r)
    trace.exit_reason = trace.exit_reason or "max_iters"
    return cb, trace


def distortion_differential(codebook: Codebook, sample: PathSample,
                            r: float) -> np.ndarray:
    """Gateaux differential of the empirical distortion at the codebook.

    Returns an (n, d, m) stack of dual elements; the derivative of the
    distortion in direction h_i (a perturbation of atom i alone) is the
    weighted grid pairing of differential[i] with h_i.  Entry-wise,

        diff[i] = (r / N) sum_{x in cell i, x != a_i}
                  ||x - a_i||_p^(r-p) |a_i - x|^(p-1) sign(a_i - x)

    which is r times the stationarity integrand mean.  Needs p > 1 and an
    admissible codebook (no ties, and no coincident path when r = 1).
    """
    space = codebook.space
    p = space.p
    if p <= 1.0:
        raise OptimizeError(f"the distortion differential needs p > 1, got p={p}")
    if r < 1.0:
        raise OptimizeError(f"r must be >= 1, got {r}")
    N = len(sample)
    dists = pairwise_distances(codebook, sample)
    idx = np.argmin(dists, axis=1)
    out = np.zeros_like(codebook.values)
    for i in range(codebook.n):
        sel = idx == i
        cell = sample.values[sel]
        dvals = dists[sel, i]
        hit = dvals > 0.0
        diff = codebook.values[i][None] - cell[hit]
        kernel = np.abs(diff) ** (p - 1.0) * np.sign(diff)
        kernel *= (dvals[hit] ** (r - p))[:, None, None]
        out[i] = (r / N) * kernel.sum(axis=0)
    return out


def optimize_codebook(config: OptimizerConfig, init: Codebook, sample: PathSample,
                      r: float) -> tuple[Codebook, OptimizeTrace]:
    if config.method == "lloyd":
        return lloyd_run(config, init, sample, r)
    return sgd_run(config, init, sample, r)


def default_config_for(space: DiscretePathSpace, r: float, seed: int = 0,
                       max_iters: int | None = None, tol: float = 1e-9) -> OptimizerConfig:
    """Lloyd where the closed-form centroid exists, SGD otherwise."""
    if space.p == 2.0 and r >= 2.0:
        return OptimizerConfig(method="lloyd", max_iters=max_iters or 200, tol=tol, seed=seed)
    return OptimizerConfig(method="sgd", max_iters=max_iters or 20 * 1000, tol=tol, seed=seed)


def splitting_init(sample: PathSample, space: DiscretePathSpace, n: int, r: float,
                   seed: int, config: OptimizerConfig | None = None,
                   return_stages: bool = False):
    """Grow a codebook 1, 2, ..., n, re-optimizing after each greedy split.

    The split clones the atom whose cell carries the largest distortion share,
    offset by a small multiple of a path drawn from the sample; if the split
    fails to strictly improve, it falls back to pushing the clone halfway
    toward the donor cell's farthest path, which always captures that path.
    """
    if n < 1:
        raise OptimizeError(f"n must be >= 1, got {n}")
    rng = derive_rng(seed, "splitting_init")
    mean_path = sample.values.mean(axis=0)
    cb = Codebook(space=space, values=mean_path[None])
    base = config or default_config_for(space, r, seed=seed)
    if not (space.p == 2.0 and r == 2.0):
        # for p = r = 2 the mean is already the exact one-point fixed point
        cb, _ = optimize_codebook(base, cb, sample, r)
    stages = [cb]
    errors = [quant_error(cb, sample, r)]
    for size in range(2, n + 1):
        rep = distortion(cb, sample, r)
        donor = int(np.argmax(rep.per_cell_distortion))
        draw = sample.values[rng.integers(len(sample))]
        draw_norm = float(np.abs(draw).max())
        eps = 0.05 * errors[-1] / max(draw_norm, 1e-12)
        candidate = cb.values[donor] + eps * draw
        grown = _grow(cb, candidate)
        new_cb, _ = optimize_codebook(base, grown, sample, r)
        err = quant_error(new_cb, sample, r)
        if err >= errors[-1]:
            # deterministic fallback: capture the donor cell's farthest path
            idx = assign(cb, sample)
            dists = pairwise_distances(cb, sample)
            best = dists[np.arange(len(sample)), idx.cell_index]
            in_donor = np.flatnonzero(idx.cell_index == donor)
            far = in_donor[int(np.argmax(best[in_donor]))]
            candidate = cb.values[donor] + 0.5 * (sample.values[far] - cb.values[donor])
            new_cb, _ = optimize_codebook(base, _grow(cb, candidate), sample, r)
            err = quant_error(new_cb, sample, r)
        cb = new_cb
        stages.append(cb)
        errors.append(err)
    return stages if return_stages else cb


def _grow(cb: Codebook, new_atom: np.ndarray) -> Codebook:
    values = np.concatenate([cb.values, new_atom[None]], axis=0)
    return Codebook(space=cb.space, values=values)


def product_quantizer(marginal_codebooks: list[Codebook], cap: int = 4096) -> Codebook:
    """Cartesian product of single-coordinate codebooks.

    The product of marginal quantizers is the standard upper-bound construction
    for vector-valued processes: its distortion decomposes coordinatewise.
    """
    if not marginal_codebooks:
        raise FquantError("need at least one marginal codebook")
    if len(marginal_codebooks) == 1:
        return marginal_codebooks[0]
    ref = marginal_codebooks[0].space
    for cb in marginal_codebooks:
        sp = cb.space
        if sp.d != 1:
            raise FquantError("marginal codebooks must live on d=1 spaces")
        if not (np.array_equal(sp.grid, ref.grid) and np.array_equal(sp.weights, ref.weights)
                and sp.p == ref.p):
            raise FquantError("marginal codebooks must share grid, weights and p")
    sizes = [cb.n for cb in marginal_codebooks]
    total = int(np.prod(sizes))
    if total > cap:
        raise OptimizeError(f"product codebook size {total} exceeds cap {cap}")
    d = len(marginal_codebooks)
    m = ref.m
    values = np.empty((total, d, m))
    for flat, combo in enumerate(np.ndindex(*sizes)):
        for j, cj in enumerate(combo):
            values[flat, j] = marginal_codebooks[j].values[cj, 0]
    return Codebook(space=ref.with_d(d), values=values)
