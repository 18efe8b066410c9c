"""Codebooks, Voronoi assignment, distortion and quantization-error estimates.

Distances between sample paths and atoms are computed brute force, one pass
per (path, atom) pair, chunked over paths; at desk scale (n <= 64, N <= 1e6)
this is exact and fast enough.  p = 2 uses an inner-product expansion so the
heavy work is a single matrix product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, FquantError
from .path_space import (DiscretePathSpace, Path, PathSample, pack_paths,
                         paths_to_csv, unpack_paths)

_CHUNK_BUDGET = 2 ** 22  # floats per (chunk, atoms, d, m) scratch block


@dataclass(frozen=True)
class Codebook:
    """An ordered n-tuple of candidate paths (the quantizer) in a given space."""

    space: DiscretePathSpace
    values: np.ndarray  # (n, d, m)

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim == 2:
            values = values[None, :, :]
        if values.ndim != 3 or values.shape[0] < 1:
            raise FquantError(f"codebook values must be (n, d, m), got {values.shape}")
        if values.shape[1:] != self.space.shape:
            raise DimensionMismatchError(self.space.shape, values.shape[1:], what="atom")
        if not np.all(np.isfinite(values)):
            raise FquantError("codebook atoms must be finite")
        object.__setattr__(self, "values", values)
        # pairwise-distinct atoms: duplicate insertion is rejected
        n = values.shape[0]
        if n > 1:
            flat = values.reshape(n, -1)
            for i in range(n):
                same = np.all(flat[i + 1:] == flat[i], axis=1)
                if np.any(same):
                    j = i + 1 + int(np.argmax(same))
                    raise FquantError(f"duplicate atoms at indices {i} and {j}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def atoms(self) -> list[Path]:
        return [Path(values=self.values[i]) for i in range(self.n)]

    def atom(self, i: int) -> Path:
        return Path(values=self.values[i])

    def with_values(self, values: np.ndarray) -> "Codebook":
        return Codebook(space=self.space, values=values)

    def to_binary(self) -> bytes:
        return pack_paths(self.values)

    @classmethod
    def from_binary(cls, data: bytes, space: DiscretePathSpace) -> "Codebook":
        values, _ = unpack_paths(data)
        return cls(space=space, values=values)

    def to_csv(self) -> str:
        return paths_to_csv(self.space, self.values, header_prefix="atom")


def codebook_from_paths(space: DiscretePathSpace, paths) -> Codebook:
    values = np.stack([p.values if isinstance(p, Path) else np.asarray(p) for p in paths])
    return Codebook(space=space, values=values)


def _dist_block(x: np.ndarray, atoms: np.ndarray, space: DiscretePathSpace) -> np.ndarray:
    """(chunk, n) matrix of L^p distances between path block x and atoms."""
    w, p = space.weights, space.p
    if p == 2.0:
        xn = ((x * x) @ w).sum(axis=1)
        an = ((atoms * atoms) @ w).sum(axis=1)
        cross = np.einsum("idm,jdm->ij", x * w, atoms)
        d2 = xn[:, None] + an[None, :] - 2.0 * cross
        # the inner-product expansion cancels catastrophically for (near-)
        # coincident pairs; recompute those few entries directly so that
        # identical path/atom pairs come out at exactly zero
        close = d2 <= 1e-13 * (xn[:, None] + an[None, :])
        if np.any(close):
            rows, cols = np.nonzero(close)
            diff = x[rows] - atoms[cols]
            d2[rows, cols] = ((diff * diff) @ w).sum(axis=1)
        return np.sqrt(np.maximum(d2, 0.0))
    diff = np.abs(x[:, None, :, :] - atoms[None, :, :, :])
    acc = (diff ** p @ w).sum(axis=2)
    return np.maximum(acc, 0.0) ** (1.0 / p)


def pairwise_distances(codebook: Codebook, sample: PathSample) -> np.ndarray:
    """(N, n) distances from each sample path to each atom, in sample order."""
    space = codebook.space
    if sample.values.shape[1:] != space.shape:
        raise DimensionMismatchError(space.shape, sample.values.shape[1:], what="sample path")
    atoms = codebook.values
    n = atoms.shape[0]
    per_row = n * space.d * space.m
    chunk = max(1, _CHUNK_BUDGET // per_row)
    out = np.empty((len(sample), n))
    for lo in range(0, len(sample), chunk):
        hi = min(lo + chunk, len(sample))
        out[lo:hi] = _dist_block(sample.values[lo:hi], atoms, space)
    return out


@dataclass(frozen=True)
class VoronoiAssignment:
    """Nearest-atom cell index per sample path; exact-tie paths are flagged."""

    cell_index: np.ndarray  # (N,) int
    tie_flags: np.ndarray   # (N,) bool
    n_cells: int

    def cell_masses(self) -> np.ndarray:
        return np.bincount(self.cell_index, minlength=self.n_cells) / self.cell_index.size

    @property
    def tie_mass(self) -> float:
        return float(self.tie_flags.mean())


def assign(codebook: Codebook, sample: PathSample) -> VoronoiAssignment:
    """Map each path to its nearest atom; exact distance ties go to the lowest index."""
    if codebook.n < 1:
        raise FquantError("empty codebook")
    dists = pairwise_distances(codebook, sample)
    idx = np.argmin(dists, axis=1)
    best = dists[np.arange(len(sample)), idx]
    ties = (dists == best[:, None]).sum(axis=1) > 1
    return VoronoiAssignment(cell_index=idx, tie_flags=ties, n_cells=codebook.n)


@dataclass(frozen=True)
class DistortionReport:
    """Empirical distortion E min_i ||X - a_i||^r with its cell decomposition."""

    value: float
    per_cell_mass: np.ndarray
    per_cell_distortion: np.ndarray
    stderr: float
    r: float

    def to_json(self) -> str:
        return json.dumps({
            "value": self.value,
            "r": self.r,
            "stderr": self.stderr,
            "per_cell_mass": self.per_cell_mass.tolist(),
            "per_cell_distortion": self.per_cell_distortion.tolist(),
        }, sort_keys=True)


def distortion(codebook: Codebook, sample: PathSample, r: float) -> DistortionReport:
    """Empirical mean of min_i ||x - a_i||^r, decomposed over Voronoi cells."""
    if r <= 0:
        raise FquantError(f"distortion order r must be > 0, got {r}")
    dists = pairwise_distances(codebook, sample)
    idx = np.argmin(dists, axis=1)
    contrib = dists[np.arange(len(sample)), idx] ** r
    n, N = codebook.n, len(sample)
    per_cell = np.bincount(idx, weights=contrib, minlength=n) / N
    mass = np.bincount(idx, minlength=n) / N
    value = float(per_cell.sum())
    stderr = float(contrib.std(ddof=1) / np.sqrt(N)) if N > 1 else 0.0
    return DistortionReport(value=value, per_cell_mass=mass,
                            per_cell_distortion=per_cell, stderr=stderr, r=float(r))


def quant_error(codebook: Codebook, sample: PathSample, r: float) -> float:
    """distortion^(1/r): an upper Monte Carlo estimate of the optimal error."""
    return distortion(codebook, sample, r).value ** (1.0 / r)


def quant_error_with_stderr(codebook: Codebook, sample: PathSample, r: float) -> tuple[float, float]:
    """quant_error plus its delta-method standard error."""
    rep = distortion(codebook, sample, r)
    err = rep.value ** (1.0 / r)
    if rep.value <= 0:
        return err, 0.0
    return err, rep.stderr / (r * rep.value ** ((r - 1.0) / r))


def sup_pairwise_distances(codebook: Codebook, sample: PathSample) -> np.ndarray:
    """(N, n) sup-norm distances max_{j,k} |x_{jk} - a_{jk}|, chunked over paths."""
    space = codebook.space
    if sample.values.shape[1:] != space.shape:
        raise DimensionMismatchError(space.shape, sample.values.shape[1:], what="sample path")
    atoms = codebook.values
    n = atoms.shape[0]
    per_row = n * space.d * space.m
    chunk = max(1, _CHUNK_BUDGET // per_row)
    out = np.empty((len(sample), n))
    for lo in range(0, len(sample), chunk):
        hi = min(lo + chunk, len(sample))
        diff = np.abs(sample.values[lo:hi, None, :, :] - atoms[None, :, :, :])
        out[lo:hi] = diff.max(axis=(2, 3))
    return out


def sup_distortion(codebook: Codebook, sample: PathSample, r: float) -> DistortionReport:
    """Empirical E min_i ||X - a_i||_sup^r: the sup-norm analogue of distortion."""
    if r <= 0:
        raise FquantError(f"distortion order r must be > 0, got {r}")
    dists = sup_pairwise_distances(codebook, sample)
    idx = np.argmin(dists, axis=1)
    contrib = dists[np.arange(len(sample)), idx] ** r
    n, N = codebook.n, len(sample)
    per_cell = np.bincount(idx, weights=contrib, minlength=n) / N
    mass = np.bincount(idx, minlength=n) / N
    stderr = float(contrib.std(ddof=1) / np.sqrt(N)) if N > 1 else 0.0
    return DistortionReport(value=float(per_cell.sum()), per_cell_mass=mass,
                            per_cell_distortion=per_cell, stderr=stderr, r=float(r))


def sup_quant_error(codebook: Codebook, sample: PathSample, r: float) -> float:
    return sup_distortion(codebook, sample, r).value ** (1.0 / r)


def quantize_paths(codebook: Codebook, sample: PathSample) -> PathSample:
    """Replace each path by its assigned atom (the quantized version of the sample)."""
    cells = assign(codebook, sample).cell_index
    return PathSample(values=codebook.values[cells], seed=sample.seed,
                      process_tag=f"quantized[n={codebook.n}]:{sample.process_tag}")


def cross_exponent_bounds(sample: PathSample, space: DiscretePathSpace,
                          codebook: Codebook, r: float) -> tuple[float, float]:
    """Empirical sandwich relating the (L^r, L^p) error to the p^r and p^vr ones.

    Re-measures the same atoms under the exponents p^r := min(p, r) and
    pvr := max(p, r), with outer moment matching the inner exponent, and scales
    by total_mass^(1/p - 1/exponent).  Pathwise Hoelder plus outer-moment
    monotonicity make lower <= quant_error(codebook, sample, r) <= upper an
    algebraic identity on any fixed sample.
    """
    if r < 1:
        raise FquantError(f"cross-exponent bounds need r >= 1, got {r}")
    p = space.p
    mass = space.total_mass
    lo_exp, hi_exp = min(p, r), max(p, r)
    cb_lo = Codebook(space=space.with_p(lo_exp), values=codebook.values)
    cb_hi = Codebook(space=space.with_p(hi_exp), values=codebook.values)
    lower = mass ** (1.0 / p - 1.0 / lo_exp) * quant_error(cb_lo, sample, lo_exp)
    upper = mass ** (1.0 / p - 1.0 / hi_exp) * quant_error(cb_hi, sample, hi_exp)
    return lower, upper
