"""Finite, exactly-computable ground-truth cases for the test suite.

Each oracle reconstructs a sequence-space or C([0,1]) construction with a
known best value, evaluates it by two independent routes (closed-form /
coordinate medians / linear programming / subgradient descent), and reports
named checks that the CLI aggregates into a manifest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import OracleError

# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSequenceSpace:
    """First M coordinates of a sequence space, with the l^1 or l^inf norm."""

    dim: int
    norm_kind: str
    c: np.ndarray | None = None  # hyperplane constraint coefficients

    def __post_init__(self):
        if self.dim < 3:
            raise OracleError(f"truncation level must be >= 3, got {self.dim}")
        if self.norm_kind not in ("l1", "linf"):
            raise OracleError(f"norm_kind must be 'l1' or 'linf', got {self.norm_kind!r}")
        if self.c is not None:
            c = np.asarray(self.c, dtype=np.float64)
            object.__setattr__(self, "c", c)
            if c.size != self.dim or not np.all(np.isfinite(c)):
                raise OracleError("constraint vector must be finite with one entry per dim")
            if not (c[0] == 1.0 and c[1] == 1.0 and c[2] == 1.0):
                raise OracleError("constraint vector must start with three ones")
            if self.dim > 3 and np.any(np.diff(c[2:]) <= 0):
                raise OracleError("constraint entries from the third on must strictly increase")
            if c.max() <= 3.0:
                raise OracleError("constraint vector needs sup > 3")

    def norm(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.norm_kind == "l1":
            return np.abs(x).sum(axis=-1)
        return np.abs(x).max(axis=-1)


@dataclass(frozen=True)
class AtomicLaw:
    """Finitely supported law: points (as rows) with matching probabilities."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if atoms.ndim != 2 or probs.shape != (atoms.shape[0],):
            raise OracleError("atoms must be (K, dim) with one probability per row")
        if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-15:
            raise OracleError("probabilities must be positive and sum to 1 within 1e-15")
        if len({a.tobytes() for a in atoms}) != atoms.shape[0]:
            raise OracleError("law atoms must be distinct")

    def mean_norm_to(self, point: np.ndarray, norm_kind: str) -> float:
        diff = self.atoms - np.asarray(point)[None, :]
        dists = np.abs(diff).sum(axis=1) if norm_kind == "l1" else np.abs(diff).max(axis=1)
        return float(self.probs @ dists)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    expected: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.expected) <= self.tol

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "expected": self.expected,
                "tol": self.tol, "passed": self.passed}


def indicator_check(name: str, condition: bool, witness: float) -> OracleCheck:
    """A strict (non-metric) assertion encoded as a 0/1 check; witness is the
    quantity the condition was evaluated on, kept for the manifest."""
    return OracleCheck(name=f"{name}[witness={witness:.6g}]",
                       value=1.0 if condition else 0.0, expected=1.0, tol=0.0)


def default_probs(M: int) -> np.ndarray:
    """A proper law on {1..M} with every weight strictly inside (0, 1/2).

    Two leading weights of 1/3 followed by a geometric(1/2) tail, with the
    tail mass beyond M aggregated into the last entry.  (A plain normalized
    geometric with ratio 1/2 would put exactly 1/2 on the first point, which
    the constructions exclude.)
    """
    if M < 3:
        raise OracleError(f"need M >= 3, got {M}")
    p = np.empty(M)
    p[0] = p[1] = 1.0 / 3.0
    for n in range(3, M):
        p[n - 1] = (1.0 / 3.0) * 2.0 ** (2 - n)
    p[M - 1] = (1.0 / 3.0) * 2.0 ** (3 - M)
    p /= p.sum()
    if np.any(p >= 0.5) or np.any(p <= 0.0):
        raise OracleError("internal: default probs left (0, 1/2)")
    return p


def default_constraint(M: int) -> np.ndarray:
    """c = (1, 1, 1, 4 - 4/4, 4 - 4/5, ...): strictly increasing tail, sup = 4 > 3."""
    j = np.arange(1, M + 1, dtype=np.float64)
    c = 4.0 - 4.0 / j
    c[:3] = 1.0
    return c


# ---------------------------------------------------------------------------
# convex minimization routes
# ---------------------------------------------------------------------------


def coordinate_median_minimize(law: AtomicLaw) -> tuple[np.ndarray, float]:
    """Exact minimizer of a -> E ||V - a||_1 via per-coordinate weighted medians."""
    K, M = law.atoms.shape
    out = np.empty(M)
    for j in range(M):
        order = np.argsort(law.atoms[:, j], kind="stable")
        vals = law.atoms[order, j]
        cum = np.cumsum(law.probs[order])
        out[j] = vals[int(np.searchsorted(cum, 0.5))]
    return out, law.mean_norm_to(out, "l1")


def linf_center_lp(law: AtomicLaw) -> tuple[np.ndarray, float]:
    """LP solution of min_b E ||V - b||_inf (variables b plus one bound per atom)."""
    K, M = law.atoms.shape
    n_var = M + K
    cost = np.concatenate([np.zeros(M), law.probs])
    rows, rhs = [], []
    for n in range(K):
        for k in range(M):
            up = np.zeros(n_var)
            up[k] = 1.0
            up[M + n] = -1.0
            rows.append(up)
            rhs.append(law.atoms[n, k])
            lo = np.zeros(n_var)
            lo[k] = -1.0
            lo[M + n] = -1.0
            rows.append(lo)
            rhs.append(-law.atoms[n, k])
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(None, None)] * M + [(0, None)] * K, method="highs")
    if not res.success:
        raise OracleError(f"l-infinity center LP failed: {res.message}")
    return res.x[:M], float(res.fun)


def l1_center_lp(law: AtomicLaw, basis: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """LP solution of min_s E ||V - B s||_1 (B = identity when basis is None)."""
    K, M = law.atoms.shape
    B = np.eye(M) if basis is None else np.asarray(basis, dtype=np.float64)
    k = B.shape[1]
    n_var = k + K * M
    cost = np.concatenate([np.zeros(k), np.repeat(law.probs, M)])
    rows, rhs = [], []
    for n in range(K):
        for j in range(M):
            zi = k + n * M + j
            up = np.zeros(n_var)          # (B s)_j - z_nj <= v_nj
            up[:k] = B[j]
            up[zi] = -1.0
            rows.append(up)
            rhs.append(law.atoms[n, j])
            lo = np.zeros(n_var)          # -(B s)_j - z_nj <= -v_nj
            lo[:k] = -B[j]
            lo[zi] = -1.0
            rows.append(lo)
            rhs.append(-law.atoms[n, j])
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(None, None)] * k + [(0, None)] * (K * M), method="highs")
    if not res.success:
        raise OracleError(f"l1 center LP failed: {res.message}")
    return res.x[:k], float(res.fun)


def subgradient_minimize(value_fn, subgrad_fn, x0: np.ndarray, tol: float = 1e-8,
                         max_rounds: int = 160, inner: int = 600) -> tuple[np.ndarray, float]:
    """Polyak-style subgradient descent with an adaptive target gap.

    Suited to the sharp (polyhedral) objectives here: the inner loop runs
    Polyak steps toward best-so-far minus delta, the iterate average is also
    polled (it settles kink zigzags), and delta halves whenever a round fails
    to realize half of it.  Returns the best point seen.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    best_x, best_f = x.copy(), float(value_fn(x))
    delta = max(abs(best_f), 1.0)
    for _ in range(max_rounds):
        round_start = best_f
        avg = np.zeros_like(x)
        for k in range(inner):
            fx = float(value_fn(x))
            if fx < best_f:
                best_f, best_x = fx, x.copy()
            g = np.asarray(subgrad_fn(x), dtype=np.float64)
            gn = float(g @ g)
            if gn == 0.0:
                return x.copy(), fx
            x = x - ((fx - (best_f - delta)) / gn) * g
            avg += (x - avg) / (k + 1)
        f_avg = float(value_fn(avg))
        if f_avg < best_f:
            best_f, best_x = f_avg, avg.copy()
        if round_start - best_f < delta / 2.0:
            delta /= 2.0
            x = best_x.copy()
        if delta < tol:
            break
    return best_x, best_f


def linf_subgradient(law: AtomicLaw):
    def value(b):
        return law.mean_norm_to(b, "linf")

    def grad(b):
        diff = b[None, :] - law.atoms
        k_star = np.argmax(np.abs(diff), axis=1)
        g = np.zeros_like(b)
        rows = np.arange(law.atoms.shape[0])
        np.add.at(g, k_star, law.probs * np.sign(diff[rows, k_star]))
        return g

    return value, grad


def l1_subgradient(law: AtomicLaw, basis: np.ndarray | None = None):
    B = None if basis is None else np.asarray(basis, dtype=np.float64)

    def point(s):
        return s if B is None else B @ s

    def value(s):
        return law.mean_norm_to(point(s), "l1")

    def grad(s):
        g_pt = (law.probs[:, None] * np.sign(point(s)[None, :] - law.atoms)).sum(axis=0)
        return g_pt if B is None else B.T @ g_pt

    return value, grad


# ---------------------------------------------------------------------------
# the c_0(N) construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class C0ExampleReport:
    best_value: float
    best_point: np.ndarray
    sequence_values: np.ndarray   # value at a^(m) = (1/2) * sum_{n<=m} u^(n), m = 1..M
    value_at_candidate: float
    probs: np.ndarray
    checks: list[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def c0_example(M: int = 16, probs: np.ndarray | None = None,
               n_probe: int = 32, probe_seed: int = 7) -> C0ExampleReport:
    """The vanishing-sequence construction: best one-point coverage is 1/2.

    The law sits on the canonical basis vectors u^(1)..u^(M) with weights in
    (0, 1/2).  The half-constant point scores exactly 1/2; the truncated-space
    minimum (via LP, cross-checked by subgradient descent) is 1/2 again and is
    attained only at that point; and the partial-sum candidates a^(m) decrease
    strictly to 1/2.
    """
    p = default_probs(M) if probs is None else np.asarray(probs, dtype=np.float64)
    if p.shape != (M,) or np.any(p <= 0) or np.any(p >= 0.5) or abs(p.sum() - 1) > 1e-12:
        raise OracleError("probs must be M entries in (0, 1/2) summing to 1")
    law = AtomicLaw(atoms=np.eye(M), probs=p)
    candidate = np.full(M, 0.5)
    value_at_candidate = law.mean_norm_to(candidate, "linf")

    seq = np.empty(M)
    for m in range(1, M + 1):
        a_m = np.zeros(M)
        a_m[:m] = 0.5
        seq[m - 1] = law.mean_norm_to(a_m, "linf")

    best_point, best_lp = linf_center_lp(law)
    value_fn, grad_fn = linf_subgradient(law)
    # multistart: origin plus the coordinatewise midrange (the standard first
    # guess for sup-norm centers); the flat geometric tail makes a single cold
    # start crawl
    midrange = 0.5 * (law.atoms.min(axis=0) + law.atoms.max(axis=0))
    best_sub = min(subgradient_minimize(value_fn, grad_fn, np.zeros(M))[1],
                   subgradient_minimize(value_fn, grad_fn, midrange)[1])

    rng = np.random.default_rng(probe_seed)
    probe_margin = np.inf
    for _ in range(n_probe):
        n0 = int(rng.integers(M))
        b = law.atoms[n0] + rng.uniform(-0.49, 0.49, size=M) * 0.999
        # keep the probe strictly inside the half-ball around u^(n0)
        b = law.atoms[n0] + (b - law.atoms[n0]) * (0.49 / max(np.abs(b - law.atoms[n0]).max(), 1e-9))
        probe_margin = min(probe_margin, law.mean_norm_to(b, "linf") - 0.5)

    checks = [
        OracleCheck("c0.value_at_half_constant", value_at_candidate, 0.5, 1e-12),
        OracleCheck("c0.lp_minimum", best_lp, 0.5, 1e-9),
        OracleCheck("c0.lp_vs_subgradient", best_lp - best_sub, 0.0, 1e-6),
        OracleCheck("c0.minimizer_is_half_constant",
                    float(np.abs(best_point - candidate).max()), 0.0, 1e-6),
        indicator_check("c0.sequence_strictly_decreasing",
                        bool(np.all(np.diff(seq) < 0.0)), float(np.max(np.diff(seq)))),
        OracleCheck("c0.sequence_limit", float(seq[-1]), 0.5, 1e-12),
        indicator_check("c0.half_ball_probes_exceed_half",
                        probe_margin > 0.0, probe_margin),
    ]
    return C0ExampleReport(best_value=best_lp, best_point=best_point,
                           sequence_values=seq, value_at_candidate=value_at_candidate,
                           probs=p, checks=checks)


# ---------------------------------------------------------------------------
# the l^1 hyperplane construction
# ---------------------------------------------------------------------------


def _l1_three_point_law(M: int, m_points: int = 3) -> AtomicLaw:
    atoms = np.zeros((m_points, M))
    for i in range(1, m_points):
        atoms[i, 0] = 1.0
        atoms[i, i] = -1.0
    return AtomicLaw(atoms=atoms, probs=np.full(m_points, 1.0 / m_points))


def _plane_basis(M: int) -> np.ndarray:
    """Basis of span{u1 - u2, u1 - u3} as columns; a = (s+t, -s, -t, 0, ...)."""
    B = np.zeros((M, 2))
    B[0] = 1.0
    B[1, 0] = -1.0
    B[2, 1] = -1.0
    return B


def _plane_vertex_minimum(law: AtomicLaw, M: int) -> float:
    """Exact minimum over the 2-d span via vertex enumeration.

    The objective is convex piecewise linear in (s, t) with kinks on the six
    lines s=0, t=0, s=1, t=1, s+t=0, s+t=1; its minimum is attained at an
    intersection vertex, all of which are enumerated here.
    """
    lines = [(1, 0, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1), (1, 1, 0), (1, 1, 1)]
    B = _plane_basis(M)
    best = np.inf
    for i in range(len(lines)):
        for k in range(i + 1, len(lines)):
            a1, b1, c1 = lines[i]
            a2, b2, c2 = lines[k]
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            s = (c1 * b2 - c2 * b1) / det
            t = (a1 * c2 - a2 * c1) / det
            best = min(best, law.mean_norm_to(B @ np.array([s, t]), "l1"))
    return best


@dataclass(frozen=True)
class L1HyperplaneReport:
    e_plane: float                 # best over the 2-d span (expected 4/3)
    e_full: float                  # best over the whole truncated l^1 (expected 1)
    e_hyperplane_upper: float      # min over the candidates inside the hyperplane
    minimizer_full: np.ndarray
    candidate_values: np.ndarray   # value at a^(k) = u1 - u_k / c_k, k = 4..M
    c: np.ndarray
    checks: list[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def l1_hyperplane_example(M: int = 16, c: np.ndarray | None = None) -> L1HyperplaneReport:
    """Three-point law in l^1: plane optimum 4/3, full-space optimum 1, and
    hyperplane candidates that strictly beat the plane."""
    cvec = default_constraint(M) if c is None else np.asarray(c, dtype=np.float64)
    TruncatedSequenceSpace(dim=M, norm_kind="l1", c=cvec)  # validates the constraint
    if M < 5:
        raise OracleError("hyperplane candidates need M >= 5 to beat 4/3")
    law = _l1_three_point_law(M)

    B = _plane_basis(M)
    _, e_plane_lp = l1_center_lp(law, basis=B)
    e_plane_vertex = _plane_vertex_minimum(law, M)
    val_fn, grad_fn = l1_subgradient(law, basis=B)
    _, e_plane_sub = subgradient_minimize(val_fn, grad_fn, np.zeros(2))

    minimizer_full, e_full_med = coordinate_median_minimize(law)
    vfull, gfull = l1_subgradient(law)
    _, e_full_sub = subgradient_minimize(vfull, gfull, np.zeros(M))

    u1 = np.zeros(M)
    u1[0] = 1.0
    ks = np.arange(4, M + 1)
    cand_vals = np.empty(ks.size)
    constraint_resid = 0.0
    for pos, k in enumerate(ks):
        a_k = u1.copy()
        a_k[k - 1] = -1.0 / cvec[k - 1]
        cand_vals[pos] = law.mean_norm_to(a_k, "l1")
        constraint_resid = max(constraint_resid, abs(float(a_k @ cvec)))
    closed = 1.0 + 1.0 / cvec[ks - 1]
    e_upper = float(cand_vals.min())

    checks = [
        OracleCheck("l1.plane_lp", e_plane_lp, 4.0 / 3.0, 1e-9),
        OracleCheck("l1.plane_vertex_enumeration", e_plane_vertex, 4.0 / 3.0, 1e-12),
        OracleCheck("l1.plane_lp_vs_subgradient", e_plane_lp - e_plane_sub, 0.0, 1e-6),
        OracleCheck("l1.full_minimum", e_full_med, 1.0, 1e-12),
        OracleCheck("l1.full_median_vs_subgradient", e_full_med - e_full_sub, 0.0, 1e-6),
        OracleCheck("l1.full_minimizer_is_u1",
                    float(np.abs(minimizer_full - u1).max()), 0.0, 1e-6),
        OracleCheck("l1.candidate_values_closed_form",
                    float(np.abs(cand_vals - closed).max()), 0.0, 1e-15),
        OracleCheck("l1.candidates_in_hyperplane", constraint_resid, 0.0, 1e-12),
        indicator_check("l1.hyperplane_beats_plane", e_upper < 4.0 / 3.0, e_upper),
    ]
    return L1HyperplaneReport(e_plane=e_plane_lp, e_full=e_full_med,
                              e_hyperplane_upper=e_upper, minimizer_full=minimizer_full,
                              candidate_values=cand_vals, c=cvec, checks=checks)


# ---------------------------------------------------------------------------
# sharpness of the factor-2 subspace bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharpConstantReport:
    m: int
    e_subspace: float
    e_full: float
    ratio: float
    checks: list[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def sharp_constant_example(m: int) -> SharpConstantReport:
    """Uniform m-point law in l^1: subspace error 2(m-1)/m against full-space 1."""
    if m < 2:
        raise OracleError(f"support size must be >= 2, got {m}")
    law = _l1_three_point_law(m, m_points=m)
    _, e_full = coordinate_median_minimize(law)
    u1 = np.zeros(m)
    u1[0] = 1.0
    e_at_u1 = law.mean_norm_to(u1, "l1")
    e_full = min(e_full, e_at_u1)

    # span{v_2, ..., v_m}: a = (sum s_j) u1 - sum s_j u_j
    B = np.zeros((m, m - 1))
    B[0] = 1.0
    for j in range(1, m):
        B[j, j - 1] = -1.0
    _, e_sub_lp = l1_center_lp(law, basis=B)
    val_fn, grad_fn = l1_subgradient(law, basis=B)
    _, e_sub_sg = subgradient_minimize(val_fn, grad_fn, np.zeros(m - 1))

    expected = 2.0 * (m - 1) / m
    ratio = e_sub_lp / e_full
    checks = [
        OracleCheck(f"sharp2.full_minimum[m={m}]", e_full, 1.0, 1e-12),
        OracleCheck(f"sharp2.subspace_lp[m={m}]", e_sub_lp, expected, 1e-9),
        OracleCheck(f"sharp2.lp_vs_subgradient[m={m}]", e_sub_lp - e_sub_sg, 0.0, 1e-6),
        OracleCheck(f"sharp2.ratio[m={m}]", ratio, expected, 1e-9),
        indicator_check(f"sharp2.ratio_below_2[m={m}]", ratio <= 2.0, ratio),
    ]
    return SharpConstantReport(m=m, e_subspace=e_sub_lp, e_full=e_full, ratio=ratio,
                               checks=checks)


# ---------------------------------------------------------------------------
# the C([0,1]) sup-norm construction
# ---------------------------------------------------------------------------


def bump_function_values(n: int, t: np.ndarray) -> np.ndarray:
    """The n-th continuous bump: a unit spike just left of 1/2, mirrored odd
    about 1/2.  All breakpoints are dyadic, so evaluation on a dyadic grid is
    exact."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    left = t <= 0.5

    def half(tt):
        v = np.zeros_like(tt)
        lo = 0.5 - 2.0 ** (-n)
        peak = 0.5 - 3.0 * 2.0 ** (-(n + 2))
        hi = 0.5 - 2.0 ** (-(n + 1))
        up = (tt >= lo) & (tt <= peak)
        down = (tt > peak) & (tt <= hi)
        v[up] = 2.0 ** (n + 1) * (2.0 * tt[up] - 1.0) + 4.0
        v[down] = 2.0 ** (n + 1) * (1.0 - 2.0 * tt[down]) - 2.0
        return v

    out[left] = half(t[left])
    out[~left] = -half(1.0 - t[~left])
    return out


def step_function_values(t: np.ndarray) -> np.ndarray:
    """h = (1/2) (1 on [0, 1/2] minus 1 on (1/2, 1])."""
    t = np.asarray(t, dtype=np.float64)
    return np.where(t <= 0.5, 0.5, -0.5)


def sup_example_grid(n_funcs: int) -> np.ndarray:
    """Default dyadic grid resolving every bump feature exactly."""
    m = 2 ** (n_funcs + 3) + 1
    return np.linspace(0.0, 1.0, m)


DEFAULT_PROBE_POLYS = (
    (0.0,),                    # g = 0
    (0.25,), (-0.25,), (0.5,),
    (1.0, 0.0),                # g = t
    (-1.0, 0.5),               # g = 1/2 - t
    (-2.0, 1.0),               # g = 1 - 2t
    (2.0, -3.0, 0.0, 0.5),     # cubic sliding from 1/2 to -1/2
)


@dataclass(frozen=True)
class SupExampleReport:
    sup_dists: np.ndarray        # ||f_n - h||_sup on the grid
    value_at_h: float
    lr_values: dict              # r -> || ||X-h||_sup ||_{L^r}
    probe_values: dict           # polynomial coeffs -> E ||X - g||_sup
    best_probe: float
    probs: np.ndarray
    checks: list[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def sup_counterexample(n_funcs: int = 12, grid: np.ndarray | None = None,
                       probs: np.ndarray | None = None,
                       probe_polys=DEFAULT_PROBE_POLYS,
                       probe_margin: float = 0.02) -> SupExampleReport:
    """Sup-norm coverage of the bump family: h scores exactly 1/2, smooth
    probes stay above 1/2 by a margin."""
    if n_funcs < 1:
        raise OracleError("need at least one bump")
    min_m = 2 ** (n_funcs + 3)
    if grid is None:
        grid = sup_example_grid(n_funcs)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < min_m:
        raise OracleError(f"grid too coarse for n_funcs={n_funcs}: need m >= {min_m} "
                          f"uniform nodes, got {grid.size}")
    p = default_probs(n_funcs) if probs is None else np.asarray(probs, dtype=np.float64)
    if p.shape != (n_funcs,) or np.any(p <= 0) or np.any(p >= 0.5) or abs(p.sum() - 1) > 1e-12:
        raise OracleError("probs must be n_funcs entries in (0, 1/2) summing to 1")

    bumps = np.stack([bump_function_values(n, grid) for n in range(1, n_funcs + 1)])
    h = step_function_values(grid)
    sup_dists = np.abs(bumps - h[None, :]).max(axis=1)
    value_at_h = float(p @ sup_dists)
    lr_values = {r: float((p @ sup_dists ** r) ** (1.0 / r)) for r in (1.0, 2.0, 4.0)}

    probe_values = {}
    for coeffs in probe_polys:
        g = np.polyval(np.asarray(coeffs, dtype=np.float64), grid)
        probe_values[coeffs] = float(p @ np.abs(bumps - g[None, :]).max(axis=1))
    best_probe = min(probe_values.values())

    checks = [
        OracleCheck("supnorm.bump_distances_to_h",
                    float(np.abs(sup_dists - 0.5).max()), 0.0, 0.0),
        OracleCheck("supnorm.value_at_h", value_at_h, 0.5, 1e-12),
        OracleCheck("supnorm.lr_values_all_half",
                    float(max(abs(v - 0.5) for v in lr_values.values())), 0.0, 1e-12),
        indicator_check("supnorm.probes_above_half_plus_margin",
                        best_probe > 0.5 + probe_margin, best_probe),
    ]
    return SupExampleReport(sup_dists=sup_dists, value_at_h=value_at_h,
                            lr_values=lr_values, probe_values=probe_values,
                            best_probe=best_probe, probs=p, checks=checks)


# ---------------------------------------------------------------------------
# closed-form one-point errors for the process examples
# ---------------------------------------------------------------------------


def closed_form_errors(process_tag: str, n: int, p: float, r: float,
                       params: dict | None = None) -> float | None:
    """Analytic optimal quantization error where one is registered; None otherwise.

    Registered (all with n=1, p=r=2, mean atom): brownian on [0, t_end] under
    Lebesgue; bridge likewise; stationary OU under the e^{-b t} dt measure.
    """
    params = params or {}
    base = process_tag.split("(")[0]
    if (n, p, r) != (1, 2.0, 2.0):
        return None
    t_end = float(params.get("t_end", 1.0))
    if base == "brownian":
        return math.sqrt(t_end ** 2 / 2.0)
    if base == "bridge":
        return math.sqrt(t_end ** 2 / 6.0)
    if base == "ou":
        b = float(params.get("b", 1.0))
        return math.sqrt((1.0 - math.exp(-b * t_end)) / b)
    return None
