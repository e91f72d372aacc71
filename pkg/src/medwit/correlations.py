"""Correlation quantifiers, continuity functions, capacities and total correlations.

Quantifiers are monotone under local operations; each ships with a default
pairing of contractive distance and invertible continuity function g.  The
linear g constants are audited by sampling (see `audit_continuity`), not
proven, and are flagged as such in witness reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .sampling import as_rng, random_ket
from .tensor import (
    QState, SystemLayout, permute_matrix, ptrace_matrix, ptranspose_matrix,
    spectral_norm, trace_distance, vn_entropy,
)

LN2 = np.log(2.0)

QUANTIFIERS = ("negativity", "log_negativity", "mutual_information",
               "rel_ent_entanglement")
DISTANCES = ("trace", "spectral", "relative_entropy")

REE_SIDE_CAP = 4  # largest allowed smaller-side dimension for the REE solver


# ---------------------------------------------------------------------------
# continuity functions

@dataclass(frozen=True)
class ContinuityFn:
    """Invertible monotone g with g(0) = 0, used in |Q(x)-Q(y)| <= g(d(x,y)).

    kind "linear": g(s) = c s with c = params[0].
    kind "table":  piecewise-linear through (0,0) and the given (s, v) knots.
    """

    kind: str
    params: tuple[float, ...]
    domain_max: float = float("inf")
    source: str = "user"

    def __post_init__(self):
        if self.kind == "linear":
            if len(self.params) != 1 or self.params[0] <= 0:
                raise ValueError("linear g needs a single positive slope")
        elif self.kind == "table":
            knots = np.asarray(self.params, dtype=float).reshape(-1, 2)
            if len(knots) < 1 or np.any(np.diff(knots[:, 0]) <= 0) \
                    or np.any(np.diff(knots[:, 1]) <= 0) \
                    or knots[0, 0] <= 0 or knots[0, 1] <= 0:
                raise ValueError("table g needs strictly increasing (s, v) knots")
        else:
            raise ValueError(f"unknown continuity kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))


def linear_g(c: float, source: str = "user") -> ContinuityFn:
    return ContinuityFn("linear", (float(c),), source=source)


def g_eval(g: ContinuityFn, s: float) -> float:
    if s < 0 or s > g.domain_max:
        raise ValueError(f"argument {s} outside g domain [0, {g.domain_max}]")
    if g.kind == "linear":
        return g.params[0] * s
    knots = np.asarray(g.params).reshape(-1, 2)
    xs = np.concatenate([[0.0], knots[:, 0]])
    vs = np.concatenate([[0.0], knots[:, 1]])
    if s > xs[-1]:  # extend final slope
        slope = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
        return float(vs[-1] + slope * (s - xs[-1]))
    return float(np.interp(s, xs, vs))


def g_inv(g: ContinuityFn, v: float) -> float:
    """Inverse of g; negative arguments clamp to 0 (no-violation convention)."""
    if v <= 0:
        return 0.0
    if g.kind == "linear":
        return v / g.params[0]
    knots = np.asarray(g.params).reshape(-1, 2)
    xs = np.concatenate([[0.0], knots[:, 0]])
    vs = np.concatenate([[0.0], knots[:, 1]])
    if v > vs[-1]:
        slope = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
        return float(xs[-1] + (v - vs[-1]) / slope)
    return float(np.interp(v, vs, xs))


@dataclass(frozen=True)
class MeasureSpec:
    """Correlation quantifier Q plus its distance d and continuity function g.

    g may be None, in which case witnesses resolve the audited default
    constant for the cut they evaluate (see `resolve_g`).
    """

    quantifier: str
    distance: str
    g: ContinuityFn | None = None

    def __post_init__(self):
        if self.quantifier not in QUANTIFIERS:
            raise ValueError(f"unknown quantifier {self.quantifier!r}")
        if self.distance not in DISTANCES:
            raise ValueError(f"unknown distance {self.distance!r}")


def default_measure(quantifier: str) -> MeasureSpec:
    """Shipped pairings: entanglement monotones ride on trace distance with a
    linear audited g; mutual information on relative entropy."""
    if quantifier in ("negativity", "log_negativity", "rel_ent_entanglement"):
        return MeasureSpec(quantifier, "trace", None)
    if quantifier == "mutual_information":
        return MeasureSpec(quantifier, "relative_entropy", None)
    raise ValueError(f"unknown quantifier {quantifier!r}")


def resolve_g(spec: MeasureSpec, d_x: int, d_y: int) -> ContinuityFn:
    """Concrete g for a cut with side dimensions (d_x, d_y).

    Defaults: negativity c = d_x (provable), log-negativity c = d_x (audited),
    mutual information c = 2 (audited; the identity fails a sampling audit),
    REE c = 2 log2(min dim) + 2 (audited).
    """
    if spec.g is not None:
        return spec.g
    if spec.quantifier in ("negativity", "log_negativity"):
        return linear_g(float(d_x), source="audited-default")
    if spec.quantifier == "mutual_information":
        return linear_g(2.0, source="audited-default")
    return linear_g(2.0 * np.log2(min(d_x, d_y)) + 2.0, source="audited-default")


# ---------------------------------------------------------------------------
# bipartitions

def normalize_cut(layout: SystemLayout, cut) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Accept either the X side or an (X, Y) pair; Y defaults to the complement."""
    if isinstance(cut, (list, tuple)) and len(cut) == 2 \
            and isinstance(cut[0], (list, tuple)) and isinstance(cut[1], (list, tuple)):
        x, y = tuple(cut[0]), tuple(cut[1])
    else:
        x = (cut,) if isinstance(cut, str) else tuple(cut)
        y = layout.complement(x)
    for l in x + y:
        layout.index_of(l)
    if set(x) & set(y) or set(x + y) != set(layout.labels):
        raise ValueError(f"cut {x}:{y} does not partition {layout.labels}")
    return x, y


def bipartite_view(state: QState, cut) -> tuple[np.ndarray, int, int]:
    """State matrix reordered so the cut is contiguous; returns (matrix, dX, dY)."""
    x, y = normalize_cut(state.layout, cut)
    mat = permute_matrix(state.matrix, state.layout, x + y)
    d_x = int(np.prod([state.layout.dim_of(l) for l in x]))
    d_y = int(np.prod([state.layout.dim_of(l) for l in y]))
    return mat, d_x, d_y


# ---------------------------------------------------------------------------
# closed-form quantifiers

def negativity(state: QState, cut) -> float:
    """(||rho^{T_X}||_1 - 1) / 2 across the cut."""
    x, _ = normalize_cut(state.layout, cut)
    pt = ptranspose_matrix(state.matrix, state.layout, x)
    tn = float(np.sum(np.abs(np.linalg.eigvalsh(pt))))
    return max(0.0, 0.5 * (tn - 1.0))


def log_negativity(state: QState, cut) -> float:
    """log2 ||rho^{T_X}||_1 in bits."""
    x, _ = normalize_cut(state.layout, cut)
    pt = ptranspose_matrix(state.matrix, state.layout, x)
    tn = float(np.sum(np.abs(np.linalg.eigvalsh(pt))))
    return max(0.0, float(np.log2(tn)))


def mutual_information(state: QState, cut) -> float:
    """S(X) + S(Y) - S(XY) in bits."""
    x, y = normalize_cut(state.layout, cut)
    sx = vn_entropy(ptrace_matrix(state.matrix, state.layout, x))
    sy = vn_entropy(ptrace_matrix(state.matrix, state.layout, y))
    sxy = vn_entropy(state)
    return max(0.0, sx + sy - sxy)


def relative_entropy(rho, sigma) -> float:
    """S(rho || sigma) in bits; +inf when supp(rho) leaks out of supp(sigma)."""
    r = rho.matrix if isinstance(rho, QState) else np.asarray(rho, dtype=complex)
    s = sigma.matrix if isinstance(sigma, QState) else np.asarray(sigma, dtype=complex)
    w = np.clip(np.linalg.eigvalsh(r), 0.0, None)
    w = w[w > 1e-15]
    t1 = float(np.sum(w * np.log2(w)))
    sw, sv = np.linalg.eigh(s)
    proj_weights = np.real(np.einsum("ij,jk,ki->i", sv.conj().T, r, sv))
    if np.any((sw < 1e-14) & (proj_weights > 1e-12)):
        return float("inf")
    sw = np.clip(sw, 1e-300, None)
    t2 = float(np.real(np.trace(r @ ((sv * np.log2(sw)) @ sv.conj().T))))
    return t1 - t2


# ---------------------------------------------------------------------------
# optimizer result type

@dataclass(frozen=True)
class OptResult:
    value: float
    status: str      # exact | converged | best-effort
    gap: float = 0.0

    def __post_init__(self):
        if self.status not in ("exact", "converged", "best-effort", "numerical"):
            raise ValueError(f"unknown status {self.status!r}")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "gap", float(self.gap))


# ---------------------------------------------------------------------------
# relative entropy of entanglement
#
# Upper bound through alternating minimization over mixtures of product pure
# states: a Frank-Wolfe atom-growing phase interleaved with a joint quasi-
# Newton polish of all atoms.  The Frank-Wolfe dual gap certifies the
# distance to the optimum over the separable set.

def _log_frechet(sigma: np.ndarray, rho: np.ndarray, floor: float) -> np.ndarray:
    """Derivative of sigma -> Tr(rho log sigma), in sigma's eigenbasis."""
    s, v = np.linalg.eigh(sigma)
    s = np.clip(s, floor, None)
    r = v.conj().T @ rho @ v
    ls = np.log(s)
    diff = s[:, None] - s[None, :]
    num = ls[:, None] - ls[None, :]
    big = np.maximum(s[:, None], s[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(np.abs(diff) > 1e-15 * big, num / diff, 1.0 / big)
    g = v @ (f * r) @ v.conj().T
    return 0.5 * (g + g.conj().T)


def _neg_tr_rho_log_sigma(rho: np.ndarray, sigma: np.ndarray, floor: float) -> float:
    s, w = np.linalg.eigh(sigma)
    s = np.clip(s, floor, None)
    return -float(np.real(np.trace(rho @ ((w * np.log(s)) @ w.conj().T))))


def _entropy_nats(rho: np.ndarray) -> float:
    w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    w = w[w > 1e-15]
    return float(np.sum(w * np.log(w)))


def _best_product_atom(g_mat, d_a, d_b, rng, n_starts=8, iters=50, seeds=()):
    """Maximize <a b|G|a b> over product kets by alternating eigenvector steps."""
    gt = g_mat.reshape(d_a, d_b, d_a, d_b)
    starts = list(seeds)
    for _ in range(n_starts):
        starts.append((random_ket(d_a, rng), random_ket(d_b, rng)))
    best_val, best = -np.inf, None
    for a, b in starts:
        val_old = -np.inf
        val = val_old
        for _ in range(iters):
            ma = np.einsum("j,ijkl,l->ik", b.conj(), gt, b, optimize=True)
            a = np.linalg.eigh(0.5 * (ma + ma.conj().T))[1][:, -1]
            mb = np.einsum("i,ijkl,k->jl", a.conj(), gt, a, optimize=True)
            wb, vb = np.linalg.eigh(0.5 * (mb + mb.conj().T))
            b = vb[:, -1]
            val = float(np.real(wb[-1]))
            if val - val_old < 1e-13:
                break
            val_old = val
        if val > best_val:
            best_val, best = val, (a, b)
    return best_val, best


def _polish_atoms(rho, atoms_a, atoms_b, d_a, d_b, maxiter=500):
    """Jointly refine unnormalized product atoms by L-BFGS on
    h - Tr rho log(sigma / Tr sigma), sigma = sum_k |a_k b_k><a_k b_k|."""
    k = atoms_a.shape[0]
    d = d_a * d_b
    h = _entropy_nats(rho)
    eye = np.eye(d)

    def unpack(x):
        na, nb = k * d_a, k * d_b
        a = (x[:na] + 1j * x[na:2 * na]).reshape(k, d_a)
        b = (x[2 * na:2 * na + nb] + 1j * x[2 * na + nb:]).reshape(k, d_b)
        return a, b

    def fg(x):
        a, b = unpack(x)
        u = np.einsum("ki,kj->kij", a, b).reshape(k, d)
        sig = u.T @ u.conj()
        sig = 0.5 * (sig + sig.conj().T)
        s = max(float(np.real(np.trace(sig))), 1e-30)
        val = h + _neg_tr_rho_log_sigma(rho, sig, 1e-30) + np.log(s)
        g = _log_frechet(sig, rho, 1e-30)
        m = -g + eye / s
        mu = (m @ u.T).T.reshape(k, d_a, d_b)
        ga = np.einsum("kij,kj->ki", mu, b.conj())
        gb = np.einsum("kij,ki->kj", mu, a.conj())
        grad = np.concatenate([2 * ga.real.ravel(), 2 * ga.imag.ravel(),
                               2 * gb.real.ravel(), 2 * gb.imag.ravel()])
        return val, grad

    x0 = np.concatenate([atoms_a.real.ravel(), atoms_a.imag.ravel(),
                         atoms_b.real.ravel(), atoms_b.imag.ravel()])
    res = minimize(fg, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "ftol": 1e-16, "gtol": 1e-14})
    return unpack(res.x)


def _marginal_atoms(rho, d_a, d_b):
    t = rho.reshape(d_a, d_b, d_a, d_b)
    wa, va = np.linalg.eigh(np.einsum("ijkj->ik", t))
    wb, vb = np.linalg.eigh(np.einsum("ijil->jl", t))
    a_list, b_list = [], []
    for i in range(d_a):
        for j in range(d_b):
            w = float(np.real(wa[i] * wb[j]))
            if w > 1e-14:
                a_list.append(np.sqrt(w) * va[:, i].astype(complex))
                b_list.append(vb[:, j].astype(complex))
    return np.array(a_list), np.array(b_list)


def _ree_run(rho, d_a, d_b, tol, rng, k_cap, fw_iters, rounds, atoms=None):
    d = d_a * d_b
    h = _entropy_nats(rho)
    if atoms is None:
        aa, bb = _marginal_atoms(rho, d_a, d_b)
    else:
        aa, bb = atoms
    best_val, best_gap = np.inf, np.inf
    for _ in range(rounds):
        aa, bb = _polish_atoms(rho, aa, bb, d_a, d_b)
        u = np.einsum("ki,kj->kij", aa, bb).reshape(-1, d)
        sig = u.T @ u.conj()
        sig = 0.5 * (sig + sig.conj().T)
        sig /= max(float(np.real(np.trace(sig))), 1e-30)
        g = _log_frechet(sig, rho, 1e-300)
        seeds = []
        for i in range(min(len(aa), 6)):
            na, nb = np.linalg.norm(aa[i]), np.linalg.norm(bb[i])
            if na > 1e-12 and nb > 1e-12:
                seeds.append((aa[i] / na, bb[i] / nb))
        mx, _ = _best_product_atom(g, d_a, d_b, rng, n_starts=8, seeds=seeds)
        gap = mx - float(np.real(np.trace(sig @ g)))
        val = h + _neg_tr_rho_log_sigma(rho, sig, 1e-300)
        if val < best_val:
            best_val, best_gap = val, gap
        elif val < best_val + 1e-12:
            best_gap = min(best_gap, gap)
        if gap < tol * LN2:
            break
        for _ in range(fw_iters):
            u = np.einsum("ki,kj->kij", aa, bb).reshape(-1, d)
            sig = u.T @ u.conj()
            sig = 0.5 * (sig + sig.conj().T)
            sig /= max(float(np.real(np.trace(sig))), 1e-30)
            g = _log_frechet(sig, rho, 1e-30)
            mx, atom = _best_product_atom(g, d_a, d_b, rng, n_starts=4)
            gap = mx - float(np.real(np.trace(sig @ g)))
            if gap < tol * LN2:
                break
            t0 = min(0.2, max(0.02, gap / 4.0))
            aa = np.vstack([np.sqrt(1 - t0) * aa, np.sqrt(t0) * atom[0][None, :]])
            bb = np.vstack([bb, atom[1][None, :]])
            if len(aa) > k_cap:
                weight = np.linalg.norm(aa, axis=1) * np.linalg.norm(bb, axis=1)
                keep = np.argsort(weight)[-k_cap:]
                aa, bb = aa[keep], bb[keep]
    return best_val, best_gap


def rel_ent_entanglement(state: QState, cut, tol: float = 1e-7,
                         restarts: int = 8, rng=None, k_cap: int | None = None,
                         fw_iters: int = 25, rounds: int = 4,
                         side_cap: int = REE_SIDE_CAP) -> OptResult:
    """Relative entropy of entanglement across the cut, in bits.

    Minimizes S(rho || sigma) over explicit mixtures of product pure states,
    so the value is always an upper bound on the true REE; `gap` is the
    Frank-Wolfe dual gap, an estimate of the distance to the optimum.  Status
    is "converged" only when gap <= tol; otherwise "best-effort".
    """
    mat, d_a, d_b = bipartite_view(state, cut)
    if min(d_a, d_b) > side_cap:
        raise ValueError(
            f"smaller side of the cut is {min(d_a, d_b)} > cap {side_cap}")
    rng = as_rng(rng)
    if k_cap is None:
        k_cap = (d_a * d_b) ** 2
    best_val, best_gap = np.inf, np.inf
    for attempt in range(max(1, restarts)):
        if attempt == 0:
            atoms = None
        else:
            n0 = min(k_cap, d_a * d_b)
            atoms = (np.array([random_ket(d_a, rng) / np.sqrt(n0) for _ in range(n0)]),
                     np.array([random_ket(d_b, rng) for _ in range(n0)]))
        val, gap = _ree_run(mat, d_a, d_b, tol, rng, k_cap, fw_iters, rounds, atoms)
        if val < best_val:
            best_val, best_gap = val, gap
        elif val < best_val + 1e-12:
            best_gap = min(best_gap, gap)
        if best_gap < tol * LN2:
            break
    value = max(0.0, best_val / LN2)
    gap_bits = max(0.0, best_gap / LN2)
    status = "converged" if gap_bits <= tol else "best-effort"
    return OptResult(value, status, gap_bits)


# ---------------------------------------------------------------------------
# unified quantifier dispatch

def quantify(state: QState, cut, spec: MeasureSpec, rng=None, **ree_opts) -> OptResult:
    q = spec.quantifier
    if q == "negativity":
        return OptResult(negativity(state, cut), "exact")
    if q == "log_negativity":
        return OptResult(log_negativity(state, cut), "exact")
    if q == "mutual_information":
        return OptResult(mutual_information(state, cut), "exact")
    return rel_ent_entanglement(state, cut, rng=rng, **ree_opts)


# ---------------------------------------------------------------------------
# total correlations

def _distance(distance: str, a: np.ndarray, b: np.ndarray) -> float:
    if distance == "trace":
        return trace_distance(a, b)
    if distance == "spectral":
        return spectral_norm(a - b)
    return relative_entropy(a, b)


def total_correlations(state: QState, cut, spec: MeasureSpec,
                       rng=None, restarts: int = 4, maxiter: int = 400,
                       tol: float = 1e-9) -> OptResult:
    """inf over product states of g(d(rho, sigma_X (x) sigma_Y)).

    With relative-entropy distance the infimum sits at the marginals, so
    g(mutual information) is returned exactly.  Metric distances go through
    a gradient-free product-state search seeded at the marginals.
    """
    x, y = normalize_cut(state.layout, cut)
    d_x = int(np.prod([state.layout.dim_of(l) for l in x]))
    d_y = int(np.prod([state.layout.dim_of(l) for l in y]))
    g = resolve_g(spec, d_x, d_y)
    if spec.distance == "relative_entropy":
        return OptResult(g_eval(g, mutual_information(state, cut)), "exact")

    mat, d_x, d_y = bipartite_view(state, cut)
    t = mat.reshape(d_x, d_y, d_x, d_y)
    rx = np.einsum("ijkj->ik", t)
    ry = np.einsum("ijil->jl", t)

    def dist_for(sx, sy):
        return _distance(spec.distance, mat, np.kron(sx, sy))

    base = dist_for(rx, ry)
    if base <= tol:
        return OptResult(g_eval(g, max(0.0, base)), "exact")

    rng = as_rng(rng)

    def factor(params, d):
        m = (params[:d * d] + 1j * params[d * d:]).reshape(d, d)
        s = m @ m.conj().T
        tr = np.real(np.trace(s))
        if tr < 1e-30:
            return np.eye(d) / d
        return s / tr

    def objective(params):
        sx = factor(params[:2 * d_x * d_x], d_x)
        sy = factor(params[2 * d_x * d_x:], d_y)
        return dist_for(sx, sy)

    def sqrt_params(s, d):
        w, v = np.linalg.eigh(s)
        m = v * np.sqrt(np.clip(w, 0, None))
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    best = base
    converged = False
    starts = [np.concatenate([sqrt_params(rx, d_x), sqrt_params(ry, d_y)])]
    for _ in range(max(0, restarts - 1)):
        starts.append(rng.normal(size=2 * (d_x * d_x + d_y * d_y)))
    for s0 in starts:
        res = minimize(objective, s0, method="Powell",
                       options={"maxiter": maxiter, "xtol": 1e-10, "ftol": 1e-12})
        if res.fun < best:
            best = float(res.fun)
        converged = converged or bool(res.success)
    status = "converged" if converged else "best-effort"
    return OptResult(g_eval(g, max(0.0, best)), status)


# ---------------------------------------------------------------------------
# correlation capacity

def capacity(spec: MeasureSpec, d_a: int, d_m: int) -> OptResult:
    """sup over AM states of Q_{A:M}; analytic where known.

    REE and log-negativity: log2 min(d_A, d_M); mutual information:
    2 log2 min(d_A, d_M); negativity: (min(d_A, d_M) - 1) / 2.
    """
    if d_m < 1 or d_a < 1:
        raise ValueError("dimensions must be >= 1")
    dm = min(d_a, d_m)
    if spec.quantifier in ("rel_ent_entanglement", "log_negativity"):
        return OptResult(float(np.log2(dm)), "exact")
    if spec.quantifier == "mutual_information":
        return OptResult(2.0 * float(np.log2(dm)), "exact")
    if spec.quantifier == "negativity":
        return OptResult((dm - 1) / 2.0, "exact")
    return capacity_numeric(spec, d_a, d_m)  # pragma: no cover


def capacity_numeric(spec: MeasureSpec, d_a: int, d_m: int,
                     n_samples: int = 200, rng=None, **ree_opts) -> OptResult:
    """Monte-Carlo capacity: maximize Q over random pure AM states.

    Q is convex for all shipped quantifiers, so the supremum is attained on
    pure states.  Flagged "numerical"; used to cross-check the analytic table.
    """
    rng = as_rng(rng)
    layout = SystemLayout((("A", d_a), ("M", d_m)))
    best = 0.0
    for _ in range(n_samples):
        v = random_ket(d_a * d_m, rng)
        st = QState(np.outer(v, v.conj()), layout)
        r = quantify(st, ("A",), spec, rng=rng, **ree_opts)
        best = max(best, r.value)
    return OptResult(best, "numerical")


# ---------------------------------------------------------------------------
# sampling audit of gd-continuity

@dataclass(frozen=True)
class AuditResult:
    passed: bool
    n_pairs: int
    n_violations: int
    worst_margin: float
    worst_ratio: float


def audit_continuity(spec: MeasureSpec, d_x: int, d_y: int,
                     n_pairs: int = 10_000, rng=None, g: ContinuityFn | None = None,
                     **ree_opts) -> AuditResult:
    """Check |Q(x) - Q(y)| <= g(d(x, y)) on sampled pairs of mixed states."""
    rng = as_rng(rng)
    g = g if g is not None else resolve_g(spec, d_x, d_y)
    layout = SystemLayout((("X", d_x), ("Y", d_y)))
    d = d_x * d_y
    n_viol = 0
    worst_margin = 0.0
    worst_ratio = 0.0
    for _ in range(n_pairs):
        m1 = _random_mixed(d, rng)
        m2 = _random_mixed(d, rng)
        s1, s2 = QState(m1, layout), QState(m2, layout)
        q1 = quantify(s1, ("X",), spec, rng=rng, **ree_opts).value
        q2 = quantify(s2, ("X",), spec, rng=rng, **ree_opts).value
        dist = _distance(spec.distance, m1, m2)
        if not np.isfinite(dist) or dist < 1e-12:
            continue
        bound = g_eval(g, dist)
        dq = abs(q1 - q2)
        worst_ratio = max(worst_ratio, dq / bound) if bound > 0 else worst_ratio
        if dq > bound + 1e-12:
            n_viol += 1
            worst_margin = max(worst_margin, dq - bound)
    return AuditResult(n_viol == 0, n_pairs, n_viol, worst_margin, worst_ratio)


def _random_mixed(d: int, rng) -> np.ndarray:
    rank = int(rng.integers(1, d + 1))
    gin = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = gin @ gin.conj().T
    return m / np.real(np.trace(m))
