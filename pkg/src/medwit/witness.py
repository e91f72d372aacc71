"""Witness inequalities and quantitative non-decomposability bounds.

Correlations measured after the dynamics are compared against the mediator's
correlation capacity plus the initial total correlations; any excess
lower-bounds (through g^{-1}) the distance from the dynamics to the set of
decomposable maps, or to the maps with a decomposable m-dilation when only
the probes are accessible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .correlations import (
    ContinuityFn, MeasureSpec, OptResult, capacity, g_inv, linear_g,
    quantify, resolve_g, total_correlations,
)
from .dynamics import (
    DecomposableSpec, DilationSpec, marginal_of_dilation, trotter_unitary,
)
from .sampling import as_rng, haar_unitary
from .tensor import (
    QOp, QState, SystemLayout, basis_ket, embed_matrix, expm_hamiltonian,
    partial_trace, permute_matrix, ptrace_matrix, pure_state, spectral_norm,
    trace_distance,
)

CERTIFY_FLOOR = 1e-9  # numeric noise below which a violation is never certified

__all__ = [
    "WitnessReport", "witness_accessible", "witness_inaccessible",
    "excluded_mediator_dim", "FalsifyResult", "falsify_decomposition",
    "swap_dilation_test", "strict_inclusion_demo", "SandwichResult",
    "sandwich_check",
]


@dataclass(frozen=True)
class WitnessReport:
    """Evaluated witness inequality with provenance.

    bound = capacity + total_corr; violation = max(0, lhs - bound);
    nd_lower_bound = g^{-1}(violation).  `certified_violation` subtracts the
    gap of any upper-bounding optimizer on the lhs side, and `certified` is
    refused whenever a best-effort optimizer's gap reaches the violation.
    """

    kind: str
    measure: str
    lhs: float
    capacity: float
    total_corr: float
    bound: float
    violation: float
    nd_lower_bound: float
    certified_violation: float
    certified: bool
    mediator_dim_assumed: int
    statuses: tuple[tuple[str, OptResult], ...]
    g: ContinuityFn

    def status_summary(self) -> str:
        return ";".join(f"{name}={r.status}" for name, r in self.statuses)


def _build_report(kind, spec, g, lhs_res, cap_res, tc_res, m_assumed) -> WitnessReport:
    bound = cap_res.value + tc_res.value
    violation = max(0.0, lhs_res.value - bound)
    candidate = max(0.0, violation - lhs_res.gap)
    refused = any(r.status == "best-effort" and r.gap >= violation
                  for r in (lhs_res, cap_res, tc_res))
    certified = bool(candidate > CERTIFY_FLOOR and not refused)
    certified_violation = candidate if certified else 0.0
    return WitnessReport(
        kind=kind,
        measure=f"{spec.quantifier}/{spec.distance}",
        lhs=lhs_res.value,
        capacity=cap_res.value,
        total_corr=tc_res.value,
        bound=bound,
        violation=violation,
        nd_lower_bound=g_inv(g, violation),
        certified_violation=certified_violation,
        certified=certified,
        mediator_dim_assumed=m_assumed,
        statuses=(("lhs", lhs_res), ("capacity", cap_res), ("total_corr", tc_res)),
        g=g,
    )


def witness_accessible(rho0: QState, rho_t: QState, spec: MeasureSpec,
                       rng=None, **quant_opts) -> WitnessReport:
    """Accessible-mediator witness on a tripartite (A, M, B) pair of states.

    lhs = Q_{A:MB}(rho_t); bound = sup_{sigma_AM} Q_{A:M} + I_{AM:B}(rho_0).
    The g^{-1} of the excess lower-bounds the state-induced operator distance
    from the dynamics to the decomposable set.
    """
    if rho0.layout != rho_t.layout:
        raise ValueError("initial and evolved states must share one layout")
    lay = rho0.layout
    if set(lay.labels) != {"A", "M", "B"}:
        raise ValueError(f"expected labels A, M, B; got {lay.labels}")
    d_a, d_m, d_b = lay.dim_of("A"), lay.dim_of("M"), lay.dim_of("B")
    g = resolve_g(spec, d_a, d_m * d_b)
    spec_g = replace(spec, g=g)
    rng = as_rng(rng)
    lhs = quantify(rho_t, (("A",), ("M", "B")), spec_g, rng=rng, **quant_opts)
    cap = capacity(spec_g, d_a, d_m)
    tc = total_correlations(rho0, (("A", "M"), ("B",)), spec_g, rng=rng)
    return _build_report("accessible", spec, g, lhs, cap, tc, d_m)


def witness_inaccessible(rho0_ab: QState, rho_t_ab: QState, spec: MeasureSpec,
                         m: int, rng=None, **quant_opts) -> WitnessReport:
    """Probe-only witness against maps with a decomposable m-dilation.

    lhs = Q_{A:B}(rho_t); the capacity term assumes a mediator of dimension
    at most m, which is a user input because the mediator is not measured.
    The g^{-1} of the excess lower-bounds the completely bounded distance to
    the set of maps with a decomposable m-dilation.
    """
    if rho0_ab.layout != rho_t_ab.layout:
        raise ValueError("initial and evolved states must share one layout")
    lay = rho0_ab.layout
    if set(lay.labels) != {"A", "B"}:
        raise ValueError(f"expected labels A, B; got {lay.labels}")
    if m < 1:
        raise ValueError("assumed mediator dimension must be >= 1")
    d_a, d_b = lay.dim_of("A"), lay.dim_of("B")
    g = resolve_g(spec, d_a, d_b)
    spec_g = replace(spec, g=g)
    rng = as_rng(rng)
    lhs = quantify(rho_t_ab, (("A",), ("B",)), spec_g, rng=rng, **quant_opts)
    cap = capacity(spec_g, d_a, m)
    tc = total_correlations(rho0_ab, (("A",), ("B",)), spec_g, rng=rng)
    return _build_report("inaccessible", spec, g, lhs, cap, tc, m)


def excluded_mediator_dim(e_obs: float, snap_tol: float = 1e-4) -> int:
    """Smallest mediator dimension not excluded by observing e_obs bits.

    All m with log2 m < e_obs are excluded (capacity log2 m for entanglement
    measures); boundary convention: equality is not excluded.  2^e within
    snap_tol (relative) of an integer is treated as that integer, so inputs
    rounded to a few digits (e.g. 1.585 for log2 3) resolve as intended.
    """
    if e_obs < 0:
        raise ValueError("observed correlation must be nonnegative")
    x = 2.0 ** float(e_obs)
    n = int(round(x))
    if n >= 1 and abs(x - n) <= snap_tol * max(1.0, n):
        return n
    return max(1, int(np.ceil(x)))


# ---------------------------------------------------------------------------
# numerical falsification of a decomposition order

@dataclass(frozen=True)
class FalsifyResult:
    """Best found distance to products V_second V_first (an upper bound on the
    true infimum): a large value is evidence, not proof, of non-decomposability."""

    best_distance: float
    order: str
    distances: tuple[float, ...]
    best_first: np.ndarray
    best_second: np.ndarray
    restarts: int
    status: str

    def histogram(self, bins: int = 10):
        lo, hi = min(self.distances), max(self.distances)
        if hi - lo < 1e-9:  # all restarts landed on one value
            lo, hi = lo - 0.5, hi + 0.5
        return np.histogram(self.distances, bins=bins, range=(lo, hi))


def _polar_unitary(s: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(s)
    return u @ vh


def falsify_decomposition(u_target: QOp, order: str = "AM_then_BM",
                          restarts: int = 50, max_iter: int = 300,
                          rng=None) -> FalsifyResult:
    """Multi-start search for the closest product V_second V_first to a unitary.

    order "AM_then_BM" searches products with the (A, M) factor applied
    first; "BM_then_AM" the reverse.  Each restart alternates structured
    Procrustes updates (partial-trace + polar) of the two factors, which
    minimizes the Frobenius distance; the reported distance is spectral.
    """
    lay = u_target.layout
    if set(lay.labels) != {"A", "M", "B"}:
        raise ValueError(f"expected a tripartite (A, M, B) unitary, got {lay.labels}")
    if order == "AM_then_BM":
        first, second = ("A", "M"), ("B", "M")
    elif order == "BM_then_AM":
        first, second = ("B", "M"), ("A", "M")
    else:
        raise ValueError(f"unknown order {order!r}")
    rng = as_rng(rng)
    u = u_target.matrix
    d1 = int(np.prod([lay.dim_of(l) for l in first]))
    d2 = int(np.prod([lay.dim_of(l) for l in second]))

    dists = []
    best = (np.inf, None, None)
    n_converged = 0
    for _ in range(restarts):
        w1 = haar_unitary(d1, rng)
        w2 = np.eye(d2, dtype=complex)
        for _ in range(max_iter):
            v1 = embed_matrix(w1, first, lay)
            w2 = _polar_unitary(ptrace_matrix(u @ v1.conj().T, lay, second))
            v2 = embed_matrix(w2, second, lay)
            w1_new = _polar_unitary(ptrace_matrix(v2.conj().T @ u, lay, first))
            delta = float(np.max(np.abs(w1_new - w1)))
            w1 = w1_new
            if delta < 1e-13:
                n_converged += 1
                break
        v1 = embed_matrix(w1, first, lay)
        v2 = embed_matrix(w2, second, lay)
        dist = spectral_norm(u - v2 @ v1)
        dists.append(dist)
        if dist < best[0]:
            best = (dist, w1, w2)
    status = "converged" if n_converged == restarts else "best-effort"
    return FalsifyResult(best_distance=float(best[0]), order=order,
                         distances=tuple(dists), best_first=best[1],
                         best_second=best[2], restarts=restarts, status=status)


# ---------------------------------------------------------------------------
# swapping has no decomposable dilation: the two-probe test

def swap_dilation_test(dil: DilationSpec, target: str = "swap") -> float:
    """Deviation of a dilation's marginal map from SWAP on two qubits.

    Probes |00> and |01> are pushed through the marginal map; the output
    A-marginals are compared with the swapped targets |0><0| and |1><1|.
    Any decomposable dilation produces identical A-marginals for the two
    probes (the BM step cannot feed B back into A), so the larger of the two
    trace distances is at least 1/2.  target "identity" is the negative
    control: the A-marginal target is then the unchanged A input.
    """
    d_a = dil.body.am.layout.dim_of("A")
    d_b = dil.body.bm.layout.dim_of("B")
    if d_a != 2 or d_b != 2:
        raise ValueError("the probe argument is for two-qubit SWAP targets")
    if target not in ("swap", "identity"):
        raise ValueError(f"unknown target {target!r}")
    ab = SystemLayout((("A", 2), ("B", 2)))
    worst = 0.0
    for b_in in (0, 1):
        probe = pure_state(basis_ket(ab, (0, b_in)), ab)
        out = marginal_of_dilation(dil, probe)
        a_marg = partial_trace(out, ("A",)).matrix
        want = np.zeros((2, 2), dtype=complex)
        if target == "swap":
            want[b_in, b_in] = 1.0  # SWAP puts the B input on A
        else:
            want[0, 0] = 1.0  # identity leaves the A input alone
        worst = max(worst, trace_distance(a_marg, want))
    return worst


# ---------------------------------------------------------------------------
# strict growth of the dilation sets with mediator dimension

def strict_inclusion_demo(m: int, d_ab: int | None = None,
                          spec: MeasureSpec | None = None, rng=None,
                          cap: int | None = None, **quant_opts) -> WitnessReport:
    """Marginal map witnessed outside the (m-1)-dilation set.

    Builds the AB map Tr_M SWAP-like_BM U_AM (. (x) |0><0|_M) with U_AM
    maximally entangling, applies it to |00>, and runs the probe-only
    witness with assumed cap m - 1 (overridable).  The entanglement produced
    is log2 m, the capacity is log2(m - 1), so the report's violation is
    their difference; with cap m the same data yields violation 0.
    """
    from .dynamics import KrausMap, max_entangling_unitary

    if m < 2:
        raise ValueError("need mediator dimension >= 2")
    d = int(d_ab) if d_ab is not None else max(4, m)
    if d < m:
        raise ValueError("need d_A = d_B >= m")
    cap = m - 1 if cap is None else int(cap)
    spec = spec if spec is not None else MeasureSpec("rel_ent_entanglement", "trace")
    rng = as_rng(rng)

    u_am = max_entangling_unitary(d, m)
    # unitary on (B, M) moving the first m levels of B into M and back
    d_bm = d * m
    w = np.zeros((d_bm, d_bm), dtype=complex)
    for b in range(d):
        for j in range(m):
            if b < m:
                w[j * m + b, b * m + j] = 1.0
            else:
                w[b * m + j, b * m + j] = 1.0
    w_bm = QOp(w, SystemLayout((("B", d), ("M", m))), "unitary")

    body = DecomposableSpec(am=KrausMap.from_unitary(u_am),
                            bm=KrausMap.from_unitary(w_bm), order="AM_then_BM")
    m_layout = SystemLayout((("M", m),))
    ket0 = np.zeros(m, dtype=complex)
    ket0[0] = 1.0
    dil = DilationSpec(m, pure_state(ket0, m_layout), body)

    ab = SystemLayout((("A", d), ("B", d)))
    rho0 = pure_state(basis_ket(ab, (0, 0)), ab)
    rho_t = marginal_of_dilation(dil, rho0)
    return witness_inaccessible(rho0, rho_t, spec, cap, rng=rng, **quant_opts)


# ---------------------------------------------------------------------------
# sandwiching the spectral degree of non-decomposability

@dataclass(frozen=True)
class SandwichResult:
    lower: float
    upper: float
    consistent: bool
    report: WitnessReport


def _spectral_adjusted_g(g: ContinuityFn, factor: float) -> ContinuityFn:
    """g valid for trace distance -> g valid for the spectral-norm distance.

    d_tr <= (D/2) d_inf on a D-dimensional space, so g_inf(s) = g(factor s)
    with factor = D/2.
    """
    if g.kind == "linear":
        return linear_g(g.params[0] * factor, source=g.source + "/spectral-adjusted")
    knots = np.asarray(g.params).reshape(-1, 2)
    knots = [(s / factor, v) for s, v in knots]
    return ContinuityFn("table", tuple(x for k in knots for x in k),
                        source=g.source + "/spectral-adjusted")


def sandwich_check(h_am: QOp, h_bm: QOp, t: float, rho0: QState,
                   spec: MeasureSpec, rng=None, slack: float = 1e-9,
                   **quant_opts) -> SandwichResult:
    """Bracket the spectral degree of non-decomposability of e^{-itH}.

    lower: correlation witness under the spectral-norm-induced operator
    distance (continuity constant adjusted from the trace-distance g);
    upper: 2 ||U - U_AM U_BM||_inf with the single-step product.
    """
    lay = rho0.layout
    if set(lay.labels) != {"A", "M", "B"}:
        raise ValueError(f"expected a tripartite (A, M, B) state, got {lay.labels}")
    if spec.distance == "relative_entropy":
        raise ValueError("sandwich_check needs a metric distance (trace or spectral)")
    d_a = lay.dim_of("A")
    d_mb = lay.dim_of("M") * lay.dim_of("B")
    g_base = resolve_g(spec, d_a, d_mb)
    factor = 1.0 if spec.distance == "spectral" else lay.total_dim / 2.0
    g_inf_fn = _spectral_adjusted_g(g_base, factor)
    spec_inf = MeasureSpec(spec.quantifier, "spectral", g_inf_fn)

    h_full = embed_matrix(h_am.matrix, h_am.layout.labels, lay) \
        + embed_matrix(h_bm.matrix, h_bm.layout.labels, lay)
    u = expm_hamiltonian(QOp(h_full, lay, "hermitian"), t)
    rho_t = QState(u.matrix @ rho0.matrix @ u.matrix.conj().T, lay, max(rho0.tol, 1e-9))
    report = witness_accessible(rho0, rho_t, spec_inf, rng=rng, **quant_opts)
    lower = report.nd_lower_bound

    single = trotter_unitary(h_am, h_bm, t, 1)
    upper = 2.0 * spectral_norm(u.matrix - single.matrix)
    return SandwichResult(lower=lower, upper=upper,
                          consistent=bool(lower <= upper + slack), report=report)
