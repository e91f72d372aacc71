"""Evolutions over mediated tripartite systems.

Closed Hamiltonian dynamics, Kraus maps, decomposable maps and their
dilations, Trotter products and commutator analysis, classicality checks.
Hamiltonians are time-independent.  Subsystem operators carry their own
(A, M) / (B, M) layouts and are lifted to the canonical (A, M, B) layout
by explicit index permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import as_rng, haar_unitary, random_kraus_ops, random_ket
from .tensor import (
    QOp, QState, SystemLayout, embed_matrix, expm_hamiltonian, kron_all,
    permute_matrix, ptrace_matrix, spectral_norm, trace_distance, tripartite,
)

DIM_CAP = 4096

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

__all__ = [
    "KrausMap", "DecomposableSpec", "DilationSpec",
    "evolve", "apply_map", "marginal_of_dilation",
    "trotter_unitary", "commutator_norm", "trotter_error", "min_steps",
    "trotter_steps_bound", "classicality_check", "dephasing_invariance",
    "ClassicalityReport", "operator_distance_estimate",
    "one_way_hamiltonians", "one_way_unitaries", "commuting_pair",
    "random_hermitian", "max_entangling_unitary", "swap_unitary",
    "random_channel", "depolarizing_map",
    "PAULI_I", "PAULI_X", "PAULI_Y", "PAULI_Z",
]


# ---------------------------------------------------------------------------
# map types

@dataclass(frozen=True)
class KrausMap:
    """CPTP map in Kraus form on its own subsystem layout."""

    kraus_ops: tuple[np.ndarray, ...]
    layout: SystemLayout
    kind: str = "general"  # unitary | general
    tol: float = 1e-8

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        d = self.layout.total_dim
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"Kraus operator shape {k.shape} != ({d}, {d})")
        comp = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(comp - np.eye(d)))
        if dev > self.tol:
            raise ValueError(f"Kraus completeness violated by {dev:.3e}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def acting_on(self) -> tuple[str, ...]:
        return self.layout.labels

    @classmethod
    def from_unitary(cls, u: QOp) -> "KrausMap":
        if u.kind != "unitary":
            raise ValueError("from_unitary requires a unitary QOp")
        return cls((u.matrix,), u.layout, kind="unitary", tol=max(u.tol, 1e-8))


@dataclass(frozen=True)
class DecomposableSpec:
    """A mediated two-step map: one factor on (A, M), one on (B, M).

    `order` selects which factor acts first on the input state.
    """

    am: KrausMap
    bm: KrausMap
    order: str = "AM_then_BM"  # or BM_then_AM

    def __post_init__(self):
        if set(self.am.acting_on) != {"A", "M"}:
            raise ValueError(f"am factor must act on A and M, got {self.am.acting_on}")
        if set(self.bm.acting_on) != {"B", "M"}:
            raise ValueError(f"bm factor must act on B and M, got {self.bm.acting_on}")
        if self.order not in ("AM_then_BM", "BM_then_AM"):
            raise ValueError(f"unknown order {self.order!r}")
        if self.am.layout.dim_of("M") != self.bm.layout.dim_of("M"):
            raise ValueError("mediator dimensions of the two factors differ")

    def steps(self) -> tuple[KrausMap, KrausMap]:
        return (self.am, self.bm) if self.order == "AM_then_BM" else (self.bm, self.am)

    def full_layout(self) -> SystemLayout:
        return tripartite(self.am.layout.dim_of("A"), self.am.layout.dim_of("M"),
                          self.bm.layout.dim_of("B"))


@dataclass(frozen=True)
class DilationSpec:
    """Mediator state plus decomposable body, defining a marginal AB map."""

    mediator_dim: int
    sigma_m: QState
    body: DecomposableSpec
    dim_cap: int = DIM_CAP

    def __post_init__(self):
        if not 1 <= self.mediator_dim <= self.dim_cap:
            raise ValueError(f"mediator dim {self.mediator_dim} outside [1, {self.dim_cap}]")
        if self.sigma_m.layout.labels != ("M",) \
                or self.sigma_m.layout.total_dim != self.mediator_dim:
            raise ValueError("sigma_m must be a state on M with the declared dimension")
        if self.body.am.layout.dim_of("M") != self.mediator_dim:
            raise ValueError("body mediator dimension does not match")


# ---------------------------------------------------------------------------
# applying dynamics

def evolve(state: QState, h: QOp, t: float) -> QState:
    """Closed evolution U rho U^dag with U = e^{-i t H}."""
    if h.layout.labels != state.layout.labels or h.layout.dims != state.layout.dims:
        raise ValueError(f"layout mismatch: {h.layout} vs {state.layout}")
    u = expm_hamiltonian(h, t).matrix
    return QState(u @ state.matrix @ u.conj().T, state.layout, state.tol)


def _apply_kraus(mat: np.ndarray, kmap: KrausMap, layout: SystemLayout) -> np.ndarray:
    out = np.zeros_like(mat)
    for k in kmap.kraus_ops:
        kf = embed_matrix(k, kmap.acting_on, layout)
        out += kf @ mat @ kf.conj().T
    return out


def apply_map(state: QState, m) -> QState:
    """Apply a KrausMap or a DecomposableSpec, embedding into the state layout."""
    if isinstance(m, KrausMap):
        out = _apply_kraus(state.matrix, m, state.layout)
    elif isinstance(m, DecomposableSpec):
        first, second = m.steps()
        out = _apply_kraus(state.matrix, first, state.layout)
        out = _apply_kraus(out, second, state.layout)
    else:
        raise TypeError(f"cannot apply object of type {type(m).__name__}")
    return QState(out, state.layout, max(state.tol, 1e-9))


def marginal_of_dilation(dil: DilationSpec, rho_ab: QState) -> QState:
    """Tr_M body(rho_AB (x) sigma_M): the AB map induced by the dilation."""
    if set(rho_ab.layout.labels) != {"A", "B"}:
        raise ValueError(f"input must live on (A, B), got {rho_ab.layout.labels}")
    d_a = rho_ab.layout.dim_of("A")
    d_b = rho_ab.layout.dim_of("B")
    if dil.body.am.layout.dim_of("A") != d_a or dil.body.bm.layout.dim_of("B") != d_b:
        raise ValueError("probe dimensions of input and dilation body differ")
    full = tripartite(d_a, dil.mediator_dim, d_b)
    ab_m = SystemLayout((("A", d_a), ("B", d_b), ("M", dil.mediator_dim)))
    joint = np.kron(permute_matrix(rho_ab.matrix, rho_ab.layout, ("A", "B")),
                    dil.sigma_m.matrix)
    joint = permute_matrix(joint, ab_m, full.labels)
    st = QState(joint, full, max(rho_ab.tol, 1e-9))
    evolved = apply_map(st, dil.body)
    reduced = ptrace_matrix(evolved.matrix, full, ("A", "B"))
    return QState(reduced, SystemLayout((("A", d_a), ("B", d_b))), max(rho_ab.tol, 1e-9))


# ---------------------------------------------------------------------------
# Trotter products and commutators

def _pair_layout(h_am: QOp, h_bm: QOp) -> SystemLayout:
    if set(h_am.layout.labels) != {"A", "M"}:
        raise ValueError(f"first Hamiltonian must act on A and M, got {h_am.layout.labels}")
    if set(h_bm.layout.labels) != {"B", "M"}:
        raise ValueError(f"second Hamiltonian must act on B and M, got {h_bm.layout.labels}")
    if h_am.layout.dim_of("M") != h_bm.layout.dim_of("M"):
        raise ValueError("mediator dimensions differ between the two Hamiltonians")
    return tripartite(h_am.layout.dim_of("A"), h_am.layout.dim_of("M"),
                      h_bm.layout.dim_of("B"))


def trotter_unitary(h_am: QOp, h_bm: QOp, t: float, r: int) -> QOp:
    """(e^{-i (t/r) H_AM} e^{-i (t/r) H_BM})^r on the full (A, M, B) layout."""
    if r < 1:
        raise ValueError("need at least one Trotter step")
    layout = _pair_layout(h_am, h_bm)
    u_am = embed_matrix(expm_hamiltonian(h_am, t / r).matrix, h_am.layout.labels, layout)
    u_bm = embed_matrix(expm_hamiltonian(h_bm, t / r).matrix, h_bm.layout.labels, layout)
    step = u_am @ u_bm
    return QOp(np.linalg.matrix_power(step, r), layout, "unitary", tol=1e-8)


def _embedded_pair(h_am: QOp, h_bm: QOp) -> tuple[np.ndarray, np.ndarray, SystemLayout]:
    layout = _pair_layout(h_am, h_bm)
    a = embed_matrix(h_am.matrix, h_am.layout.labels, layout)
    b = embed_matrix(h_bm.matrix, h_bm.layout.labels, layout)
    return a, b, layout


def commutator_norm(h_am: QOp, h_bm: QOp) -> float:
    """Spectral norm of [H_AM, H_BM] on the full layout."""
    a, b, _ = _embedded_pair(h_am, h_bm)
    return spectral_norm(a @ b - b @ a)


def trotter_error(h_am: QOp, h_bm: QOp, t: float, r: int) -> float:
    """Spectral-norm distance between e^{-itH} and the r-step product."""
    a, b, layout = _embedded_pair(h_am, h_bm)
    exact = expm_hamiltonian(QOp(a + b, layout, "hermitian"), t).matrix
    return spectral_norm(exact - trotter_unitary(h_am, h_bm, t, r).matrix)


def trotter_steps_bound(h_am: QOp, h_bm: QOp, t: float, eps: float) -> int:
    """First-order analytic step count: ceil(t^2 ||[H_AM, H_BM]|| / (2 eps))."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = commutator_norm(h_am, h_bm)
    return max(1, int(np.ceil(t * t * c / (2.0 * eps))))


def min_steps(h_am: QOp, h_bm: QOp, t: float, eps: float, r_cap: int = 2 ** 20) -> int:
    """Smallest step count with trotter_error <= eps, by doubling then bisection."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a, b, layout = _embedded_pair(h_am, h_bm)
    exact = expm_hamiltonian(QOp(a + b, layout, "hermitian"), t).matrix
    wa, va = np.linalg.eigh(h_am.matrix)
    wb, vb = np.linalg.eigh(h_bm.matrix)

    def err(r: int) -> float:
        ua = (va * np.exp(-1j * (t / r) * wa)) @ va.conj().T
        ub = (vb * np.exp(-1j * (t / r) * wb)) @ vb.conj().T
        step = embed_matrix(ua, h_am.layout.labels, layout) \
            @ embed_matrix(ub, h_bm.layout.labels, layout)
        return spectral_norm(exact - np.linalg.matrix_power(step, r))

    if err(1) <= eps:
        return 1
    hi = 1
    while err(hi) > eps:
        hi *= 2
        if hi > r_cap:
            raise RuntimeError(f"no step count up to cap {r_cap} reaches error {eps}")
    lo = hi // 2  # err(lo) > eps
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# classicality

@dataclass(frozen=True)
class ClassicalityReport:
    classical: bool
    commutator_norm: float


def classicality_check(h_am: QOp, h_bm: QOp, tol: float = 1e-9) -> ClassicalityReport:
    """Classical interactions = commuting couplings through the mediator."""
    c = commutator_norm(h_am, h_bm)
    return ClassicalityReport(classical=bool(c <= tol), commutator_norm=c)


def dephasing_invariance(h: QOp, projectors, tol: float = 1e-9) -> bool:
    """True iff H is invariant under dephasing in the mediator basis.

    `projectors` is a complete family of orthogonal projectors on M; the
    check is ||H - sum_m P_m H P_m|| <= tol on the full layout.
    """
    if "M" not in h.layout.labels:
        raise ValueError("Hamiltonian layout must contain the mediator M")
    d_m = h.layout.dim_of("M")
    projs = [np.asarray(p, dtype=complex) for p in projectors]
    total = sum(projs)
    if np.max(np.abs(total - np.eye(d_m))) > 1e-10:
        raise ValueError("projector family is not complete on M")
    for i, p in enumerate(projs):
        if np.max(np.abs(p @ p - p)) > 1e-10 or np.max(np.abs(p - p.conj().T)) > 1e-10:
            raise ValueError(f"element {i} is not an orthogonal projector")
        for q in projs[i + 1:]:
            if np.max(np.abs(p @ q)) > 1e-10:
                raise ValueError("projectors are not mutually orthogonal")
    dephased = np.zeros_like(h.matrix)
    for p in projs:
        e = embed_matrix(p, ("M",), h.layout)
        dephased += e @ h.matrix @ e
    return bool(spectral_norm(h.matrix - dephased) <= tol)


# ---------------------------------------------------------------------------
# state-induced operator distance (sampled lower estimate)

def as_channel(m, layout: SystemLayout):
    """Coerce a unitary QOp, KrausMap or DecomposableSpec into a matrix map."""
    if callable(m):
        return m
    if isinstance(m, QOp):
        if m.kind != "unitary":
            raise ValueError("QOp channels must be unitary")
        u = m.matrix if m.layout.labels == layout.labels \
            else embed_matrix(m.matrix, m.layout.labels, layout)
        return lambda rho: u @ rho @ u.conj().T
    if isinstance(m, (KrausMap, DecomposableSpec)):
        def apply(rho):
            st = QState(rho, layout, tol=1e-6)
            return apply_map(st, m).matrix
        return apply
    raise TypeError(f"cannot interpret {type(m).__name__} as a channel")


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    n_samples: int
    distance: str


def operator_distance_estimate(m1, m2, layout: SystemLayout, n_samples: int = 512,
                               rng=None, distance: str = "spectral",
                               refine_steps: int = 60,
                               extra_states=()) -> DistanceEstimate:
    """Lower estimate of sup_sigma d(m1(sigma), m2(sigma)) by state sampling.

    Half the samples are Haar pure states, half mixed; the best pure sample
    is refined by a short random hill climb.  `extra_states` are matrices
    appended to the sample set.
    """
    rng = as_rng(rng)
    f1, f2 = as_channel(m1, layout), as_channel(m2, layout)
    d = layout.total_dim

    def dist(rho):
        if distance == "spectral":
            return spectral_norm(f1(rho) - f2(rho))
        return trace_distance(f1(rho), f2(rho))

    best, best_ket = 0.0, None
    for i in range(n_samples):
        if i % 2 == 0:
            v = random_ket(d, rng)
            rho = np.outer(v, v.conj())
            val = dist(rho)
            if val > best:
                best, best_ket = val, v
        else:
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            rho = g @ g.conj().T
            rho /= np.real(np.trace(rho))
            best = max(best, dist(rho))
    for rho in extra_states:
        best = max(best, dist(np.asarray(rho, dtype=complex)))
    if best_ket is not None:
        step = 0.3
        v = best_ket
        cur = dist(np.outer(v, v.conj()))
        for _ in range(refine_steps):
            w = v + step * (rng.normal(size=d) + 1j * rng.normal(size=d))
            w /= np.linalg.norm(w)
            val = dist(np.outer(w, w.conj()))
            if val > cur:
                v, cur = w, val
            else:
                step *= 0.85
        best = max(best, cur)
    return DistanceEstimate(best, n_samples, distance)


# ---------------------------------------------------------------------------
# model constructors

def _qubit_pair_op(label1: str, label2: str, mat: np.ndarray, kind: str) -> QOp:
    layout = SystemLayout(((label1, 2), (label2, 2)))
    return QOp(mat, layout, kind)


def one_way_hamiltonians(strength: float = np.pi / 4) -> tuple[QOp, QOp]:
    """Qubit couplings Z_A X_M and Z_B Z_M.

    At the default strength the generated pair of unitaries composes into a
    map that is decomposable with the BM step first but provably not in the
    reverse order, so it separates decomposability from classicality.
    """
    h_am = _qubit_pair_op("A", "M", strength * np.kron(PAULI_Z, PAULI_X), "hermitian")
    h_bm = _qubit_pair_op("B", "M", strength * np.kron(PAULI_Z, PAULI_Z), "hermitian")
    return h_am, h_bm


def one_way_unitaries() -> tuple[QOp, QOp]:
    """(1 + i Z_A X_M)/sqrt(2) on (A, M) and (1 + i Z_B Z_M)/sqrt(2) on (B, M)."""
    u_am = (np.eye(4) + 1j * np.kron(PAULI_Z, PAULI_X)) / np.sqrt(2)
    u_bm = (np.eye(4) + 1j * np.kron(PAULI_Z, PAULI_Z)) / np.sqrt(2)
    return (_qubit_pair_op("A", "M", u_am, "unitary"),
            _qubit_pair_op("B", "M", u_bm, "unitary"))


def random_hermitian(d: int, rng, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2.0


def commuting_pair(rng, d_a: int = 2, d_m: int = 2, d_b: int = 2,
                   scale: float = 1.0) -> tuple[QOp, QOp]:
    """Random commuting couplings, block diagonal in the same mediator basis."""
    rng = as_rng(rng)
    blocks_a = [random_hermitian(d_a, rng, scale) for _ in range(d_m)]
    blocks_b = [random_hermitian(d_b, rng, scale) for _ in range(d_m)]
    h_am = np.zeros((d_a * d_m, d_a * d_m), dtype=complex)
    h_bm = np.zeros((d_b * d_m, d_b * d_m), dtype=complex)
    for m in range(d_m):
        pi = np.zeros((d_m, d_m), dtype=complex)
        pi[m, m] = 1.0
        h_am += np.kron(blocks_a[m], pi)
        h_bm += np.kron(blocks_b[m], pi)
    return (QOp(h_am, SystemLayout((("A", d_a), ("M", d_m))), "hermitian"),
            QOp(h_bm, SystemLayout((("B", d_b), ("M", d_m))), "hermitian"))


def max_entangling_unitary(d_a: int, d_m: int) -> QOp:
    """Unitary on (A, M) sending |0,0> to the rank-d_M maximally entangled ket.

    Requires d_A >= d_M.  Composition: spread |0>_A over the first d_M basis
    states, then shift M conditionally on A.
    """
    if d_a < d_m:
        raise ValueError("need d_A >= d_M to host the entangled ket")
    col = np.zeros(d_a, dtype=complex)
    col[:d_m] = 1.0 / np.sqrt(d_m)
    basis = np.eye(d_a, dtype=complex)
    cols = [col]
    for j in range(d_a):
        v = basis[:, j].copy()
        for c in cols:
            v -= c * (c.conj() @ v)
        n = np.linalg.norm(v)
        if n > 1e-9:
            cols.append(v / n)
        if len(cols) == d_a:
            break
    v_a = np.column_stack(cols)
    cshift = np.zeros((d_a * d_m, d_a * d_m), dtype=complex)
    for k in range(d_a):
        for j in range(d_m):
            cshift[k * d_m + (j + k) % d_m, k * d_m + j] = 1.0
    u = cshift @ np.kron(v_a, np.eye(d_m))
    return QOp(u, SystemLayout((("A", d_a), ("M", d_m))), "unitary")


def mediated_entangler_steps(n_qubits: int = 2) -> list[QOp]:
    """Mediated protocol building a maximally entangled AB pair via a qubit M.

    A and B are registers of n_qubits; the mediator shuttles one ebit per
    round: spread + copy the i-th A qubit onto M, then swap M into the i-th
    B qubit.  From |0..0> the final state is the rank-2^n maximally entangled
    AB ket with M back in |0>.  The alternating AM/BM structure means the
    protocol is not a single AM-then-BM sequence for n_qubits >= 2.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit per probe")
    d = 2 ** n_qubits
    am_lay = SystemLayout((("A", d), ("M", 2)))
    bm_lay = SystemLayout((("B", d), ("M", 2)))
    h2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    steps: list[QOp] = []
    for i in range(n_qubits):
        h_on_i = kron_all([np.eye(2 ** i), h2, np.eye(2 ** (n_qubits - 1 - i))])
        cnot = np.zeros((2 * d, 2 * d), dtype=complex)
        for a in range(d):
            bit = (a >> (n_qubits - 1 - i)) & 1
            for m in range(2):
                cnot[a * 2 + (m ^ bit), a * 2 + m] = 1.0
        steps.append(QOp(cnot @ np.kron(h_on_i, np.eye(2)), am_lay, "unitary"))
        swp = np.zeros((2 * d, 2 * d), dtype=complex)
        for b in range(d):
            bit = (b >> (n_qubits - 1 - i)) & 1
            for m in range(2):
                b_new = (b & ~(1 << (n_qubits - 1 - i))) | (m << (n_qubits - 1 - i))
                swp[b_new * 2 + bit, b * 2 + m] = 1.0
        steps.append(QOp(swp, bm_lay, "unitary"))
    return steps


def swap_unitary(label1: str, label2: str, d: int) -> QOp:
    """SWAP on two d-dimensional systems."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return QOp(s, SystemLayout(((label1, d), (label2, d))), "unitary")


def random_channel(layout: SystemLayout, n_kraus: int, rng) -> KrausMap:
    ops = random_kraus_ops(layout.total_dim, n_kraus, as_rng(rng))
    return KrausMap(tuple(ops), layout)


def random_decomposable(d_a: int, d_m: int, d_b: int, rng, n_kraus: int = 2,
                        unitary: bool = False,
                        order: str = "AM_then_BM") -> DecomposableSpec:
    """Random two-step mediated map, unitary or general CPTP factors."""
    rng = as_rng(rng)
    am_lay = SystemLayout((("A", d_a), ("M", d_m)))
    bm_lay = SystemLayout((("B", d_b), ("M", d_m)))
    if unitary:
        am = KrausMap.from_unitary(QOp(haar_unitary(am_lay.total_dim, rng), am_lay,
                                       "unitary"))
        bm = KrausMap.from_unitary(QOp(haar_unitary(bm_lay.total_dim, rng), bm_lay,
                                       "unitary"))
    else:
        am = random_channel(am_lay, n_kraus, rng)
        bm = random_channel(bm_lay, n_kraus, rng)
    return DecomposableSpec(am=am, bm=bm, order=order)


def random_product_state(layout: SystemLayout, rng, mixed: bool = False,
                         tol: float = 1e-8) -> QState:
    """Product state across every layout part; pure factors by default."""
    rng = as_rng(rng)
    factors = []
    for _, d in layout.parts:
        if mixed:
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            f = g @ g.conj().T
            factors.append(f / np.real(np.trace(f)))
        else:
            v = random_ket(d, rng)
            factors.append(np.outer(v, v.conj()))
    return QState(kron_all(factors), layout, tol)


def depolarizing_map(layout: SystemLayout) -> KrausMap:
    """Fully depolarizing channel on its layout: rho -> I/d."""
    d = layout.total_dim
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = 1.0 / np.sqrt(d)
            ops.append(k)
    return KrausMap(tuple(ops), layout)
