"""Dense linear algebra for multipartite finite-dimensional quantum systems.

States and operators live on a `SystemLayout`, an ordered list of labelled
tensor factors.  The canonical tripartite layout is (A, M, B) with row-major
composite indexing; embeddings of operators on non-contiguous subsets go
through an explicit index permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-8

__all__ = [
    "SystemLayout",
    "QState",
    "QOp",
    "tripartite",
    "pure_state",
    "basis_ket",
    "embed",
    "embed_matrix",
    "partial_trace",
    "ptrace_matrix",
    "partial_transpose",
    "ptranspose_matrix",
    "permute_matrix",
    "expm_hamiltonian",
    "spectral_norm",
    "trace_norm",
    "frobenius_norm",
    "norms",
    "trace_distance",
    "vn_entropy",
    "kron_all",
]


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem labels with dimensions; fixes tensor index order."""

    parts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        parts = tuple((str(l), int(d)) for l, d in self.parts)
        object.__setattr__(self, "parts", parts)
        labels = [l for l, _ in parts]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in layout: {labels}")
        if any(d < 1 for _, d in parts):
            raise ValueError("all dimensions must be >= 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.parts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.parts)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def dim_of(self, label: str) -> int:
        for l, d in self.parts:
            if l == label:
                return d
        raise KeyError(f"unknown label {label!r}; layout has {self.labels}")

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}; layout has {self.labels}") from None

    def subset(self, labels: Sequence[str]) -> "SystemLayout":
        """Layout restricted to `labels`, in the order given."""
        return SystemLayout(tuple((l, self.dim_of(l)) for l in labels))

    def complement(self, labels: Sequence[str]) -> tuple[str, ...]:
        sub = set(labels)
        return tuple(l for l in self.labels if l not in sub)

    def __repr__(self):
        inner = ", ".join(f"{l}:{d}" for l, d in self.parts)
        return f"SystemLayout({inner})"


def tripartite(d_a: int, d_m: int, d_b: int) -> SystemLayout:
    """Canonical mediated layout: probe A, mediator M, probe B."""
    return SystemLayout((("A", d_a), ("M", d_m), ("B", d_b)))


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class QState:
    """Density matrix over a SystemLayout.

    Validated on construction: Hermitian, unit trace and positive
    semidefinite, all within `tol`.
    """

    matrix: np.ndarray
    layout: SystemLayout
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape[0] != self.layout.total_dim:
            raise ValueError(
                f"matrix dim {m.shape[0]} != layout dim {self.layout.total_dim}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.tol:
            raise ValueError(f"state not Hermitian: deviation {herm:.3e} > tol {self.tol:.1e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > self.tol:
            raise ValueError(f"state trace {tr:.12g} differs from 1 beyond tol")
        m = 0.5 * (m + m.conj().T)
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -self.tol:
            raise ValueError(f"state not PSD: min eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class QOp:
    """Operator over a SystemLayout with a validated kind tag."""

    matrix: np.ndarray
    layout: SystemLayout
    kind: str = "general"  # hermitian | unitary | general
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape[0] != self.layout.total_dim:
            raise ValueError(
                f"matrix dim {m.shape[0]} != layout dim {self.layout.total_dim}")
        if self.kind not in ("hermitian", "unitary", "general"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "hermitian":
            dev = np.max(np.abs(m - m.conj().T))
            if dev > self.tol:
                raise ValueError(f"operator tagged hermitian deviates by {dev:.3e}")
        elif self.kind == "unitary":
            dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if dev > self.tol:
                raise ValueError(f"operator tagged unitary: U^dag U deviates by {dev:.3e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def basis_ket(layout: SystemLayout, indices: Sequence[int]) -> np.ndarray:
    """Computational basis ket |i_1 i_2 ...> as a flat vector."""
    if len(indices) != len(layout.parts):
        raise ValueError("one index per layout part required")
    idx = 0
    for (l, d), i in zip(layout.parts, indices):
        if not 0 <= i < d:
            raise ValueError(f"index {i} out of range for part {l} (dim {d})")
        idx = idx * d + i
    v = np.zeros(layout.total_dim, dtype=complex)
    v[idx] = 1.0
    return v


def pure_state(ket: np.ndarray, layout: SystemLayout, tol: float = DEFAULT_TOL) -> QState:
    v = np.asarray(ket, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return QState(np.outer(v, v.conj()), layout, tol)


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------------------
# index gymnastics on raw matrices

def permute_matrix(mat: np.ndarray, layout: SystemLayout,
                   new_labels: Sequence[str]) -> np.ndarray:
    """Reorder the tensor factors of an operator to `new_labels` order."""
    if sorted(new_labels) != sorted(layout.labels):
        raise ValueError(f"{tuple(new_labels)} is not a permutation of {layout.labels}")
    n = len(layout.parts)
    dims = list(layout.dims)
    t = _as_matrix(mat).reshape(dims + dims)
    perm = [layout.index_of(l) for l in new_labels]
    t = t.transpose(perm + [n + p for p in perm])
    d = layout.total_dim
    return np.ascontiguousarray(t.reshape(d, d))


def embed_matrix(mat: np.ndarray, sub_labels: Sequence[str],
                 target: SystemLayout) -> np.ndarray:
    """Pad an operator on `sub_labels` with identities on the rest of `target`.

    The operator's own index order is the order of `sub_labels`; the result
    uses the target layout order.
    """
    sub_labels = tuple(sub_labels)
    for l in sub_labels:
        if l not in target.labels:
            raise ValueError(f"label {l!r} not in target layout {target.labels}")
    if len(set(sub_labels)) != len(sub_labels):
        raise ValueError("repeated labels in subset")
    sub_dim = int(np.prod([target.dim_of(l) for l in sub_labels])) if sub_labels else 1
    m = _as_matrix(mat)
    if m.shape[0] != sub_dim:
        raise ValueError(
            f"operator dim {m.shape[0]} does not match subset dims (product {sub_dim})")
    rest = target.complement(sub_labels)
    rest_dim = int(np.prod([target.dim_of(l) for l in rest])) if rest else 1
    full = np.kron(m, np.eye(rest_dim))
    interim = SystemLayout(tuple((l, target.dim_of(l)) for l in sub_labels + rest))
    return permute_matrix(full, interim, target.labels)


def embed(op: QOp, acting_on: Sequence[str], target: SystemLayout) -> QOp:
    """Lift an operator on a subsystem to the full layout.

    `op.layout` must list exactly the `acting_on` labels (same order) with
    dimensions matching the target's.
    """
    acting_on = tuple(acting_on)
    if op.layout.labels != acting_on:
        raise ValueError(
            f"operator layout {op.layout.labels} does not match subset {acting_on}")
    for l in acting_on:
        if op.layout.dim_of(l) != target.dim_of(l):
            raise ValueError(
                f"dimension mismatch for {l!r}: {op.layout.dim_of(l)} vs {target.dim_of(l)}")
    return QOp(embed_matrix(op.matrix, acting_on, target), target, op.kind, op.tol)


def ptrace_matrix(mat: np.ndarray, layout: SystemLayout,
                  keep: Sequence[str]) -> np.ndarray:
    """Partial trace of an operator, keeping `keep` in the order given."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep must be a nonempty subset of labels")
    for l in keep:
        layout.index_of(l)
    dims = list(layout.dims)
    t = _as_matrix(mat).reshape(dims + dims)
    cur = list(layout.labels)
    for l in layout.labels:
        if l in keep:
            continue
        i = cur.index(l)
        t = np.trace(t, axis1=i, axis2=len(cur) + i)
        cur.pop(i)
    perm = [cur.index(l) for l in keep]
    t = t.transpose(perm + [len(cur) + p for p in perm])
    d = int(np.prod([layout.dim_of(l) for l in keep]))
    return np.ascontiguousarray(t.reshape(d, d))


def partial_trace(state: QState, keep: Sequence[str]) -> QState:
    reduced = ptrace_matrix(state.matrix, state.layout, keep)
    return QState(reduced, state.layout.subset(keep), state.tol)


def ptranspose_matrix(mat: np.ndarray, layout: SystemLayout,
                      on: Sequence[str]) -> np.ndarray:
    """Transpose the row/column indices of the `on` factors."""
    on = set(on)
    for l in on:
        layout.index_of(l)
    n = len(layout.parts)
    dims = list(layout.dims)
    t = _as_matrix(mat).reshape(dims + dims)
    perm = list(range(2 * n))
    for i, l in enumerate(layout.labels):
        if l in on:
            perm[i], perm[n + i] = perm[n + i], perm[i]
    t = t.transpose(perm)
    d = layout.total_dim
    return np.ascontiguousarray(t.reshape(d, d))


def partial_transpose(state: QState, on: Sequence[str]) -> np.ndarray:
    """Partially transposed state matrix (Hermitian, possibly not PSD)."""
    return ptranspose_matrix(state.matrix, state.layout, on)


# ---------------------------------------------------------------------------
# spectral functions

def expm_hamiltonian(h: QOp, t: float) -> QOp:
    """Unitary e^{-i t H} from a Hermitian generator, via eigendecomposition."""
    if h.kind != "hermitian":
        raise ValueError("expm_hamiltonian requires a hermitian QOp")
    w, v = np.linalg.eigh(h.matrix)
    u = (v * np.exp(-1j * t * w)) @ v.conj().T
    return QOp(u, h.layout, "unitary", max(h.tol, 1e-9))


def spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m), 2))


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def norms(m) -> dict[str, float]:
    """Spectral, trace and Frobenius norms of an operator or difference."""
    a = m.matrix if isinstance(m, (QState, QOp)) else np.asarray(m)
    return {"spectral": spectral_norm(a), "trace": trace_norm(a),
            "frobenius": frobenius_norm(a)}


def _mat_of(x) -> np.ndarray:
    return x.matrix if isinstance(x, (QState, QOp)) else np.asarray(x, dtype=complex)


def trace_distance(rho, sigma) -> float:
    """(1/2) ||rho - sigma||_1; in [0, 1] for states."""
    a, b = _mat_of(rho), _mat_of(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def vn_entropy(state) -> float:
    """von Neumann entropy in bits; eigenvalues in [-tol, 0) are clamped."""
    m = _mat_of(state)
    tol = state.tol if isinstance(state, QState) else DEFAULT_TOL
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w[0] < -tol:
        raise ValueError(f"not a state: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    w = w[w > 1e-18]
    return float(-np.sum(w * np.log2(w)))
