import numpy as np
import pytest
from scipy.optimize import minimize

from medwit.correlations import (
    AuditResult, ContinuityFn, MeasureSpec, audit_continuity, capacity,
    capacity_numeric, default_measure, g_eval, g_inv, linear_g,
    log_negativity, mutual_information, negativity, normalize_cut, quantify,
    rel_ent_entanglement, relative_entropy, resolve_g, total_correlations,
)
from medwit.sampling import random_density, random_ket, random_kraus_ops, spawn_rng
from medwit.tensor import (
    QState, SystemLayout, embed_matrix, partial_trace, pure_state, vn_entropy,
)

AB = SystemLayout((("A", 2), ("B", 2)))


def bell(layout=AB, d=2, rank=None):
    rank = rank or d
    v = np.zeros(d * d, dtype=complex)
    for i in range(rank):
        v[i * d + i] = 1.0
    return pure_state(v, layout)


def separable_mixture(d_a, d_b, n_terms, rng):
    lay = SystemLayout((("A", d_a), ("B", d_b)))
    m = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    w = rng.uniform(0.1, 1.0, size=n_terms)
    w /= w.sum()
    for k in range(n_terms):
        v = np.kron(random_ket(d_a, rng), random_ket(d_b, rng))
        m += w[k] * np.outer(v, v.conj())
    return QState(m, lay)


def werner(p):
    psim = np.zeros(4, dtype=complex)
    psim[1], psim[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    return QState(p * np.outer(psim, psim.conj()) + (1 - p) * np.eye(4) / 4, AB)


# ---------------------------------------------------------------------------
# negativity family

def test_negativity_bell():
    assert negativity(bell(), ("A",)) == pytest.approx(0.5, abs=1e-10)
    assert log_negativity(bell(), ("A",)) == pytest.approx(1.0, abs=1e-10)


def test_negativity_product_zero():
    rng = spawn_rng(11, "neg-prod")
    for _ in range(20):
        st = QState(np.kron(random_density(2, rng), random_density(2, rng)), AB)
        assert negativity(st, ("A",)) <= 1e-10
        assert log_negativity(st, ("A",)) <= 1e-9


def test_negativity_werner_half():
    st = werner(0.5)
    # oracle: brute-force eigenvalues of the partial transpose
    from medwit.tensor import ptranspose_matrix
    eigs = np.linalg.eigvalsh(ptranspose_matrix(st.matrix, AB, ("A",)))
    oracle = np.sum(np.abs(eigs[eigs < 0]))
    assert negativity(st, ("A",)) == pytest.approx(oracle, abs=1e-12)
    assert negativity(st, ("A",)) == pytest.approx((3 * 0.5 - 1) / 4, abs=1e-10)


def test_negativity_zero_on_separable_mixtures():
    rng = spawn_rng(11, "neg-sep")
    for _ in range(100):
        st = separable_mixture(2, 2, int(rng.integers(1, 6)), rng)
        assert negativity(st, ("A",)) <= 1e-9


def test_invalid_bipartition():
    with pytest.raises(ValueError):
        negativity(bell(), (("A",), ("A",)))
    with pytest.raises(KeyError):
        mutual_information(bell(), ("Q",))
    assert normalize_cut(AB, ("A",)) == (("A",), ("B",))


# ---------------------------------------------------------------------------
# mutual information

def test_mutual_information_values():
    rng = spawn_rng(12)
    prod = QState(np.kron(random_density(2, rng), random_density(2, rng)), AB)
    assert mutual_information(prod, ("A",)) == pytest.approx(0.0, abs=1e-9)
    assert mutual_information(bell(), ("A",)) == pytest.approx(2.0, abs=1e-9)
    cc = QState(np.diag([0.5, 0, 0, 0.5]).astype(complex), AB)
    assert mutual_information(cc, ("A",)) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# relative entropy of entanglement

def test_ree_separable_is_zero():
    rng = spawn_rng(13, "ree-sep")
    for _ in range(5):
        st = separable_mixture(2, 2, 4, rng)
        res = rel_ent_entanglement(st, ("A",), rng=rng)
        assert res.value <= 1e-6
        assert res.status == "converged"


def test_ree_pure_states_match_marginal_entropy():
    rng = spawn_rng(13, "ree-pure")
    for _ in range(6):
        st = pure_state(random_ket(4, rng), AB)
        oracle = vn_entropy(partial_trace(st, ("A",)))
        res = rel_ent_entanglement(st, ("A",), rng=rng)
        assert res.value == pytest.approx(oracle, abs=1e-4)


def test_ree_maximally_entangled_is_log_dm():
    res = rel_ent_entanglement(bell(), ("A",), rng=spawn_rng(13, "ree-bell"))
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert res.status == "converged"


def test_ree_werner_closed_form():
    # Bell-diagonal with largest weight F > 1/2: REE = 1 - h2(F)
    st = werner(0.5)
    f = 0.5 + 0.5 / 4
    want = 1 + f * np.log2(f) + (1 - f) * np.log2(1 - f)
    res = rel_ent_entanglement(st, ("A",), rng=spawn_rng(13, "ree-werner"))
    assert res.value == pytest.approx(want, abs=1e-6)


def test_ree_never_exceeds_capacity():
    rng = spawn_rng(13, "ree-cap")
    for _ in range(8):
        st = QState(random_density(4, rng, rank=int(rng.integers(1, 5))), AB)
        res = rel_ent_entanglement(st, ("A",), rng=rng)
        assert res.value <= 1.0 + max(1e-6, res.gap)


def test_ree_side_cap_enforced():
    lay = SystemLayout((("A", 5), ("B", 5)))
    st = QState(np.eye(25) / 25, lay)
    with pytest.raises(ValueError):
        rel_ent_entanglement(st, ("A",))


# ---------------------------------------------------------------------------
# total correlations

def test_total_correlations_product_zero():
    rng = spawn_rng(14, "tc-prod")
    for distance in ("trace", "spectral", "relative_entropy"):
        spec = MeasureSpec("log_negativity", distance, linear_g(1.0))
        st = QState(np.kron(random_density(2, rng), random_density(2, rng)), AB)
        res = total_correlations(st, ("A",), spec, rng=rng)
        assert res.value <= 1e-6


def test_total_correlations_relent_matches_numerical_infimum():
    # closed form (mutual information at the marginals) vs direct optimization
    spec = MeasureSpec("mutual_information", "relative_entropy", linear_g(1.0))
    st = bell()
    closed = total_correlations(st, ("A",), spec).value
    assert closed == pytest.approx(2.0, abs=1e-10)

    def obj(params):
        def factor(p, d):
            m = (p[:d * d] + 1j * p[d * d:]).reshape(d, d)
            s = m @ m.conj().T
            return s / max(np.real(np.trace(s)), 1e-30)
        sx = factor(params[:8], 2)
        sy = factor(params[8:], 2)
        return relative_entropy(st.matrix, np.kron(sx, sy))

    rng = spawn_rng(14, "tc-oracle")
    best = np.inf
    for _ in range(4):
        res = minimize(obj, rng.normal(size=16), method="Powell",
                       options={"maxiter": 4000, "ftol": 1e-12})
        best = min(best, float(res.fun))
    assert closed == pytest.approx(best, abs=1e-4)


def test_total_correlations_unchanged_by_uncorrelated_ancilla():
    spec = MeasureSpec("mutual_information", "relative_entropy", linear_g(1.0))
    base = total_correlations(bell(), ("A",), spec).value
    rng = spawn_rng(14, "tc-ancilla")
    lay3 = SystemLayout((("A", 2), ("B", 2), ("C", 2)))
    with_anc = QState(np.kron(bell().matrix, random_density(2, rng)), lay3)
    res = total_correlations(with_anc, (("A",), ("B", "C")), spec)
    assert res.value == pytest.approx(base, abs=1e-9)


# ---------------------------------------------------------------------------
# capacity

def test_capacity_analytic_values():
    assert capacity(default_measure("rel_ent_entanglement"), 4, 2).value == 1.0
    assert capacity(default_measure("log_negativity"), 4, 2).value == 1.0
    assert capacity(default_measure("mutual_information"), 4, 2).value == 2.0
    assert capacity(default_measure("negativity"), 4, 2).value == 0.5
    assert capacity(default_measure("rel_ent_entanglement"), 2, 4).value == 1.0


def test_capacity_numeric_consistency():
    rng = spawn_rng(15, "cap")
    for q in ("negativity", "log_negativity", "mutual_information"):
        spec = default_measure(q)
        ana = capacity(spec, 2, 2).value
        num = capacity_numeric(spec, 2, 2, n_samples=150, rng=rng)
        assert num.status == "numerical"
        assert num.value <= ana + 1e-9


# ---------------------------------------------------------------------------
# continuity functions

def test_g_linear():
    g = linear_g(1.0)
    assert g_eval(g, 0.3) == pytest.approx(0.3)
    assert g_inv(g, -0.2) == 0.0
    assert g_inv(linear_g(2.0), 1.0) == pytest.approx(0.5)


def test_g_table_roundtrip_and_monotone():
    g = ContinuityFn("table", (0.1, 0.05, 0.5, 0.4, 1.0, 1.1))
    xs = np.linspace(0, 1.0, 1000)
    vals = [g_eval(g, float(s)) for s in xs]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    for s in np.linspace(0.001, 1.0, 200):
        assert g_inv(g, g_eval(g, float(s))) == pytest.approx(float(s), abs=1e-8)


def test_g_roundtrip_linear():
    g = linear_g(3.7)
    for s in np.linspace(0, 5, 1000):
        assert abs(g_inv(g, g_eval(g, float(s))) - s) <= 1e-8


def test_g_bad_specs():
    with pytest.raises(ValueError):
        linear_g(-1.0)
    with pytest.raises(ValueError):
        ContinuityFn("table", (0.5, 0.4, 0.1, 0.05))
    with pytest.raises(ValueError):
        g_eval(linear_g(1.0), -0.1)


# ---------------------------------------------------------------------------
# monotonicity under local channels

def _local_channel(rho, d_x, d_y, side, rng):
    d = d_x if side == 0 else d_y
    kraus = random_kraus_ops(d, int(rng.integers(1, 4)), rng)
    out = np.zeros_like(rho)
    for k in kraus:
        kf = np.kron(k, np.eye(d_y)) if side == 0 else np.kron(np.eye(d_x), k)
        out += kf @ rho @ kf.conj().T
    return out


@pytest.mark.parametrize("quantifier", ["negativity", "log_negativity",
                                        "mutual_information"])
def test_monotone_under_local_channels(quantifier):
    rng = spawn_rng(16, "mono", quantifier)
    spec = default_measure(quantifier)
    for _ in range(200):
        rho = random_density(4, rng, rank=int(rng.integers(1, 5)))
        st = QState(rho, AB)
        side = int(rng.integers(0, 2))
        out = QState(_local_channel(rho, 2, 2, side, rng), AB, tol=1e-7)
        before = quantify(st, ("A",), spec).value
        after = quantify(out, ("A",), spec).value
        assert after <= before + 1e-7


def test_ree_monotone_under_local_channels():
    rng = spawn_rng(16, "mono-ree")
    for _ in range(8):
        rho = random_density(4, rng, rank=int(rng.integers(1, 3)))
        st = QState(rho, AB)
        out = QState(_local_channel(rho, 2, 2, int(rng.integers(0, 2)), rng),
                     AB, tol=1e-7)
        before = rel_ent_entanglement(st, ("A",), rng=rng)
        after = rel_ent_entanglement(out, ("A",), rng=rng)
        assert after.value <= before.value + before.gap + after.gap + 1e-6


# ---------------------------------------------------------------------------
# sampling audits of the default g constants

def test_audit_log_negativity_default():
    res = audit_continuity(default_measure("log_negativity"), 2, 2,
                           n_pairs=10_000, rng=spawn_rng(17, "audit-ln"))
    assert isinstance(res, AuditResult)
    assert res.passed, f"{res.n_violations} violations, margin {res.worst_margin}"


def test_audit_mutual_information_default():
    res = audit_continuity(default_measure("mutual_information"), 2, 2,
                           n_pairs=10_000, rng=spawn_rng(17, "audit-mi"))
    assert res.passed, f"{res.n_violations} violations, margin {res.worst_margin}"


def test_audit_mutual_information_identity_g_fails():
    # the bare identity is not a valid continuity function for mutual
    # information against relative entropy; the audit must catch it
    res = audit_continuity(MeasureSpec("mutual_information", "relative_entropy"),
                           2, 2, n_pairs=10_000, rng=spawn_rng(17, "audit-mi"),
                           g=linear_g(1.0))
    assert not res.passed


def test_audit_ree_default():
    res = audit_continuity(default_measure("rel_ent_entanglement"), 2, 2,
                           n_pairs=40, rng=spawn_rng(17, "audit-ree"),
                           tol=1e-6, restarts=2)
    assert res.passed, f"{res.n_violations} violations, margin {res.worst_margin}"


def test_resolve_g_defaults():
    assert resolve_g(default_measure("log_negativity"), 4, 8).params[0] == 4.0
    assert resolve_g(default_measure("negativity"), 3, 9).params[0] == 3.0
    assert resolve_g(default_measure("mutual_information"), 2, 2).params[0] == 2.0
    g = resolve_g(default_measure("rel_ent_entanglement"), 4, 8)
    assert g.params[0] == pytest.approx(2 * np.log2(4) + 2)
    custom = MeasureSpec("negativity", "trace", linear_g(7.0))
    assert resolve_g(custom, 2, 2).params[0] == 7.0
