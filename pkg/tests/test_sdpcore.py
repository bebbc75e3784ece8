"""SDP layer: analytic reference problems, Hermitian embedding, statuses."""

import numpy as np
import pytest

from bellpoly.sdpcore import (
    SdpProblem,
    embed_hermitian,
    extract_hermitian,
    solve,
    solve_affine_psd,
    solve_hermitian,
)


def diag_constraints(n):
    cons = []
    for i in range(n):
        a = np.zeros((n, n))
        a[i, i] = 1.0
        cons.append((a, 1.0))
    return cons


def test_trace_with_unit_diagonal():
    # maximize trace(M), diag(M) = 1, n = 3 -> 3 (identity optimal)
    p = SdpProblem(np.eye(3), diag_constraints(3), 3)
    sol = solve(p)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(3.0, abs=1e-5)
    assert np.linalg.eigvalsh(sol.matrix).min() >= -1e-6
    assert sol.residual <= 1e-5


def test_offdiagonal_correlation_extreme_point():
    # maximize M_01 + M_10, diag = 1, n = 2 -> 2 (rank-one all-ones)
    c = np.array([[0.0, 1.0], [1.0, 0.0]])
    sol = solve(SdpProblem(c, diag_constraints(2), 2))
    assert sol.value == pytest.approx(2.0, abs=1e-5)
    assert np.allclose(sol.matrix, np.ones((2, 2)), atol=1e-4)


def test_npa_level1_chsh(chsh):
    from bellpoly.quantum import npa_upper_bound

    val = npa_upper_bound(chsh, level="1")
    assert val - chsh.bound == pytest.approx((np.sqrt(2) - 1) / 2, abs=1e-6)


def test_validation_errors():
    with pytest.raises(ValueError):
        SdpProblem(np.eye(2), [], 0).validate()
    with pytest.raises(ValueError):
        SdpProblem(np.eye(3), [], 2).validate()
    with pytest.raises(ValueError):
        SdpProblem(np.array([[0.0, 1.0], [0.0, 0.0]]), [], 2).validate()
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        SdpProblem(np.eye(2), [(bad, 1.0)], 2).validate()


def test_infeasible_status():
    a = np.zeros((2, 2))
    a[0, 0] = 1.0
    p = SdpProblem(np.eye(2), [(a, 1.0), (a, 2.0)], 2)
    sol = solve(p)
    assert sol.status == "infeasible"


def test_deterministic_given_identical_inputs():
    rng = np.random.default_rng(0)
    c = rng.normal(size=(4, 4))
    c = c + c.T
    p = SdpProblem(c, diag_constraints(4), 4)
    v1 = solve(p).value
    v2 = solve(p).value
    assert v1 == v2


def test_solve_caching_consistency():
    c1 = np.diag([1.0, 2.0, 3.0])
    c2 = np.diag([3.0, 1.0, 1.0])
    p1 = SdpProblem(c1, diag_constraints(3), 3)
    p2 = SdpProblem(c2, diag_constraints(3), 3)
    a = solve(p1, cache_key="unit-diag-3").value
    b = solve(p2, cache_key="unit-diag-3").value
    assert a == pytest.approx(6.0, abs=1e-5)
    assert b == pytest.approx(5.0, abs=1e-5)


def test_embed_extract_roundtrip():
    rng = np.random.default_rng(1)
    h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = h + h.conj().T
    emb = embed_hermitian(h)
    assert np.allclose(emb, emb.T)
    assert np.allclose(extract_hermitian(emb), h)
    # trace identity: trace(embed(A) embed(B)) = 2 Re trace(A B)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    g = g + g.conj().T
    assert np.trace(embed_hermitian(g) @ emb) == pytest.approx(
        2 * np.trace(g @ h).real)


def test_solve_hermitian_pauli_y_objective():
    # maximize Re tr(C M) with C = pauli-Y, diag(M) = 1/2 each -> 1
    # (optimal M is the projector onto the +1 eigenvector of Y)
    c = np.array([[0.0, -1j], [1j, 0.0]])
    cons = []
    for i in range(2):
        a = np.zeros((2, 2), complex)
        a[i, i] = 1.0
        cons.append((a, 0.5))
    val, mat, sol = solve_hermitian(c, cons, 2)
    assert val == pytest.approx(1.0, abs=1e-5)
    assert np.allclose(mat, mat.conj().T, atol=1e-6)
    assert np.linalg.eigvalsh(mat).min() >= -1e-6


def test_solve_affine_psd_matches_primal():
    # same unit-diagonal problem in dual (affine) form
    n = 3
    m = n * (n + 1) // 2
    basis = np.zeros((n * n, m + 1))
    # y_0 scales the identity (unit), remaining y fill the off-diagonals
    basis[:, 0] = np.eye(n).ravel()
    k = 1
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0
            basis[:, k] = e.ravel()
            pairs.append((i, j))
            k += 1
    c = np.zeros(basis.shape[1])
    c[1] = 2.0  # maximize 2 * M_01 with unit diagonal -> 2
    val = solve_affine_psd(basis[:, :k], c[:k], n, 0)
    assert val == pytest.approx(2.0, abs=1e-5)
