"""Small semidefinite-programming layer shared by the moment-matrix bound
and the measurement-update step of the alternating optimization.

Problems are linear objectives over a single PSD matrix variable with affine
trace equality constraints.  Hermitian problems are embedded as real
symmetric of doubled size.  Solving is delegated to cvxpy (CLARABEL, with
SCS as fallback); compiled problems are cached per constraint structure so
repeated solves with a new objective are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import cvxpy as cp

__all__ = ["SdpProblem", "SdpSolution", "solve", "solve_hermitian",
           "embed_hermitian", "solve_affine_psd"]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 200_000


@dataclass
class SdpProblem:
    """maximize trace(C @ M) over M >= 0 (PSD) with trace(A_i @ M) = b_i."""

    objective: np.ndarray
    constraints: list  # [(A_i, b_i)]
    n: int

    def validate(self):
        if self.n < 1:
            raise ValueError("matrix order must be positive")
        if self.objective.shape != (self.n, self.n):
            raise ValueError("objective shape mismatch")
        if not np.allclose(self.objective, self.objective.T):
            raise ValueError("objective must be symmetric")
        for a, _ in self.constraints:
            if a.shape != (self.n, self.n):
                raise ValueError("constraint shape mismatch")
            if not np.allclose(a, a.T):
                raise ValueError("constraint matrix must be symmetric")


@dataclass
class SdpSolution:
    value: float
    matrix: np.ndarray
    status: str  # optimal | max-iterations | infeasible
    residual: float
    tol: float


_cache = {}


def _compiled(key, n, constraints):
    """cvxpy problem with a Parameter objective, compiled once per
    constraint structure."""
    entry = _cache.get(key)
    if entry is None:
        M = cp.Variable((n, n), symmetric=True)
        C = cp.Parameter((n, n))
        cons = [M >> 0]
        for a, b in constraints:
            cons.append(cp.trace(a @ M) == b)
        prob = cp.Problem(cp.Maximize(cp.trace(C @ M)), cons)
        entry = (prob, M, C)
        _cache[key] = entry
    return entry


def solve(p: SdpProblem, tol: float = DEFAULT_TOL,
          max_iters: int = DEFAULT_MAX_ITERS, cache_key=None) -> SdpSolution:
    """Solve the SDP; cache_key enables reuse of the compiled problem when
    the same constraint structure is solved repeatedly."""
    p.validate()
    if cache_key is not None:
        prob, M, C = _compiled(cache_key, p.n, p.constraints)
    else:
        M = cp.Variable((p.n, p.n), symmetric=True)
        C = cp.Parameter((p.n, p.n))
        cons = [M >> 0] + [cp.trace(a @ M) == b for a, b in p.constraints]
        prob = cp.Problem(cp.Maximize(cp.trace(C @ M)), cons)
    C.value = 0.5 * (p.objective + p.objective.T)
    try:
        prob.solve(solver=cp.CLARABEL, max_iter=max_iters)
    except Exception:
        prob.solve(solver=cp.SCS, max_iters=max_iters, eps=tol * 1e-2)
    # inconsistent data can surface from the solver as primal infeasibility
    # or as an unbounded reduction; both mean "no usable optimum"
    status = {
        "optimal": "optimal",
        "optimal_inaccurate": "max-iterations",
        "infeasible": "infeasible",
        "infeasible_inaccurate": "infeasible",
        "unbounded": "infeasible",
        "unbounded_inaccurate": "infeasible",
    }.get(prob.status, "max-iterations")
    if M.value is None:
        return SdpSolution(float("nan"), np.zeros((p.n, p.n)), status,
                           float("inf"), tol)
    mat = np.asarray(M.value)
    residual = max(
        (abs(float(np.trace(a @ mat)) - b) for a, b in p.constraints),
        default=0.0,
    )
    return SdpSolution(float(prob.value), mat, status, residual, tol)


def solve_affine_psd(basis, c, n: int, unit_index: int,
                     tol: float = DEFAULT_TOL,
                     max_iters: int = DEFAULT_MAX_ITERS,
                     cache_key=None) -> float:
    """Dual-form SDP: maximize c . y subject to mat(basis @ y) >= 0 (PSD)
    and y[unit_index] = 1.

    basis is a sparse (n*n, m) matrix whose columns are vectorized symmetric
    matrices; this shape compiles much faster than the equivalent primal with
    one trace-equality per repeated entry.  cache_key reuses the compiled
    problem across objectives with the same basis.
    """
    entry = _cache.get(("affine", cache_key)) if cache_key is not None else None
    if entry is None:
        y = cp.Variable(basis.shape[1])
        cpar = cp.Parameter(basis.shape[1])
        gamma = cp.reshape(basis @ y, (n, n), order="C")
        cons = [gamma >> 0, y[unit_index] == 1]
        prob = cp.Problem(cp.Maximize(cpar @ y), cons)
        if cache_key is not None:
            _cache[("affine", cache_key)] = (prob, y, cpar)
    else:
        prob, y, cpar = entry
    cpar.value = np.asarray(c, dtype=float)
    try:
        prob.solve(solver=cp.CLARABEL, max_iter=max_iters)
    except Exception:
        prob.solve(solver=cp.SCS, max_iters=max_iters, eps=tol * 1e-2)
    if y.value is None:
        raise RuntimeError(f"moment SDP failed with status {prob.status}")
    return float(prob.value)


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real-symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.
    trace(embed(A) @ embed(B)) = 2 Re trace(A @ B)."""
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def extract_hermitian(m: np.ndarray) -> np.ndarray:
    """Inverse of embed_hermitian on the symmetric part of the embedding."""
    n = m.shape[0] // 2
    re = 0.5 * (m[:n, :n] + m[n:, n:])
    im = 0.5 * (m[n:, :n] - m[:n, n:])
    return re + 1j * im


def solve_hermitian(objective: np.ndarray, constraints, n: int,
                    tol: float = DEFAULT_TOL,
                    max_iters: int = DEFAULT_MAX_ITERS,
                    cache_key=None):
    """Hermitian version of solve: maximize Re trace(C @ M) over Hermitian
    PSD M with Re trace(A_i @ M) = b_i.  Returns (value, hermitian matrix,
    SdpSolution)."""
    emb_cons = [(0.5 * embed_hermitian(a), b) for a, b in constraints]
    p = SdpProblem(0.5 * embed_hermitian(objective), emb_cons, 2 * n)
    sol = solve(p, tol=tol, max_iters=max_iters, cache_key=cache_key)
    mat = extract_hermitian(sol.matrix) if sol.matrix is not None else None
    return sol.value, mat, sol
