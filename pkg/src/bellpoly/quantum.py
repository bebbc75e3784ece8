"""Quantum figures of merit for Bell inequalities.

For an inequality in CG coordinates this module computes the dimension-
restricted lower bound via alternating optimization (state eigenvector /
per-input POVM SDP updates), a dimension-agnostic moment-matrix upper
bound, the white-noise resistance, the minimal symmetric detection
efficiency closing the detection loophole, and (for qubits) the concurrence
of the optimal state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import sdpcore
from .exactgeom import Inequality

__all__ = [
    "QuantumModel",
    "AnalysisRow",
    "cg_arrays",
    "bell_operator",
    "born_behavior",
    "evaluate_numeric",
    "seesaw",
    "npa_upper_bound",
    "resistance_to_noise",
    "detection_efficiency",
    "efficiency_value",
    "concurrence",
    "analyze",
]

PSD_TOL = 1e-9


@dataclass
class QuantumModel:
    """Local dimension, bipartite state and per-input POVMs."""

    d: int
    state: np.ndarray  # density matrix (d^2 x d^2) or pure vector (d^2)
    alice_povms: list  # [x][a] -> (d, d) complex
    bob_povms: list  # [y][b] -> (d, d) complex

    @property
    def rho(self) -> np.ndarray:
        if self.state.ndim == 1:
            return np.outer(self.state, self.state.conj())
        return self.state

    def validate(self, tol: float = PSD_TOL):
        rho = self.rho
        if not np.allclose(rho, rho.conj().T, atol=1e-8):
            raise ValueError("state not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-8:
            raise ValueError("state trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -tol * 100:
            raise ValueError("state not PSD")
        for povms in (self.alice_povms, self.bob_povms):
            for setting in povms:
                total = sum(setting)
                if not np.allclose(total, np.eye(self.d), atol=1e-7):
                    raise ValueError("POVM does not sum to identity")
                for el in setting:
                    if np.linalg.eigvalsh(0.5 * (el + el.conj().T)).min() < -1e-7:
                        raise ValueError("POVM element not PSD")


@dataclass
class AnalysisRow:
    name: str
    scenario: str
    local_bound: float
    q_seesaw: dict  # d -> value
    q_npa: float
    noise: dict  # d -> lambda
    eta: dict  # d -> eta_min
    concurrence: float  # d=2 only, nan otherwise
    violated: bool = True


def cg_arrays(ineq: Inequality):
    """Split CG coefficients into joint / Alice-marginal / Bob-marginal
    arrays indexed [x, y, a, b], [x, a], [y, b]."""
    s = ineq.scenario
    joint = np.zeros((s.X, s.Y, s.A - 1, s.B - 1))
    am = np.zeros((s.X, s.A - 1))
    bm = np.zeros((s.Y, s.B - 1))
    for x in range(s.X):
        for y in range(s.Y):
            for a in range(s.A - 1):
                for b in range(s.B - 1):
                    joint[x, y, a, b] = ineq.coeffs[s.joint_index(x, y, a, b)]
    for x in range(s.X):
        for a in range(s.A - 1):
            am[x, a] = ineq.coeffs[s.alice_index(x, a)]
    for y in range(s.Y):
        for b in range(s.B - 1):
            bm[y, b] = ineq.coeffs[s.bob_index(y, b)]
    return joint, am, bm


def bell_operator(ineq: Inequality, model: QuantumModel) -> np.ndarray:
    """Sum of coefficient-weighted POVM tensor products; its expectation on
    the model's state equals the CG functional on the Born behavior."""
    s = ineq.scenario
    d = model.d
    joint, am, bm = cg_arrays(ineq)
    op = np.zeros((d * d, d * d), dtype=complex)
    eye = np.eye(d)
    for x in range(s.X):
        for a in range(s.A - 1):
            ga = np.zeros((d, d), dtype=complex)
            for y in range(s.Y):
                for b in range(s.B - 1):
                    if joint[x, y, a, b]:
                        ga += joint[x, y, a, b] * model.bob_povms[y][b]
            if am[x, a]:
                ga += am[x, a] * eye
            if ga.any():
                op += np.kron(model.alice_povms[x][a], ga)
    for y in range(s.Y):
        for b in range(s.B - 1):
            if bm[y, b]:
                op += bm[y, b] * np.kron(eye, model.bob_povms[y][b])
    return 0.5 * (op + op.conj().T)


def born_behavior(model: QuantumModel, scenario) -> np.ndarray:
    """CG coordinates of the behavior p(ab|xy) = tr((Pi_a x Pi_b) rho)."""
    s = scenario
    d = model.d
    rho = model.rho
    coords = np.zeros(s.cg_dim)
    eye = np.eye(d)
    for x in range(s.X):
        for a in range(s.A - 1):
            pa = model.alice_povms[x][a]
            coords[s.alice_index(x, a)] = np.trace(
                np.kron(pa, eye) @ rho
            ).real
            for y in range(s.Y):
                for b in range(s.B - 1):
                    coords[s.joint_index(x, y, a, b)] = np.trace(
                        np.kron(pa, model.bob_povms[y][b]) @ rho
                    ).real
    for y in range(s.Y):
        for b in range(s.B - 1):
            coords[s.bob_index(y, b)] = np.trace(
                np.kron(eye, model.bob_povms[y][b]) @ rho
            ).real
    return coords


def evaluate_numeric(ineq: Inequality, coords: np.ndarray) -> float:
    return float(np.dot(np.asarray(ineq.coeffs, dtype=float), coords))


# --- alternating optimization (seesaw) -------------------------------------

def _random_povm(rng, n_out: int, d: int):
    """Random measurement: projective when the outcome count allows it,
    otherwise a normalized random POVM."""
    if n_out <= d:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        u, _ = np.linalg.qr(g)
        sizes = [d // n_out + (1 if i < d % n_out else 0) for i in range(n_out)]
        povm, col = [], 0
        for k in sizes:
            cols = u[:, col:col + k]
            povm.append(cols @ cols.conj().T)
            col += k
        return povm
    raw = []
    for _ in range(n_out):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(1 / np.sqrt(w)) @ v.conj().T
    return [inv_sqrt @ r @ inv_sqrt for r in raw]


def _povm_constraints(n_out: int, d: int):
    """Hermitian trace constraints forcing block-diagonal structure and a
    per-input resolution of identity on the stacked (n_out*d) variable."""
    n = n_out * d
    cons = []

    def eij(i, j):
        m = np.zeros((n, n), dtype=complex)
        m[i, j] = 1
        return m

    for p in range(n_out):
        for q in range(p + 1, n_out):
            for i in range(d):
                for j in range(d):
                    r, c = p * d + i, q * d + j
                    cons.append((eij(r, c) + eij(c, r), 0.0))
                    cons.append((1j * eij(r, c) - 1j * eij(c, r), 0.0))
    for i in range(d):
        a = np.zeros((n, n), dtype=complex)
        for p in range(n_out):
            a[p * d + i, p * d + i] = 1
        cons.append((a, 1.0))
        for j in range(i + 1, d):
            a = np.zeros((n, n), dtype=complex)
            b = np.zeros((n, n), dtype=complex)
            for p in range(n_out):
                a[p * d + i, p * d + j] = 0.5
                a[p * d + j, p * d + i] = 0.5
                b[p * d + i, p * d + j] = 0.5j
                b[p * d + j, p * d + i] = -0.5j
            cons.append((a, 0.0))
            cons.append((b, 0.0))
    return cons


def _update_party(ineq, model, party, rng):
    """One SDP sweep over the given party's inputs, maximizing the
    functional with the state and other party fixed."""
    s = ineq.scenario
    d = model.d
    joint, am, bm = cg_arrays(ineq)
    rho = model.rho
    eye = np.eye(d)
    n_out = s.A if party == "A" else s.B
    n_in = s.X if party == "A" else s.Y
    rho4 = rho.reshape(d, d, d, d)
    for k in range(n_in):
        reward = []
        for o in range(n_out - 1):
            if party == "A":
                g = sum(
                    joint[k, y, o, b] * model.bob_povms[y][b]
                    for y in range(s.Y)
                    for b in range(s.B - 1)
                    if joint[k, y, o, b]
                )
                g = (g if isinstance(g, np.ndarray) else np.zeros((d, d))) \
                    + am[k, o] * eye
                # R = Tr_B[(I x G) rho]
                r = np.einsum("ikjl,lk->ij", rho4, g)
            else:
                g = sum(
                    joint[x, k, a, o] * model.alice_povms[x][a]
                    for x in range(s.X)
                    for a in range(s.A - 1)
                    if joint[x, k, a, o]
                )
                g = (g if isinstance(g, np.ndarray) else np.zeros((d, d))) \
                    + bm[k, o] * eye
                # R = Tr_A[(G x I) rho]
                r = np.einsum("ikjl,ji->kl", rho4, g)
            reward.append(0.5 * (r + r.conj().T))
        reward.append(np.zeros((d, d), dtype=complex))  # suppressed outcome
        objective = np.zeros((n_out * d, n_out * d), dtype=complex)
        for o in range(n_out):
            objective[o * d:(o + 1) * d, o * d:(o + 1) * d] = reward[o]
        cons = _povm_constraints(n_out, d)
        _, mat, sol = sdpcore.solve_hermitian(
            objective, cons, n_out * d, cache_key=("povm", n_out, d)
        )
        if mat is None or sol.status == "infeasible":
            continue
        new = [
            0.5 * (mat[o * d:(o + 1) * d, o * d:(o + 1) * d]
                   + mat[o * d:(o + 1) * d, o * d:(o + 1) * d].conj().T)
            for o in range(n_out)
        ]
        # compensate solver slack so the elements sum to identity exactly
        slack = np.eye(d) - sum(new)
        new[-1] = new[-1] + slack
        if party == "A":
            model.alice_povms[k] = new
        else:
            model.bob_povms[k] = new


def seesaw(ineq: Inequality, d: int, restarts: int = 20, tol: float = 1e-8,
           max_sweeps: int = 500, seed: int = 0, target: float = None):
    """Best lower bound on the quantum value at local dimension d, with the
    achieving model.  Alternates a state update (top eigenvector of the
    Bell operator) with per-input POVM SDP updates; stops a restart when
    the relative improvement drops below tol.  When target is given, stops
    early once the target is reached."""
    s = ineq.scenario
    rng = np.random.default_rng(seed)
    best_val, best_model = -np.inf, None
    for _ in range(restarts):
        model = QuantumModel(
            d,
            np.eye(d * d, dtype=complex)[:, 0],
            [_random_povm(rng, s.A, d) for _ in range(s.X)],
            [_random_povm(rng, s.B, d) for _ in range(s.Y)],
        )
        val = -np.inf
        for _ in range(max_sweeps):
            op = bell_operator(ineq, model)
            w, v = np.linalg.eigh(op)
            model.state = v[:, -1]
            _update_party(ineq, model, "A", rng)
            _update_party(ineq, model, "B", rng)
            op = bell_operator(ineq, model)
            w = np.linalg.eigvalsh(op)
            new_val = float(w[-1])
            if new_val - val < tol * max(1.0, abs(new_val)):
                val = max(val, new_val)
                break
            val = new_val
        op = bell_operator(ineq, model)
        w, v = np.linalg.eigh(op)
        model.state = v[:, -1]
        if val > best_val:
            best_val, best_model = val, model
        if target is not None and best_val >= target:
            break
    return best_val, best_model


# --- moment-matrix upper bound ---------------------------------------------

def _reduce_word(word):
    """Reduce a single-party projector word; None encodes the zero
    operator."""
    out = []
    for op in word:
        if out and out[-1] == op:
            continue
        if out and out[-1][0] == op[0]:
            return None
        out.append(op)
    return tuple(out)


def _monomials(s, level: str):
    a_ops = [(x, a) for x in range(s.X) for a in range(s.A - 1)]
    b_ops = [(y, b) for y in range(s.Y) for b in range(s.B - 1)]
    mons = [((), ())]
    mons += [((op,), ()) for op in a_ops]
    mons += [((), (op,)) for op in b_ops]
    if level in ("1+ab", "2"):
        mons += [((u,), (v,)) for u in a_ops for v in b_ops]
    if level == "2":
        mons += [
            ((u, v), ()) for u in a_ops for v in a_ops if u[0] != v[0]
        ]
        mons += [
            ((), (u, v)) for u in b_ops for v in b_ops if u[0] != v[0]
        ]
    return mons


def _moment_key(wa, wb):
    rev = (tuple(reversed(wa)), tuple(reversed(wb)))
    return min((wa, wb), rev)


def npa_upper_bound(ineq: Inequality, level: str = "2",
                    tol: float = 1e-8) -> float:
    """Dimension-agnostic upper bound from the moment-matrix relaxation at
    the given level (one of "1", "1+ab", "2")."""
    if level not in ("1", "1+ab", "2"):
        raise ValueError(f"unsupported level {level!r}")
    s = ineq.scenario
    mons = _monomials(s, level)
    n = len(mons)
    index = {}
    zero_entries = []
    entries = {}  # moment key -> list of (i, j)
    for i in range(n):
        for j in range(i, n):
            wa = _reduce_word(tuple(reversed(mons[i][0])) + mons[j][0])
            wb = _reduce_word(tuple(reversed(mons[i][1])) + mons[j][1])
            if wa is None or wb is None:
                zero_entries.append((i, j))
                continue
            entries.setdefault(_moment_key(wa, wb), []).append((i, j))
    del index

    moments = sorted(entries)
    mom_index = {k: t for t, k in enumerate(moments)}
    m = len(moments)
    # Gamma = sum_t y_t * B_t with B_t sparse symmetric; y for the identity
    # moment is fixed to 1 by an extra constraint.
    rows, cols, vals = [], [], []
    for k, ent in entries.items():
        t = mom_index[k]
        for (i, j) in ent:
            rows.append(i * n + j)
            cols.append(t)
            vals.append(1.0)
            if i != j:
                rows.append(j * n + i)
                cols.append(t)
                vals.append(1.0)
    basis = sp.csc_matrix((vals, (rows, cols)), shape=(n * n, m))

    joint, am, bm = cg_arrays(ineq)
    c = np.zeros(m)
    for x in range(s.X):
        for a in range(s.A - 1):
            if am[x, a]:
                c[mom_index[_moment_key(((x, a),), ())]] += am[x, a]
            for y in range(s.Y):
                for b in range(s.B - 1):
                    if joint[x, y, a, b]:
                        c[mom_index[_moment_key(((x, a),), ((y, b),))]] += (
                            joint[x, y, a, b]
                        )
    for y in range(s.Y):
        for b in range(s.B - 1):
            if bm[y, b]:
                c[mom_index[_moment_key((), ((y, b),))]] += bm[y, b]

    unit = mom_index[((), ())]
    return sdpcore.solve_affine_psd(
        basis, c, n, unit, tol=tol,
        cache_key=("npa", s.X, s.Y, s.A, s.B, level),
    )


# --- noise resistance, detection efficiency, concurrence -------------------

def resistance_to_noise(ineq: Inequality, model: QuantumModel):
    """Critical visibility: mixing weight at which white noise kills the
    violation.  Returns (lambda, violated_flag)."""
    s = ineq.scenario
    d = model.d
    q = evaluate_numeric(ineq, born_behavior(model, s))
    bound = float(ineq.bound)
    noise = QuantumModel(
        d, np.eye(d * d, dtype=complex) / (d * d),
        model.alice_povms, model.bob_povms,
    )
    nval = evaluate_numeric(ineq, born_behavior(noise, s))
    if q <= bound + 1e-12:
        return 1.0, False
    return (bound - nval) / (q - nval), True


def detection_efficiency(ineq: Inequality, model: QuantumModel):
    """Minimal symmetric detector efficiency keeping the value above the
    local bound, with failure outputs optimized over all deterministic
    strategies.  Returns (eta_min, violated_flag)."""
    from itertools import product as iproduct

    s = ineq.scenario
    joint, am, bm = cg_arrays(ineq)
    behavior = born_behavior(model, s)
    q = evaluate_numeric(ineq, behavior)
    bound = float(ineq.bound)
    if q <= bound + 1e-12:
        return 1.0, False
    pa = np.zeros((s.X, s.A - 1))
    pb = np.zeros((s.Y, s.B - 1))
    for x in range(s.X):
        for a in range(s.A - 1):
            pa[x, a] = behavior[s.alice_index(x, a)]
    for y in range(s.Y):
        for b in range(s.B - 1):
            pb[y, b] = behavior[s.bob_index(y, b)]

    # value when Alice outputs s_a deterministically and Bob keeps his
    # quantum marginals (and the symmetric case), per failure strategy
    m_alice_fail = {}
    for sa in iproduct(range(s.A), repeat=s.X):
        v = 0.0
        for x in range(s.X):
            if sa[x] < s.A - 1:
                v += am[x, sa[x]]
                for y in range(s.Y):
                    v += float(np.dot(joint[x, y, sa[x]], pb[y]))
        v += float(bm.sum(initial=0.0)) * 0.0 + float(
            sum(np.dot(bm[y], pb[y]) for y in range(s.Y))
        )
        m_alice_fail[sa] = v
    m_bob_fail = {}
    for sb in iproduct(range(s.B), repeat=s.Y):
        v = 0.0
        for y in range(s.Y):
            if sb[y] < s.B - 1:
                v += bm[y, sb[y]]
                for x in range(s.X):
                    v += float(np.dot(joint[x, y, :, sb[y]], pa[x]))
        v += float(sum(np.dot(am[x], pa[x]) for x in range(s.X)))
        m_bob_fail[sb] = v

    eta_min = None
    for sa in iproduct(range(s.A), repeat=s.X):
        for sb in iproduct(range(s.B), repeat=s.Y):
            z = 0.0
            for x in range(s.X):
                if sa[x] < s.A - 1:
                    z += am[x, sa[x]]
            for y in range(s.Y):
                if sb[y] < s.B - 1:
                    z += bm[y, sb[y]]
            for x in range(s.X):
                for y in range(s.Y):
                    if sa[x] < s.A - 1 and sb[y] < s.B - 1:
                        z += joint[x, y, sa[x], sb[y]]
            msum = m_alice_fail[sa] + m_bob_fail[sb]
            root = _largest_root(q - msum + z, msum - 2 * z, z - bound)
            if root is not None and (eta_min is None or root < eta_min):
                eta_min = root
    if eta_min is None:
        return 1.0, False
    return eta_min, True


def efficiency_value(ineq: Inequality, model: QuantumModel, eta: float,
                     fail_a, fail_b) -> float:
    """Value of the inequality on the efficiency-degraded behavior: each
    detector fires independently with probability eta; on failure the party
    outputs fail_a[x] / fail_b[y] deterministically.  eta = 1 reproduces the
    quantum value exactly."""
    s = ineq.scenario
    behavior = born_behavior(model, s)
    coords = np.zeros(s.cg_dim)
    pa = np.zeros((s.X, s.A - 1))
    pb = np.zeros((s.Y, s.B - 1))
    for x in range(s.X):
        for a in range(s.A - 1):
            pa[x, a] = behavior[s.alice_index(x, a)]
    for y in range(s.Y):
        for b in range(s.B - 1):
            pb[y, b] = behavior[s.bob_index(y, b)]
    for x in range(s.X):
        for a in range(s.A - 1):
            coords[s.alice_index(x, a)] = (
                eta * pa[x, a] + (1 - eta) * (fail_a[x] == a)
            )
            for y in range(s.Y):
                for b in range(s.B - 1):
                    coords[s.joint_index(x, y, a, b)] = (
                        eta * eta * behavior[s.joint_index(x, y, a, b)]
                        + eta * (1 - eta) * pa[x, a] * (fail_b[y] == b)
                        + eta * (1 - eta) * (fail_a[x] == a) * pb[y, b]
                        + (1 - eta) ** 2
                        * (fail_a[x] == a) * (fail_b[y] == b)
                    )
    for y in range(s.Y):
        for b in range(s.B - 1):
            coords[s.bob_index(y, b)] = (
                eta * pb[y, b] + (1 - eta) * (fail_b[y] == b)
            )
    return evaluate_numeric(ineq, coords)


def _largest_root(a, b, c):
    """Largest root of a*eta^2 + b*eta + c = 0 inside (0, 1]."""
    if abs(a) < 1e-14:
        if abs(b) < 1e-14:
            return None
        roots = [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            return None
        sq = np.sqrt(disc)
        roots = [(-b + sq) / (2 * a), (-b - sq) / (2 * a)]
    cand = [r for r in roots if 1e-12 < r <= 1 + 1e-12]
    if not cand:
        return None
    return min(max(cand), 1.0)


_SIGMA_Y2 = np.kron(
    np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])
)


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum."""
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (4, 4):
        raise ValueError("concurrence is defined for two-qubit states only")
    tilde = _SIGMA_Y2 @ rho.conj() @ _SIGMA_Y2
    ev = np.linalg.eigvals(rho @ tilde)
    ev = np.sqrt(np.clip(ev.real, 0, None))
    ev.sort()
    return float(max(0.0, ev[-1] - ev[-2] - ev[-3] - ev[-4]))


# --- per-inequality analysis -----------------------------------------------

def analyze(ineq: Inequality, dims=(2, 3, 4), level: str = "2",
            restarts: int = 20, seed: int = 0, name: str = "") -> AnalysisRow:
    q_npa = npa_upper_bound(ineq, level=level)
    q, lam, eta = {}, {}, {}
    conc = float("nan")
    violated = False
    for i, d in enumerate(dims):
        val, model = seesaw(ineq, d, restarts=restarts, seed=seed + i)
        q[d] = val
        lam_d, viol = resistance_to_noise(ineq, model)
        lam[d] = lam_d
        eta[d], _ = detection_efficiency(ineq, model)
        violated = violated or viol
        if d == 2 and viol:
            conc = concurrence(model.rho)
    return AnalysisRow(
        name, str(ineq.scenario), float(ineq.bound), q, q_npa, lam, eta,
        conc, violated,
    )


def rows_to_tsv(rows, dims=(2, 3, 4)) -> str:
    """Appendix-style table: Name, Scenario, L, Q, Q_NPA, lambda, eta_min, C
    with one line per (row, dimension)."""
    cols = ["Name", "Scenario", "d", "L", "Q", "Q_NPA", "lambda", "eta_min", "C"]
    lines = ["\t".join(cols)]
    for r in rows:
        for d in dims:
            if d not in r.q_seesaw:
                continue
            conc = f"{r.concurrence:.4f}" if d == 2 and not np.isnan(
                r.concurrence) else ""
            lines.append("\t".join([
                r.name, r.scenario, str(d), f"{r.local_bound:g}",
                f"{r.q_seesaw[d]:.4f}", f"{r.q_npa:.4f}",
                f"{r.noise[d]:.4f}", f"{r.eta[d]:.4f}", conc,
            ]))
    return "\n".join(lines) + "\n"
