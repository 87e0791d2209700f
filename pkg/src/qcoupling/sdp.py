"""Deciding quantum lifting existence by semidefinite programming.

The primal problem maximizes <P_X, X> over bipartite states X with both
partial traces pinned: tr_2(X) = rho1, tr_1(X) = rho2, X >= 0. A lifting
witness exists exactly when the optimum reaches tr(rho1). The dual
minimizes <rho1, Y1> + <rho2, Y2> subject to Y1 (x) I + I (x) Y2 >= P_X,
and a dual point with value below tr(rho1) converts into a separating
certificate pair via Y1 -> I - Y1 followed by a positivity shift.

The solver is an infeasible-start primal-dual path-following method with
Mehrotra-style adaptive centering. Each iteration eliminates the primal
and slack directions and solves a dense Schur system on the dual block
Herm(d1) (+) Herm(d2); that operator is positive semidefinite with a
one-dimensional kernel spanned by (I1, -I2) (both constraint blocks fix
the same total trace), which is deflated exactly. Strict dual feasibility
always holds at the start Y = (I1, I2), Z = 2I - P_X >= I.

Strict primal feasibility fails outright when a marginal is rank-deficient:
every feasible X is then confined to supp(rho1) (x) supp(rho2), the central
path degenerates, and the raw iteration stalls or breaks down. Such
problems are solved on their compression to that product support, where
the compressed marginals are positive definite and the path is regular,
and the solution is lifted back (the primal optimizer exactly, the dual
pair padded with zeros off the supports).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg, quantum
from .errors import InputError, SolverFailure
from .linalg import Subspace
from .quantum import CouplingProblem, DensityOperator

EPS_SOLVE = 1e-8
EPS_DECIDE = 1e-6
TRACE_MATCH_TOL = 1e-9

_MAX_ITER = 200
_BOUNDARY = 0.98
_SIGMA_MIN, _SIGMA_MAX = 0.01, 0.9
_RIDGE = 1e-12
_LSTSQ_RCOND = 1e-10
_SQRT2 = math.sqrt(2.0)
_BIG_STEP = 1e16
# relative eigenvalue cutoff below which a marginal direction counts as
# numerically absent; deliberately far below rank_tol so only machine-level
# zeros trigger the compressed solve
_SUPPORT_CUT = 1e-13


@dataclass(frozen=True)
class CouplingSDP:
    """Assembled problem data: objective A = P_X, marginal targets b1, b2."""

    d1: int
    d2: int
    a: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    @classmethod
    def from_problem(cls, problem: CouplingProblem) -> "CouplingSDP":
        t1 = problem.rho1.trace
        t2 = problem.rho2.trace
        if abs(t1 - t2) > TRACE_MATCH_TOL:
            raise InputError(
                f"marginal traces differ ({t1:.12g} vs {t2:.12g}); "
                "no coupling exists for unequal traces"
            )
        d1, d2 = problem.dims
        return cls(d1, d2, problem.subspace.projector, problem.rho1.mat, problem.rho2.mat)


@dataclass(frozen=True)
class SdpSolution:
    """Primal/dual pair with values, duality gap, residuals, iteration count."""

    primal_x: np.ndarray
    dual_y1: np.ndarray
    dual_y2: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int


@dataclass(frozen=True)
class LiftingVerdict:
    """Decision plus its proof object.

    exists=True carries a witness state; exists=False carries a certificate
    pair (Y1, Y2) with P_perp >= Y1 (x) I - I (x) Y2 and
    tr(rho1 Y1) > tr(rho2 Y2). diagnostics is the underlying solve.
    """

    exists: bool
    witness: DensityOperator | None
    certificate: tuple[np.ndarray, np.ndarray] | None
    diagnostics: SdpSolution


def _herm_basis(n: int):
    """Orthonormal real basis of Herm(n), ordered diag / sym / antisym."""
    iu = np.triu_indices(n, 1)
    mats = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        mats.append(e)
    for i, j in zip(*iu):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, j] = e[j, i] = 1.0 / _SQRT2
        mats.append(e)
    for i, j in zip(*iu):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, j] = 1j / _SQRT2
        e[j, i] = -1j / _SQRT2
        mats.append(e)
    return np.stack(mats), iu


def _hvec(h: np.ndarray, iu) -> np.ndarray:
    return np.concatenate(
        [np.diagonal(h).real, _SQRT2 * h[iu].real, _SQRT2 * h[iu].imag]
    )


def _hunvec(x: np.ndarray, n: int, iu) -> np.ndarray:
    h = np.zeros((n, n), dtype=np.complex128)
    np.fill_diagonal(h, x[:n])
    k = n + iu[0].size
    off = (x[n:k] + 1j * x[k:]) / _SQRT2
    h[iu] = off
    h[(iu[1], iu[0])] = off.conjugate()
    return h


@lru_cache(maxsize=32)
def _schur_data(d1: int, d2: int):
    """Cached per-dimension data: the stacked Phi*(basis) tensor, the
    triangular index maps, and the normalized kernel direction."""
    basis1, iu1 = _herm_basis(d1)
    basis2, iu2 = _herm_basis(d2)
    i1 = np.eye(d1, dtype=np.complex128)
    i2 = np.eye(d2, dtype=np.complex128)
    gs = np.concatenate(
        [
            np.stack([np.kron(e, i2) for e in basis1]),
            np.stack([np.kron(i1, e) for e in basis2]),
        ]
    )
    kernel = np.concatenate([_hvec(i1, iu1), -_hvec(i2, iu2)])
    kernel /= np.linalg.norm(kernel)
    return gs, iu1, iu2, kernel


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


def _phi(x: np.ndarray, d1: int, d2: int):
    t = x.reshape(d1, d2, d1, d2)
    return np.einsum("ikjk->ij", t), np.einsum("ikil->kl", t)


def _phi_star(y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
    return np.kron(y1, np.eye(y2.shape[0])) + np.kron(np.eye(y1.shape[0]), y2)


def _step_len(s: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with s + alpha*d PSD, for s strictly positive definite."""
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        # s grazed the boundary through roundoff; nudge and retry once
        n = s.shape[0]
        chol = np.linalg.cholesky(s + (1e-14 * abs(np.trace(s)) / n + 1e-300) * np.eye(n))
    w = np.linalg.solve(chol, d)
    w = np.linalg.solve(chol, w.conj().T).conj().T
    lam = float(np.linalg.eigvalsh(_herm(w))[0])
    if lam >= -1e-16:
        return _BIG_STEP
    return -1.0 / lam


def _newton_solve(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        dy = np.linalg.solve(m, rhs)
        dy += np.linalg.solve(m, rhs - m @ dy)  # one refinement pass
        return dy
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(m, rhs, rcond=_LSTSQ_RCOND)[0]


def _support_isometry(h: np.ndarray) -> tuple[np.ndarray, float]:
    """Isometry onto the numerical range of a PSD matrix, plus dropped mass."""
    w, v = np.linalg.eigh(_herm(h))
    keep = w > _SUPPORT_CUT * max(float(w[-1]), 0.0)
    off = float(np.clip(w[~keep], 0.0, None).sum())
    return np.ascontiguousarray(v[:, keep]), off


def solve_coupling_sdp(
    problem: CouplingProblem, eps: float = EPS_SOLVE, max_iter: int = _MAX_ITER
) -> SdpSolution:
    """Solve the lifting SDP to duality gap and residuals at most eps.

    Raises SolverFailure (with the best iterate attached) if the iteration
    cap is reached first. The initial primal point is a strictified version
    of the always-feasible product state rho1 (x) rho2 / tr(rho1).

    Rank-deficient marginals are solved on the compression to
    supp(rho1) (x) supp(rho2) and lifted back. The lifted primal optimizer
    is exact (its marginals and objective value are unchanged); the dual
    pair is padded with zeros off the supports, which keeps its objective
    value but not the full-space operator inequality, so primal values,
    dual values, and the gap are the true ones while the reported dual
    residual refers to the compressed system. The primal residual is
    recomputed against the original marginals.
    """
    sdp = CouplingSDP.from_problem(problem)
    d1, d2, a, b1, b2 = sdp.d1, sdp.d2, sdp.a, sdp.b1, sdp.b2
    if float(np.trace(b1).real) <= 0.0:
        raise InputError("tr(rho1) must be positive (zero states are decided upstream)")
    v1, _ = _support_isometry(b1)
    v2, _ = _support_isometry(b2)
    r1, r2 = v1.shape[1], v2.shape[1]
    if r1 == d1 and r2 == d2:
        return _solve_core(d1, d2, a, b1, b2, eps, max_iter)

    w = np.kron(v1, v2)
    at = _herm(w.conj().T @ a @ w)
    bt1 = _herm(v1.conj().T @ b1 @ v1)
    bt2 = _herm(v2.conj().T @ b2 @ v2)

    def lift(sol: SdpSolution) -> SdpSolution:
        x = _herm(w @ sol.primal_x @ w.conj().T)
        p1, p2 = _phi(x, d1, d2)
        pres = math.hypot(np.linalg.norm(b1 - p1), np.linalg.norm(b2 - p2))
        return SdpSolution(
            x,
            _herm(v1 @ sol.dual_y1 @ v1.conj().T),
            _herm(v2 @ sol.dual_y2 @ v2.conj().T),
            sol.primal_value,
            sol.dual_value,
            sol.gap,
            float(pres),
            sol.dual_residual,
            sol.iterations,
        )

    try:
        core = _solve_core(r1, r2, at, bt1, bt2, eps, max_iter)
    except SolverFailure as err:
        best = lift(err.best) if err.best is not None else None
        raise SolverFailure(str(err), best) from None
    return lift(core)


def _solve_core(
    d1: int,
    d2: int,
    a: np.ndarray,
    b1: np.ndarray,
    b2: np.ndarray,
    eps: float,
    max_iter: int,
) -> SdpSolution:
    """Run the interior-point iteration on assembled problem data.

    Requires strictly positive-definite b1, b2 (the caller compresses
    rank-deficient marginals away) and a <= I so that Z = 2I - a starts
    strictly feasible; a need not be a projector.
    """
    d = d1 * d2
    t = float(np.trace(b1).real)
    gs, iu1, iu2, kernel = _schur_data(d1, d2)
    m = gs.shape[0]
    gs_flat = gs.reshape(m, d * d)
    eye = np.eye(d, dtype=np.complex128)

    x = 0.9 / t * np.kron(b1, b2) + 0.1 * t / d * eye
    y1 = np.eye(d1, dtype=np.complex128)
    y2 = np.eye(d2, dtype=np.complex128)
    z = 2.0 * eye - a

    def pair_vec(h1, h2):
        return np.concatenate([_hvec(h1, iu1), _hvec(h2, iu2)])

    def snapshot(iters):
        return SdpSolution(
            x.copy(), y1.copy(), y2.copy(), pval, dval, gap, pres, dres, iters
        )

    best = None
    best_score = np.inf
    for it in range(max_iter + 1):
        p1, p2 = _phi(x, d1, d2)
        rp1 = b1 - p1
        rp2 = b2 - p2
        rd = a + z - _phi_star(y1, y2)
        mu = float(np.vdot(x, z).real) / d
        pres = math.hypot(np.linalg.norm(rp1), np.linalg.norm(rp2))
        dres = float(np.linalg.norm(rd))
        pval = float(np.vdot(a, x).real)
        dval = float(np.vdot(b1, y1).real + np.vdot(b2, y2).real)
        gap = abs(dval - pval)
        score = max(gap, pres, dres)
        if score < best_score:
            best_score = score
            best = snapshot(it)
        if gap <= eps and pres <= eps and dres <= eps:
            return snapshot(it)
        if it == max_iter:
            break

        zinv = _herm(np.linalg.inv(z))
        ps = np.matmul(x, np.matmul(gs, zinv))
        schur = (gs_flat @ ps.transpose(0, 2, 1).reshape(m, d * d).T).real
        schur = (schur + schur.T) / 2.0
        deflate = max(1.0, float(np.trace(schur)) / m)
        schur = schur + deflate * np.outer(kernel, kernel) + _RIDGE * np.eye(m)

        # affine (predictor) direction: sigma = 0, no correction term
        xrd = x @ rd
        w = _herm(xrd @ zinv)
        w1, w2 = _phi(w, d1, d2)
        dy = _newton_solve(schur, pair_vec(w1 - b1, w2 - b2))
        dy1a = _hunvec(dy[: d1 * d1], d1, iu1)
        dy2a = _hunvec(dy[d1 * d1 :], d2, iu2)
        dza = _phi_star(dy1a, dy2a) - rd
        dxa = -x - _herm((x @ dza) @ zinv)
        ap_aff = min(1.0, _step_len(x, dxa))
        ad_aff = min(1.0, _step_len(z, dza))
        mu_aff = max(
            0.0, float(np.vdot(x + ap_aff * dxa, z + ad_aff * dza).real) / d
        )
        sigma = min(_SIGMA_MAX, max(_SIGMA_MIN, (mu_aff / mu) ** 3)) if mu > 0 else _SIGMA_MAX

        # combined (corrector) direction
        corr = dxa @ dza
        w = _herm((xrd - corr) @ zinv)
        w1, w2 = _phi(w, d1, d2)
        zi1, zi2 = _phi(zinv, d1, d2)
        rhs1 = sigma * mu * zi1 - b1 + w1
        rhs2 = sigma * mu * zi2 - b2 + w2
        dy = _newton_solve(schur, pair_vec(rhs1, rhs2))
        dy1 = _hunvec(dy[: d1 * d1], d1, iu1)
        dy2 = _hunvec(dy[d1 * d1 :], d2, iu2)
        dz = _phi_star(dy1, dy2) - rd
        dx = sigma * mu * zinv - x - _herm((corr + x @ dz) @ zinv)

        ap = min(1.0, _BOUNDARY * _step_len(x, dx))
        ad = min(1.0, _BOUNDARY * _step_len(z, dz))
        x = _herm(x + ap * dx)
        y1 = _herm(y1 + ad * dy1)
        y2 = _herm(y2 + ad * dy2)
        z = _herm(z + ad * dz)

    raise SolverFailure(
        f"interior-point solve did not reach {eps:.1e} within {max_iter} iterations "
        f"(best gap {best.gap:.3e}, residuals {best.primal_residual:.3e}/"
        f"{best.dual_residual:.3e})",
        best,
    )


def condition_a_transform(y1: np.ndarray, y2: np.ndarray):
    """Swap between dual-feasible pairs and separating pairs: Y1 -> I - Y1.

    (Y1 (x) I + I (x) Y2 >= P_X) holds iff (P_perp >= (I-Y1) (x) I - I (x) Y2),
    and applying the map twice returns the original pair.
    """
    y1 = linalg.hermitize(y1)
    y2 = linalg.hermitize(y2)
    return np.eye(y1.shape[0]) - y1, y2


def shift_positive(y1: np.ndarray, y2: np.ndarray):
    """Shift both operators by the joint minimum eigenvalue, making them PSD.

    Returns (Y1 - lam*I, Y2 - lam*I, lam). The difference
    Y1 (x) I - I (x) Y2 is unchanged, so the separating inequality is
    preserved exactly; with equal traces the expectation margin is too.
    """
    y1 = linalg.hermitize(y1)
    y2 = linalg.hermitize(y2)
    lam = min(
        float(linalg.hermitian_eig(y1).eigenvalues[-1]),
        float(linalg.hermitian_eig(y2).eigenvalues[-1]),
    )
    return y1 - lam * np.eye(y1.shape[0]), y2 - lam * np.eye(y2.shape[0]), lam


def verify_dual_certificate(
    y1: np.ndarray,
    y2: np.ndarray,
    problem: CouplingProblem,
    tol: float = quantum.DEFAULT_TOL,
) -> bool:
    """Check a separating pair: operator inequality plus strict trace gap.

    True iff P_perp - (Y1 (x) I - I (x) Y2) is PSD within tol and
    tr(rho1 Y1) > tr(rho2 Y2) + tol. Such a pair refutes every candidate
    witness at once.
    """
    y1 = linalg.hermitize(y1)
    y2 = linalg.hermitize(y2)
    d1, d2 = problem.dims
    if y1.shape[0] != d1 or y2.shape[0] != d2:
        raise InputError("certificate dimensions do not match the problem")
    diff = np.kron(y1, np.eye(d2)) - np.kron(np.eye(d1), y2)
    if not linalg.is_psd(problem.subspace.perp - diff, tol):
        return False
    margin = quantum.expectation(y1, problem.rho1) - quantum.expectation(
        y2, problem.rho2
    )
    return margin > tol


def _spectral_norm(h: np.ndarray) -> float:
    w = linalg.hermitian_eig(h).eigenvalues
    return float(max(abs(w[0]), abs(w[-1])))


def _complete_dual(
    sol: SdpSolution,
    v1: np.ndarray,
    v2: np.ndarray,
    problem: CouplingProblem,
    t1: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Extend a support-compressed dual pair to a full-space feasible one.

    The zero-padded dual from a compressed solve satisfies the operator
    inequality Y1 (x) I + I (x) Y2 >= P only on supp(rho1) (x) supp(rho2);
    P couples that block to its orthocomplement, where the padding offers
    nothing. The completion buys a uniform slack eta on the support block
    (spending eta * tr(rho1) of the trace margin) and raises the
    orthocomplements by a constant big enough that the Schur-complement
    bound eta * m >= ||cross||^2 (with ||cross|| <= ||P|| = 1) closes the
    off-support blocks. Dual feasibility of the result is exact, not
    approximate; the cost is a certificate whose margin shrinks by a
    quarter and whose norm grows like 1/margin.
    """
    d1, d2 = problem.dims
    yt1 = _herm(v1.conj().T @ sol.dual_y1 @ v1)
    yt2 = _herm(v2.conj().T @ sol.dual_y2 @ v2)
    w = np.kron(v1, v2)
    at = _herm(w.conj().T @ problem.subspace.projector @ w)
    slack = float(
        np.linalg.eigvalsh(
            _phi_star(yt1, yt2) - at
        )[0]
    )
    margin = t1 - sol.dual_value
    eta = margin / (4.0 * max(t1, 1.0))
    eta_eff = eta + min(slack, 0.0)
    if eta_eff <= 0.0:
        raise SolverFailure(
            "trace margin too small to complete the dual certificate "
            f"(margin {margin:.3e}, support-block slack {slack:.3e})",
            sol,
        )
    spec = max(
        float(np.abs(np.linalg.eigvalsh(yt1)).max(initial=0.0)),
        float(np.abs(np.linalg.eigvalsh(yt2)).max(initial=0.0)),
    )
    big = 1.0 + spec + 2.0 / eta_eff
    q1 = np.eye(d1) - v1 @ v1.conj().T
    q2 = np.eye(d2) - v2 @ v2.conj().T
    y1 = _herm(v1 @ (yt1 + eta * np.eye(v1.shape[1])) @ v1.conj().T + big * q1)
    y2 = _herm(v2 @ yt2 @ v2.conj().T + big * q2)
    return y1, y2


def check_quantum_lifting(
    problem: CouplingProblem,
    eps_solve: float = EPS_SOLVE,
    eps_decide: float = EPS_DECIDE,
) -> LiftingVerdict:
    """Decide whether (rho1, rho2) admits a coupling inside the subspace.

    Exists when the SDP optimum reaches tr(rho1) - eps_decide; the witness
    is the cleaned-up optimizer (symmetrized, PSD-projected, trace-matched)
    and must re-verify at 10*eps_solve or the verdict degrades to a solver
    failure. NotExists returns a certificate built from the dual optimum
    (condition-A transform, positivity shift, then rescaled to operator
    norm at most 1 when that keeps the trace gap decisive), verified the
    same way; for rank-deficient marginals the compressed dual is first
    completed to a full-space feasible pair. The zero state couples with
    itself inside any subspace, via the zero witness.
    """
    t1 = problem.rho1.trace
    t2 = problem.rho2.trace
    if abs(t1 - t2) > TRACE_MATCH_TOL:
        raise InputError(
            f"marginal traces differ ({t1:.12g} vs {t2:.12g}); "
            "a coupling forces equal traces"
        )
    d1, d2 = problem.dims
    d = d1 * d2
    if t1 <= TRACE_MATCH_TOL:
        zero = np.zeros((d, d), dtype=np.complex128)
        sol = SdpSolution(
            zero,
            np.zeros((d1, d1), dtype=np.complex128),
            np.zeros((d2, d2), dtype=np.complex128),
            0.0, 0.0, 0.0, 0.0, 0.0, 0,
        )
        return LiftingVerdict(True, DensityOperator(zero), None, sol)

    sol = solve_coupling_sdp(problem, eps_solve)
    tol = 10.0 * eps_solve
    if t1 - sol.primal_value <= eps_decide:
        w = linalg.psd_project(sol.primal_x)
        trw = float(np.trace(w).real)
        if trw > 0.0:
            w = w * (t1 / trw)
        witness = DensityOperator(w)
        if not quantum.is_lifting_witness(witness, problem, tol):
            raise SolverFailure(
                "witness cleanup pushed residuals beyond 10*eps_solve", sol
            )
        return LiftingVerdict(True, witness, None, sol)

    y1, y2 = sol.dual_y1, sol.dual_y2
    v1, _ = _support_isometry(problem.rho1.mat)
    v2, _ = _support_isometry(problem.rho2.mat)
    if v1.shape[1] < d1 or v2.shape[1] < d2:
        y1, y2 = _complete_dual(sol, v1, v2, problem, t1)
    y1, y2 = condition_a_transform(y1, y2)
    y1, y2, _ = shift_positive(y1, y2)
    norm = max(_spectral_norm(y1), _spectral_norm(y2))
    if norm > 1.0:
        margin = quantum.expectation(y1, problem.rho1) - quantum.expectation(
            y2, problem.rho2
        )
        if margin / norm > eps_decide:
            y1 = y1 / norm
            y2 = y2 / norm
    if not verify_dual_certificate(y1, y2, problem, tol):
        raise SolverFailure(
            "dual certificate failed verification at 10*eps_solve", sol
        )
    return LiftingVerdict(False, None, (y1, y2), sol)
