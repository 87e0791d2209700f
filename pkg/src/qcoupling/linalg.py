"""Dense complex linear algebra for desk-scale operator problems.

Conventions used throughout the package:

* matrices are numpy complex128 arrays, row-major;
* the composite space H1 (x) H2 with dims (d1, d2) uses the index map
  (i, k) -> i * d2 + k, which is what ``numpy.kron`` produces;
* Hermitian data is symmetrized once at the boundary (``hermitize``)
  and trusted afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError

HERMITIAN_TOL = 1e-9
PROJECTOR_TOL = 1e-8
RANK_TOL = 1e-9
SPAN_DROP_TOL = 1e-9

_JACOBI_MAX_SWEEPS = 100
_JACOBI_OFF_FACTOR = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce input to a square complex matrix with finite entries."""
    try:
        m = np.array(a, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not interpretable as a complex matrix: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix entries must be finite")
    return m


def hermitize(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return the Hermitian part (M + M^dagger)/2.

    Rejects inputs whose anti-Hermitian part exceeds ``tol`` relative to
    max(1, ||M||_F): silently symmetrizing genuinely non-Hermitian data
    would hide caller bugs.
    """
    m = as_matrix(m)
    skew = np.linalg.norm(m - m.conj().T)
    if skew > tol * max(1.0, np.linalg.norm(m)):
        raise InputError(
            f"matrix is not Hermitian: anti-Hermitian part has norm {skew:.3e}"
        )
    return (m + m.conj().T) / 2.0


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor (Kronecker) product with composite index (i,k) -> i*d2 + k."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m: np.ndarray, d1: int, d2: int, side: str) -> np.ndarray:
    """Trace out one tensor factor of an operator on H1 (x) H2.

    side="first" returns tr_1(M) of shape (d2, d2); side="second"
    returns tr_2(M) of shape (d1, d1).
    """
    m = as_matrix(m)
    if d1 < 1 or d2 < 1 or m.shape[0] != d1 * d2:
        raise InputError(
            f"dimension mismatch: matrix of dim {m.shape[0]} is not {d1}x{d2} composite"
        )
    t = m.reshape(d1, d2, d1, d2)
    if side == "first":
        return np.einsum("ikil->kl", t)
    if side == "second":
        return np.einsum("ikjk->ij", t)
    raise InputError(f"side must be 'first' or 'second', got {side!r}")


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(A^dagger B) of two Hermitian matrices."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    v = np.vdot(a, b)
    if abs(v.imag) > 1e-9 * max(1.0, abs(v.real)):
        raise InputError(
            f"inner product has imaginary part {v.imag:.3e}; operands must be Hermitian"
        )
    return float(v.real)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    eigenvalues are real and sorted descending; eigenvectors[:, k] is the
    unit eigenvector paired with eigenvalues[k].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(h: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Eigendecomposition by cyclic Jacobi rotations (complex Givens).

    Sweeps the strict upper triangle, annihilating one off-diagonal entry
    per rotation, until the off-diagonal Frobenius norm falls below
    1e-12 * ||H||_F. Caps at 100 sweeps and raises NumericalError if the
    cap is hit, which for Hermitian input does not happen in practice.
    """
    a = hermitize(h, tol)
    d = a.shape[0]
    v = np.eye(d, dtype=np.complex128)
    if d == 1:
        return Spectrum(np.array([a[0, 0].real]), v)
    scale = np.linalg.norm(a)
    stop = _JACOBI_OFF_FACTOR * scale
    # entries at or below skip cannot push the off-diagonal norm above stop
    skip = stop / d
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diagonal(a)))
        if off <= stop:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                phase = apq / r
                theta = (a[p, p].real - a[q, q].real) / (2.0 * r)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c * phase.conjugate()
                sc = s.conjugate()
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp + s * cq
                a[:, q] = c * cq - sc * cp
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp + sc * rq
                a[q, :] = c * rq - s * rp
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + s * vq
                v[:, q] = c * vq - sc * vp
    else:
        raise NumericalError(
            f"jacobi eigensolver did not converge in {_JACOBI_MAX_SWEEPS} sweeps"
        )
    w = np.diagonal(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], v[:, order])


def is_psd(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """True iff the smallest eigenvalue of Hermitian h is >= -tol."""
    w = hermitian_eig(h).eigenvalues
    return bool(w[-1] >= -tol)


def psd_project(h: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clamp negative eigenvalues to 0."""
    s = hermitian_eig(h)
    w = np.clip(s.eigenvalues, 0.0, None)
    return (s.eigenvectors * w) @ s.eigenvectors.conj().T


def pair_index(i: int, j: int, n: int) -> int:
    """Composite index of |i>|j> on H1 (x) H2 with dim(H2) = n."""
    return i * n + j


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^d held as its orthogonal projector."""

    ambient_dim: int
    projector: np.ndarray

    def __post_init__(self):
        p = as_matrix(self.projector)
        if p.shape[0] != self.ambient_dim:
            raise InputError(
                f"projector dim {p.shape[0]} does not match ambient dim {self.ambient_dim}"
            )
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projector).real))

    @property
    def perp(self) -> np.ndarray:
        """Projector onto the orthogonal complement."""
        return np.eye(self.ambient_dim) - self.projector

    @classmethod
    def from_projector(cls, p, tol: float = PROJECTOR_TOL) -> "Subspace":
        """Build from a claimed projector; validates P = P^dagger = P^2.

        Idempotency within tol in Frobenius norm pins every eigenvalue to
        within tol of {0, 1}, so no separate spectral check is needed.
        """
        p = hermitize(p, tol)
        if np.linalg.norm(p @ p - p) > tol:
            raise InputError("matrix is not idempotent: not a projector")
        return cls(p.shape[0], p)

    @classmethod
    def from_span(cls, vectors, drop_tol: float = SPAN_DROP_TOL) -> "Subspace":
        """Span of the given vectors, orthonormalized by modified Gram-Schmidt.

        Vectors whose residual norm after orthogonalization against the
        earlier ones falls below drop_tol are dropped as dependent.
        """
        vecs = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors]
        if not vecs:
            raise InputError("span requires at least one vector")
        dim = vecs[0].size
        basis: list[np.ndarray] = []
        for vec in vecs:
            if vec.size != dim:
                raise InputError("span vectors have inconsistent dimensions")
            if not np.all(np.isfinite(vec)):
                raise InputError("span vector entries must be finite")
            v = vec.copy()
            for _ in range(2):  # second pass keeps the basis orthonormal to machine eps
                for b in basis:
                    v -= b * np.vdot(b, v)
            norm = np.linalg.norm(v)
            if norm < drop_tol:
                continue
            basis.append(v / norm)
        if not basis:
            return cls.zero(dim)
        vmat = np.column_stack(basis)
        return cls(dim, vmat @ vmat.conj().T)

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(dim, np.eye(dim, dtype=np.complex128))

    @classmethod
    def zero(cls, dim: int) -> "Subspace":
        return cls(dim, np.zeros((dim, dim), dtype=np.complex128))


def support(rho: np.ndarray, rank_tol: float = RANK_TOL) -> Subspace:
    """Span of the eigenvectors of PSD rho with eigenvalue > rank_tol * lambda_max."""
    s = hermitian_eig(rho)
    d = s.eigenvalues.size
    lam_max = float(s.eigenvalues[0]) if d else 0.0
    if lam_max <= 0.0:
        return Subspace.zero(d)
    keep = s.eigenvalues > rank_tol * lam_max
    if not np.any(keep):
        return Subspace.zero(d)
    vmat = s.eigenvectors[:, keep]
    return Subspace(d, vmat @ vmat.conj().T)
