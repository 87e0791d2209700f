"""Diagonal embedding of classical lifting problems into quantum ones.

A sub-distribution becomes the diagonal state with its weights, and a
relation becomes the span of the computational product vectors |ij> it
contains. Classical lifting witnesses embed as diagonal coupling
witnesses; conversely the diagonal of any quantum witness for an
embedded problem is already a classical witness, so the two checkers
must agree verdict-for-verdict. cross_check runs both sides on the same
instance and translates whichever witness appears across the divide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classical, linalg, quantum, sdp
from .classical import Relation
from .errors import InputError, NumericalError
from .quantum import CouplingProblem, DensityOperator

_EXTRACT_TOL = 1e-9


@dataclass(frozen=True)
class EmbeddingReport:
    """Verdicts from both checkers on one instance, plus witness round-trip.

    witness_roundtrip_error is the largest marginal deviation seen when
    translating a witness to the other side (0.0 when both say NotExists).
    agreement is simply classical_verdict == quantum_verdict.
    """

    classical_verdict: str
    quantum_verdict: str
    witness_roundtrip_error: float
    agreement: bool


def embed_distribution(weights) -> DensityOperator:
    """Diagonal state with rho[i, i] = mu(i)."""
    weights = classical.check_subdistribution(weights)
    return DensityOperator(np.diag([float(w) for w in weights]).astype(np.complex128))


def embed_relation(relation: Relation) -> linalg.Subspace:
    """span{|i>|j> : (i, j) in R} as a diagonal projector, built exactly."""
    d = relation.m * relation.n
    p = np.zeros((d, d), dtype=np.complex128)
    for i, j in relation.pairs:
        k = linalg.pair_index(i, j, relation.n)
        p[k, k] = 1.0
    return linalg.Subspace(d, p)


def embed_joint(joint) -> DensityOperator:
    """Diagonal operator on the product space with mu(i, j) at index i*n+j."""
    rows = classical.check_joint(joint)
    m, n = len(rows), len(rows[0])
    diag = np.zeros(m * n)
    for i in range(m):
        for j in range(n):
            diag[linalg.pair_index(i, j, n)] = float(rows[i][j])
    return DensityOperator(np.diag(diag).astype(np.complex128))


def extract_joint(rho: DensityOperator, m: int, n: int) -> list[list[float]]:
    """Diagonal readout mu(i, j) = <ij| rho |ij>, clamped at the -1e-9 floor.

    Off-diagonal structure is deliberately ignored: for embedded problems
    only the diagonal carries classical meaning, and it already inherits
    the marginal and support properties of the full operator.
    """
    if rho.dim != m * n:
        raise InputError(f"state dimension {rho.dim} != m*n = {m * n}")
    diag = np.diagonal(rho.mat).real
    low = float(diag.min()) if diag.size else 0.0
    if low < -_EXTRACT_TOL:
        raise InputError(f"diagonal entry {low:.3e} below the -1e-9 tolerance")
    return [
        [max(float(diag[linalg.pair_index(i, j, n)]), 0.0) for j in range(n)]
        for i in range(m)
    ]


def cross_check(
    mu1,
    mu2,
    relation: Relation,
    eps_solve: float = sdp.EPS_SOLVE,
    eps_decide: float = sdp.EPS_DECIDE,
) -> EmbeddingReport:
    """Run both checkers on one instance and translate witnesses across.

    Classical Exists: the max-flow witness is embedded and must verify
    quantum-side. Quantum Exists: the SDP witness's diagonal is extracted
    and must verify classical-side at 10*eps_solve. A translation failure
    is a numerical failure, not a verdict.
    """
    cv = classical.check_lifting_maxflow(mu1, mu2, relation)
    problem = CouplingProblem(
        embed_distribution(mu1), embed_distribution(mu2), embed_relation(relation)
    )
    qv = sdp.check_quantum_lifting(problem, eps_solve, eps_decide)

    roundtrip = 0.0
    if cv.exists:
        embedded = embed_joint(cv.witness)
        dev = max(
            quantum.marginal_deviation(embedded, problem.rho1, problem.rho2)
        )
        roundtrip = max(roundtrip, dev)
        if not quantum.is_lifting_witness(embedded, problem, 10.0 * eps_solve):
            raise NumericalError(
                "embedded classical witness failed quantum verification"
            )
    if qv.exists:
        joint = extract_joint(qv.witness, relation.m, relation.n)
        flo1 = [float(w) for w in mu1]
        flo2 = [float(w) for w in mu2]
        ext1, ext2 = classical.marginals(joint)
        dev = max(
            [abs(a - b) for a, b in zip(ext1, flo1)]
            + [abs(a - b) for a, b in zip(ext2, flo2)]
        )
        roundtrip = max(roundtrip, dev)
        if not classical.is_lifting_witness_classical(
            joint, flo1, flo2, relation, 10.0 * eps_solve
        ):
            raise NumericalError(
                "extracted quantum witness failed classical verification"
            )

    tag = lambda exists: "exists" if exists else "not_exists"
    return EmbeddingReport(
        tag(cv.exists), tag(qv.exists), roundtrip, cv.exists == qv.exists
    )
