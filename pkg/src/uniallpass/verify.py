"""Allpass certification independent of delay lengths.

A system is certified once a positive diagonal ``dsim`` makes the block
system matrix an isometry of the weighted inner product diag(dsim, I); the
certificate then covers every choice of delay lengths.  Two recovery routes
for ``dsim`` are provided (a dense Lyapunov solve and an Engel-Schneider
style Hadamard quotient), plus the exhaustive principal-minor condition that
is necessary in general and equivalent for single-input single-output
systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL
from .errors import NotCertifiableError, UnstableError
from .kernels import principal_minors_all
from .system import FdnSystem, SystemMatrix


@dataclass(frozen=True, eq=False)
class SchurPair:
    """Schur complements of the two diagonal blocks of the system matrix:
    ``s_d = A - B D^-1 C`` and ``s_a = D - C A^-1 B``."""

    s_d: np.ndarray
    s_a: np.ndarray


@dataclass(frozen=True, eq=False)
class UniallpassCertificate:
    """Result of the sufficient (delay-independent) allpass check."""

    dsim: np.ndarray
    residual: float
    verdict: bool
    tol: float


@dataclass(frozen=True)
class MinorCheck:
    """Result of the principal-minor matching condition.

    For P = 1 a pass is equivalent to the system being allpass for every
    delay vector; for P > 1 it is only necessary (``sufficient`` is False).
    """

    verdict: bool
    sign: int
    deviation: float
    worst_subset: tuple
    sufficient: bool
    tol: float


def schur_complements(fdn: FdnSystem) -> SchurPair:
    """Both Schur complements; raises naming the singular block."""
    try:
        d_inv = np.linalg.inv(fdn.d)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("direct-gain block D is singular") from None
    try:
        a_inv = np.linalg.inv(fdn.a)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("feedback block A is singular") from None
    s_d = fdn.a - fdn.b @ d_inv @ fdn.c
    s_a = fdn.d - fdn.c @ a_inv @ fdn.b
    return SchurPair(s_d=s_d, s_a=s_a)


def apply_diagonal_similarity(fdn: FdnSystem, t) -> FdnSystem:
    """Equivalent realization with A -> T^-1 A T, B -> T^-1 B, C -> C T.

    The transfer function is unchanged for any nonzero diagonal T.
    """
    t = np.asarray(t, dtype=float).ravel()
    if t.size != fdn.n_delays:
        raise ValueError(f"similarity vector has length {t.size}, expected {fdn.n_delays}")
    if np.any(t == 0):
        raise ValueError("similarity vector must have nonzero entries")
    return FdnSystem(
        (fdn.a * t[None, :]) / t[:, None],
        fdn.b / t[:, None],
        fdn.c * t[None, :],
        fdn.d,
        fdn.delays,
    )


def lyapunov_gram(a, b):
    """Solve X - A X A^T = B B^T by the Kronecker-vectorized linear system.

    Requires spectral radius of A below one (unique solution).
    """
    a = np.asarray(a, dtype=float)
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] != a.shape[0]:
        b = b.T
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if radius >= 1.0:
        raise UnstableError(np.linalg.eigvals(a), f"spectral radius {radius:.6g} >= 1")
    n = a.shape[0]
    lhs = np.eye(n * n) - np.kron(a, a)
    x = np.linalg.solve(lhs, (b @ b.T).ravel()).reshape(n, n)
    return 0.5 * (x + x.T)


def dsim_from_lyapunov(a, b, tol=DEFAULT_TOL):
    """Diagonal similarity candidate from the Lyapunov solution.

    Succeeds only when the Gram solution X is diagonal (off-diagonal
    Frobenius mass below ``tol`` times the diagonal mass) and positive;
    otherwise raises :class:`NotCertifiableError` carrying the candidate.
    """
    x = lyapunov_gram(a, b)
    diag = np.diag(x).copy()
    off = x - np.diag(diag)
    diag_mass = float(np.linalg.norm(diag))
    off_mass = float(np.linalg.norm(off))
    if diag_mass == 0.0 or off_mass > tol * diag_mass:
        raise NotCertifiableError(
            f"Lyapunov solution is not diagonal (off/diag mass {off_mass / max(diag_mass, 1e-300):.3g})",
            candidate=diag,
            gram=x,
        )
    if np.any(diag <= 0):
        raise NotCertifiableError(
            "Lyapunov solution has nonpositive diagonal entries",
            candidate=diag,
            gram=x,
        )
    return diag


def dsim_from_hadamard_quotient(sys: SystemMatrix, tol=1e-6):
    """Diagonal similarity from the rank-1 structure of S_D^-1 (/) A^T.

    On the shared nonzero pattern the elementwise quotient of a certified
    system equals ``dsim_i / dsim_j``, so its logarithm is a difference of
    node potentials: these are recovered by least squares over the pattern
    graph (which must be connected).  A nonzero entry of S_D^-1 sitting on a
    zero of A^T means the patterns disagree and the recovery is rejected; so
    is a disconnected pattern.  The result is scale-free and normalized to
    ``dsim[0] = 1``.
    """
    a, b, c, d = sys.blocks
    fdn = FdnSystem(a, b, c, d, [1] * sys.split)
    s_d = schur_complements(fdn).s_d
    s_inv = np.linalg.inv(s_d)
    n = sys.split
    structural = 1e-9 * max(float(np.max(np.abs(a))), float(np.max(np.abs(s_inv))))
    support = np.abs(a.T) > structural
    if np.any(~support & (np.abs(s_inv) > structural)):
        raise NotCertifiableError(
            "zero feedback entries facing nonzero Schur-inverse entries; "
            "recovery on mismatched sparsity patterns is unsupported"
        )
    quot = np.where(support, s_inv, 0.0) / np.where(support, a.T, 1.0)
    if np.any(quot[support] <= 0):
        raise NotCertifiableError("Hadamard quotient has inconsistent signs")
    # connectivity of the pattern graph (needed to relate all scales)
    reach = np.zeros(n, dtype=bool)
    reach[0] = True
    frontier = [0]
    adjacency = support | support.T
    while frontier:
        node = frontier.pop()
        for other in np.nonzero(adjacency[node])[0]:
            if not reach[other]:
                reach[other] = True
                frontier.append(int(other))
    if not np.all(reach):
        raise NotCertifiableError("feedback pattern is disconnected; scales cannot be related")
    rows_i, cols_j = np.nonzero(support)
    logs = np.log(quot[rows_i, cols_j])
    design = np.zeros((len(logs), n))
    design[np.arange(len(logs)), rows_i] += 1.0
    design[np.arange(len(logs)), cols_j] -= 1.0
    # pin the gauge u_0 = 0
    design = design[:, 1:]
    u, *_ = np.linalg.lstsq(design, logs, rcond=None)
    fit = design @ u
    if float(np.max(np.abs(fit - logs))) > tol:
        raise NotCertifiableError(
            f"Hadamard quotient is not similarity-consistent "
            f"(log residual {float(np.max(np.abs(fit - logs))):.3g})"
        )
    return np.exp(np.concatenate([[0.0], u]))


def certify_uniallpass(fdn: FdnSystem, dsim, tol=DEFAULT_TOL) -> UniallpassCertificate:
    """Sufficient certificate: with W = diag(dsim, I_P), test U W U^T = W for
    the block system matrix U.  A pass with positive ``dsim`` certifies the
    allpass property for every delay vector."""
    dsim = np.asarray(dsim, dtype=float).ravel()
    u = SystemMatrix.from_fdn(fdn).u
    w = np.concatenate([dsim, np.ones(fdn.n_io)])
    residual = float(np.max(np.abs((u * w[None, :]) @ u.T - np.diag(w))))
    verdict = bool(residual < tol and np.all(dsim > 0))
    return UniallpassCertificate(dsim=dsim, residual=residual, verdict=verdict, tol=float(tol))


def check_minor_condition(fdn: FdnSystem, tol=DEFAULT_TOL) -> MinorCheck:
    """Exhaustive principal-minor matching between S_D and A^-1.

    Finds the sign s in {+1, -1} minimizing
    max over subsets I of |det S_D(I) - s det A^-1(I)| and passes when the
    minimum is below ``tol``.  Subset enumeration is capped at N = 20.
    """
    n = fdn.n_delays
    if n > 20:
        raise ValueError(f"minor condition limited to N <= 20, got {n}")
    s_d = schur_complements(fdn).s_d
    a_inv = np.linalg.inv(fdn.a)
    minors_s = principal_minors_all(s_d)
    minors_ai = principal_minors_all(a_inv)
    best = None
    for sign in (+1, -1):
        diffs = np.abs(minors_s - sign * minors_ai)
        worst = int(np.argmax(diffs))
        dev = float(diffs[worst])
        if best is None or dev < best[0]:
            best = (dev, sign, worst)
    dev, sign, worst = best
    subset = tuple(i for i in range(n) if (worst >> i) & 1)
    return MinorCheck(
        verdict=bool(dev < tol),
        sign=sign,
        deviation=dev,
        worst_subset=subset,
        sufficient=fdn.is_siso,
        tol=float(tol),
    )


def balanced_form(fdn: FdnSystem, dsim) -> FdnSystem:
    """Similarity image under T = sqrt(dsim); when the certificate holds the
    resulting block system matrix is orthogonal."""
    dsim = np.asarray(dsim, dtype=float).ravel()
    if np.any(dsim <= 0):
        raise ValueError("balanced form requires a strictly positive dsim")
    return apply_diagonal_similarity(fdn, np.sqrt(dsim))


def balanced_residuals(fdn: FdnSystem):
    """Max-norm defects of the three orthogonality identities of a balanced
    system: AA^T + BB^T = I, AC^T + BD^T = 0, CC^T + DD^T = I."""
    a, b, c, d = fdn.a, fdn.b, fdn.c, fdn.d
    eye_n = np.eye(fdn.n_delays)
    eye_p = np.eye(fdn.n_io)
    r1 = float(np.max(np.abs(a @ a.T + b @ b.T - eye_n)))
    r2 = float(np.max(np.abs(a @ c.T + b @ d.T)))
    r3 = float(np.max(np.abs(c @ c.T + d @ d.T - eye_p)))
    return r1, r2, r3
