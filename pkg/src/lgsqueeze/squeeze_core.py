"""Polar decomposition of the squeezing matrix and closed-form state statistics.

The squeezing matrix xi factors as xi = R e^{i Theta} with R Hermitian
positive semidefinite (squeeze magnitudes) and Theta Hermitian (squeeze
phases).  R and Theta do not commute in general, so every formula here keeps
the operand order of its derivation; matrix functions are evaluated by
eigendecomposition of the Hermitian factor and Schur decomposition of the
unitary phase factor.

The closed forms below describe the vacuum-seeded two-beam squeezer
S = exp[b~ xi^dag a - a~^dag xi b^dag] and are exact for symmetric xi (the
case produced by identical signal and idler collection geometries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .coupling import InteractionType
from .modes import ModeBasis

__all__ = [
    "SqueezeMatrix",
    "StateReport",
    "polar_decompose",
    "scalar_quadrature_variance",
    "quadrature_variance_matrices",
    "cross_covariance",
    "photon_statistics",
    "pair_creation_matrix",
    "degenerate_statistics",
    "bogoliubov_matrix",
    "bogoliubov_metric",
    "state_report",
    "takagi_decompose",
]

VACUUM_VARIANCE = 0.25


def _complete_orthonormal(cols: np.ndarray, n: int) -> np.ndarray:
    """Extend orthonormal columns to a full basis by Gram-Schmidt over e_1, e_2, ...

    The completion depends only on the input columns and the canonical basis
    order, so repeated runs produce identical factors.
    """
    have = [cols[:, k] for k in range(cols.shape[1])]
    k = 0
    while len(have) < n:
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        for u in have:
            v -= u * np.vdot(u, v)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            have.append(v / norm)
        k += 1
    return np.column_stack(have)


def polar_decompose(xi: np.ndarray):
    """Left polar decomposition xi = R e^{i Theta}.

    Computed from the SVD xi = W S V^dag as R = W S W^dag and
    phase = W V^dag; theta is the principal Hermitian logarithm of the
    phase factor (eigenphases in (-pi, pi]).  Zero singular values leave the
    phase underdetermined; those columns of W and V are replaced by a
    deterministic Gram-Schmidt completion against the canonical basis.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi must be finite")
    w, s, vh = np.linalg.svd(xi)
    cutoff = max(n, 1) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    if rank < n:
        w = _complete_orthonormal(w[:, :rank], n)
        v = _complete_orthonormal(vh.conj().T[:, :rank], n)
        s = np.concatenate([s[:rank], np.zeros(n - rank)])
        vh = v.conj().T
    r_factor = (w * s) @ w.conj().T
    r_factor = 0.5 * (r_factor + r_factor.conj().T)
    phase = w @ vh
    # principal log of the unitary factor via its (complex) Schur form
    t, q = scipy.linalg.schur(phase, output="complex")
    angles = np.angle(np.diagonal(t))
    theta = (q * angles) @ q.conj().T
    theta = 0.5 * (theta + theta.conj().T)
    return r_factor, phase, theta


def _hermitian_fn(h: np.ndarray, fn) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * fn(vals)) @ vecs.conj().T


@dataclass
class SqueezeMatrix:
    """Complex squeezing matrix with cached polar factors.

    Rows are signal modes, columns idler modes, both ordered per the basis.
    """

    xi: np.ndarray
    basis: ModeBasis
    interaction: InteractionType
    polar_R: np.ndarray = field(default=None, repr=False)
    polar_phase: np.ndarray = field(default=None, repr=False)
    theta: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=complex)
        if self.xi.ndim != 2 or self.xi.shape[0] != self.xi.shape[1]:
            raise ValueError(f"xi must be square, got shape {self.xi.shape}")
        if self.basis is not None and self.basis.size != self.xi.shape[0]:
            raise ValueError("basis size does not match matrix dimension")
        if self.polar_R is None:
            self.polar_R, self.polar_phase, self.theta = polar_decompose(self.xi)

    @property
    def size(self) -> int:
        return self.xi.shape[0]

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        scale = max(np.linalg.norm(self.xi), 1e-300)
        return np.linalg.norm(self.xi - self.xi.T) / scale < tol


@dataclass
class StateReport:
    """All closed-form statistics of the squeezed state for one matrix."""

    var_X1: np.ndarray
    var_X2: np.ndarray
    scalar_var: tuple
    cross_cov: np.ndarray
    nbar_matrix: np.ndarray
    nbar_total: float
    number_variance: float
    number_covariance: float
    pair_matrix: np.ndarray
    squeezing_db_per_mode: np.ndarray
    mode_labels: list

    def pair_probabilities(self) -> np.ndarray:
        mod = np.abs(self.pair_matrix)
        total = mod.sum()
        return mod / total if total > 0 else mod


def scalar_quadrature_variance(sq: SqueezeMatrix):
    """Total quadrature variances (v1, v2) summed over all modes.

    Evaluated in the primitive operand order
    1/4 Tr{cosh^2 R + sinh^2 R -/+ 2 Re[sinh(R) e^{i Theta} cosh(R~)]},
    which is exact for arbitrary xi; the compact cosh(2R), sinh(2R) cos(Theta)
    form coincides with it for symmetric xi.  Vacuum gives (N/4, N/4).
    """
    ch = _hermitian_fn(sq.polar_R, np.cosh)
    sh = _hermitian_fn(sq.polar_R, np.sinh)
    base = np.trace(ch @ ch).real + np.trace(sh @ sh).real
    cross = 2.0 * np.trace(sh @ sq.polar_phase @ ch.T).real
    return 0.25 * (base - cross), 0.25 * (base + cross)


def quadrature_variance_matrices(sq: SqueezeMatrix):
    """Variance-covariance matrices (V1, V2) of the joint quadratures.

    V_{1,2} = 1/8 [cosh 2R + cosh 2R~ -/+ (sinh(2R) e^{i Theta}
    + sinh(2R~) e^{-i Theta~})]; Hermitian with real diagonal for
    symmetric xi.
    """
    ch2 = _hermitian_fn(sq.polar_R, lambda x: np.cosh(2 * x))
    sh2 = _hermitian_fn(sq.polar_R, lambda x: np.sinh(2 * x))
    sym = ch2 + ch2.T
    cross = sh2 @ sq.polar_phase + sh2.T @ sq.polar_phase.conj()
    v1 = 0.125 * (sym - cross)
    v2 = 0.125 * (sym + cross)
    return v1, v2


def cross_covariance(sq: SqueezeMatrix) -> np.ndarray:
    """Symmetrized cross-covariance matrix between the two joint quadratures.

    cov(X1, X2) = i/4 [cosh 2R - cosh 2R~ + sinh(2R) e^{i Theta}
    - sinh(2R~) e^{-i Theta~}]; vanishes identically for real symmetric xi
    and saturates the uncertainty relation for normal xi.
    """
    ch2 = _hermitian_fn(sq.polar_R, lambda x: np.cosh(2 * x))
    sh2 = _hermitian_fn(sq.polar_R, lambda x: np.sinh(2 * x))
    return 0.25j * (ch2 - ch2.T + sh2 @ sq.polar_phase - sh2.T @ sq.polar_phase.conj())


def photon_statistics(sq: SqueezeMatrix):
    """Photon-number statistics of either beam.

    Returns (nbar_matrix, nbar_total, number_variance, number_covariance)
    with nbar_matrix_{ij} = <a_i^dag a_j> = sinh^2(R~), whose diagonal is the
    per-mode occupation; the number variance and the beam-beam covariance
    both equal 1/4 Tr sinh^2(2R).
    """
    sh = _hermitian_fn(sq.polar_R, np.sinh)
    nbar = (sh @ sh).T
    nbar = 0.5 * (nbar + nbar.conj().T)
    sh2 = _hermitian_fn(sq.polar_R, lambda x: np.sinh(2 * x))
    quarter_tr = 0.25 * np.trace(sh2 @ sh2).real
    return nbar, float(np.trace(nbar).real), quarter_tr, quarter_tr


def pair_creation_matrix(sq: SqueezeMatrix):
    """Photon-pair creation matrix M = 1/2 e^{-i Theta} sinh(2R).

    Returns (M, M_normalized) where M_normalized holds |M| scaled to unit
    total; the normalized moduli give the probability of the corresponding
    signal/idler transverse-mode pairing.
    """
    sh2 = _hermitian_fn(sq.polar_R, lambda x: np.sinh(2 * x))
    m = 0.5 * (sq.polar_phase.conj().T @ sh2)
    mod = np.abs(m)
    total = mod.sum()
    return m, (mod / total if total > 0 else mod)


def bogoliubov_matrix(sq: SqueezeMatrix) -> np.ndarray:
    """Block transform of (a, b, a^dag, b^dag) under the squeezer.

    Blocks are C = cosh(R) and E = sinh(R) e^{i Theta}:
    a -> C a - E b^dag, b -> C b - E a^dag, and the conjugate rows.
    """
    n = sq.size
    c = _hermitian_fn(sq.polar_R, np.cosh)
    e = _hermitian_fn(sq.polar_R, np.sinh) @ sq.polar_phase
    z = np.zeros((n, n), dtype=complex)
    return np.block(
        [
            [c, z, z, -e],
            [z, c, -e, z],
            [z, -e.conj(), c.conj(), z],
            [-e.conj(), z, z, c.conj()],
        ]
    )


def bogoliubov_metric(n: int) -> np.ndarray:
    """Commutation metric K = diag(I_2n, -I_2n) preserved as B K B^dag = K."""
    return np.diag(np.concatenate([np.ones(2 * n), -np.ones(2 * n)]))


def _squeezing_db(variances: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(variances / VACUUM_VARIANCE)


def state_report(sq: SqueezeMatrix) -> StateReport:
    """Assemble the full two-beam statistics report for a squeezing matrix."""
    v1, v2 = quadrature_variance_matrices(sq)
    sv1, sv2 = scalar_quadrature_variance(sq)
    cov = cross_covariance(sq)
    nbar, nbar_total, nvar, ncov = photon_statistics(sq)
    pair, _ = pair_creation_matrix(sq)
    diag1 = v1.diagonal().real
    labels = sq.basis.labels() if sq.basis is not None else [str(i) for i in range(sq.size)]
    return StateReport(
        var_X1=v1,
        var_X2=v2,
        scalar_var=(sv1, sv2),
        cross_cov=cov,
        nbar_matrix=nbar,
        nbar_total=nbar_total,
        number_variance=nvar,
        number_covariance=ncov,
        pair_matrix=pair,
        squeezing_db_per_mode=_squeezing_db(diag1),
        mode_labels=labels,
    )


def takagi_decompose(xi: np.ndarray):
    """Takagi factorization xi = W S W^T of a complex symmetric matrix.

    W is unitary and S the non-negative singular values in descending
    order.  Built from the SVD; the symmetric-matrix structure makes
    U^dag conj(V) unitary-symmetric with a principal square root.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    scale = np.linalg.norm(xi)
    if scale == 0.0:
        return np.eye(n, dtype=complex), np.zeros(n)
    if np.linalg.norm(xi - xi.T) / scale > 1e-8:
        raise ValueError("Takagi factorization needs a symmetric matrix")
    u, s, vh = np.linalg.svd(xi)
    cutoff = n * np.finfo(float).eps * s[0]
    rank = int(np.sum(s > cutoff))
    if rank < n:
        u = _complete_orthonormal(u[:, :rank], n)
        v = _complete_orthonormal(vh.conj().T[:, :rank], n)
    else:
        v = vh.conj().T
    z = u.conj().T @ v.conj()
    z = 0.5 * (z + z.T)
    tz, qz = scipy.linalg.schur(z, output="complex")
    half = (qz * np.exp(0.5j * np.angle(np.diagonal(tz)))) @ qz.conj().T
    w = u @ half
    s_full = np.concatenate([s[:rank], np.zeros(n - rank)]) if rank < n else s
    return w, s_full


def degenerate_statistics(sq: SqueezeMatrix) -> StateReport:
    """Statistics of the degenerate (single-beam) squeezer.

    With the idler operators identified with the signal operators, the
    Takagi factorization xi = W S W^T splits the interaction into
    independent single-mode squeezers with squeeze parameter 2 sigma_i:
    quadrature variances (1/4) e^{-/+ 4 sigma_i} along the Takagi modes and
    mean photon number sum_i sinh^2(2 sigma_i).  The report is expressed in
    the LG basis using single-beam quadratures X = (a + a^dag)/2.
    """
    if sq.interaction is not InteractionType.DEGENERATE_SINGLE_BEAM:
        raise ValueError("degenerate statistics require a degenerate-interaction matrix")
    if not sq.is_symmetric(tol=1e-8):
        raise ValueError("degenerate statistics require a symmetric matrix")
    w, sigma = takagi_decompose(sq.xi)
    n = sq.size
    # second moments of the Takagi modes c = W^dag a, each a single-mode
    # squeezed vacuum with parameter 2 sigma: <cc> = -1/2 sinh(4 sigma),
    # <c^dag c> = sinh^2(2 sigma)
    cc = -0.5 * np.sinh(4.0 * sigma)
    ndiag = np.sinh(2.0 * sigma) ** 2
    a_aa = (w * cc) @ w.T                 # <a_i a_j>
    a_nn = ((w * ndiag) @ w.conj().T).conj()  # <a_i^dag a_j>
    eye = np.eye(n)
    v1 = 0.25 * (a_aa + a_aa.conj() + a_nn + a_nn.T + eye)
    v2 = 0.25 * (-a_aa - a_aa.conj() + a_nn + a_nn.T + eye)
    cov = 0.25j * (a_aa.conj() - a_aa + a_nn.T - a_nn)
    nbar_total = float(np.sum(ndiag))
    number_variance = float(np.sum(0.5 * np.sinh(4.0 * sigma) ** 2))
    pair = a_aa.conj()  # <a_i^dag a_j^dag>, the single-beam pair amplitude
    labels = sq.basis.labels() if sq.basis is not None else [str(i) for i in range(n)]
    return StateReport(
        var_X1=v1,
        var_X2=v2,
        scalar_var=(float(np.trace(v1).real), float(np.trace(v2).real)),
        cross_cov=cov,
        nbar_matrix=0.5 * (a_nn + a_nn.conj().T),
        nbar_total=nbar_total,
        number_variance=number_variance,
        number_covariance=number_variance,
        pair_matrix=pair,
        squeezing_db_per_mode=_squeezing_db(v1.diagonal().real),
        mode_labels=labels,
    )
