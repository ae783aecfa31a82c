"""Brute-force verifier on a truncated Fock space.

Builds the anti-Hermitian exponent of the squeezing unitary as a sparse
operator, applies its exponential to the vacuum vector and evaluates every
statistic by direct expectation value.  Feasible only for a handful of modes;
each result carries a truncation-error estimate (the amplitude remaining on
the highest occupation shell) so comparisons against closed forms can be
judged honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

__all__ = [
    "TruncatedFockSpace",
    "OracleReport",
    "build_hamiltonian_exponent",
    "vacuum_statistics",
]

DIMENSION_GUARD = 600_000


@dataclass
class TruncatedFockSpace:
    """Tensor product of ``n_modes`` oscillators truncated at ``n_cut`` photons.

    The total dimension (n_cut + 1)^n_modes is guarded to stay desk-sized;
    six modes at n_cut = 8 (531441 states) is the intended ceiling.
    """

    n_modes: int
    n_cut: int
    dimension: int = field(init=False)
    _lowering: list = field(init=False, repr=False, default=None)
    _occupation: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.n_modes < 1 or self.n_cut < 1:
            raise ValueError("n_modes and n_cut must be >= 1")
        dim = (self.n_cut + 1) ** self.n_modes
        if dim > DIMENSION_GUARD:
            raise ValueError(
                f"truncated space dimension {dim} exceeds guard {DIMENSION_GUARD}"
            )
        self.dimension = dim

    def lowering_operators(self) -> list:
        """Sparse annihilation operators, one per mode (cached)."""
        if self._lowering is None:
            levels = self.n_cut + 1
            a_single = sp.diags(np.sqrt(np.arange(1, levels)), 1, format="csr")
            ops = []
            for i in range(self.n_modes):
                left = sp.identity(levels ** i, format="csr")
                right = sp.identity(levels ** (self.n_modes - i - 1), format="csr")
                ops.append(sp.kron(sp.kron(left, a_single), right, format="csr"))
            self._lowering = ops
        return self._lowering

    def occupations(self) -> np.ndarray:
        """Occupation number of every mode in every basis state, shape (dim, n_modes)."""
        if self._occupation is None:
            levels = self.n_cut + 1
            idx = np.arange(self.dimension)
            occ = np.empty((self.dimension, self.n_modes), dtype=np.int32)
            for i in range(self.n_modes - 1, -1, -1):
                occ[:, i] = idx % levels
                idx = idx // levels
            self._occupation = occ
        return self._occupation

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[0] = 1.0
        return v


@dataclass
class OracleReport:
    """Direct-expectation statistics plus the truncation-error estimate."""

    scalar_var: tuple
    var_X1: np.ndarray
    var_X2: np.ndarray
    cross_cov: np.ndarray
    nbar_matrix: np.ndarray
    nbar_total: float
    number_variance: float
    number_covariance: float
    pair_matrix: np.ndarray
    truncation_bound: float
    conclusive: bool


def build_hamiltonian_exponent(xi: np.ndarray, space: TruncatedFockSpace):
    """Sparse anti-Hermitian exponent of the squeezing unitary.

    For a two-beam space (n_modes == 2 n) the exponent is
    b~ xi^dag a - a~^dag xi b^dag with signal modes first; for a degenerate
    space (n_modes == n) the idler operators are replaced by the signal
    ones.  Matrix elements follow from ladder-operator algebra exactly.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    ops = space.lowering_operators()
    if space.n_modes == 2 * n:
        a_ops = ops[:n]
        b_ops = ops[n:]
    elif space.n_modes == n:
        a_ops = ops
        b_ops = ops
    else:
        raise ValueError(
            f"space has {space.n_modes} modes; need {n} (degenerate) or {2 * n}"
        )
    gen = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for i in range(n):
        for j in range(n):
            if xi[j, i] != 0.0:
                gen = gen + np.conj(xi[j, i]) * (b_ops[i] @ a_ops[j])
            if xi[i, j] != 0.0:
                gen = gen - xi[i, j] * (a_ops[i].conj().T @ b_ops[j].conj().T)
    return gen


def _expectation_matrix(left_states, right_states) -> np.ndarray:
    n = len(left_states)
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = np.vdot(left_states[i], right_states[j])
    return out


def vacuum_statistics(xi: np.ndarray, space: TruncatedFockSpace,
                      tolerance: float = None) -> OracleReport:
    """Evolve the vacuum and measure every statistic directly.

    The truncation bound is the L2 amplitude of the state on basis states
    with any mode at the cut; when ``tolerance`` is given and the bound
    exceeds it the report is flagged inconclusive.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[0]
    gen = build_hamiltonian_exponent(xi, space)
    psi = expm_multiply(gen, space.vacuum())
    degenerate = space.n_modes == n

    occ = space.occupations()
    shell = np.any(occ == space.n_cut, axis=1)
    bound = float(np.linalg.norm(psi[shell]))
    conclusive = True if tolerance is None else bound <= tolerance

    ops = space.lowering_operators()
    a_ops = ops[:n]
    b_ops = ops if degenerate else ops[n:]

    a_psi = [op @ psi for op in a_ops]
    b_psi = a_psi if degenerate else [op @ psi for op in b_ops]
    adag_psi = [op.conj().T @ psi for op in a_ops]
    bdag_psi = adag_psi if degenerate else [op.conj().T @ psi for op in b_ops]

    # quadratures: joint (a + a^dag + b + b^dag)/2^{3/2} for two beams,
    # single-beam (a + a^dag)/2 in the degenerate case
    scale = 0.5 if degenerate else 2.0 ** -1.5
    x1_psi = []
    x2_psi = []
    for i in range(n):
        plus = a_psi[i] + adag_psi[i]
        minus = a_psi[i] - adag_psi[i]
        if not degenerate:
            plus = plus + b_psi[i] + bdag_psi[i]
            minus = minus + b_psi[i] - bdag_psi[i]
        x1_psi.append(scale * plus)
        x2_psi.append(-1j * scale * minus)

    v1 = _expectation_matrix(x1_psi, x1_psi)
    v2 = _expectation_matrix(x2_psi, x2_psi)
    cross = _expectation_matrix(x1_psi, x2_psi)
    cov = cross.real  # 1/2 (<X1 X2~> + <X2 X1~>^T) elementwise

    nbar = _expectation_matrix(a_psi, a_psi)
    nbar_total = float(np.trace(nbar).real)

    na_psi = sum(op.conj().T @ v for op, v in zip(a_ops, a_psi))
    nb_psi = na_psi if degenerate else sum(op.conj().T @ v for op, v in zip(b_ops, b_psi))
    mean_na = float(np.vdot(psi, na_psi).real)
    mean_nb = float(np.vdot(psi, nb_psi).real)
    number_variance = float(np.vdot(na_psi, na_psi).real) - mean_na ** 2
    number_covariance = float(np.vdot(na_psi, nb_psi).real) - mean_na * mean_nb

    pair = _expectation_matrix(a_psi, bdag_psi)

    return OracleReport(
        scalar_var=(float(np.trace(v1).real), float(np.trace(v2).real)),
        var_X1=v1,
        var_X2=v2,
        cross_cov=cov,
        nbar_matrix=nbar,
        nbar_total=nbar_total,
        number_variance=number_variance,
        number_covariance=number_covariance,
        pair_matrix=pair,
        truncation_bound=bound,
        conclusive=conclusive,
    )
