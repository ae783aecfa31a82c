"""Assembly of the multimode squeezing matrix from 3-D mode-overlap integrals.

Each matrix element is the overlap of the (classical) pump-mode product with
the conjugated signal and idler mode functions, integrated over a uniform
nonlinear medium of finite length.  The azimuthal integral is analytic and
enforces OAM conservation exactly; the radial and longitudinal integrals are
done by fixed-node Gauss-Legendre quadrature, refined deterministically until
converged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .modes import (
    BeamGeometry,
    ModeBasis,
    ModeIndex,
    QuadratureError,
    laguerre_ladder,
    _norm_constant,
)

__all__ = [
    "InteractionType",
    "MediumConfig",
    "PumpSpec",
    "CouplingConfig",
    "coupling_element",
    "assemble_squeeze_matrix",
    "scale_to_mean_photons",
]


class InteractionType(enum.Enum):
    """Mode-coupling topology of the nonlinear interaction.

    DEGENERATE_SINGLE_BEAM
        Signal and idler occupy one beam with no transverse-mode cross
        talk: photon pairs always land in the same (ell, p) mode, so the
        matrix is restricted to its diagonal.
    P_CROSSTALK_ONLY
        Two-beam machinery with the restriction ell_signal == ell_idler;
        combined with a Gaussian pump this permits radial (p) cross talk
        only within ell = 0.
    FULL_CROSSTALK
        No restriction beyond OAM conservation from the azimuthal
        integral.
    """

    DEGENERATE_SINGLE_BEAM = "DegenerateSingleBeam"
    P_CROSSTALK_ONLY = "PCrosstalkOnly"
    FULL_CROSSTALK = "FullCrosstalk"


@dataclass(frozen=True)
class MediumConfig:
    """Uniform nonlinear medium of length ``cell_length`` centred at ``center_z``.

    ``strength`` is the scalar susceptibility (arbitrary units) and
    ``gain_scale`` a dimensionless knob that absorbs all physical
    prefactors; both multiply the assembled matrix.
    """

    cell_length: float
    center_z: float = 0.0
    chi_profile: str = "uniform"
    strength: float = 1.0
    gain_scale: float = 1.0

    def __post_init__(self):
        if self.cell_length <= 0:
            raise ValueError(f"cell_length must be > 0, got {self.cell_length}")
        if self.chi_profile != "uniform":
            raise ValueError(f"unsupported chi_profile {self.chi_profile!r}")
        if self.gain_scale < 0:
            raise ValueError("gain_scale must be >= 0")


@dataclass(frozen=True)
class PumpSpec:
    """Classical pump beam: geometry plus unit-norm mode coefficients.

    ``coefficients`` is a complex vector over the coupling basis; None means
    the pure (0, 0) Gaussian mode.
    """

    geometry: BeamGeometry
    coefficients: np.ndarray = None

    def resolved_coefficients(self, basis: ModeBasis) -> np.ndarray:
        if self.coefficients is None:
            coeff = np.zeros(basis.size, dtype=complex)
            coeff[basis.index_of_fundamental()] = 1.0
            return coeff
        coeff = np.asarray(self.coefficients, dtype=complex)
        if coeff.shape != (basis.size,):
            raise ValueError(
                f"pump coefficients have shape {coeff.shape}, basis size {basis.size}"
            )
        norm = np.linalg.norm(coeff)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"pump coefficients must have unit norm, got {norm}")
        return coeff


@dataclass(frozen=True)
class CouplingConfig:
    """Everything needed to assemble a squeezing matrix.

    ``single_pump`` selects a three-wave interaction (one pump photon per
    signal/idler pair, as in down-conversion), dropping the second drive
    leg from the overlap; otherwise two drive fields enter and ``pump2``
    defaults to ``pump1`` (degenerate-pump four-wave mixing).
    """

    interaction: InteractionType
    medium: MediumConfig
    pump1: PumpSpec
    collection: BeamGeometry
    basis: ModeBasis
    pump2: PumpSpec = None
    single_pump: bool = False

    def __post_init__(self):
        if self.pump2 is None:
            object.__setattr__(self, "pump2", self.pump1)


def _gauss_legendre(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * (x + 1.0) + lo, 0.5 * (hi - lo) * w


def _profiles_on_grid(entries, r, z_rel, geom: BeamGeometry):
    """Azimuthally-reduced profiles for a set of (ell, p) entries.

    ``r`` has shape (nz, nt) and ``z_rel`` shape (nz,).  Laguerre ladders are
    shared per |ell| so the whole set costs one recurrence sweep per ring
    order.  Returns a complex array of shape (len(entries), nz, nt).
    """
    z_rel = np.asarray(z_rel, dtype=float)
    zR = geom.rayleigh_zR
    w = geom.width(z_rel)[:, None]
    targ = 2.0 * r ** 2 / w ** 2
    envelope = np.exp(-(r / w) ** 2)
    curvature = -geom.wavenumber * r ** 2 * (z_rel / (2.0 * (z_rel ** 2 + zR ** 2)))[:, None]
    psi = np.arctan2(z_rel, zR)[:, None]
    base = envelope * np.exp(1j * curvature)

    out = np.empty((len(entries),) + r.shape, dtype=complex)
    by_alpha = {}
    for pos, idx in enumerate(entries):
        by_alpha.setdefault(abs(idx.ell), []).append((pos, idx))
    for alpha, group in by_alpha.items():
        p_hi = max(idx.p for _, idx in group)
        ladder = laguerre_ladder(alpha, targ, p_hi)
        ring = (np.sqrt(2.0) * r / w) ** alpha if alpha else 1.0
        for pos, idx in group:
            gouy = np.exp(1j * (2 * idx.p + alpha + 1) * psi)
            out[pos] = (
                (_norm_constant(idx.ell, idx.p) / w)
                * base
                * ring
                * ladder[idx.p]
                * gouy
            )
    return out


def _pump_support_orders(pump: PumpSpec, basis: ModeBasis):
    if pump.coefficients is None:
        return 0, 0
    coeff = np.asarray(pump.coefficients)
    idxs = [basis.order[i] for i in np.flatnonzero(np.abs(coeff) > 0)]
    return max(i.p for i in idxs), max(abs(i.ell) for i in idxs)


def _node_schedule(cfg: CouplingConfig):
    """Deterministic (nz, nt, T_max) refinement ladder for this config.

    The radial cutoff T_max is a log-magnitude budget: the shared envelope
    decays as e^{-t} while each field's Laguerre polynomial can grow only
    like (gamma_b t)^{p_b} within the integration range, so we take the
    first t where the combined bound drops forty decades below unity.
    """
    basis = cfg.basis
    half = 0.5 * cfg.medium.cell_length
    z_probe = np.linspace(cfg.medium.center_z - half, cfg.medium.center_z + half, 33)

    fields = [(cfg.pump1.geometry, *_pump_support_orders(cfg.pump1, basis))]
    if not cfg.single_pump:
        fields.append((cfg.pump2.geometry, *_pump_support_orders(cfg.pump2, basis)))
    fields.append((cfg.collection, basis.p_max, basis.ell_max))
    fields.append((cfg.collection, basis.p_max, basis.ell_max))

    # z resolution follows the total Gouy phase swing over the cell
    gouy_swing = sum(
        (2 * p + ell + 1)
        * math.atan((half + abs(cfg.medium.center_z - g.focus_z)) / g.rayleigh_zR)
        for g, p, ell in fields
    )
    nz0 = max(48, int(1.4 * gouy_swing) + 32)

    beta = sum(1.0 / g.width(z_probe - g.focus_z) ** 2 for g, _, _ in fields)
    gammas = [
        (float(np.max(1.0 / g.width(z_probe - g.focus_z) ** 2 / beta)), p, ell)
        for g, p, ell in fields
    ]

    def log_bound(t):
        val = -t
        for gamma, p, ell in gammas:
            val += (p + 0.5 * ell) * math.log1p(2.0 * gamma * t)
        return val

    t_max = 45.0
    while log_bound(t_max) > -42.0 and t_max < 4000.0:
        t_max += 5.0
    # t-node count resolves the Laguerre roots and the curvature-phase beats
    roots = sum(p for _, p, _ in gammas)
    nt0 = max(96, int(0.55 * t_max) + 6 * roots + 32)
    return [(nz0, nt0), (2 * nz0, 2 * nt0), (4 * nz0, 4 * nt0)], t_max


def _assemble_at(cfg: CouplingConfig, nz: int, nt: int, t_max: float, pairs=None):
    """One fixed-grid evaluation of the coupling matrix (no gain factors)."""
    basis = cfg.basis
    med = cfg.medium
    # integrate z through the Gouy angle of the fastest-diverging beam;
    # tan substitution compresses the Lorentzian envelope tails of long cells
    z_scale = min(
        g.rayleigh_zR
        for g in (
            (cfg.pump1.geometry, cfg.collection)
            if cfg.single_pump
            else (cfg.pump1.geometry, cfg.pump2.geometry, cfg.collection)
        )
    )
    psi_half = math.atan(0.5 * med.cell_length / z_scale)
    psi, wpsi = _gauss_legendre(-psi_half, psi_half, nz)
    z = med.center_z + z_scale * np.tan(psi)
    wz = wpsi * z_scale / np.cos(psi) ** 2
    t, wt = _gauss_legendre(0.0, t_max, nt)

    g1, g2, gc = cfg.pump1.geometry, cfg.pump2.geometry, cfg.collection
    beta = (
        1.0 / g1.width(z - g1.focus_z) ** 2
        + 2.0 / gc.width(z - gc.focus_z) ** 2
    )
    if not cfg.single_pump:
        beta = beta + 1.0 / g2.width(z - g2.focus_z) ** 2
    r = np.sqrt(t[None, :] / beta[:, None])
    # measure: dz * 2*pi*r dr, with r dr = dt / (2 beta)
    measure = wz[:, None] * wt[None, :] * (math.pi / beta[:, None])

    c1 = cfg.pump1.resolved_coefficients(basis)
    sup1 = np.flatnonzero(np.abs(c1) > 0)
    prof1 = _profiles_on_grid([basis.order[i] for i in sup1], r, z - g1.focus_z, g1)
    if cfg.single_pump:
        c2 = np.ones(1, dtype=complex)
        sup2 = np.zeros(1, dtype=int)
        prof2 = np.ones((1,) + r.shape, dtype=complex)
        ell2 = [0]
    else:
        c2 = cfg.pump2.resolved_coefficients(basis)
        sup2 = np.flatnonzero(np.abs(c2) > 0)
        prof2 = (
            prof1
            if (cfg.pump2 is cfg.pump1 and np.array_equal(sup1, sup2))
            else _profiles_on_grid([basis.order[i] for i in sup2], r, z - g2.focus_z, g2)
        )
        ell2 = [basis.order[i].ell for i in sup2]
    prof_c = np.conj(_profiles_on_grid(basis.order, r, z - gc.focus_z, gc))

    n_p = basis.p_max + 1
    block = {}  # ell -> slice of positions in basis order
    for ell in range(-basis.ell_max, basis.ell_max + 1):
        start = (ell + basis.ell_max) * n_p
        block[ell] = slice(start, start + n_p)

    xi = np.zeros((basis.size, basis.size), dtype=complex)
    diag_only = cfg.interaction is InteractionType.DEGENERATE_SINGLE_BEAM
    same_ell_only = cfg.interaction is InteractionType.P_CROSSTALK_ONLY or diag_only

    for a1, i1 in enumerate(sup1):
        for a2 in range(len(sup2)):
            coeff = c1[i1] * c2[sup2[a2]]
            ell_net = basis.order[i1].ell + ell2[a2]
            pump = coeff * measure * prof1[a1] * prof2[a2]
            for ell_s in range(-basis.ell_max, basis.ell_max + 1):
                ell_i = ell_net - ell_s
                if abs(ell_i) > basis.ell_max:
                    continue
                if same_ell_only and ell_s != ell_i:
                    continue
                ps = prof_c[block[ell_s]]
                pi = prof_c[block[ell_i]]
                if diag_only:
                    sub = np.einsum("zt,pzt,pzt->p", pump, ps, pi)
                    rows = np.arange(block[ell_s].start, block[ell_s].stop)
                    xi[rows, rows] += sub
                else:
                    sub = np.einsum("zt,pzt,qzt->pq", pump, ps, pi)
                    xi[block[ell_s], block[ell_i]] += sub

    if pairs is not None:
        picked = np.array([xi[s, i] for s, i in pairs])
        return picked
    return xi


def _assemble_raw(cfg: CouplingConfig, rtol: float = 1e-8):
    """Refine the quadrature grid until the matrix is stable to ``rtol``."""
    schedule, t_max = _node_schedule(cfg)
    prev = None
    residual = math.inf
    for nz, nt in schedule:
        cur = _assemble_at(cfg, nz, nt, t_max)
        if prev is not None:
            scale = max(np.linalg.norm(cur), 1e-300)
            residual = np.linalg.norm(cur - prev) / scale
            if residual <= rtol:
                return cur
        prev = cur
    raise QuadratureError("coupling quadrature did not converge", residual)


def coupling_element(signal: ModeIndex, idler: ModeIndex, cfg: CouplingConfig,
                     rtol: float = 1e-8) -> complex:
    """Single element of the coupling matrix for (signal, idler).

    OAM selection is applied analytically: for every pump coefficient pair
    the element vanishes identically unless ell_pump1 + ell_pump2 equals
    ell_signal + ell_idler.
    """
    basis = cfg.basis
    s = basis.position(signal)
    i = basis.position(idler)
    c1 = cfg.pump1.resolved_coefficients(basis)
    ell_pump2 = (
        [0]
        if cfg.single_pump
        else [
            basis.order[j].ell
            for j in np.flatnonzero(np.abs(cfg.pump2.resolved_coefficients(basis)) > 0)
        ]
    )
    ell_needed = signal.ell + idler.ell
    reachable = any(
        basis.order[j1].ell + e2 == ell_needed
        for j1 in np.flatnonzero(np.abs(c1) > 0)
        for e2 in ell_pump2
    )
    if not reachable:
        return 0.0 + 0.0j
    gain = cfg.medium.strength * cfg.medium.gain_scale
    schedule, t_max = _node_schedule(cfg)
    prev = None
    for nz, nt in schedule:
        cur = _assemble_at(cfg, nz, nt, t_max, pairs=[(s, i)])[0]
        if prev is not None:
            residual = abs(cur - prev) / max(abs(cur), 1e-300)
            if residual <= rtol:
                return complex(gain * cur)
        prev = cur
    raise QuadratureError("coupling quadrature did not converge", residual)


def assemble_squeeze_matrix(cfg: CouplingConfig, rtol: float = 1e-8):
    """Assemble the full squeezing matrix for ``cfg``.

    Rows index the signal mode, columns the idler mode, both in the basis
    order.  The result carries the medium strength and gain_scale and, for
    the degenerate interaction, is symmetrized.
    """
    from .squeeze_core import SqueezeMatrix

    xi = _assemble_raw(cfg, rtol=rtol)
    xi = xi * (cfg.medium.strength * cfg.medium.gain_scale)
    if cfg.interaction is InteractionType.DEGENERATE_SINGLE_BEAM:
        xi = 0.5 * (xi + xi.T)
    return SqueezeMatrix(xi=xi, basis=cfg.basis, interaction=cfg.interaction)


def mean_photons_of_scale(singular_values: np.ndarray, s: float) -> float:
    """Total mean photon number per beam for the matrix scaled by ``s``."""
    with np.errstate(over="ignore"):
        return float(np.sum(np.sinh(s * singular_values) ** 2))


def scale_to_mean_photons(sq, n_target: float, tol: float = 1e-10):
    """Rescale a squeezing matrix so the mean photon number equals ``n_target``.

    Solves sum_i sinh^2(s sigma_i) = n_target for the positive scalar s on
    the singular values sigma_i; the map is strictly increasing in s.
    """
    from .squeeze_core import SqueezeMatrix

    if n_target <= 0:
        raise ValueError(f"n_target must be > 0, got {n_target}")
    sigma = np.linalg.svd(sq.xi, compute_uv=False)
    total = float(np.sum(sigma))
    if total == 0.0:
        raise ValueError("cannot scale a zero matrix to a positive photon number")

    def excess(s):
        return mean_photons_of_scale(sigma, s) - n_target

    # bracket then bisect/Newton via brentq
    lo = 0.0
    hi = max(1.0, math.asinh(math.sqrt(n_target)) / float(np.max(sigma)))
    while excess(hi) < 0.0:
        hi *= 2.0
    from scipy.optimize import brentq

    s = brentq(excess, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    # polish with one Newton step; the derivative is sum sinh(2 s sigma) sigma
    for _ in range(4):
        err = excess(s)
        if abs(err) <= tol:
            break
        deriv = float(np.sum(np.sinh(2.0 * s * sigma) * sigma))
        s -= err / deriv
    if abs(excess(s)) > tol:
        raise RuntimeError("photon-number scaling did not reach tolerance")
    return SqueezeMatrix(xi=s * sq.xi, basis=sq.basis, interaction=sq.interaction), float(s)
