"""Laguerre-Gauss transverse modes and the canonical mode-basis ordering.

Modes are indexed by an azimuthal number ``ell`` (any integer) and a radial
number ``p >= 0``.  A basis enumerates all (ell, p) pairs with
|ell| <= ell_max and p <= p_max; the vector ordering increments p fastest,
with ell running from -ell_max to +ell_max.  All lengths are in micrometers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureError",
    "ModeIndex",
    "ModeBasis",
    "BeamGeometry",
    "build_basis",
    "laguerre_ladder",
    "lg_radial_profile",
    "lg_amplitude",
    "transverse_inner_product",
]


class QuadratureError(RuntimeError):
    """Raised when a numerical quadrature fails to reach its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Azimuthal/radial index pair (ell, p) of a Laguerre-Gauss mode."""

    ell: int
    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"radial index p must be >= 0, got {self.p}")

    def label(self) -> str:
        return f"l={self.ell},p={self.p}"


@dataclass(frozen=True)
class ModeBasis:
    """Finite LG basis with the canonical vector ordering.

    The ordering runs ell = -ell_max..+ell_max, and within each ell the
    radial index p = 0..p_max, so position((ell, p)) =
    (ell + ell_max) * (p_max + 1) + p.
    """

    ell_max: int
    p_max: int
    order: tuple = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.order)

    def position(self, idx: ModeIndex) -> int:
        if abs(idx.ell) > self.ell_max or idx.p > self.p_max:
            raise KeyError(f"{idx} not in basis (ell_max={self.ell_max}, p_max={self.p_max})")
        return (idx.ell + self.ell_max) * (self.p_max + 1) + idx.p

    def labels(self) -> list:
        return [idx.label() for idx in self.order]

    def index_of_fundamental(self) -> int:
        return self.position(ModeIndex(0, 0))


def build_basis(ell_max: int, p_max: int) -> ModeBasis:
    """Enumerate the basis for |ell| <= ell_max, 0 <= p <= p_max."""
    if ell_max < 0 or p_max < 0:
        raise ValueError(f"basis bounds must be >= 0, got ell_max={ell_max}, p_max={p_max}")
    order = tuple(
        ModeIndex(ell, p)
        for ell in range(-ell_max, ell_max + 1)
        for p in range(p_max + 1)
    )
    return ModeBasis(ell_max=ell_max, p_max=p_max, order=order)


@dataclass(frozen=True)
class BeamGeometry:
    """Gaussian-beam geometry: wavelength and waist in micrometers.

    ``focus_z`` is the axial position of the waist in the lab frame; mode
    evaluations take z relative to the focus.  ``rayleigh_zR`` is derived
    (pi w0^2 / lambda) and, if supplied explicitly, must agree with the
    derived value to 1e-12 relative.
    """

    wavelength: float
    waist_w0: float
    focus_z: float = 0.0
    rayleigh_zR: float = None

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if self.waist_w0 <= 0:
            raise ValueError(f"waist_w0 must be > 0, got {self.waist_w0}")
        derived = math.pi * self.waist_w0 ** 2 / self.wavelength
        if self.rayleigh_zR is None:
            object.__setattr__(self, "rayleigh_zR", derived)
        elif abs(self.rayleigh_zR - derived) > 1e-12 * derived:
            raise ValueError(
                f"rayleigh_zR={self.rayleigh_zR} inconsistent with "
                f"pi*w0^2/lambda={derived}"
            )

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def width(self, z):
        """Beam width w(z) at axial distance z from the focus."""
        return self.waist_w0 * np.sqrt(1.0 + (z / self.rayleigh_zR) ** 2)


def laguerre_ladder(alpha: int, t, p_max: int) -> np.ndarray:
    """Generalized Laguerre polynomials L_p^alpha(t) for p = 0..p_max.

    Uses the three-term recurrence, stable for the radial orders used here
    (p up to a few tens).  Returns an array of shape (p_max + 1,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((p_max + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if p_max >= 1:
        out[1] = 1.0 + alpha - t
    for k in range(1, p_max):
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def _norm_constant(ell: int, p: int) -> float:
    # sqrt(2 p! / (pi (|ell| + p)!)), via log-gammas so large p stays finite
    return math.sqrt(2.0 / math.pi) * math.exp(
        0.5 * (math.lgamma(p + 1) - math.lgamma(abs(ell) + p + 1))
    )


def lg_radial_profile(idx: ModeIndex, r, z, geom: BeamGeometry) -> np.ndarray:
    """LG mode amplitude without the e^{i ell phi} factor.

    z is measured relative to the beam focus.  Includes the envelope, the
    curvature phase exp(-i k r^2 z / (2 (z^2 + zR^2))), the radial ring
    factor, the Laguerre polynomial and the Gouy phase
    exp(i (2p + |ell| + 1) arctan(z/zR)).  Units 1/length.
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    zR = geom.rayleigh_zR
    w = geom.width(z)
    a = abs(idx.ell)
    targ = 2.0 * r ** 2 / w ** 2
    radial = (
        (_norm_constant(idx.ell, idx.p) / w)
        * np.exp(-(r / w) ** 2)
        * (np.sqrt(2.0) * r / w) ** a
        * laguerre_ladder(a, targ, idx.p)[idx.p]
    )
    gouy = (2 * idx.p + a + 1) * np.arctan2(z, zR)
    curvature = -geom.wavenumber * r ** 2 * z / (2.0 * (z ** 2 + zR ** 2))
    return radial * np.exp(1j * (gouy + curvature))


def lg_amplitude(idx: ModeIndex, r, phi, z, geom: BeamGeometry) -> np.ndarray:
    """Full LG mode amplitude u_{ell,p}(r, phi, z), z relative to the focus."""
    phi = np.asarray(phi, dtype=float)
    return lg_radial_profile(idx, r, z, geom) * np.exp(1j * idx.ell * phi)


def transverse_inner_product(
    a: ModeIndex,
    b: ModeIndex,
    z,
    geom: BeamGeometry,
    rtol: float = 1e-10,
) -> complex:
    """Numerical overlap integral of u_a* u_b over a transverse plane.

    The azimuthal integral is analytic: modes with different ell are
    orthogonal exactly.  The radial integral is done by Gauss-Legendre
    quadrature on t = 2 r^2 / w(z)^2, refined until the result is stable to
    ``rtol``; equals delta_{a,b} for an orthonormal mode family.
    """
    if a.ell != b.ell:
        return 0.0 + 0.0j
    w = float(geom.width(z))
    t_max = 4.0 * (a.p + b.p) + 2.0 * abs(a.ell) + 45.0

    def evaluate(n_nodes: int) -> complex:
        t, wt = np.polynomial.legendre.leggauss(n_nodes)
        t = 0.5 * t_max * (t + 1.0)
        wt = 0.5 * t_max * wt
        r = w * np.sqrt(t / 2.0)
        # curvature phases cancel between u_a* and u_b at equal geometry,
        # so only the Gouy difference and the real radial integrand remain
        pa = np.conj(lg_radial_profile(a, r, z, geom))
        pb = lg_radial_profile(b, r, z, geom)
        measure = 2.0 * math.pi * w ** 2 / 4.0
        return measure * np.sum(wt * pa * pb)

    prev = evaluate(64)
    for n_nodes in (128, 256, 512):
        cur = evaluate(n_nodes)
        residual = abs(cur - prev) / max(1.0, abs(cur))
        if residual <= rtol:
            return complex(cur)
        prev = cur
    raise QuadratureError("transverse inner product did not converge", residual)
