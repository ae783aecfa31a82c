"""Multimode squeezed-light analysis for Laguerre-Gauss beams.

Builds the multimode squeezing matrix of a pumped nonlinear medium from
Laguerre-Gauss overlap integrals, analyzes the resulting squeezed state
(quadrature variances and covariances, photon statistics, pair-creation
coupling, eigenmodes of squeezing), and runs desk-scale simulation and
optimization scenarios with reproducible CSV/JSON reports.
"""

from .modes import (
    BeamGeometry,
    ModeBasis,
    ModeIndex,
    QuadratureError,
    build_basis,
    lg_amplitude,
    lg_radial_profile,
    transverse_inner_product,
)
from .coupling import (
    CouplingConfig,
    InteractionType,
    MediumConfig,
    PumpSpec,
    assemble_squeeze_matrix,
    coupling_element,
    scale_to_mean_photons,
)
from .squeeze_core import (
    SqueezeMatrix,
    StateReport,
    bogoliubov_matrix,
    bogoliubov_metric,
    cross_covariance,
    degenerate_statistics,
    pair_creation_matrix,
    photon_statistics,
    polar_decompose,
    quadrature_variance_matrices,
    scalar_quadrature_variance,
    state_report,
    takagi_decompose,
)
from .eigenmodes import (
    EigenDecomposition,
    decompose,
    eigenmode_pump,
    eigenmode_report,
    is_normal,
    state_coefficients,
)
from .fock_oracle import TruncatedFockSpace, build_hamiltonian_exponent, vacuum_statistics
from .scenarios import SCENARIO_NAMES, ScenarioConfig, default_config, run_scenario

__version__ = "0.1.0"
