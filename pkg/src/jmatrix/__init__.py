"""J-matrix scattering: non-relativistic tangent formula and its relativistic
(kinetic-balance) counterpart, with direct-integration reference solvers.

Units are ħ = m = 1 unless a mass is given; ``k = sqrt(2ℰ)``.
"""
from .basis import GAUSSIAN, LAGUERRE, BasisSpec, overlaps
from .errors import (ConfigError, ConsistencyError, ConventionError, DomainError, JMatrixError,
                     MatrixError, NumericalError, PoleError, SineNodeError)
from .freewave import WaveCoefficients, jacobi_matrix, sine_cosine_coefficients
from .nonrel_solver import (HarrisSpectrum, NonRelSolver, PhaseShiftResult, harris_spectrum,
                            reconstruct_wavefunction, tan_delta, tune_nonrel_scale)
from .oracle import (GridParams, dirac_phase_shift, schrodinger_phase_shift,
                     squarewell_tan_delta_analytic)
from .potential import PotentialModel, potential_blocks
from .rel_solver import (DEFAULT_C, Kinematics, RelPhaseShiftResult, RelSolver, kinematics,
                         nonrel_limit_scan, rel_tan_delta, reconstruct_spinor, tune_rel_scale)
from .tuning import ScaleChoice, tune_scale

__version__ = "0.1.0"

__all__ = [
    "GAUSSIAN", "LAGUERRE", "BasisSpec", "overlaps",
    "ConfigError", "ConsistencyError", "ConventionError", "DomainError", "JMatrixError",
    "MatrixError", "NumericalError", "PoleError", "SineNodeError",
    "WaveCoefficients", "jacobi_matrix", "sine_cosine_coefficients",
    "HarrisSpectrum", "NonRelSolver", "PhaseShiftResult", "harris_spectrum",
    "reconstruct_wavefunction", "tan_delta", "tune_nonrel_scale",
    "GridParams", "dirac_phase_shift", "schrodinger_phase_shift", "squarewell_tan_delta_analytic",
    "PotentialModel", "potential_blocks",
    "DEFAULT_C", "Kinematics", "RelPhaseShiftResult", "RelSolver", "kinematics",
    "nonrel_limit_scan", "rel_tan_delta", "reconstruct_spinor", "tune_rel_scale",
    "ScaleChoice", "tune_scale",
]
