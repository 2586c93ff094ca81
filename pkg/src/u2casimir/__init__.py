"""Casimir energies for U(2) boundary conditions and one-dimensional combs."""
from ._backend import BACKEND
from .boundary import (AdmissibilityReport, BoundaryCondition, BoundaryParams, build_unitary,
                       char_poly, dirichlet, is_admissible, neumann, quasi_periodic,
                       random_admissible, robin)
from .energy import (EnergyResult, cell_energy_theta, comb_energy, plate_energy,
                     regulated_plate_energy, w_factor)
from .errors import (BoundStateError, BracketingError, CasimirError, PhysicsError,
                     QuadratureError, SingularMatchingError, SingularPointError, ValidationError)
from .scattering import (BandStructure, Delta, DeltaPrime, Free, PiecewiseConstant,
                         ScatteringData, SquareBarrier, assert_no_bound_states, band_structure,
                         f_theta, parse_potential, scattering_data, transfer_matrix)
from .spectral import (SpectralEvaluation, bracket_plates, h_u, h_u_infinity, real_spectrum)

__version__ = "0.1.0"
