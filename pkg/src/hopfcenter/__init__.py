"""
Mass-action reaction networks with a vertical Andronov-Hopf bifurcation.

The core system is the four-reaction bimolecular network::

    Z + X -> 2X    X + Y -> 2Y    Y + Z -> 0    0 -> 2Z

For ``k1 = k2 + k3`` its positive equilibrium is a center whose periodic
orbits fill a global invariant surface; the modules here build that surface
numerically, classify long-time behaviour and describe the flow on the
boundary of the orthant.
"""

from .analysis import (CENTER_TOL, EquilibriumReport, StabilityClass, charpoly_coefficients,
                       classify_stability, jacobian, numerical_jacobian, paper_field, paper_rhs,
                       positive_equilibrium)
from .boundary import (CompletenessClass, blowup_time, boundary_curve, classify_facet_solution,
                       facet_rhs, facet_solution, mills_ratio)
from .integrate import (DenseOutput, Event, IntegrationError, IntegratorConfig, Trajectory,
                        conserved_drift, integrate, locate_event)
from .network import (BUILTIN_NAMES, Complex, NetworkSyntaxError, Reaction, ReactionNetwork,
                      SystemParams, builtin, is_bimolecular, load_network, mass_action_field,
                      mass_action_rhs, network_rank, parse_network, pretty_print,
                      stoichiometric_matrix)
from .poincare import (CenterManifoldMesh, OmegaLimitKind, PoincareRecord, center_fixed_point,
                       center_manifold_mesh, omega_limit, period, return_map, section_amplitudes)
from .transform import (CenterPreconditionError, constant_of_motion_V, hamiltonian, level_set, psi,
                        psi_inverse, require_center, stable_manifold_point, transformed_rhs)

__version__ = "0.1.0"
