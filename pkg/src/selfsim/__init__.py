"""Self-similar and steady radial profiles of u_t - Δu = u^p."""
from .exponents import (ExponentTable, Params, Regime, RegimeTag, classify_regime,
                        comparison_roots, derived_constants, exponent_table,
                        indicial_roots)
from .ode_core import (EquationKind, Frame, ProfileState, Trajectory, residual_of,
                       rhs, scalar_kit, transform_state, transform_trajectory, u_star)
from .integrator import (IntegrationOptions, energy_ledger, integrate, pohozaev_check,
                         series_start, singular_start, spiral_start)
from .shooting import (ShotTag, bisect_boundary, boundary_profile, classify_shot,
                       classify_singular, estimate_ell, estimate_L_star, sweep,
                       uniqueness_probe)

__version__ = "0.1.0"
