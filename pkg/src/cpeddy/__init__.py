"""Magnetic Casimir-Polder interaction above local and nonlocal metals.

Free energy, entropy, mode densities and overdamped (eddy-current) spectra
for a two-level magnetic dipole above a metallic half-space described by
Drude, plasma or semiclassical nonlocal (specular-reflection) response.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND, HAS_NUMBA
from .material import (ALPHA_FS, GAMMA_E_PRIME, HBARC, KB, MU0_MUB2,
                       DissipationModel, LengthScales, MaterialParams,
                       eps_bm, eps_landau_limit, eps_local, gamma_at, gold,
                       landau_rates, lindhard_g, scales)
from .numerics import (DerivResult, QuadResult, QuadSettings,
                       arccoth_complex, derivative_central,
                       integrate_adaptive, integrate_panels,
                       integrate_semi_infinite)
from .surface import (CutResult, FrequencyPoint, KappaPair, impedance_local,
                      impedance_scib, impedance_te_onshell_approx,
                      kappa_pair, reflection, reflection_on_cut,
                      reflection_te_lowfreq)
from .response import (AtomParams, DeltaValue, GreenResult, beta_diag, delta,
                       delta_asym_nl, delta_imag_many, delta_nonretarded,
                       delta_on_cut, delta_static, green_scattered,
                       mode_density, mode_density_dc, phi, polarizability,
                       thermal_weight)
from .thermo import (EntropyBreakdown, EntropyResult, FreeEnergyResult,
                     MatsubaraSettings, coth_moment, entropy, entropy_high_T,
                     entropy_low_T, entropy_low_T_nonlocal,
                     entropy_moment_series, free_energy, free_energy_asym,
                     free_energy_zero_T, matsubara_energy, residual_entropy,
                     shape_F)
from .eddy import (BranchPoint, SingleMode, branch_point_local,
                   branch_point_nonlocal, branch_point_small_gamma,
                   eddy_count, eddy_entropy, eddy_free_energy,
                   eddy_free_energy_contour, eddy_mode_density,
                   eta_integral_I, lambda_e_bar, s0, single_mode_free_energy,
                   single_mode_partition)
from .cli import (ConfigError, RunConfig, SweepTable, load_config,
                  parse_config, run_command, write_table)
