"""Spectral singularities in 1D non-Hermitian resonator lattices.

Simulation and analysis toolkit for tight-binding resonator arrays with a
gain or loss resonator: divergent/vanishing reflection, persistent
plane-wave emission with an erf-front platform, coherent perfect
absorption, and exceptional-point dynamics in finite PT-symmetric chains.
"""

__version__ = "0.1.0"

from .model import (EndCoupling, HamiltonianMatrix, LatticeSpec, SymmetryTag,
                    Topology, build_folded_chain, build_pt_chain,
                    build_side_coupled_chain, builder_for)
from .scattering import (BiorthOverlap, DivergentAmplitudeError,
                         ScatteringSolution, SingularityPoint, biorth_overlap,
                         eta, folded_reflection, folded_reflection_at_k,
                         locate_singularity, reflection_transmission,
                         steady_state_center_amplitudes, steady_state_profile)
from .spectral import (BiorthBasis, EigenPair, EPReport, EPVerdict, NearEPError,
                       SpectralReport, biorth_basis, critical_equation_value,
                       ep_closed_form_states, ep_detect, full_spectrum,
                       plane_wave_coefficients, solve_critical_equation)
from .dynamics import (BoundaryContaminationError, DeviationRow, EvolutionTrace,
                       PlatformNotFoundError, StepSizeError, WavePacketSpec,
                       absorption_residual_oracle, absorption_run,
                       biorth_evolution_check, classify_pt_growth,
                       deviation_study, emission_run, erf_profile, evolve,
                       front_position, gaussian_packet,
                       platform_height_formula, propagate_by_spectrum, pt_run,
                       reflected_center, required_half_width)
from .harness import (ConfigError, Experiment, FitModel, FitResult, RunConfig,
                      SweepSpec, config_from_dict, fit_scaling, load_config,
                      load_preset, preset_names, run)
