"""Entanglement-assisted weak-value amplification toolkit.

Exact dense statevector simulation of postselected weak measurements,
closed-form optimal entangled preparations/postselections, quantum Fisher
information accounting, the qubit circuits realizing the protocols, and a
scan CLI that reproduces the scaling laws as machine-readable reports.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateObservable, DegeneratePrep,
                     IncompleteBasis, IoError, OrthogonalPostselection,
                     RegimeError, RegimeWarning, RegisterError, StepTooLarge,
                     VanishingBranch, WvampError, ZeroSecondMoment)
from .statevec import (Ket, Operator, Spectrum, apply, basis_ket, embed,
                       exp_hermitian, expectation, expectation_ratio, fidelity,
                       ghz_ket, identity, inner, ket_from_amplitudes,
                       minus_ket, one_ket, op_tensor, plus_ket, project,
                       projector_one, sigma_x, sigma_y, sigma_z, spectrum,
                       tensor, variance, zero_ket)
from .weakvalue import (AmplificationSetup, MeterMoments, meter_branch,
                        meter_moments, postselected_meter,
                        postselection_probability, repeated_attempt_probability,
                        response_exact, response_linear, response_second_order,
                        weak_value)
from .protocol import (JointObservable, Optimum, ScalingRow, build_optimum,
                       eq12_post, fixed_Ps_weak_value, max_Ps_formula,
                       max_variance_prep, max_variance_value,
                       optimal_post_fixed_Aw, optimal_post_fixed_Ps,
                       quadratic_vs_linear_scaling)
from .fisher import (FisherReport, ParamStateFamily, analytic_qubit_fisher,
                     branch_family, complete_basis, efficiency_eta,
                     fisher_report, qfi_basis_sum, qfi_derivative,
                     qfi_generator, qfi_no_postselection, qfi_outcome,
                     to_phi_units)
from .circuits import (Circuit, Gate, build_entangled_postselection,
                       build_full_protocol, build_ghz_prep,
                       build_single_ancilla, from_text, gate_operator,
                       measured_weak_value, meter_state, qubit_reuse_schedule,
                       run, to_text)
from . import setups
from .reports import (ScanConfig, ScanReport, emit, run_aw_scaling,
                      run_circuit_check, run_fisher_saturation,
                      run_ps_scaling, run_scan)
