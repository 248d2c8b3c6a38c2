"""Time-resolved qubit sensing toolkit.

Exact augmented dynamics of a driven two-level sensor, closed-form reference
protocols, adjoint-based optimal control with bang/singular arc diagnostics,
response-kernel construction, and a shot-noise calibration demo.
"""

__version__ = "0.1.0"

from .calibration import (DistortionModel, MeasurementRecord,
                          ReconstructionResult, SampledField, distorted_pulse,
                          reconstruct_waveform, simulate_measurement_sweep,
                          t_qsl_ns, time_unit_ns)
from .dynamics import (AugmentedState, ControlWaveform, RWAProtocol,
                       RWASegment, SensorModel, Trajectory, bloch_vector,
                       evolve, evolve_batch, final_state, outcome_probability,
                       propagate_interval, qfi, sensitivity)
from .kernel import (KernelSamples, analytic_kernel_yx_rwa, convolve_predict,
                     numerical_kernel)
from .optimal_control import (AdjointTrajectory, CostKind, DeviationEstimate,
                              IndicatorFamily, OCTDiagnostics,
                              OptimalityReport, OptimizationConfig,
                              OptimizationResult, adjoint_diagnostics,
                              adjoint_trajectory, classify_arcs,
                              estimate_cost_deviation, optimize_free_form,
                              optimize_multistart, optimize_parametric,
                              parametric_cost_and_grad,
                              singular_control_value,
                              smoothness_cost_and_gradient, terminal_cost,
                              verify_optimality)
from .protocols import (D0_DETUNE, DetuneFamily, DetuneFullResult,
                        DetuneParams, YXParams, approx_detune,
                        detune_rwa_protocol, detune_shape_factor,
                        detune_waveform, eta_detune_rwa, eta_yx_rwa,
                        optimize_detune_full, optimize_detune_rwa,
                        yx_rwa_protocol, yx_waveform)

__all__ = [
    "AugmentedState", "ControlWaveform", "RWAProtocol", "RWASegment",
    "SensorModel", "Trajectory", "bloch_vector", "evolve", "evolve_batch",
    "final_state",
    "outcome_probability", "propagate_interval", "qfi", "sensitivity",
    "D0_DETUNE", "DetuneFamily", "DetuneFullResult", "DetuneParams",
    "YXParams", "approx_detune", "detune_rwa_protocol", "detune_shape_factor",
    "detune_waveform", "eta_detune_rwa", "eta_yx_rwa", "optimize_detune_full",
    "optimize_detune_rwa", "yx_rwa_protocol", "yx_waveform",
    "AdjointTrajectory", "CostKind", "DeviationEstimate", "IndicatorFamily",
    "OCTDiagnostics", "OptimalityReport", "OptimizationConfig",
    "OptimizationResult", "adjoint_diagnostics", "adjoint_trajectory",
    "classify_arcs", "estimate_cost_deviation", "optimize_free_form",
    "optimize_multistart", "optimize_parametric", "parametric_cost_and_grad",
    "singular_control_value", "smoothness_cost_and_gradient", "terminal_cost",
    "verify_optimality",
    "KernelSamples", "analytic_kernel_yx_rwa", "convolve_predict",
    "numerical_kernel",
    "DistortionModel", "MeasurementRecord", "ReconstructionResult",
    "SampledField", "distorted_pulse", "reconstruct_waveform",
    "simulate_measurement_sweep", "t_qsl_ns", "time_unit_ns",
]
