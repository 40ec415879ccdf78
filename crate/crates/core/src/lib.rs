//! Compact model of a VO2 Mott memristor and the analysis pipeline built on
//! it: DC loci, small-signal local activity, Pearson–Anson oscillator
//! stability and numerical Hopf-bifurcation studies.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod output;
pub mod pa_circuit;
pub mod roots;
pub mod small_signal;
pub mod steady_state;
pub mod svg;

pub use dynamics::{
    bifurcation_sweep, detect_limit_cycle, integrate, phase_portrait, BifurcationDiagram, IntegrateOptions, LimitCycle,
    SweepOptions, TerminalStatus, Tolerances, Trajectory, Verdict,
};
pub use error::{Error, Result};
pub use model::{
    derive_coefficients, enthalpy_derivative, kinetic_current, kinetic_voltage, memristance, temperature_profile,
    thermal_power, DeviceParams, ModelCoefficients, StateFraction,
};
pub use pa_circuit::{
    classify_trdet, cp_star_power_law, critical_parameter, hopf_conditions, jacobian, nullclines, pa_fixed_points,
    pa_operating_points, tangency_points, transfer_poles, trdet_sweep, CircuitOperatingPoint, CircuitParams,
    HopfReport, NullclineSet, Param, PowerLaw, TrDetClass, TransferPoles,
};
pub use small_signal::{
    linearize, pole_zero, rez_map, scaling_study, virtual_elements, ActivityClass, ImpedanceSample, LinearCoeffs,
    PoleZero, SmallSignalModel, VirtualElements,
};
pub use steady_state::{
    critical_currents, dc_current_at_state, dc_locus, fixed_points_const_voltage, saddle_node_voltage, DcLocus,
    FixedPoint1D, SaddleNodeResult, Stability,
};
