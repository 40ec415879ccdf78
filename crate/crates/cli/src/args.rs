use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use mott_core::output::Format;
use mott_core::Param;

#[derive(Debug, Parser)]
#[command(
    name = "mott",
    version,
    about = "VO2 Mott memristor model: DC loci, local activity, Pearson-Anson oscillator analysis",
    after_help = "All physical quantities are SI: A, V, ohm, F, s, m, Hz."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Device preset: default (= 36x50), 10x10 or 56x100 (channel radius x length, nm)
    #[arg(long, global = true, default_value = "default")]
    pub device: String,
    /// Run configuration file with [device], [circuit], [grids] and [output] sections (SI units)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory receiving one file per table (csv), figure (svg) and the JSON document
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Output formats, comma separated: csv, json, svg
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub format: Vec<Format>,
    /// Worker threads for sweeps [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Write the primary result to one file; the extension (.csv, .json, .svg) picks the format
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Circuit overrides; unset values come from the configuration.
#[derive(Debug, Args, Clone, Copy)]
pub struct CircuitArgs {
    /// Series resistance Rs (ohm) [default: 3400]
    #[arg(long, value_name = "OHM")]
    pub rs: Option<f64>,
    /// Parallel capacitance Cp (F) [default: 1e-12]
    #[arg(long, value_name = "F")]
    pub cp: Option<f64>,
    /// Supply voltage Vdc (V) [default: 1.2]
    #[arg(long, value_name = "V")]
    pub vdc: Option<f64>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SweepArgs {
    /// Parameter to vary: rs (ohm), cp (F) or vdc (V)
    #[arg(long, value_name = "PARAM")]
    pub vary: Param,
    /// First value of the swept parameter (SI units of --vary)
    #[arg(long, value_name = "VALUE")]
    pub from: f64,
    /// Last value of the swept parameter (SI units of --vary)
    #[arg(long, value_name = "VALUE")]
    pub to: f64,
    /// Number of evenly spaced values, endpoints included
    #[arg(long, default_value_t = 11, value_name = "N")]
    pub steps: usize,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct FreqArgs {
    /// Lowest frequency (Hz) [default: from config, 1e6]
    #[arg(long, value_name = "HZ")]
    pub f_min: Option<f64>,
    /// Highest frequency (Hz) [default: from config, 1e12]
    #[arg(long, value_name = "HZ")]
    pub f_max: Option<f64>,
    /// Number of log-spaced frequencies [default: from config, 400]
    #[arg(long, value_name = "N")]
    pub f_points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power-off plot: dx/dt (1/s) against x with zero current
    Pop {
        /// Smallest x on the log-spaced grid (dimensionless)
        #[arg(long, default_value_t = 1e-12, value_name = "X")]
        x_min: f64,
        /// Number of x samples
        #[arg(long, default_value_t = 400, value_name = "N")]
        points: usize,
    },
    /// Dynamic route dx/dt (1/s) against x at a fixed current or voltage
    #[command(group(ArgGroup::new("drive").required(true).args(["current", "voltage"])))]
    DynamicRoute {
        /// Device current i (A)
        #[arg(long, value_name = "A")]
        current: Option<f64>,
        /// Device voltage v (V); also lists the equilibria and their stability
        #[arg(long, value_name = "V")]
        voltage: Option<f64>,
        /// Smallest x on the log-spaced grid (dimensionless)
        #[arg(long, default_value_t = 1e-12, value_name = "X")]
        x_min: f64,
        /// Number of x samples
        #[arg(long, default_value_t = 400, value_name = "N")]
        points: usize,
    },
    /// DC steady-state locus: x_q, i_q (A), v_q (V), R (ohm), with the critical currents
    DcLocus,
    /// Saddle-node voltage v* (V) of the voltage-driven memristor and the root at v*
    SaddleNode,
    /// Linearization at a DC operating point: a11, a12 (ohm), b11 (1/s), b12 (1/(A s)), R1, R2 (ohm), C1 (F)
    Linearize {
        /// Operating current i_Q (A)
        #[arg(long, value_name = "A")]
        iq: f64,
    },
    /// Pole p (1/s), zero z (1/s), gain k (ohm) and activity class at one current or along the locus
    #[command(group(ArgGroup::new("where").required(true).args(["iq", "sweep"])))]
    PoleZero {
        /// Operating current i_Q (A)
        #[arg(long, value_name = "A")]
        iq: Option<f64>,
        /// Evaluate along the whole DC locus instead
        #[arg(long)]
        sweep: bool,
    },
    /// Nyquist locus of Z(j 2 pi f): f (Hz), Re Z and Im Z (ohm)
    Nyquist {
        /// Operating current i_Q (A)
        #[arg(long, value_name = "A")]
        iq: f64,
        #[command(flatten)]
        freq: FreqArgs,
    },
    /// Re Z (ohm) over operating current (A) and frequency (Hz), with the Re Z = 0 contour
    RezMap {
        /// Lowest operating current (A) [default: from config, 1e-6]
        #[arg(long, value_name = "A")]
        i_min: Option<f64>,
        /// Highest operating current (A) [default: from config, 2e-3]
        #[arg(long, value_name = "A")]
        i_max: Option<f64>,
        /// Number of log-spaced currents [default: from config, 400]
        #[arg(long, value_name = "N")]
        i_points: Option<usize>,
        #[command(flatten)]
        freq: FreqArgs,
    },
    /// Highest edge-of-chaos frequency (Hz) against channel radius (m)
    Scaling {
        /// Channel radii (m), comma separated
        #[arg(long, value_delimiter = ',', default_value = "5e-9,10e-9,20e-9,36e-9,60e-9", value_name = "M")]
        r_ch: Vec<f64>,
    },
    /// Fixed points of the Pearson-Anson circuit with trace-determinant class
    PaFixedPoints {
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Fixed points and classes along a sweep of Rs (ohm), Cp (F) or Vdc (V)
    PaTrdetSweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Critical Rs (ohm), Cp (F) or Vdc (V) where the tracked fixed point is a centre, with Hopf checks
    PaCritical {
        /// Parameter to solve for: rs (ohm), cp (F) or vdc (V)
        #[arg(long, value_name = "PARAM")]
        vary: Param,
        /// Lower end of the search bracket (SI units of --vary)
        #[arg(long, value_name = "VALUE")]
        from: Option<f64>,
        /// Upper end of the search bracket (SI units of --vary)
        #[arg(long, value_name = "VALUE")]
        to: Option<f64>,
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Nullclines v0(x), v1(x) (V), direction field and fixed points of the circuit
    Nullclines {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Samples along each nullcline
        #[arg(long, default_value_t = 400, value_name = "N")]
        points: usize,
        /// Direction-field grid, NxM in (x, v)
        #[arg(long, default_value = "20x20", value_name = "NxM")]
        field: String,
    },
    /// Integrate the circuit from (x0, v0): t (s), x, v (V)
    Simulate {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Initial state fraction x0 in (0, 1)
        #[arg(long, default_value_t = 0.1, value_name = "X")]
        x0: f64,
        /// Initial capacitor voltage v0 (V)
        #[arg(long, default_value_t = 0.39, value_name = "V")]
        v0: f64,
        /// Integration horizon (s) [default: 200 Rs Cp]
        #[arg(long, value_name = "S")]
        horizon: Option<f64>,
    },
    /// Phase portrait from a grid of initial conditions, each classified as fixed point or limit cycle
    Portrait {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Initial-condition grid, NxM in (x, v)
        #[arg(long, default_value = "6x6", value_name = "NxM")]
        grid: String,
        /// Range of x0, as lo,hi
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.05, 0.95], value_name = "X")]
        x_range: Vec<f64>,
        /// Range of v0 (V), as lo,hi [default: 0.05 Vdc, 0.95 Vdc]
        #[arg(long, value_delimiter = ',', num_args = 2, value_name = "V")]
        v_range: Option<Vec<f64>>,
        /// Integration horizon per orbit (s) [default: 200 Rs Cp]
        #[arg(long, value_name = "S")]
        horizon: Option<f64>,
    },
    /// Bifurcation diagram: simulated outcome along a sweep, with refined oscillation onsets
    BifSweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Minimum horizon per point (s); at least 200 Rs Cp is always used
        #[arg(long, default_value_t = 0.0, value_name = "S")]
        horizon: f64,
        /// Skip the onset bisection
        #[arg(long)]
        no_refine: bool,
    },
}
