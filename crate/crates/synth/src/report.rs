use ccd::{CcdStatus, CcdTrace, SplitForm};
use matlin::{Mat, SymMat};
use sdp::IpmConfig;

/// Synthesized gain plus the matrix certificates and scalar levels that
/// witness its design inequalities.
#[derive(Debug, Clone)]
pub struct Controller {
    /// Static gain, n_u×n_y.
    pub f: Mat,
    /// Named certificate matrices (Lyapunov-type variables and epigraph
    /// matrices) at the returned iterate.
    pub certificates: Vec<(String, SymMat)>,
    /// Named scalar variables (levels, shifts, auxiliary signs).
    pub scalars: Vec<(String, f64)>,
}

impl Controller {
    pub fn certificate(&self, name: &str) -> Option<&SymMat> {
        self.certificates.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Independently validated closed-loop figures. These come from dense
/// eigenvalue, Lyapunov, and bisection oracles applied to the returned
/// gain; they are never read out of solver variables.
#[derive(Debug, Clone, Default)]
pub struct Metrics {
    /// Spectral abscissa of A + B·F·C.
    pub alpha0_closed_loop: f64,
    /// Closed-loop H₂ norm of the frontend's modeled output channel,
    /// when the frontend has one.
    pub h2_norm: Option<f64>,
    /// Closed-loop H∞ norm of the frontend's gain-bound channel.
    pub hinf_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthStatus {
    /// The outer loop converged by its step or objective test.
    Optimal,
    /// The outer iteration cap stopped the run first.
    IterLimit,
    /// A subproblem failed or a soundness check flagged the result; the
    /// report carries the best iterate found.
    NumericalFailure,
}

impl SynthStatus {
    pub(crate) fn from_ccd(s: CcdStatus) -> Self {
        match s {
            CcdStatus::SmallStep | CcdStatus::ObjectiveStall => SynthStatus::Optimal,
            CcdStatus::IterLimit => SynthStatus::IterLimit,
            CcdStatus::NumericalFailure => SynthStatus::NumericalFailure,
        }
    }
}

impl std::fmt::Display for SynthStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SynthStatus::Optimal => "optimal",
            SynthStatus::IterLimit => "iteration-limit",
            SynthStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

/// Everything a synthesis run reports.
#[derive(Debug, Clone)]
pub struct SynthReport {
    pub plant: String,
    pub controller: Controller,
    /// The design problem's own objective at the returned point, in its
    /// natural orientation (maximized quantities are reported as attained,
    /// not negated).
    pub objective: f64,
    /// Spectral abscissa of the open loop, for the benchmark tables.
    pub alpha0_open_loop: f64,
    pub metrics: Metrics,
    /// Outer iterations of the main loop (initialization runs excluded).
    pub iterations: usize,
    pub wall_time: f64,
    pub status: SynthStatus,
    /// Which initialization stages ran, in order.
    pub phase1_path: Vec<String>,
    /// Full outer-loop history of the main run.
    pub trace: CcdTrace,
    /// Largest eigenvalue over the design inequalities re-evaluated at
    /// (F, certificates) with dense oracles; at most 1e-6 on sound runs.
    pub cert_residual: f64,
    /// Modeling choices and post-run observations, for the record.
    pub notes: Vec<String>,
    /// Entries of F at or above magnitude 1e-5 (reported by the sparse
    /// frontend, absent elsewhere).
    pub nonzeros: Option<usize>,
}

/// Knobs shared by all frontends. Defaults reproduce the shipped benchmark
/// settings; every field can be overridden per run.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Proximal weight for the regularized outer step. `None` selects the
    /// frontend default (1e-2 for the abscissa problems, 0.5e-3 for the
    /// mixed problem, 1e-3 elsewhere).
    pub rho: Option<f64>,
    /// Outer iteration cap. `None` selects the frontend default (150 for
    /// the sparse/abscissa problems, 300 for H₂, H∞, and mixed).
    pub k_max: Option<usize>,
    /// Relative step stopping level.
    pub eps_step: f64,
    /// Relative objective-stall stopping level.
    pub eps_obj: f64,
    /// Margin demanded of strict inequalities and starting points.
    pub eps_strict: f64,
    /// Ceiling for certificate matrices: P ⪯ cert_ceil·I.
    pub cert_ceil: f64,
    /// Box radius for scalar decision variables.
    pub scalar_box: f64,
    /// Subproblem interior-point settings.
    pub ipm: IpmConfig,
    /// Overrides the frontend's difference-of-squares form for its
    /// bilinear terms.
    pub split_override: Option<SplitForm>,
    /// Abscissa problems only: carry the product B·F·C as the bilinear
    /// factor instead of the full shifted state matrix.
    pub product_split: bool,
    /// H₂ only: keep the control feedthrough D₁₂ in the objective channel
    /// (models the trace bound through a matrix-inverse term). The default
    /// drops D₁₂ from the objective, matching the published benchmark
    /// convention; the report records the modeled channel either way.
    pub h2_full_channel: bool,
    /// Mixed only: minimize an epigraph scalar s with trace(Z) ≤ s and
    /// report η = √s, instead of minimizing trace(Z) directly.
    pub eta_objective: bool,
    /// Diagonal state equilibration before synthesis; certificates are
    /// mapped back to original coordinates.
    pub rescale: bool,
    /// Mixed only: leading rows of C₁/D₁₂ forming the gain-bound channel;
    /// `None` uses the whole output for both channels.
    pub z1_rows: Option<usize>,
    /// H₂ initialization: disturbance attenuation level of the
    /// observer-form seed stage.
    pub sigma0: f64,
    /// Overrides the early-stop margin of the feasibility stage of the
    /// initialization (stage 4), where one applies.
    pub phase1_stop_margin: Option<f64>,
    /// Mixed only: run the feasibility stage even when C is invertible
    /// (the invertible case can normally skip it).
    pub force_general_phase1: bool,
    /// Mixed only: equilibrated gain scaling in the seed LMI (level γ
    /// split evenly across the disturbance and output scalings).
    pub seed_rescaled: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rho: None,
            k_max: None,
            eps_step: 1e-3,
            eps_obj: 1e-4,
            eps_strict: 1e-6,
            cert_ceil: 1e4,
            scalar_box: 1e5,
            ipm: IpmConfig { tol: 1e-9, ..IpmConfig::default() },
            split_override: None,
            product_split: false,
            h2_full_channel: false,
            eta_objective: false,
            rescale: false,
            z1_rows: None,
            sigma0: 1.0,
            phase1_stop_margin: None,
            force_general_phase1: false,
            seed_rescaled: false,
        }
    }
}
