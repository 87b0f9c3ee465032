use matlin::SymMat;
use sdp::{solve_qsdp, IpmConfig, QsdpStatus};

use crate::kkt::{kkt_residual, Multipliers};
use crate::lift::lift_subproblem;
use crate::{CcdProblem, Error, Result};

/// Shape of the proximal weight Q_k in the term ρ_k/2·‖Q_k(x − x_k)‖².
#[derive(Debug, Clone)]
pub enum QkMode {
    /// Weigh every variable equally.
    Identity,
    /// Per-variable diagonal weights; zero entries exclude a variable
    /// from the proximal term (used to regularize only selected matrix
    /// variables while leaving scalars like level parameters free).
    DiagonalSelector(Vec<f64>),
    /// No proximal term regardless of rho_k.
    None,
}

#[derive(Debug, Clone)]
pub struct CcdConfig {
    /// Proximal weight ρ_k ≥ 0.
    pub rho_k: f64,
    pub qk_mode: QkMode,
    /// Stop when ‖Δx‖∞ / (‖x‖∞ + 1) falls to this level.
    pub eps_step: f64,
    /// Objective-stall level: |Δf| ≤ eps_obj·(1 + |f|) at two successive
    /// iterations stops the loop.
    pub eps_obj: f64,
    /// Outer iteration cap.
    pub k_max: usize,
    /// Strictness margin demanded of the starting point: every block must
    /// have max-eig ≤ −eps_strict.
    pub eps_strict: f64,
    /// Subproblem solver settings. The default tightens the subproblem
    /// tolerance to 1e-9 so that the per-step descent guarantee holds to
    /// well below the monotonicity tolerance used in audits.
    pub ipm: IpmConfig,
}

impl Default for CcdConfig {
    fn default() -> Self {
        CcdConfig {
            rho_k: 1e-2,
            qk_mode: QkMode::Identity,
            eps_step: 1e-3,
            eps_obj: 1e-4,
            k_max: 150,
            eps_strict: 1e-6,
            ipm: IpmConfig {
                tol: 1e-9,
                ..IpmConfig::default()
            },
        }
    }
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcdStatus {
    /// Relative step dropped to eps_step.
    SmallStep,
    /// Objective change stayed within eps_obj·(1+|f|) at two successive
    /// iterations.
    ObjectiveStall,
    /// Outer iteration cap reached.
    IterLimit,
    /// A subproblem failed, or its solution was unusable; the best
    /// iterate found so far is returned.
    NumericalFailure,
}

impl std::fmt::Display for CcdStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CcdStatus::SmallStep => "small-step",
            CcdStatus::ObjectiveStall => "objective-stall",
            CcdStatus::IterLimit => "iteration-limit",
            CcdStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

/// One accepted outer iteration.
#[derive(Debug, Clone)]
pub struct CcdRecord {
    /// 1-based outer iteration count.
    pub k: usize,
    /// Objective at the new iterate.
    pub f: f64,
    /// ‖Δx‖∞ of the accepted step.
    pub step: f64,
    /// ‖Δx‖₂ of the accepted step.
    pub step_2: f64,
    /// ‖Q_k Δx‖₂ under the proximal weights (zero when no proximal term).
    pub qstep_2: f64,
    pub sub_status: QsdpStatus,
    pub sub_iters: usize,
    /// Largest eigenvalue of each constraint block at the new iterate.
    pub constraint_eigs: Vec<f64>,
    /// Largest eigenvalue of each base-set block at the new iterate.
    pub omega_eigs: Vec<f64>,
    /// Stationarity/feasibility/complementarity residual of the original
    /// problem at the new iterate, using the subproblem duals. NaN when
    /// the residual could not be evaluated.
    pub kkt_residual: f64,
}

impl CcdRecord {
    pub fn worst_eig(&self) -> f64 {
        self.constraint_eigs
            .iter()
            .chain(&self.omega_eigs)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Full history of a run plus the last subproblem's multipliers.
#[derive(Debug, Clone, Default)]
pub struct CcdTrace {
    /// Objective at the starting point.
    pub f0: f64,
    pub records: Vec<CcdRecord>,
    /// Duals of the last accepted subproblem, cropped to original block
    /// sizes; usable directly with [`kkt_residual`].
    pub multipliers: Option<Multipliers>,
}

impl CcdTrace {
    /// Objective at the final iterate (f0 when no step was accepted).
    pub fn final_f(&self) -> f64 {
        self.records.last().map(|r| r.f).unwrap_or(self.f0)
    }

    /// One line per outer iteration, fixed field order, parseable with
    /// any whitespace splitter.
    pub fn to_log(&self) -> String {
        let mut out = format!("start f={:.9e}\n", self.f0);
        for r in &self.records {
            out.push_str(&format!(
                "k={} f={:.9e} step={:.3e} worst_eig={:.3e} sub={:?} sub_iters={} kkt={:.3e}\n",
                r.k,
                r.f,
                r.step,
                r.worst_eig(),
                r.sub_status,
                r.sub_iters,
                r.kkt_residual,
            ));
        }
        out
    }
}

pub(crate) fn qk_weights(cfg: &CcdConfig, nvars: usize) -> Result<Option<Vec<f64>>> {
    if cfg.rho_k == 0.0 {
        return Ok(None);
    }
    match &cfg.qk_mode {
        QkMode::None => Ok(None),
        QkMode::Identity => Ok(Some(vec![1.0; nvars])),
        QkMode::DiagonalSelector(w) => {
            if w.len() != nvars {
                return Err(Error::Dimension(format!(
                    "proximal selector has {} weights, problem has {nvars} variables",
                    w.len()
                )));
            }
            if w.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::Invalid(
                    "proximal selector weights must be finite and nonnegative".into(),
                ));
            }
            Ok(Some(w.clone()))
        }
    }
}

fn validate_config(cfg: &CcdConfig) -> Result<()> {
    if !cfg.rho_k.is_finite() || cfg.rho_k < 0.0 {
        return Err(Error::Invalid(format!(
            "proximal weight must be finite and nonnegative, got {}",
            cfg.rho_k
        )));
    }
    for (name, v) in [
        ("eps_step", cfg.eps_step),
        ("eps_obj", cfg.eps_obj),
        ("eps_strict", cfg.eps_strict),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if cfg.k_max == 0 {
        return Err(Error::Invalid("iteration cap must be at least 1".into()));
    }
    Ok(())
}

/// Run the outer loop from a strictly feasible starting point.
///
/// Every accepted iterate is feasible for the original problem and the
/// objective never increases along the run. The loop stops on the first
/// of: relative step at eps_step, objective stall at two successive
/// iterations, the iteration cap, or a subproblem that fails or returns
/// an unusable point (the previous iterate is then returned with status
/// [`CcdStatus::NumericalFailure`]).
pub fn ccd_solve(
    p: &CcdProblem,
    x0: &[f64],
    cfg: &CcdConfig,
) -> Result<(Vec<f64>, CcdTrace, CcdStatus)> {
    p.validate()?;
    validate_config(cfg)?;
    if x0.len() != p.nvars {
        return Err(Error::Dimension(format!(
            "starting point has {} entries, problem has {} variables",
            x0.len(),
            p.nvars
        )));
    }
    let margin = p.feasibility_margin(x0)?;
    if !(margin <= -cfg.eps_strict) {
        return Err(Error::InfeasibleStart {
            margin,
            eps: cfg.eps_strict,
        });
    }
    let weights = qk_weights(cfg, p.nvars)?;

    let mut x = x0.to_vec();
    let mut f_cur = p.objective(&x);
    let mut trace = CcdTrace {
        f0: f_cur,
        records: Vec::new(),
        multipliers: None,
    };
    let mut stall_prev = false;
    let mut status = CcdStatus::IterLimit;

    for k in 1..=cfg.k_max {
        let sub = lift_subproblem(p, &x, cfg)?;
        let mut icfg = cfg.ipm.clone();
        icfg.start = Some(x.clone());
        let sol = solve_qsdp(&sub, &icfg)?;

        let f_new = p.objective(&sol.z);
        let accept_tol = 0.5e-9 * (1.0 + f_cur.abs());
        let usable = match sol.status {
            QsdpStatus::Optimal => true,
            // An iteration-limited subproblem still returns a strictly
            // feasible interior point; keep it if it made progress.
            QsdpStatus::IterLimit => f_new <= f_cur,
            _ => false,
        };
        if !usable || f_new > f_cur + accept_tol {
            log::warn!(
                "outer iteration {k}: subproblem {:?}, objective {:.9e} -> {:.9e}; \
                 keeping previous iterate",
                sol.status,
                f_cur,
                f_new
            );
            status = if matches!(sol.status, QsdpStatus::Optimal)
                && (f_new - f_cur).abs() <= cfg.eps_obj * (1.0 + f_cur.abs())
            {
                CcdStatus::ObjectiveStall
            } else {
                CcdStatus::NumericalFailure
            };
            break;
        }

        // Diagnostics at the candidate point. Feasibility of the original
        // constraints is implied by subproblem feasibility; the explicit
        // eigenvalues both feed the trace and guard against numerical
        // erosion at the block boundaries.
        let constraint_eigs = p.constraint_eigs(&sol.z)?;
        let omega_eigs = p.omega_eigs(&sol.z)?;
        let worst = constraint_eigs
            .iter()
            .chain(&omega_eigs)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if worst >= 0.0 {
            log::warn!(
                "outer iteration {k}: candidate leaves the feasible set \
                 (worst eigenvalue {worst:.3e}); keeping previous iterate"
            );
            status = CcdStatus::NumericalFailure;
            break;
        }

        let mut step = 0.0f64;
        let mut step_2 = 0.0f64;
        let mut qstep_2 = 0.0f64;
        for v in 0..p.nvars {
            let d = sol.z[v] - x[v];
            step = step.max(d.abs());
            step_2 += d * d;
            if let Some(w) = &weights {
                qstep_2 += w[v] * w[v] * d * d;
            }
        }
        step_2 = step_2.sqrt();
        qstep_2 = qstep_2.sqrt();
        let xnorm = x.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let rel_step = step / (xnorm + 1.0);

        let mult = extract_multipliers(p, &sol.v);
        let kkt = match kkt_residual(p, &sol.z, &mult) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("outer iteration {k}: residual evaluation failed: {e}");
                f64::NAN
            }
        };

        let stall_now = (f_new - f_cur).abs() <= cfg.eps_obj * (1.0 + f_cur.abs());
        trace.records.push(CcdRecord {
            k,
            f: f_new,
            step,
            step_2,
            qstep_2,
            sub_status: sol.status,
            sub_iters: sol.iterations,
            constraint_eigs,
            omega_eigs,
            kkt_residual: kkt,
        });
        trace.multipliers = Some(mult);
        x = sol.z;
        f_cur = f_new;
        log::debug!(
            "outer iteration {k}: f={f_cur:.9e} step={step:.3e} rel={rel_step:.3e}"
        );

        if rel_step <= cfg.eps_step {
            status = CcdStatus::SmallStep;
            break;
        }
        if stall_now && stall_prev {
            status = CcdStatus::ObjectiveStall;
            break;
        }
        stall_prev = stall_now;
    }

    Ok((x, trace, status))
}

/// Crop lifted dual blocks back to original constraint sizes.
///
/// For a lifted block [[L, M̃ᵀ],[M̃, −I]] the multiplier of the original
/// constraint is the leading dim×dim corner of the lifted dual; the
/// remaining rows certify the Schur absorption and carry no information
/// about the original inequality.
fn extract_multipliers(p: &CcdProblem, v: &[SymMat]) -> Multipliers {
    let mut constraints = Vec::with_capacity(p.constraints.len());
    for (i, c) in p.constraints.iter().enumerate() {
        let big = &v[i];
        let lam = SymMat::from_fn(c.dim, |r, s| big.get(r, s));
        constraints.push(lam);
    }
    let omega = v[p.constraints.len()..].to_vec();
    Multipliers { constraints, omega }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let cfg = CcdConfig::default();
        assert_eq!(cfg.eps_step, 1e-3);
        assert_eq!(cfg.eps_obj, 1e-4);
        assert_eq!(cfg.eps_strict, 1e-6);
        assert_eq!(cfg.k_max, 150);
        assert_eq!(cfg.rho_k, 1e-2);
        assert_eq!(cfg.ipm.tol, 1e-9);
        assert!(matches!(cfg.qk_mode, QkMode::Identity));
    }

    #[test]
    fn selector_weights_are_checked() {
        let cfg = CcdConfig {
            qk_mode: QkMode::DiagonalSelector(vec![1.0, -1.0]),
            ..CcdConfig::default()
        };
        assert!(qk_weights(&cfg, 2).is_err());
        assert!(qk_weights(&cfg, 3).is_err());
        let ok = CcdConfig {
            qk_mode: QkMode::DiagonalSelector(vec![1.0, 0.0]),
            ..CcdConfig::default()
        };
        assert!(matches!(qk_weights(&ok, 2), Ok(Some(_))));
        let off = CcdConfig {
            rho_k: 0.0,
            ..CcdConfig::default()
        };
        assert!(matches!(qk_weights(&off, 2), Ok(None)));
    }
}
