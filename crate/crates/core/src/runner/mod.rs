//! Experiment runner: configuration, expression strings, the experiments and
//! their artifacts (`solution.csv`, `report.json`).

pub mod config;
pub mod experiments;
pub mod expr;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::mesh::{CoarseField, Diagonal, Mesh};
use crate::projection::ExactSolution;

pub use config::{ExperimentConfig, ExperimentId, InterfaceChoice, OperatorKind, VolumetricChoice};
pub use experiments::{
    advection_diffusion_exact, eta_for_distance, exact_solution, run_experiment, LOOP_INTEGRAL_REFERENCE,
};
pub use expr::{parse_expression, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

/// One acceptance check computed from measured values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    /// Thresholds that encode a visual statement rather than an identity.
    pub qualitative: bool,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: f64, relation: Relation) -> Self {
        let pass = value.is_finite()
            && match relation {
                Relation::Le => value <= threshold,
                Relation::Ge => value >= threshold,
                Relation::Gt => value > threshold,
            };
        Check { name: name.into(), value, threshold, relation, qualitative: false, pass }
    }

    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check::new(name, value, threshold, Relation::Le)
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check::new(name, value, threshold, Relation::Ge)
    }

    pub fn gt(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check::new(name, value, threshold, Relation::Gt)
    }

    pub fn qualitative(mut self) -> Self {
        self.qualitative = true;
        self
    }
}

/// One solve inside an experiment.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub name: String,
    pub order: usize,
    pub diagonal: Option<Diagonal>,
    pub interface_model: InterfaceChoice,
    pub volumetric_model: VolumetricChoice,
    pub eta: Option<f64>,
    pub solver_residual: f64,
    pub condition_estimate: f64,
    pub diagnostics: DiagnosticsReport,
    pub field: CoarseField,
    pub exact: ExactSolution,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

/// Process exit status for a finished or failed experiment.
pub fn exit_code(result: &Result<ExperimentOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 1,
        Err(Error::Singular { .. }) => 3,
        Err(_) => 2,
    }
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn run(&self, name: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The `report.json` document.
    pub fn report_json(&self) -> serde_json::Value {
        let runs: Vec<_> = self
            .runs
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "order": r.order,
                    "diagonal": r.diagonal,
                    "interface_model": r.interface_model,
                    "volumetric_model": r.volumetric_model,
                    "eta": r.eta,
                    "solver_residual": r.solver_residual,
                    "condition_estimate": r.condition_estimate,
                    "report": r.diagnostics,
                })
            })
            .collect();
        json!({
            "experiment": self.experiment,
            "config_echo": self.config,
            "diagnostics": { "runs": runs },
            "checks": self.checks,
            "notes": self.notes,
        })
    }

    /// The `solution.csv` table: sampled exact, coarse and fine values of every run.
    pub fn solution_csv(&self) -> String {
        let two_d = self.config.dim == 2;
        let mut out = String::new();
        out.push_str(if two_d {
            "run,element,side,x1,x2,u_exact,u_coarse,u_fine\n"
        } else {
            "run,element,side,x,u_exact,u_coarse,u_fine\n"
        });
        let n = self.config.samples;
        for r in &self.runs {
            let space = r.field.space();
            let mut row = |k: usize, side: &str, x: &[f64]| {
                let u = r.exact.value(x);
                let ub = r.field.value(k, x);
                let coords: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
                let _ = writeln!(out, "{},{k},{side},{},{u:.16e},{ub:.16e},{:.16e}", r.name, coords.join(","), u - ub);
            };
            match space.mesh() {
                Mesh::OneD(m) => {
                    for k in 0..m.n_elements() {
                        let (a, b) = (m.nodes()[k], m.nodes()[k + 1]);
                        for i in 0..n {
                            let x = a + (b - a) * i as f64 / (n - 1) as f64;
                            // end samples are one-sided traces: + from the right of the left node, − from the left of the right node
                            let side = if i == 0 {
                                "+"
                            } else if i == n - 1 {
                                "-"
                            } else {
                                "0"
                            };
                            row(k, side, &[x]);
                        }
                    }
                }
                Mesh::TwoD(m) => {
                    for k in 0..m.n_elements() {
                        let map = m.map(k);
                        for i in 0..n {
                            for j in 0..n - i {
                                let r = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
                                let on_edge = i == 0 || j == 0 || i + j == n - 1;
                                row(k, if on_edge { "+" } else { "0" }, &map.to_physical(r));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Write `solution.csv` and `report.json` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("solution.csv"), self.solution_csv()).map_err(io)?;
        let mut json = serde_json::to_string_pretty(&self.report_json()).map_err(|e| Error::Io(e.to_string()))?;
        json.push('\n');
        std::fs::write(dir.join("report.json"), json).map_err(io)?;
        Ok(())
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Gt => ">",
            };
            let tag = if c.qualitative { " (qualitative)" } else { "" };
            let _ = writeln!(
                s,
                "[{}] {}: {:.3e} {rel} {:.1e}{tag}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            );
        }
        s
    }
}

/// The experiment table printed by `vmsdg list`.
pub fn list_experiments() -> String {
    let rows = [
        ("E1", "Poisson, f = 2, three linear elements, all fine-scale terms off: nodally exact coarse scale"),
        ("E2", "Poisson, f = 10(x - x^2): explicit average fine-scale gradient from a centred difference"),
        ("E3", "Poisson on [0, 1.5]: explicit model from the L2 projection recovers that projection"),
        ("E4", "Interior penalty (η = 2.5), sinusoidal forcing: fine-scale interface identities and Taylor distance"),
        ("E5", "Interior penalty (η = 2), p = 1, 2, 3: moment conditions on the fine scale"),
        ("E6", "Laplace on the unit square, 18 triangular elements, p = 1..6: boundary-loop identity and fine-scale integrals"),
        ("E7", "Advection-diffusion, explicit interface model with tau: nodally exact coarse scale"),
        ("E8", "Advection-diffusion, explicit L2-based model with tau and gamma terms: L2 projection recovered"),
        ("E9", "Boundary layer (ν = 0.001), ten elements: tau against upwinding"),
        ("E10", "Interior penalty with upwinding (a = -0.5, d = 0.1): combined fine-scale interface model"),
    ];
    let mut s = String::new();
    for (id, text) in rows {
        let _ = writeln!(s, "{id:<4} {text}");
    }
    s
}
