//! Convergence studies: solve on a ladder of uniform meshes and record the
//! maximum nodal error `E_∞(N)` with the refinement rate
//! `log₂(E_∞(N/2) / E_∞(N))`.

use std::fmt;
use std::str::FromStr;
use std::thread;
use std::time::Instant;

use cquad_core::fracdiff::{solve_fracdiff, FracDiffProblem, Grid1D, ManufacturedSource};
use cquad_core::volterra::{manufacture_forcing, step_solve, VolterraProblem};
use cquad_core::{Kernel, Mesh, SchemeOrder};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `K ≡ 1`.
    Constant,
    /// `t^α`.
    Power,
    /// `t^{α-1}`.
    PowerSingular,
    /// `t^{α-1}/Γ(α)`.
    Caputo,
}

impl KernelKind {
    pub fn build(self, alpha: f64) -> cquad_core::Result<Kernel> {
        match self {
            Self::Constant => Ok(Kernel::constant()),
            Self::Power => Kernel::power(alpha),
            Self::PowerSingular => Kernel::power_singular(alpha),
            Self::Caputo => Kernel::caputo(alpha),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Constant => "1",
            Self::Power => "t^alpha",
            Self::PowerSingular => "t^(alpha-1)",
            Self::Caputo => "t^(alpha-1)/Gamma(alpha)",
        }
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "constant" | "const" | "one" | "1" => Ok(Self::Constant),
            "power" => Ok(Self::Power),
            "power_singular" | "singular" => Ok(Self::PowerSingular),
            "caputo" => Ok(Self::Caputo),
            other => Err(format!("unknown kernel {other:?}")),
        }
    }
}

/// Exponent `ρ` of the manufactured solution `sin(πx) t^ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Alpha,
    OneMinusAlpha,
}

impl Exponent {
    pub fn value(self, alpha: f64) -> f64 {
        match self {
            Self::Alpha => alpha,
            Self::OneMinusAlpha => 1.0 - alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Problem {
    /// `u = f + K∗u` with exact solution `t^degree` and manufactured forcing.
    Volterra { kernel: KernelKind, exact_degree: f64 },
    /// Integrated fractional diffusion with exact solution `sin(πx) t^ρ`.
    Fracdiff { space_steps: usize, exponent: Exponent },
    /// Reports the exact solution as its own approximation.
    SelfTest,
}

impl Problem {
    pub fn kernel_label(&self) -> &'static str {
        match self {
            Self::Volterra { kernel, .. } => kernel.label(),
            Self::Fracdiff { .. } => KernelKind::Caputo.label(),
            Self::SelfTest => "none",
        }
    }

    pub fn exact_label(&self) -> String {
        match self {
            Self::Volterra { exact_degree, .. } => format!("t^{exact_degree}"),
            Self::Fracdiff { exponent: Exponent::Alpha, .. } => "sin(pi x) t^alpha".into(),
            Self::Fracdiff { exponent: Exponent::OneMinusAlpha, .. } => {
                "sin(pi x) t^(1-alpha)".into()
            }
            Self::SelfTest => "exact".into(),
        }
    }

    /// `E_∞(N)` on the uniform mesh with `n` steps.
    pub fn max_error(
        &self,
        gamma: Gamma,
        alpha: f64,
        horizon: f64,
        n: usize,
    ) -> cquad_core::Result<f64> {
        let order = gamma.order(alpha)?;
        let mesh = Mesh::uniform(horizon, n)?;
        match *self {
            Self::Volterra { kernel, exact_degree } => {
                let kernel = kernel.build(alpha)?;
                let forcing = manufacture_forcing(exact_degree, &kernel)?;
                let problem = VolterraProblem::new(|t| forcing.eval(t), kernel, mesh, order);
                Ok(step_solve(&problem)?.max_error(|t| forcing.exact(t)))
            }
            Self::Fracdiff { space_steps, exponent } => {
                let grid = Grid1D::new(space_steps.saturating_sub(1))?;
                let source = ManufacturedSource::new(exponent.value(alpha), alpha)?;
                let mut problem = FracDiffProblem::new(grid, alpha, mesh, source)?;
                problem.order = order;
                Ok(solve_fracdiff(&problem)?.max_error(|x, t| source.exact(x, t)))
            }
            Self::SelfTest => Ok(0.0),
        }
    }
}

/// Scheme order of a study: an integer `γ`, or the fractional scheme of the
/// study's own `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Gamma {
    Integer(u32),
    Alpha,
}

impl Gamma {
    pub fn order(self, alpha: f64) -> cquad_core::Result<SchemeOrder> {
        match self {
            Self::Integer(g) => SchemeOrder::integer(g),
            Self::Alpha => SchemeOrder::fractional(alpha),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer(g) => write!(f, "{g}"),
            Self::Alpha => f.write_str("alpha"),
        }
    }
}

impl FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("alpha") {
            return Ok(Self::Alpha);
        }
        match s.parse::<u32>() {
            Ok(g @ 1..=5) => Ok(Self::Integer(g)),
            _ => Err(format!("scheme order must be 1..5 or \"alpha\", got {s:?}")),
        }
    }
}

impl TryFrom<String> for Gamma {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Gamma> for String {
    fn from(g: Gamma) -> String {
        g.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: usize,
    /// Absent when the solve failed.
    #[serde(rename = "E_inf")]
    pub e_inf: Option<f64>,
    /// Absent without a row at `N/2` or when an error is not positive.
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub horizon: f64,
    pub exact: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub kernel: String,
    pub alpha: f64,
    pub gamma: String,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

impl ConvergenceReport {
    pub fn row(&self, n: usize) -> Option<&Row> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// `log₂(e_coarse / e_fine)`, or `None` unless both errors are positive and finite.
pub fn rate(e_coarse: f64, e_fine: f64) -> Option<f64> {
    let ok = |e: f64| e > 0.0 && e.is_finite();
    (ok(e_coarse) && ok(e_fine)).then(|| (e_coarse / e_fine).log2())
}

/// Fills `rate` for every row whose `N/2` is also on the ladder.
pub fn fill_rates(rows: &mut [Row]) {
    let errors: Vec<(usize, Option<f64>)> = rows.iter().map(|r| (r.n, r.e_inf)).collect();
    for row in rows.iter_mut() {
        row.rate = None;
        if row.n % 2 != 0 {
            continue;
        }
        let coarse = errors.iter().find(|(n, _)| *n == row.n / 2).and_then(|(_, e)| *e);
        if let (Some(c), Some(f)) = (coarse, row.e_inf) {
            row.rate = rate(c, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub experiment: String,
    pub problem: Problem,
    pub gamma: Gamma,
    pub horizon: f64,
    pub ladder: Vec<usize>,
}

/// Solves every rung of the ladder (in parallel; each rung is independent).
/// A failed solve is recorded on its row and the remaining rows still run.
pub fn run_study(study: &Study, alpha: f64) -> ConvergenceReport {
    let start = Instant::now();
    let results: Vec<cquad_core::Result<f64>> = thread::scope(|scope| {
        let handles: Vec<_> = study
            .ladder
            .iter()
            .map(|&n| {
                scope.spawn(move || study.problem.max_error(study.gamma, alpha, study.horizon, n))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut rows: Vec<Row> = study
        .ladder
        .iter()
        .zip(results)
        .map(|(&n, r)| match r {
            Ok(e) => Row { n, e_inf: Some(e), rate: None, error: None },
            Err(e) => Row { n, e_inf: None, rate: None, error: Some(e.to_string()) },
        })
        .collect();
    fill_rates(&mut rows);
    ConvergenceReport {
        experiment: study.experiment.clone(),
        kernel: study.problem.kernel_label().into(),
        alpha,
        gamma: study.gamma.to_string(),
        rows,
        metadata: Metadata {
            horizon: study.horizon,
            exact: study.problem.exact_label(),
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    }
}

/// `10, 20, 40, ...` up to and including `max`.
pub fn doubling_ladder(start: usize, max: usize) -> Vec<usize> {
    std::iter::successors(Some(start), |n| Some(n * 2)).take_while(|&n| n <= max).collect()
}

/// `u = t^6`, `K = t^{α-1}`, `γ = 4`, `α = 0.25`: the weights make `1 - w̃_n`
/// nearly vanish on coarse meshes, so errors blow up before the fourth-order
/// rate takes over.
pub fn blowup_study(max_n: usize) -> ConvergenceReport {
    let study = Study {
        experiment: "sixth_power_singular_order4_blowup".into(),
        problem: Problem::Volterra { kernel: KernelKind::PowerSingular, exact_degree: 6.0 },
        gamma: Gamma::Integer(4),
        horizon: 1.0,
        ladder: doubling_ladder(10, max_n),
    };
    run_study(&study, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        assert_eq!(rate(4e-5, 1e-5), Some(2.0));
        assert!((rate(0.02440, 0.0034).unwrap() - 2.8437).abs() < 1e-3);
        assert_eq!(rate(1e-5, 1e-5), Some(0.0));
        assert_eq!(rate(0.0, 1e-5), None);
        assert_eq!(rate(1e-5, -1.0), None);
    }

    #[test]
    fn rates_only_for_doubling_pairs() {
        let mut rows: Vec<Row> = [10, 20, 30, 60, 80]
            .iter()
            .map(|&n| Row { n, e_inf: Some(1.0 / (n * n) as f64), rate: None, error: None })
            .collect();
        fill_rates(&mut rows);
        let rates: Vec<Option<f64>> = rows.iter().map(|r| r.rate).collect();
        assert_eq!(rates[0], None);
        assert!((rates[1].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rates[2], None);
        assert!((rates[3].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rates[4], None);
    }

    #[test]
    fn self_test_has_zero_errors_and_no_rates() {
        let study = Study {
            experiment: "self".into(),
            problem: Problem::SelfTest,
            gamma: Gamma::Integer(3),
            horizon: 1.0,
            ladder: doubling_ladder(10, 160),
        };
        let report = run_study(&study, 0.5);
        assert_eq!(report.rows.len(), 5);
        assert!(report.rows.iter().all(|r| r.e_inf == Some(0.0) && r.rate.is_none()));
    }

    #[test]
    fn failed_rows_do_not_abort_the_ladder() {
        // K ≡ 1 with γ = 1 on a single step of length 1: 1 - w̃_1 = 0.
        let study = Study {
            experiment: "pivot".into(),
            problem: Problem::Volterra { kernel: KernelKind::Constant, exact_degree: 1.0 },
            gamma: Gamma::Integer(1),
            horizon: 1.0,
            ladder: vec![1, 2, 4],
        };
        let report = run_study(&study, 0.5);
        assert!(report.rows[0].e_inf.is_none() && report.rows[0].error.is_some());
        assert!(report.rows[1].e_inf.is_some() && report.rows[2].e_inf.is_some());
        assert!(report.rows[1].rate.is_none() && report.rows[2].rate.is_some());
    }

    #[test]
    fn gamma_parsing() {
        assert_eq!("3".parse::<Gamma>(), Ok(Gamma::Integer(3)));
        assert_eq!("Alpha".parse::<Gamma>(), Ok(Gamma::Alpha));
        assert!("6".parse::<Gamma>().is_err());
        assert_eq!(serde_json::to_string(&Gamma::Integer(4)).unwrap(), "\"4\"");
    }

    #[test]
    fn ladder() {
        assert_eq!(doubling_ladder(10, 160), vec![10, 20, 40, 80, 160]);
        assert_eq!(doubling_ladder(10, 159), vec![10, 20, 40, 80]);
    }
}
