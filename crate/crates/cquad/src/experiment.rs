//! Declarative convergence experiments: a problem, a scheme order, a set of
//! `α` values and a ladder, plus reference rows with tolerances.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::harness::{run_study, ConvergenceReport, Gamma, Problem, Study};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: String,
    #[serde(default)]
    pub description: String,
    pub problem: Problem,
    pub gamma: Gamma,
    #[serde(default = "unit_horizon")]
    pub horizon: f64,
    pub alphas: Vec<f64>,
    pub ladder: Vec<usize>,
    /// Used instead of `ladder` when the long run is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub golden: Vec<GoldenSeries>,
}

fn unit_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Computed and reference errors may differ by at most this factor;
    /// `null` compares rates only.
    pub error_factor: Option<f64>,
    /// Absolute rate tolerance; the band with the largest `min_n <= N` applies.
    pub rate_bands: Vec<RateBand>,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            error_factor: Some(2.0),
            rate_bands: vec![RateBand { min_n: 0, abs: 0.15 }, RateBand { min_n: 80, abs: 0.05 }],
        }
    }
}

impl Tolerance {
    pub fn rate_tolerance(&self, n: usize) -> f64 {
        self.rate_bands
            .iter()
            .filter(|b| b.min_n <= n)
            .max_by_key(|b| b.min_n)
            .map_or(0.0, |b| b.abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    pub min_n: usize,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenSeries {
    pub alpha: f64,
    pub rows: Vec<GoldenRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GoldenRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "E_inf", default, skip_serializing_if = "Option::is_none")]
    pub e_inf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Error,
    Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub alpha: f64,
    pub n: usize,
    pub quantity: Quantity,
    pub computed: Option<f64>,
    /// Accepted interval.
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.quantity {
            Quantity::Error => "E_inf",
            Quantity::Rate => "rate",
        };
        let got = self.computed.map_or_else(|| "missing".to_string(), |v| format!("{v:.6e}"));
        write!(
            f,
            "{} alpha={} N={} {what}={got} accepted [{:.6e}, {:.6e}]",
            if self.pass { "ok  " } else { "FAIL" },
            self.alpha,
            self.n,
            self.lo,
            self.hi
        )
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.alphas.is_empty() {
            bail!("no alpha values");
        }
        if self.ladder.is_empty() || self.ladder.contains(&0) {
            bail!("ladder must be non-empty with positive step counts");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            bail!("horizon must be positive");
        }
        for g in &self.golden {
            if !self.alphas.contains(&g.alpha) {
                bail!("reference rows for alpha {} which is not studied", g.alpha);
            }
        }
        Ok(())
    }

    pub fn study(&self, long: bool) -> Study {
        let ladder = match (&self.long_ladder, long) {
            (Some(l), true) => l.clone(),
            _ => self.ladder.clone(),
        };
        Study {
            experiment: self.experiment.clone(),
            problem: self.problem,
            gamma: self.gamma,
            horizon: self.horizon,
            ladder,
        }
    }

    pub fn run(&self, long: bool) -> Vec<ConvergenceReport> {
        let study = self.study(long);
        self.alphas.iter().map(|&a| run_study(&study, a)).collect()
    }

    /// Compares every reference entry against the reports. Entries for rungs
    /// that were not run are skipped.
    pub fn check(&self, reports: &[ConvergenceReport]) -> Vec<CheckOutcome> {
        let mut out = Vec::new();
        for series in &self.golden {
            let Some(report) = reports.iter().find(|r| r.alpha == series.alpha) else {
                continue;
            };
            for g in &series.rows {
                let Some(row) = report.row(g.n) else { continue };
                if let (Some(e), Some(f)) = (g.e_inf, self.tolerance.error_factor) {
                    out.push(outcome(series.alpha, g.n, Quantity::Error, row.e_inf, e / f, e * f));
                }
                if let Some(r) = g.rate {
                    let tol = self.tolerance.rate_tolerance(g.n);
                    out.push(outcome(series.alpha, g.n, Quantity::Rate, row.rate, r - tol, r + tol));
                }
                if g.rate_min.is_some() || g.rate_max.is_some() {
                    let lo = g.rate_min.unwrap_or(f64::NEG_INFINITY);
                    let hi = g.rate_max.unwrap_or(f64::INFINITY);
                    out.push(outcome(series.alpha, g.n, Quantity::Rate, row.rate, lo, hi));
                }
            }
        }
        out
    }
}

fn outcome(alpha: f64, n: usize, quantity: Quantity, computed: Option<f64>, lo: f64, hi: f64) -> CheckOutcome {
    let pass = computed.is_some_and(|v| v >= lo && v <= hi);
    CheckOutcome { alpha, n, quantity, computed, lo, hi, pass }
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// Experiments shipped with the crate, as `(name, json)`.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../experiments/", $name, ".json")))),*
        ];
    };
}

bundled!(
    "cubic_power_order3",
    "cubic_power_order4",
    "sixth_power_singular_order3",
    "sixth_power_singular_order4",
    "sixth_power_singular_order4_blowup",
    "diffusion_rho_alpha",
    "diffusion_rho_one_minus_alpha",
);

pub fn bundled(name: &str) -> anyhow::Result<ExperimentSpec> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .with_context(|| format!("no bundled experiment named {name:?}"))?;
    ExperimentSpec::from_json(text)
}
