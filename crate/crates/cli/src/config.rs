//! Experiment configuration files.

use clap::ValueEnum;
use cloak_core::material::CloakConfig;
use cloak_core::metrics::{default_probe, log_spaced};
use cloak_core::sobolev::ModalDensity;
use cloak_core::Dimension;
use num_complex::Complex64;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Convergence,
    DeltaSweep,
    Theorem61,
    Lemma42,
    MaterialMap,
    AbsorptionCheck,
    Solve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::DeltaSweep => "delta-sweep",
            Experiment::Theorem61 => "theorem61",
            Experiment::Lemma42 => "lemma42",
            Experiment::MaterialMap => "material-map",
            Experiment::AbsorptionCheck => "absorption-check",
            Experiment::Solve => "solve",
        }
    }
}

/// Quantity measured by a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    TraceGap,
    NtdOpnorm,
    Conormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub n: i64,
    #[serde(default)]
    pub m: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProbeSpec {
    #[default]
    Default,
    /// `[re, im]` per order, shared by every `±n` (2D) or `m` (3D).
    Orders(Vec<[f64; 2]>),
    Modes(Vec<ModeSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    #[serde(default = "one")]
    pub r0: f64,
    #[serde(default = "three")]
    pub r2: f64,
}

impl Default for InclusionSpec {
    fn default() -> Self {
        Self { r0: 1.0, r2: 3.0 }
    }
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn three() -> f64 {
    3.0
}
fn dim_two() -> usize {
    2
}
fn default_rho() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    #[serde(default = "dim_two")]
    pub dimension: usize,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "two")]
    pub radius: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "two")]
    pub sigma_a: f64,
    #[serde(default = "three")]
    pub q_a: f64,
    #[serde(default)]
    pub paper_literal_3d: bool,
    #[serde(default)]
    pub no_cloak: bool,
    #[serde(default)]
    pub metric: Metric,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub inclusion: InclusionSpec,
    /// Radius of the cloaked region for the material map.
    #[serde(default = "one")]
    pub r1: f64,
    /// Radius fixed by the blow-up map; defaults to `radius`.
    pub r2: Option<f64>,
    pub out: Option<String>,
    #[serde(default)]
    pub emit_plot: bool,
}

/// A configuration that parsed and passed every static check.
#[derive(Debug, Clone)]
pub struct Plan {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub base: CloakConfig,
    pub points: Vec<f64>,
    pub prefix: PathBuf,
    pub emit_plot: bool,
}

pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
}

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

impl ExperimentConfig {
    pub fn dim(&self) -> Result<Dimension, String> {
        Dimension::from_usize(self.dimension).map_err(|e| e.to_string())
    }

    pub fn cloak(&self) -> Result<CloakConfig, String> {
        Ok(CloakConfig {
            dim: self.dim()?,
            rho: self.rho,
            delta: self.delta,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            omega: self.omega,
            radius: self.radius,
            sigma_a: self.sigma_a,
            q_a: self.q_a,
            paper_literal_3d: self.paper_literal_3d,
            no_cloak: self.no_cloak,
        })
    }

    /// Boundary data on a sphere of the given radius.
    pub fn probe(&self, radius: f64) -> Result<ModalDensity, String> {
        let dim = self.dim()?;
        let err = |e: cloak_core::Error| e.to_string();
        match &self.probe {
            ProbeSpec::Default => default_probe(dim, radius).map_err(err),
            ProbeSpec::Orders(v) => {
                if v.is_empty() {
                    return Err("probe.orders must not be empty".into());
                }
                let per: Vec<Complex64> =
                    v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                ModalDensity::from_orders(dim, radius, &per).map_err(err)
            }
            ProbeSpec::Modes(modes) => {
                let top = modes
                    .iter()
                    .map(|m| m.n.unsigned_abs() as usize)
                    .max()
                    .ok_or("probe.modes must not be empty")?;
                let mut d = ModalDensity::zeros(dim, radius, top).map_err(err)?;
                for m in modes {
                    let v = Complex64::new(m.re, m.im);
                    match dim {
                        Dimension::Two => {
                            if m.m != 0 {
                                return Err("2D probe modes take no m".into());
                            }
                            d.set_2d(m.n, v);
                        }
                        Dimension::Three => {
                            if m.n < 0 {
                                return Err(format!("3D probe mode has negative n = {}", m.n));
                            }
                            d.set_3d(m.n as usize, m.m, v).map_err(err)?;
                        }
                    }
                }
                Ok(d)
            }
        }
    }

    fn default_points(&self, experiment: Experiment) -> Vec<f64> {
        match experiment {
            Experiment::Convergence | Experiment::Theorem61 => {
                log_spaced(1e-3, 10f64.powf(-1.5), 8)
            }
            Experiment::Lemma42 => log_spaced(1e-3, 1e-1, 6),
            Experiment::DeltaSweep => vec![1.0, 2.0, 4.0, 8.0],
            Experiment::AbsorptionCheck => vec![0.05, 0.1],
            Experiment::MaterialMap => {
                let r2 = self.r2.unwrap_or(self.radius);
                (0..=40).map(|i| r2 * i as f64 / 40.0).collect()
            }
            Experiment::Solve => vec![self.rho],
        }
    }

    fn points(&self, experiment: Experiment) -> Result<Vec<f64>, String> {
        let Some(s) = &self.sweep else {
            return Ok(self.default_points(experiment));
        };
        if experiment == Experiment::Solve {
            return Err("the solve experiment takes no sweep".into());
        }
        let points = match (&s.values, s.from, s.to, s.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(k)) => {
                if k < 1 {
                    return Err("sweep.count must be positive".into());
                }
                match s.spacing {
                    Spacing::Log => {
                        if !(a > 0.0 && b > 0.0) {
                            return Err("log-spaced sweeps need positive endpoints".into());
                        }
                        log_spaced(a, b, k)
                    }
                    Spacing::Linear => {
                        if k == 1 {
                            vec![a]
                        } else {
                            (0..k)
                                .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
                                .collect()
                        }
                    }
                }
            }
            _ => return Err("sweep needs either `values` or all of `from`, `to`, `count`".into()),
        };
        if points.is_empty() || points.iter().any(|v| !v.is_finite()) {
            return Err("sweep values must be finite and non-empty".into());
        }
        let up = points.windows(2).all(|w| w[1] > w[0]);
        let down = points.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err("sweep grid must be strictly monotone".into());
        }
        Ok(points)
    }

    /// Runs every check that does not need a solve.
    pub fn plan(
        self,
        cli_experiment: Option<Experiment>,
        out: Option<&str>,
        emit_plot: bool,
    ) -> Result<Plan, String> {
        let experiment = match (cli_experiment, self.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(format!("config is for `{}`, not `{}`", b.name(), a.name()));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err("config does not name an experiment".into()),
        };
        let base = self.cloak()?;
        let points = self.points(experiment)?;
        let check = |c: &CloakConfig| c.validate().map_err(|e| e.to_string());
        match experiment {
            Experiment::Convergence | Experiment::Theorem61 | Experiment::AbsorptionCheck => {
                for &rho in &points {
                    check(&base.with_rho(rho)).map_err(|e| format!("rho = {rho}: {e}"))?;
                }
                self.probe(base.radius)?;
            }
            Experiment::DeltaSweep => {
                for &delta in &points {
                    check(&base.with_delta(delta)).map_err(|e| format!("delta = {delta}: {e}"))?;
                }
                self.probe(base.radius)?;
            }
            Experiment::Solve => {
                check(&base)?;
                self.probe(base.radius)?;
            }
            Experiment::Lemma42 => {
                let InclusionSpec { r0, r2 } = self.inclusion;
                if !(r0 > 0.0 && r2 > r0 && self.omega > 0.0) {
                    return Err("inclusion needs 0 < r0 < r2 and omega > 0".into());
                }
                for &tau in &points {
                    if !(tau > 0.0 && tau < r0 / 4.0) {
                        return Err(format!("tau = {tau} must lie in (0, r0/4)"));
                    }
                    self.probe(tau)?;
                }
            }
            Experiment::MaterialMap => {
                let r2 = self.r2.unwrap_or(self.radius);
                cloak_core::material::cloak_assembly_with_outer(&base, self.r1, r2)
                    .map_err(|e| e.to_string())?;
                if points.iter().any(|&r| r < 0.0) {
                    return Err("material-map radii must be nonnegative".into());
                }
            }
        }
        let prefix = PathBuf::from(
            out.map(str::to_owned)
                .or_else(|| self.out.clone())
                .unwrap_or_else(|| experiment.name().to_owned()),
        );
        let parent = prefix
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(format!(
                "output directory {} does not exist",
                parent.display()
            ));
        }
        if std::fs::metadata(parent)
            .map(|m| m.permissions().readonly())
            .unwrap_or(true)
        {
            return Err(format!(
                "output directory {} is not writable",
                parent.display()
            ));
        }
        let emit_plot = emit_plot || self.emit_plot;
        Ok(Plan {
            experiment,
            config: self,
            base,
            points,
            prefix,
            emit_plot,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(r#"{"experiment": "convergence", "rhoo": 0.1}"#).is_err());
        assert!(parse(r#"{"sweep": {"from": 1e-3, "to": 1e-2, "count": 3, "step": 1}}"#).is_err());
    }

    #[test]
    fn defaults_reproduce_the_reference_setup() {
        let c = parse("{}").unwrap();
        let base = c.cloak().unwrap();
        assert_eq!(base, CloakConfig::reference(Dimension::Two, 0.05));
        let plan = c.plan(Some(Experiment::Convergence), None, false).unwrap();
        assert_eq!(plan.points.len(), 8);
    }

    #[test]
    fn sweeps_must_be_monotone() {
        let c = parse(r#"{"sweep": {"values": [0.01, 0.03, 0.02]}}"#).unwrap();
        assert!(c.plan(Some(Experiment::Convergence), None, false).is_err());
    }

    #[test]
    fn probe_forms() {
        let c = parse(r#"{"dimension": 3, "probe": {"modes": [{"n": 2, "m": -1, "re": 1.0}]}}"#)
            .unwrap();
        let p = c.probe(2.0).unwrap();
        assert_eq!(p.get_3d(2, -1), Complex64::new(1.0, 0.0));
        let c = parse(r#"{"probe": {"orders": [[1.0, 0.0], [0.5, 0.5]]}}"#).unwrap();
        assert_eq!(c.probe(2.0).unwrap().get_2d(-1), Complex64::new(0.5, 0.5));
        assert!(parse(r#"{"probe": "default"}"#).is_ok());
    }

    #[test]
    fn experiment_names_must_agree() {
        let c = parse(r#"{"experiment": "lemma42"}"#).unwrap();
        assert!(c.plan(Some(Experiment::Theorem61), None, false).is_err());
    }
}
