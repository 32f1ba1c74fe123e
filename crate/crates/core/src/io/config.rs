use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::{ClassifyOptions, SegmentOptions};
use crate::error::{Error, Result};
use crate::expr::Param;
use crate::families::{builtin, FamilySpec};
use crate::metrics::ChaosOptions;
use crate::sweep::{InvertOptions, OrbitMuOptions, Side, SweepOptions};

/// Flat run configuration. Every field is optional; unset fields fall back
/// to the library defaults. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Custom map text; takes precedence over `family`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift_period: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirm_cycles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_len_factor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advance_tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frac_tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iter_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_steady_points: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_horizon: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub ingest: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Parse a flat TOML document, or a JSON report/config. A JSON object
    /// with a `config` member is read as an emitted report.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(trimmed).map_err(|e| Error::Config(e.to_string()))?;
            let inner = match v.get("config") {
                Some(c) => c.clone(),
                None => v,
            };
            return serde_json::from_value(inner).map_err(|e| Error::Config(e.to_string()));
        }
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Copy every field that is set in `other` over `self`.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other;
            family, expr, lift_period, alpha, beta, x0, n,
            horizon, transient, confirm_cycles, tol, p_max, period, min_len_factor, slack, advance_tol,
            x_lo, x_hi, samples,
            seed, pairs, burn_in, shifts, lambda, frac_tol,
            param, lo, hi, steps, boundary_tol, iter_max, min_steady_points,
            boundary, side, p0, levels, target, span, mu_rel_tol, max_steps, x0s, target_points, max_horizon,
            ingest,
        );
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        match (&self.expr, &self.family) {
            (Some(text), _) => FamilySpec::custom("custom", text, self.lift_period),
            (None, Some(name)) => {
                let mut f = builtin(name)?;
                if self.lift_period.is_some() {
                    f.lift_period = self.lift_period;
                }
                Ok(f)
            }
            (None, None) => Err(Error::Config("either `family` or `expr` must be given".into())),
        }
    }

    pub fn sweep_param(&self) -> Result<Param> {
        match self.param.as_deref() {
            None => Ok(Param::Beta),
            Some(s) => s.parse(),
        }
    }

    pub fn segment_options(&self) -> SegmentOptions {
        let d = SegmentOptions::default();
        SegmentOptions {
            min_len_factor: self.min_len_factor.unwrap_or(d.min_len_factor),
            slack: self.slack.unwrap_or(d.slack),
            advance_tol: self.advance_tol.unwrap_or(d.advance_tol),
        }
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        let d = ClassifyOptions::default();
        ClassifyOptions {
            transient: self.transient.unwrap_or(d.transient),
            confirm_cycles: self.confirm_cycles.unwrap_or(d.confirm_cycles),
            tol: self.tol.unwrap_or(d.tol),
            p_max: self.p_max.unwrap_or(d.p_max),
            horizon: self.horizon.unwrap_or(d.horizon),
            segment: self.segment_options(),
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        let d = SweepOptions::default();
        SweepOptions {
            classify: self.classify_options(),
            min_steady_points: self.min_steady_points.unwrap_or(d.min_steady_points),
            ascending_samples: self.samples.unwrap_or(d.ascending_samples),
        }
    }

    pub fn chaos_options(&self) -> ChaosOptions {
        let d = ChaosOptions::default();
        ChaosOptions {
            pair_count: self.pairs.unwrap_or(d.pair_count),
            horizon: self.horizon.unwrap_or(d.horizon),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            shifts: self.shifts.clone().unwrap_or(d.shifts),
            lambda_threshold: self.lambda.unwrap_or(d.lambda_threshold),
            frac_tol: self.frac_tol.unwrap_or(d.frac_tol),
            seed: self.seed.unwrap_or(d.seed),
        }
    }

    pub fn orbit_mu_options(&self) -> OrbitMuOptions {
        let d = OrbitMuOptions::default();
        OrbitMuOptions {
            x0s: self.x0s.clone().unwrap_or(d.x0s),
            period_p: self.period.unwrap_or(d.period_p),
            transient: self.transient.unwrap_or(d.transient),
            initial_horizon: self.horizon.unwrap_or(d.initial_horizon),
            max_horizon: self.max_horizon.unwrap_or(d.max_horizon),
            target_points: self.target_points.unwrap_or(d.target_points),
            min_steady_points: self.min_steady_points.unwrap_or(d.min_steady_points),
            segment: self.segment_options(),
        }
    }

    pub fn invert_options(&self) -> InvertOptions {
        let d = InvertOptions::default();
        InvertOptions {
            span: self.span.unwrap_or(d.span),
            mu_rel_tol: self.mu_rel_tol.unwrap_or(d.mu_rel_tol),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = "family = \"composite\"\nbeta = 1.2\nx0 = 0.5\nhorizon = 100000\nshifts = [0.0, 0.25]\nside = \"left\"\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.family.as_deref(), Some("composite"));
        assert_eq!(c.side, Some(Side::Left));
        let again = RunConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = RunConfig::parse("family = \"sine\"\nbetta = 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("betta")), "{e}");
    }

    #[test]
    fn report_with_embedded_config() {
        let json = r#"{"command":"classify","config":{"family":"sine","alpha":0.4,"beta":1.6},"result":{}}"#;
        let c = RunConfig::parse(json).unwrap();
        assert_eq!(c.beta, Some(1.6));
        assert!(RunConfig::parse(r#"{"config":{"nope":1}}"#).is_err());
    }

    #[test]
    fn overlay_and_defaults() {
        let mut base = RunConfig::parse("family = \"sine\"\nalpha = 0.4\ntol = 1e-8\n").unwrap();
        let cli = RunConfig { alpha: Some(0.5), ..RunConfig::default() };
        base.overlay(&cli);
        assert_eq!(base.alpha, Some(0.5));
        assert_eq!(base.classify_options().tol, 1e-8);
        assert_eq!(base.classify_options().p_max, 128);
        assert!(RunConfig::default().family_spec().is_err());
        assert_eq!(base.sweep_param().unwrap(), Param::Beta);
    }
}
