//! Named check suites, their configuration and reports.

pub mod catalogue;
pub mod config;
pub mod report;

pub use catalogue::{list_checks, run_suite, CheckInfo, Context, CHECKS};
pub use config::{config_hash, RunConfig, SuiteName, DEFAULT_CONFIG, SCHEMA_VERSION, SEED_ENV};
pub use report::{EstimateOut, Report, Row};

use crate::error::Result;

impl RunConfig {
    pub fn context(&self) -> Result<Context> {
        Ok(Context {
            space: self.space()?,
            intensity: self.intensity,
            mc: self.mc,
            quad: self.quad,
            events: self.events()?,
            clark: self.clark,
        })
    }
}

/// Runs `suites` (the configured list when `None`) in order.
pub fn run(config: &RunConfig, config_text: &str, suites: Option<&[SuiteName]>) -> Result<Report> {
    let suites = suites.unwrap_or(&config.suites).to_vec();
    let ctx = config.context()?;
    let mut rows = Vec::new();
    for s in &suites {
        rows.extend(run_suite(*s, &ctx)?);
    }
    let failures = rows.iter().filter(|r| r.failed()).count();
    Ok(Report {
        tool: "poisson-verify".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        config_sha256: config_hash(config_text),
        seed: config.mc.seed,
        ci_level: config.mc.ci_level,
        n_outer: config.mc.n_outer,
        suites,
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn check_ids_are_unique_and_anchored() {
        let ids: BTreeSet<_> = CHECKS.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), CHECKS.len());
        assert!(CHECKS.iter().all(|c| !c.anchor.is_empty()));
        let text = list_checks();
        assert_eq!(text.lines().count(), CHECKS.len());
        assert!(text.contains("exchange\tidentities\texchange lemma"));
        assert!(text.contains("coarea_L1\tcoarea\tL1 co-area formula"));
    }

    #[test]
    fn small_run_covers_every_check() {
        let mut cfg = RunConfig::default_config();
        cfg.mc.n_outer = 4000;
        cfg.clark.n_outer = 100;
        cfg.clark.n_inner = 5;
        let report = run(&cfg, DEFAULT_CONFIG, None).unwrap();
        let got: Vec<_> = report.rows.iter().map(|r| r.check_id.as_str()).collect();
        let want: Vec<_> = CHECKS.iter().map(|c| c.id).collect();
        assert_eq!(got, want);
        for r in &report.rows {
            assert_eq!(catalogue::anchor(&r.check_id).unwrap(), r.anchor);
        }
        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().count(), CHECKS.len() + 1);
    }
}
