//! Algorithm constants and the derived budgets (volume limits, batch sizes,
//! restart periods). Two presets: `paper` keeps the asymptotic formulas,
//! `desk` uses small constants that make n ≤ 20 instances meaningful.

use crate::error::{Error, Result};
use crate::localkcut::trials_for;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Paper,
    Desk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub mode: Mode,
    pub eps: f64,
    pub phi: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Scales every batch size.
    pub batch_multiplier: f64,
    pub restart_factor: f64,
    /// Maximum number of hierarchy levels (r).
    pub max_depth: usize,
    /// Largest part the expander check scans exhaustively.
    pub exhaustive_limit: usize,
    /// Desk mode: per-run hit probability assumed by `trials_for`.
    pub desk_hit_probability: f64,
    /// Desk mode: confidence exponent c in ⌈c ln n / p⌉.
    pub desk_confidence: f64,
}

impl Params {
    pub fn desk() -> Self {
        Self {
            mode: Mode::Desk,
            eps: 0.1,
            phi: 0.25,
            alpha: 0.5,
            gamma: 1.0 / 3.0,
            rho: 1.0,
            lambda_min: 4.0,
            lambda_max: 4.8,
            batch_multiplier: 1.0,
            restart_factor: 1.0,
            max_depth: 3,
            exhaustive_limit: 18,
            desk_hit_probability: 1.0 / 16.0,
            desk_confidence: 1.0,
        }
    }

    /// The asymptotic settings for an n-vertex graph. ε is capped at 0.04.
    pub fn paper(n: usize) -> Self {
        let lg = (n.max(4) as f64).log2();
        let ln = (n.max(2) as f64).ln();
        let eps = (1.0 / lg.sqrt()).min(0.04);
        let base = 54.0 * ln / (eps * eps);
        Self {
            mode: Mode::Paper,
            eps,
            phi: 2f64.powf(-lg.powf(0.75)),
            alpha: 1.0 / (lg * lg),
            gamma: 1.0 / 3.0,
            rho: 2f64.powf(lg.sqrt()),
            lambda_min: (1.0 - eps) * base,
            lambda_max: 1.1 * (1.0 + eps) * base,
            batch_multiplier: 1.0,
            restart_factor: 1.0,
            max_depth: (lg.powf(0.25).ceil() as usize).max(1),
            exhaustive_limit: 18,
            desk_hit_probability: 1.0,
            desk_confidence: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Param(m.to_string()));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if self.mode == Mode::Paper && self.eps > 0.04 {
            return bad("paper mode needs eps <= 0.04");
        }
        if !(self.lambda_min > 0.0 && self.lambda_max >= self.lambda_min) {
            return bad("need 0 < lambda_min <= lambda_max");
        }
        if self.lambda_max > 1.2 * self.lambda_min * (1.0 + 1e-12) {
            return bad("lambda_max / lambda_min must not exceed 1.2");
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) || self.alpha <= 0.0 || self.rho <= 0.0 {
            return bad("need 0 < phi <= 1, alpha > 0, rho > 0");
        }
        let inv = 1.0 / self.gamma;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || (inv - inv.round()).abs() > 1e-9 {
            return bad("gamma must be the inverse of an integer");
        }
        if self.max_depth == 0 || self.batch_multiplier <= 0.0 || self.restart_factor <= 0.0 {
            return bad("max_depth, batch_multiplier and restart_factor must be positive");
        }
        if !(self.desk_hit_probability > 0.0 && self.desk_hit_probability <= 1.0) {
            return bad("desk_hit_probability must lie in (0, 1]");
        }
        Ok(())
    }

    /// Volume budget of the sparse-cut search: λmax/φ.
    pub fn find_nu(&self) -> f64 {
        self.lambda_max / self.phi
    }

    /// Volume budget of the small-cut detector: 4λmax/φ.
    pub fn buffer_nu(&self) -> f64 {
        4.0 * self.lambda_max / self.phi
    }

    /// Volume budget of mirror-cut processing: 2λmax/φ + 2λmax.
    pub fn process_nu(&self) -> f64 {
        2.0 * self.lambda_max / self.phi + 2.0 * self.lambda_max
    }

    /// Volume up to which a cut counts as local: 4λmax/φ.
    pub fn local_cut_bound(&self) -> f64 {
        4.0 * self.lambda_max / self.phi
    }

    fn scaled(&self, formula: f64, n: usize) -> usize {
        let t = match self.mode {
            Mode::Paper => formula,
            Mode::Desk => trials_for(self.desk_hit_probability, self.desk_confidence, n.max(2) as f64) as f64,
        } * self.batch_multiplier;
        if t >= usize::MAX as f64 {
            usize::MAX
        } else {
            (t.ceil() as usize).max(1)
        }
    }

    /// Batch size for sparse-cut search and mirror processing:
    /// 10 log n (λmax/φ)^6 λmax^4 in paper mode.
    pub fn find_trials(&self, n: usize) -> usize {
        let f = 10.0 * (n.max(2) as f64).log2() * self.find_nu().powi(6) * self.lambda_max.powi(4);
        self.scaled(f, n)
    }

    /// Batch size for the small-cut detector: 10 log n (4λmax/φ)^2.
    pub fn buffer_trials(&self, n: usize) -> usize {
        let f = 10.0 * (n.max(2) as f64).log2() * self.buffer_nu().powi(2);
        self.scaled(f, n)
    }

    /// Updates between restarts of a level with m edges.
    pub fn restart_period(&self, m: u64) -> u64 {
        let base = (m as f64 * self.phi / self.rho).floor();
        ((base * self.restart_factor).floor() as u64).max(1)
    }

    /// Per-vertex responsibility bound ⌈λmax/(φλmin)⌉ + 1.
    pub fn responsibility_bound(&self) -> u64 {
        (self.lambda_max / (self.phi * self.lambda_min)).ceil() as u64 + 1
    }

    /// Number of checked boundary endpoints re-marked per affected cluster.
    pub fn budget_marks(&self) -> usize {
        (2.0 * self.lambda_max).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        Params::desk().validate().unwrap();
        Params::paper(1 << 20).validate().unwrap();
        let p = Params::paper(1000);
        assert!((p.lambda_max / p.lambda_min - 1.1 * 1.04 / 0.96).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_ratio_and_gamma() {
        let mut p = Params::desk();
        p.lambda_max = 5.0;
        assert!(p.validate().is_err());
        let mut p = Params::desk();
        p.gamma = 0.4;
        assert!(p.validate().is_err());
    }

    #[test]
    fn budgets() {
        let mut p = Params::desk();
        p.lambda_max = 12.0;
        p.lambda_min = 10.0;
        p.phi = 0.5;
        assert_eq!(p.local_cut_bound(), 96.0);
        p.phi = 1.0;
        assert_eq!(p.local_cut_bound(), 48.0);
        p.phi = 0.5;
        assert!(p.process_nu() <= p.local_cut_bound());
        assert_eq!(Params::desk().budget_marks(), 10);
        assert_eq!(Params::desk().restart_period(50), 12);
    }
}
