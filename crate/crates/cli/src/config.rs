//! Simulation flags and their bounds.

use clap::Args;
use pdtl_core::sim::EnumConfig;
use pdtl_core::syntax::{parse_rational, VarId};
use pdtl_core::Rational;

use crate::Failure;

pub const MAX_UNROLL: usize = 12;
pub const MAX_MC: usize = 10_000_000;

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    /// Loop unrolling bound (at most 12).
    #[arg(long, default_value_t = 3)]
    pub unroll: usize,
    /// Comma-separated ODE durations, e.g. `0,1/4,1/2,1,2`.
    #[arg(long, default_value = "0,1/4,1/2,1,2")]
    pub durations: String,
    /// Monte Carlo samples per numeric flow (at most 10^7).
    #[arg(long, default_value_t = 100_000)]
    pub mc: usize,
    /// Seed for all sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start state overrides, e.g. `x=1/2,v=0`.
    #[arg(long)]
    pub init: Option<String>,
}

impl SimArgs {
    pub fn config(&self) -> Result<EnumConfig, Failure> {
        if self.unroll > MAX_UNROLL {
            return Err(Failure::usage(format!("--unroll {} exceeds {MAX_UNROLL}", self.unroll)));
        }
        if self.mc == 0 || self.mc > MAX_MC {
            return Err(Failure::usage(format!("--mc must be between 1 and {MAX_MC}, got {}", self.mc)));
        }
        let mut durations = Vec::new();
        for part in self.durations.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let d = parse_rational(part).ok_or_else(|| Failure::usage(format!("bad duration `{part}`")))?;
            if d < Rational::from_integer(0.into()) {
                return Err(Failure::usage(format!("negative duration `{part}`")));
            }
            durations.push(d);
        }
        if durations.is_empty() {
            return Err(Failure::usage("--durations needs at least one value"));
        }
        durations.sort();
        durations.dedup();
        Ok(EnumConfig { unroll: self.unroll, durations, mc_samples: self.mc, seed: self.seed, ..EnumConfig::default() })
    }

    pub fn overrides(&self) -> Result<Vec<(VarId, Rational)>, Failure> {
        let Some(text) = &self.init else { return Ok(Vec::new()) };
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|pair| {
                let (name, value) =
                    pair.split_once('=').ok_or_else(|| Failure::usage(format!("--init expects name=value, got `{pair}`")))?;
                let x = VarId::new(name.trim()).map_err(|e| Failure::usage(e.to_string()))?;
                let v = parse_rational(value).ok_or_else(|| Failure::usage(format!("bad value `{}` for {x}", value.trim())))?;
                Ok((x, v))
            })
            .collect()
    }
}
