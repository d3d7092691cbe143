//! Command-line frontend for the ocm solvers: solving graph files, generating
//! client/server models and benchmarking.

use std::io::Write;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ocm_core::{Engine, EngineConfig, Schedule};

pub mod bench;
pub mod gen;
pub mod solve;

#[derive(Debug, Parser)]
#[command(name = "ocm", version, about = "Optimal cycle mean solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one graph file.
    Solve(solve::SolveArgs),
    /// Generate the state space of a client/server template.
    Gen(gen::GenArgs),
    /// Time algorithms over graph files or template sweeps and print CSV.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Seq,
    Par,
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalarArg {
    /// Exact rationals when every weight is an integer, `f64` otherwise.
    Auto,
    F64,
    F32,
}

/// Kernel scheduling flags shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "seq")]
    pub schedule: ScheduleArg,
    /// Worker threads for `--schedule par`; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Permutation seed for `--schedule shuffle`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EngineArgs {
    pub fn engine(&self) -> Result<Engine> {
        let schedule = match self.schedule {
            ScheduleArg::Seq => Schedule::Sequential,
            ScheduleArg::Par => Schedule::Parallel,
            ScheduleArg::Shuffle => Schedule::Shuffled,
        };
        Ok(Engine::new(EngineConfig {
            schedule,
            workers: self.workers,
            seed: self.seed,
        })?)
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Solve(args) => solve::run(&args, out),
        Command::Gen(args) => gen::run(&args, out),
        Command::Bench(args) => bench::run(&args, out),
    }
}

/// Parses a decimal such as `0.001`, `-2.5` or `1e-9` without rounding.
pub fn parse_exact_decimal(s: &str) -> Result<ocm_core::Rational> {
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (
            &t[..i],
            t[i + 1..]
                .parse::<i32>()
                .with_context(|| format!("bad exponent in {s:?}"))?,
        ),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()))
    {
        bail!("not a decimal number: {s:?}");
    }
    let scale = exp - frac.len() as i32;
    if scale.unsigned_abs() > 30 || int.len() + frac.len() > 30 {
        bail!("decimal out of range for exact arithmetic: {s:?}");
    }
    let mut numer: i128 = format!("{int}{frac}").parse().unwrap_or(0);
    if neg {
        numer = -numer;
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        ocm_core::Rational::from_integer(numer * pow)
    } else {
        ocm_core::Rational::new(numer, pow)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ocm_core::Rational;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(
            parse_exact_decimal("1e-9").unwrap(),
            Rational::new(1, 1_000_000_000)
        );
        assert_eq!(parse_exact_decimal("-2.5").unwrap(), Rational::new(-5, 2));
        assert_eq!(
            parse_exact_decimal("0.125E2").unwrap(),
            Rational::new(25, 2)
        );
        assert_eq!(parse_exact_decimal("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_exact_decimal(".5").unwrap(), Rational::new(1, 2));
        for bad in ["", "abc", "1e", "1.2.3", "-", "1e99"] {
            assert!(parse_exact_decimal(bad).is_err(), "{bad}");
        }
    }
}
