//! `ncho`: verification suites and expectation time series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod config;
mod emit;
mod series;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, RunArgs, VerifyArgs};
use config::{config_err, gather, Failure, RunConfig};
use series::Outcome;

fn apply_quadrature_margin() -> Result<(), Failure> {
    match std::env::var("NCHO_QUAD_ORDER_MARGIN") {
        Ok(raw) => {
            let margin: usize = raw.trim().parse().map_err(|_| {
                config_err(format!(
                    "NCHO_QUAD_ORDER_MARGIN = `{raw}` is not a non-negative integer"
                ))
            })?;
            ncho_core::specfun::set_quadrature_margin(margin);
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(config_err(format!("NCHO_QUAD_ORDER_MARGIN: {e}"))),
    }
}

fn series(run: &RunArgs, job: fn(&RunConfig) -> Result<Outcome, Failure>) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(gather(run, &[], &[])?)?;
    let outcome = job(&cfg)?;
    emit::write_output(&outcome.table.render(cfg.format)?, cfg.out.as_deref())?;
    match outcome.failure {
        Some(msg) => Err(Failure::Run(msg)),
        None => Ok(()),
    }
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let mut extra = Vec::new();
    if let Some(eps) = args.perturb_constraint {
        extra.push(("perturb-constraint", eps.to_string()));
    }
    if let Some(n) = args.basis {
        extra.push(("basis", n.to_string()));
    }
    let cfg = RunConfig::resolve(gather(&args.run, &extra, &args.suites)?)?;
    let suites = if cfg.suites.is_empty() {
        verify::ALL_SUITES.to_vec()
    } else {
        cfg.suites.clone()
    };
    let mut checks = Vec::new();
    for suite in suites {
        for check in verify::run_suite(suite, &cfg)? {
            println!("{}", check.line());
            checks.push(check);
        }
    }
    if let Some(path) = &cfg.out {
        emit::write_output(&verify::report_table(&checks).render(cfg.format)?, Some(path))?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Failure::Run(format!("{failed} of {} checks failed", checks.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = apply_quadrature_margin().and_then(|_| match &cli.command {
        Command::Verify(args) => verify(args),
        Command::Energy(run) => series(run, series::energy),
        Command::Uncertainty(run) => series(run, series::uncertainty),
        Command::EpCheck(run) => series(run, series::ep_check),
        Command::NcRecover(run) => series(run, series::nc_recover),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("ncho: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
