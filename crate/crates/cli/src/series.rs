use ncho_core::ep::{ep_residual, EpFamily};
use ncho_core::model::{coefficients_from_nc, recover_nc_parameters, CoefficientSet, NcParams};
use ncho_core::qstate::{energy_expectation, uncertainties_commutative, uncertainties_noncommutative, StateContext};
use rayon::prelude::*;

use crate::config::{Failure, RunConfig, Source};
use crate::emit::{col, number, Cell, Table};

/// Table plus an optional check failure reported after the data is written.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<String>,
}

/// Evaluates `row` over the grid in parallel and gathers rows in grid order.
/// The first failing time in grid order is reported.
fn evaluate<F>(grid: &[f64], row: F) -> Result<Vec<Vec<Cell>>, Failure>
where
    F: Fn(f64) -> ncho_core::Result<Vec<Cell>> + Sync,
{
    let rows: Vec<_> = grid.par_iter().map(|&t| row(t).map_err(|e| (t, e))).collect();
    rows.into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|(t, e)| Failure::Run(format!("at t = {}: {e}", number(t))))
}

fn rate(family: &EpFamily) -> f64 {
    match family {
        EpFamily::Exponential(f) => f.gamma,
        EpFamily::Rational(f) => f.gamma,
        EpFamily::Custom(_) => 0.0,
    }
}

fn context(cfg: &RunConfig, family: EpFamily) -> StateContext {
    let ctx = StateContext::new(cfg.qn, family);
    if cfg.qn.n == cfg.qn.m {
        ctx
    } else {
        ctx.with_nc_derived_c(cfg.osc)
    }
}

pub fn energy(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let family = cfg.family()?;
    let standard = match &family {
        EpFamily::Custom(_) => family.clone(),
        other => other
            .standard_bopp_counterpart()
            .map_err(|e| Failure::Config(e.to_string()))?,
    };
    let gamma = rate(&family);
    let (main, reference) = (context(cfg, family), context(cfg, standard));
    let rows = evaluate(&cfg.grid.points(), |t| {
        Ok(vec![
            t.into(),
            (gamma * t).into(),
            energy_expectation(&main, t)?.into(),
            energy_expectation(&reference, t)?.into(),
        ])
    })?;
    let mut table = Table::new(vec![
        col("t", "1/omega0"),
        col("gamma_t", "1"),
        col("E", "hbar*omega0"),
        col("E_standard_bopp", "hbar*omega0"),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome { table, failure: None })
}

pub fn uncertainty(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let ctx = StateContext::new(cfg.qn, cfg.family()?);
    let nc = cfg.nc;
    let rows = evaluate(&cfg.grid.points(), |t| {
        let c = uncertainties_commutative(&ctx, t)?;
        let q = uncertainties_noncommutative(&ctx, t, nc)?;
        Ok(vec![
            t.into(),
            c.dx1.into(),
            c.dp1.into(),
            c.dx_dp.into(),
            q.x_sq.into(),
            q.p_sq.into(),
            q.dx_dy.into(),
            q.dpx_dpy.into(),
            q.dx_dpx.into(),
        ])
    })?;
    let mut table = Table::new(vec![
        col("t", "1/omega0"),
        col("dx", "length"),
        col("dp", "momentum"),
        col("dx_dp", "hbar"),
        col("X_sq", "length^2"),
        col("P_sq", "momentum^2"),
        col("dX_dY", "length^2"),
        col("dPx_dPy", "momentum^2"),
        col("dX_dPx", "hbar"),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome { table, failure: None })
}

pub fn ep_check(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let family = cfg.family()?;
    let rows = evaluate(&cfg.grid.points(), |t| {
        let s = family.sample(t)?;
        Ok(vec![
            t.into(),
            s.a.into(),
            s.b.into(),
            s.d.into(),
            s.rho.into(),
            ep_residual(&s, 1.0).into(),
        ])
    })?;
    let worst = rows
        .iter()
        .map(|r| match r[5] {
            Cell::Num(v) => v.abs(),
            _ => unreachable!("numeric column"),
        })
        .fold(0.0, f64::max);
    let tol = cfg.tol("ep");
    let mut table = Table::new(vec![
        col("t", "1/omega0"),
        col("a", "1/mass"),
        col("b", "mass*omega0^2"),
        col("d", "omega0"),
        col("rho", "length"),
        col("ep_residual", "1"),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    let failure = (!(worst < tol)).then(|| format!("ep residual {} exceeds tolerance {}", number(worst), number(tol)));
    Ok(Outcome { table, failure })
}

/// Known NC path used by the roundtrip source.
pub fn roundtrip_path(t: f64) -> NcParams {
    NcParams {
        theta: 0.2 + 0.15 * t.sin(),
        omega_nc: -(0.8 + 0.5 * (0.7 * t).cos()),
    }
}

fn relative(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub fn nc_recover(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let osc = cfg.osc;
    let source = cfg.source()?;
    let roundtrip = matches!(source, Source::Roundtrip);
    let rows = evaluate(&cfg.grid.points(), |t| {
        let (coeffs, truth) = match &source {
            Source::Roundtrip => {
                let truth = roundtrip_path(t);
                (coefficients_from_nc(truth, osc)?, Some(truth))
            }
            Source::Family(f) => {
                let s = f.sample(t)?;
                (
                    CoefficientSet {
                        a: s.a,
                        b: s.b,
                        c: 0.0,
                        d: s.d,
                    },
                    None,
                )
            }
        };
        let rec = recover_nc_parameters(coeffs, osc, None)?;
        let c = coefficients_from_nc(rec.params, osc)?.c;
        let mut row: Vec<Cell> = vec![
            t.into(),
            rec.params.theta.into(),
            rec.params.omega_nc.into(),
            c.into(),
            rec.residual_a.into(),
            rec.residual_b.into(),
            rec.residual_d.into(),
        ];
        if let Some(truth) = truth {
            let err = relative(rec.params.theta, truth.theta).max(relative(rec.params.omega_nc, truth.omega_nc));
            row.extend([truth.theta.into(), truth.omega_nc.into(), err.into()]);
        }
        Ok(row)
    })?;
    let mut columns = vec![
        col("t", "1/omega0"),
        col("theta", "length^2"),
        col("omega_nc", "momentum^2"),
        col("c", "omega0"),
        col("residual_a", "1"),
        col("residual_b", "1"),
        col("residual_d", "1"),
    ];
    let mut failure = None;
    if roundtrip {
        columns.extend([
            col("theta_true", "length^2"),
            col("omega_nc_true", "momentum^2"),
            col("relative_error", "1"),
        ]);
        let worst = rows
            .iter()
            .map(|r| match r[9] {
                Cell::Num(v) => v,
                _ => unreachable!("numeric column"),
            })
            .fold(0.0, f64::max);
        let tol = cfg.tol("nc-roundtrip");
        if !(worst < tol) {
            failure = Some(format!(
                "roundtrip relative error {} exceeds tolerance {}",
                number(worst),
                number(tol)
            ));
        }
    }
    let mut table = Table::new(columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome { table, failure })
}
