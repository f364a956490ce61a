use std::io::Write;

use crate::error::Result;
use crate::recovery::IterLog;

use super::sweep::{BoundsRow, LinkPoint, RocSweep, ThroughputRow};

/// Shortest round-trip rendering; `nan`, `inf` and `-inf` for non-finite
/// values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let s = format!("{v:?}");
        match s.strip_suffix(".0") {
            Some(int) => int.to_string(),
            None => s,
        }
    }
}

pub fn write_link_csv<W: Write>(points: &[LinkPoint], mut out: W) -> Result<()> {
    writeln!(
        out,
        "alpha,ser,p_md,p_fa,trials,discarded,seed,ser_excl_missed,config_hash"
    )?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(p.alpha),
            fmt_f64(p.ser),
            fmt_f64(p.p_md),
            fmt_f64(p.p_fa),
            p.trials,
            p.discarded,
            p.seed,
            fmt_f64(p.ser_excl_missed),
            p.config_hash
        )?;
    }
    Ok(())
}

pub fn write_history_csv<W: Write>(trial: u64, log: &[IterLog], mut out: W) -> Result<()> {
    writeln!(out, "trial,iteration,residual_norm,sparsity")?;
    for l in log {
        writeln!(
            out,
            "{},{},{},{}",
            trial,
            l.iteration,
            fmt_f64(l.residual_norm),
            l.sparsity
        )?;
    }
    Ok(())
}

pub fn write_roc_csv<W: Write>(roc: &RocSweep, mut out: W) -> Result<()> {
    writeln!(out, "xi,p_md,p_fa,trials,alpha,seed,config_hash")?;
    for p in &roc.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(p.xi),
            fmt_f64(p.p_md),
            fmt_f64(p.p_fa),
            roc.trials,
            fmt_f64(roc.alpha),
            roc.seed,
            roc.config_hash
        )?;
    }
    Ok(())
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "alpha,delta2k,m,n,sigma2,xi,pmd_bound,pfa_bound_variant,pfa_bound,\
         rate_lower_raw,rate_lower,rate_upper,units,seed,config_hash"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},nats,{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.delta_2k),
            r.m,
            r.n,
            fmt_f64(r.sigma2),
            fmt_f64(r.xi),
            fmt_f64(r.pmd_bound),
            r.pfa_variant,
            fmt_f64(r.pfa_bound),
            fmt_f64(r.rate_lower_raw),
            fmt_f64(r.rate_lower),
            fmt_f64(r.rate_upper),
            r.seed,
            r.config_hash
        )?;
    }
    Ok(())
}

pub fn write_throughput_csv<W: Write>(rows: &[ThroughputRow], mut out: W) -> Result<()> {
    writeln!(out, "lambda,b_slots,pr_rate,rate,throughput,seed,config_hash")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            r.b_slots,
            fmt_f64(r.pr_rate),
            fmt_f64(r.rate),
            fmt_f64(r.throughput),
            r.seed,
            r.config_hash
        )?;
    }
    Ok(())
}
