//! CSV tables. Complex values occupy a `_re`, `_im` column pair and floats
//! are written in shortest round-trip form.

use std::io::Write;

use bouss_core::manifold::Trajectory;
use bouss_core::modes::{ModeClass, ModeTable};
use bouss_core::params::RegimeReport;
use num_complex::Complex64;

use crate::CliResult;

/// Shortest round-trip text, switching to exponent form for very small or
/// large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn push_complex(row: &mut Vec<String>, z: Complex64) {
    row.push(num(z.re));
    row.push(num(z.im));
}

fn class_name(c: ModeClass) -> &'static str {
    match c {
        ModeClass::Central => "central",
        ModeClass::Unstable => "unstable",
        ModeClass::Stable => "stable",
    }
}

pub fn write_regime_csv<W: Write>(report: &RegimeReport, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "n",
        "a0",
        "a1",
        "a2",
        "disc",
        "a0_positive",
        "a1_negative",
        "a1_plus_a2_negative",
        "disc_sign",
    ])?;
    for r in &report.rows {
        out.write_record([
            r.n.to_string(),
            num(r.a0),
            num(r.a1),
            num(r.a2),
            num(r.disc),
            r.a0_positive.to_string(),
            r.a1_negative.to_string(),
            r.a1_plus_a2_negative.to_string(),
            r.disc_sign.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per `1 ≤ n ≤ nmax`: the cubic roots, the six eigenvalues, their
/// classes, the smallest hyperbolic `|Re β|` at that `n` and the global gap.
pub fn write_spectrum_csv<W: Write>(table: &ModeTable, epsilon: f64, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["n".to_string()];
    for k in 1..=3 {
        header.push(format!("lambda{k}_re"));
        header.push(format!("lambda{k}_im"));
    }
    for m in 1..=6 {
        header.push(format!("beta{m}_re"));
        header.push(format!("beta{m}_im"));
    }
    header.extend((1..=6).map(|m| format!("class{m}")));
    header.push("gap_n".into());
    header.push("epsilon".into());
    out.write_record(&header)?;
    for n in 1..=table.nmax as i64 {
        let md = table.get(n);
        let mut row = vec![n.to_string()];
        for z in md.roots.all() {
            push_complex(&mut row, z);
        }
        for z in md.beta {
            push_complex(&mut row, z);
        }
        row.extend(md.classification.iter().map(|c| class_name(*c).to_string()));
        let gap = md
            .beta
            .iter()
            .zip(&md.classification)
            .filter(|(_, c)| **c != ModeClass::Central)
            .map(|(b, _)| b.re.abs())
            .fold(f64::INFINITY, f64::min);
        row.push(num(gap));
        row.push(num(epsilon));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_symbol_csv<W: Write>(table: &ModeTable, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "sigma", "beta1_im"])?;
    for n in 1..=table.nmax as i64 {
        let s = table.sigma(n)?;
        out.write_record([n.to_string(), num(s), num(table.get(n).beta[0].im)])?;
    }
    out.flush()?;
    Ok(())
}

/// `y, E0, E1, E, drift` with drift `|E(y) − E(y₀)|/|E(y₀)|`.
pub fn write_energy_csv<W: Write>(traj: &Trajectory, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["y", "e0", "e1", "e", "drift"])?;
    let e_init = traj.samples.first().and_then(|s| s.energy());
    for s in &traj.samples {
        let (Some(e0), Some(e1), Some(e), Some(ei)) = (s.e0, s.e1, s.energy(), e_init) else { continue };
        let drift = (e - ei).abs() / ei.abs().max(f64::MIN_POSITIVE);
        out.write_record([s.y, e0, e1, e, drift].map(num))?;
    }
    out.flush()?;
    Ok(())
}
