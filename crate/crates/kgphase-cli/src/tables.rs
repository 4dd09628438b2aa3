//! CSV output for Wigner components and the dispersion curve, and the
//! reader for full-resolution Wigner CSV files.

use std::fmt::Write as _;

use kgphase::grid::{make_grid, PhaseSpaceGrid};
use kgphase::stats::Fig2Curve;
use kgphase::wigner::WignerComponents;
use kgphase::C64;
use ndarray::Array2;

use crate::state_file::grid_line;
use crate::CliError;

pub const WIGNER_HEADER: &str = "p,q,w_pp,w_mm,re_w_pm,im_w_pm";
pub const FIG2_HEADER: &str = "sigma_p,dx2_usual,dx2_corrected,reference_dx2";

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn wigner_csv(w: &WignerComponents, state_hash: &str, stride: usize) -> String {
    let g = w.grid();
    let n = g.n();
    let mut out = String::new();
    writeln!(out, "# grid {}", grid_line(g)).unwrap();
    writeln!(out, "# state_sha256 {state_hash}").unwrap();
    writeln!(out, "# stride {stride}").unwrap();
    writeln!(out, "{WIGNER_HEADER}").unwrap();
    for k in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride) {
            let pm = w.w_pm()[(k, j)];
            writeln!(
                out,
                "{},{},{},{},{},{}",
                f(g.p(k)),
                f(g.q(j)),
                f(w.w_pp()[(k, j)].re),
                f(w.w_mm()[(k, j)].re),
                f(pm.re),
                f(pm.im)
            )
            .unwrap();
        }
    }
    out
}

fn parse_grid(line: &str) -> Result<PhaseSpaceGrid, CliError> {
    let mut vals = std::collections::HashMap::new();
    for tok in line.split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            vals.insert(k, v);
        }
    }
    let get = |k: &str| -> Result<f64, CliError> {
        vals.get(k)
            .ok_or_else(|| CliError::parse(format!("grid metadata lacks {k}")))?
            .parse::<f64>()
            .map_err(|e| CliError::parse(format!("grid metadata {k}: {e}")))
    };
    let n = get("n")?;
    if n.fract() != 0.0 || n < 0.0 {
        return Err(CliError::parse(format!("grid metadata n={n} is not an integer")));
    }
    Ok(make_grid(n as usize, get("p_max")?, get("hbar")?, get("mass")?, get("c")?)?)
}

/// Read a Wigner CSV written with stride 1. `w_mp` is restored as the
/// conjugate of `w_pm`.
pub fn read_wigner_csv(text: &str) -> Result<WignerComponents, CliError> {
    let mut grid = None;
    let mut stride = 1;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (no, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(rest) = meta.strip_prefix("grid ") {
                grid = Some(parse_grid(rest)?);
            } else if let Some(rest) = meta.strip_prefix("stride ") {
                stride = rest.trim().parse().map_err(|e| CliError::parse(format!("stride: {e}")))?;
            }
            continue;
        }
        if !header_seen {
            if line.trim() != WIGNER_HEADER {
                return Err(CliError::parse(format!("line {}: expected header {WIGNER_HEADER}", no + 1)));
            }
            header_seen = true;
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::parse(format!("line {}: {e}", no + 1)))?;
        if vals.len() != 6 {
            return Err(CliError::parse(format!("line {}: expected 6 columns", no + 1)));
        }
        rows.push(vals);
    }
    let grid = grid.ok_or_else(|| CliError::parse("missing '# grid' metadata line".into()))?;
    if stride != 1 {
        return Err(CliError::parse(format!("Wigner CSV has stride {stride}; only full-resolution files can be read")));
    }
    let n = grid.n();
    if rows.len() != n * n {
        return Err(CliError::parse(format!("expected {} data rows, found {}", n * n, rows.len())));
    }
    let field = |col: usize, im: Option<usize>, conj: bool| {
        Array2::from_shape_fn((n, n), |(k, j)| {
            let r = &rows[k * n + j];
            let z = C64::new(r[col], im.map_or(0.0, |c| r[c]));
            if conj { z.conj() } else { z }
        })
    };
    let comps = [field(2, None, false), field(4, Some(5), false), field(4, Some(5), true), field(3, None, false)];
    Ok(WignerComponents::from_components(&grid, comps)?)
}

pub fn fig2_csv(curve: &Fig2Curve, grid: &PhaseSpaceGrid) -> String {
    let mut out = String::new();
    writeln!(out, "# grid {}", grid_line(grid)).unwrap();
    match curve.threshold {
        Some(t) => writeln!(out, "# threshold_sigma_p {}", f(t)).unwrap(),
        None => writeln!(out, "# threshold_sigma_p none").unwrap(),
    }
    for r in curve.rows.iter().filter(|r| r.warning.is_some()) {
        writeln!(out, "# skipped sigma_p={}: {}", f(r.sigma_p), r.warning.as_deref().unwrap_or("")).unwrap();
    }
    writeln!(out, "{FIG2_HEADER}").unwrap();
    for r in &curve.rows {
        writeln!(out, "{},{},{},{}", f(r.sigma_p), f(r.dx2_usual), f(r.dx2_corrected), f(r.reference_dx2)).unwrap();
    }
    out
}
