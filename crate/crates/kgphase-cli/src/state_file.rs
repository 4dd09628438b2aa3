//! JSON state files.
//!
//! Numbers are written with 17 significant digits so a file read back gives
//! the same bits. The hash in CSV metadata is taken over this canonical text.

use kgphase::grid::{make_grid, PhaseSpaceGrid};
use kgphase::states::{FvState, Representation};
use kgphase::C64;
use ndarray::Array1;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

fn num(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("finite float is valid JSON")
}

#[derive(Serialize)]
struct GridOut {
    n: usize,
    p_max: Box<RawValue>,
    hbar: Box<RawValue>,
    mass: Box<RawValue>,
    c: Box<RawValue>,
}

#[derive(Serialize)]
struct StateOut {
    format_version: u32,
    grid: GridOut,
    representation: String,
    psi_plus: Vec<[Box<RawValue>; 2]>,
    psi_minus: Vec<[Box<RawValue>; 2]>,
}

#[derive(Deserialize)]
struct GridIn {
    n: usize,
    p_max: f64,
    hbar: f64,
    mass: f64,
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateIn {
    format_version: u32,
    grid: GridIn,
    representation: String,
    psi_plus: Vec<[f64; 2]>,
    psi_minus: Vec<[f64; 2]>,
}

pub fn grid_line(g: &PhaseSpaceGrid) -> String {
    format!(
        "n={} p_max={:.16e} hbar={:.16e} mass={:.16e} c={:.16e}",
        g.n(),
        g.p_max(),
        g.hbar(),
        g.mass(),
        g.c()
    )
}

pub fn to_json(state: &FvState) -> String {
    let g = state.grid();
    let pack = |a: &Array1<C64>| a.iter().map(|z| [num(z.re), num(z.im)]).collect();
    let out = StateOut {
        format_version: FORMAT_VERSION,
        grid: GridOut { n: g.n(), p_max: num(g.p_max()), hbar: num(g.hbar()), mass: num(g.mass()), c: num(g.c()) },
        representation: state.representation().to_string(),
        psi_plus: pack(state.psi_plus()),
        psi_minus: pack(state.psi_minus()),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("state serializes");
    s.push('\n');
    s
}

pub fn hash(state: &FvState) -> String {
    hex::encode(Sha256::digest(to_json(state).as_bytes()))
}

pub fn from_json(text: &str) -> Result<FvState, CliError> {
    let raw: StateIn = serde_json::from_str(text).map_err(|e| CliError::parse(format!("state file: {e}")))?;
    if raw.format_version != FORMAT_VERSION {
        return Err(CliError::parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let g = raw.grid;
    let grid = make_grid(g.n, g.p_max, g.hbar, g.mass, g.c)?;
    let representation = match raw.representation.as_str() {
        "fv" => Representation::Fv,
        "usual" => Representation::Usual,
        other => return Err(CliError::parse(format!("unknown representation {other:?}"))),
    };
    let unpack = |v: Vec<[f64; 2]>| v.into_iter().map(|[re, im]| C64::new(re, im)).collect::<Array1<C64>>();
    Ok(FvState::new(&grid, unpack(raw.psi_plus), unpack(raw.psi_minus), representation)?)
}
