//! Averages, coordinate moments, purity tests and the dispersion curve.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::grid::{derivative_p, make_grid, shift_momentum_columns, PhaseSpaceGrid, Sign};
use crate::kinematics::Kinematics;
use crate::states::{make_gaussian, Charge, FvState, Representation};
use crate::weyl::{mu, MatrixSymbol};
use crate::wigner::{state_coordinate_quasidensity, RefinedLattice, WignerComponents};
use crate::{Error, Result, C64};

const ROUTE_TOL: f64 = 1e-6;

/// `∫ A (w_pp + w_mm + w_pm + w_mp) dp dq` for a charge-invariant `A`; the
/// real part is returned.
pub fn average(a: &MatrixSymbol, w: &WignerComponents) -> Result<f64> {
    a.grid().ensure_same(w.grid())?;
    let s = a.scalar_part(1e-12 * a.max_abs().max(1.0))?;
    let c = w.components();
    let acc = Zip::from(&s)
        .and(&c[0])
        .and(&c[1])
        .and(&c[2])
        .and(&c[3])
        .fold(C64::new(0.0, 0.0), |acc, a, x, y, u, v| acc + a * (x + y + u + v));
    let g = w.grid();
    Ok(acc.re * g.dp() * g.dq())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentRoute {
    /// Spectral derivative of `ε(p,p')Ψ(p')` at `p' = p`.
    Formula,
    /// `∫ qⁿ α w_αα dp dq`.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub order: u32,
    pub formula: f64,
    pub grid: f64,
}

impl MomentReport {
    pub fn value(&self, route: MomentRoute) -> f64 {
        match route {
            MomentRoute::Formula => self.formula,
            MomentRoute::Grid => self.grid,
        }
    }

    /// `|formula - grid|`.
    pub fn discrepancy(&self) -> f64 {
        (self.formula - self.grid).abs()
    }
}

fn single_charge_fv(state: &FvState) -> Result<Charge> {
    if state.representation() != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: state.representation().to_string(),
        });
    }
    state.single_charge().ok_or(Error::NotSingleCharge)
}

/// `⟨qⁿ⟩` for a single-charge state, `n ∈ 1..=4`, by both routes. A route
/// disagreement beyond `1e-6` relative is an error.
pub fn coordinate_moment(state: &FvState, order: u32) -> Result<MomentReport> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!("moment order must be in 1..=4 (got {order})")));
    }
    let ch = single_charge_fv(state)?;
    state.check_boundary_decay()?;
    let grid = state.grid();
    let n = grid.n();
    let kin = Kinematics::new(grid);
    let psi = state.component(ch);
    let norm = state.component_norm(ch);
    let p = grid.momenta();
    let dp = grid.dp();
    let ihbar_n = C64::new(0.0, grid.hbar()).powu(order);

    let formula: f64 = {
        let terms: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let f: Vec<C64> = (0..n).map(|j| psi[j] * kin.epsilon(p[k], p[j])).collect();
                psi[k].conj() * derivative_p(grid, &f, order)[k]
            })
            .collect();
        (terms.iter().sum::<C64>() * ihbar_n).re * dp / norm
    };

    let rho = state_coordinate_quasidensity(state)?;
    let q = grid.coordinates();
    let grid_value = rho.iter().zip(&q).map(|(r, x)| r * x.powi(order as i32)).sum::<f64>() * grid.dq() / norm;

    let (usual, _) = second_moment_corrected(state)?;
    let scale = formula.abs().max(grid_value.abs()).max(usual.abs().powf(order as f64 / 2.0));
    // FFT roundoff in ρ(q) is weighted by |q|ⁿ out to the window edge.
    let rho_max = rho.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let weight: f64 = q.iter().map(|x| x.abs().powi(order as i32)).sum::<f64>() * grid.dq();
    let roundoff = 4.0 * f64::EPSILON * rho_max * weight / (n as f64).sqrt() / norm;
    if (formula - grid_value).abs() > ROUTE_TOL * scale + roundoff {
        return Err(Error::RouteMismatch { order, formula, grid: grid_value });
    }
    Ok(MomentReport { order, formula, grid: grid_value })
}

/// The two terms of `⟨q²⟩ = -ħ²∫Ψ*Ψ'' dp - ∫|Ψ|²(ħc²p/2E²)² dp`, each divided
/// by the component norm.
pub fn second_moment_corrected(state: &FvState) -> Result<(f64, f64)> {
    let ch = single_charge_fv(state)?;
    let grid = state.grid();
    let kin = Kinematics::new(grid);
    let psi = state.component(ch);
    let norm = state.component_norm(ch);
    let d2 = derivative_p(grid, psi.as_slice().expect("contiguous"), 2);
    let h = grid.hbar();
    let c2 = grid.c() * grid.c();
    let usual = -h * h * psi.iter().zip(&d2).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * grid.dp() / norm;
    let correction = psi
        .iter()
        .zip(grid.momenta().iter())
        .map(|(a, &p)| {
            let e = kin.energy(p);
            let f = h * c2 * p / (2.0 * e * e);
            a.norm_sqr() * f * f
        })
        .sum::<f64>()
        * grid.dp()
        / norm;
    Ok((usual, correction))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Pointwise residual of the log-criterion on the `(p, P)` lattice.
#[derive(Clone, Debug)]
pub struct CriterionResidual {
    /// `|LHS - RHS|` at `(p_k, P_m)`, NaN where not probed.
    pub residual: Array2<f64>,
    /// `(p1, p2) = (p + P/2, p - P/2)` of each sample.
    pub points: Array2<(f64, f64)>,
    pub max_abs: f64,
    pub probed: usize,
}

/// `∂²ln F/∂p1∂p2 - RHS`, with `F` the `(p,P)` transform of one component.
/// The mixed derivative is `¼∂²_p - ∂²_P` by central differences at one
/// grid step; only stencils where `|F| > 1e-8·max|F|` are probed.
///
/// Even: `RHS = -c⁴p1p2/(E1E2(E1+E2)²)`. Odd: `RHS = ∂²ln χ/∂p1∂p2`
/// (`= +c⁴p1p2/(E1E2(E1-E2)²)`), put through the same stencil as `ln F`. It
/// blows up like `1/P²` near the diagonal, where the stencil's own truncation
/// error would otherwise swamp the residual.
pub fn purity_criterion_residual(w: &WignerComponents, parity: Parity) -> Result<CriterionResidual> {
    let grid = w.grid();
    let n = grid.n();
    let offs = w.offset_components();
    let f = match parity {
        Parity::Even => {
            let (a, b) = (&offs[0], &offs[3]);
            if max_abs(a) >= max_abs(b) { a } else { b }
        }
        Parity::Odd => &offs[1],
    };
    let floor = 1e-8 * max_abs(f);
    let lat = RefinedLattice::new(grid);
    let c4 = grid.c().powi(4);
    let dp2 = grid.dp() * grid.dp();
    let mut residual = Array2::from_elem((n, n), f64::NAN);
    let points = Array2::from_shape_fn((n, n), |(k, m)| {
        let (r1, r2) = lat.indices(n, k, m);
        (lat.p[r1], lat.p[r2])
    });
    let mut max_abs_res: f64 = 0.0;
    let mut probed = 0;
    if floor > 0.0 {
        for k in 1..n - 1 {
            for m in 1..n - 1 {
                let c = f[(k, m)];
                let nb = [f[(k + 1, m)], f[(k - 1, m)], f[(k, m + 1)], f[(k, m - 1)]];
                if c.norm() <= floor || nb.iter().any(|z| z.norm() <= floor) {
                    continue;
                }
                let l = |z: C64| (z / c).ln();
                let lhs = (l(nb[0]) + l(nb[1])) * 0.25 / dp2 - (l(nb[2]) + l(nb[3])) / dp2;
                let (r1, r2) = lat.indices(n, k, m);
                let rhs = match parity {
                    Parity::Even => {
                        let (p1, p2) = (lat.p[r1], lat.p[r2]);
                        let (e1, e2) = (lat.e[r1], lat.e[r2]);
                        C64::from(-c4 * p1 * p2 / (e1 * e2 * (e1 + e2).powi(2)))
                    }
                    Parity::Odd => {
                        let chi = |kk: usize, mm: usize| {
                            let (a, b) = lat.indices(n, kk, mm);
                            lat.epsilon_chi(a, b).1
                        };
                        let x = chi(k, m);
                        let l = |y: f64| C64::from(y / x).ln();
                        (l(chi(k + 1, m)) + l(chi(k - 1, m))) * 0.25 / dp2 - (l(chi(k, m + 1)) + l(chi(k, m - 1))) / dp2
                    }
                };
                let r = (lhs - rhs).norm();
                residual[(k, m)] = r;
                max_abs_res = max_abs_res.max(r);
                probed += 1;
            }
        }
    }
    if probed == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(CriterionResidual { residual, points, max_abs: max_abs_res, probed })
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Offset-space samples at `(p_k + dp/2, P_m + dp/2)`.
fn staggered_offsets(w: &WignerComponents) -> [Option<Array2<C64>>; 4] {
    let grid = w.grid();
    let n = grid.n();
    let s = 0.5 * grid.dp();
    let hbar = grid.hbar();
    let phase: Vec<C64> = grid.coordinates().iter().map(|&q| C64::from_polar(1.0, s * q / hbar)).collect();
    let scale = 2.0 * std::f64::consts::PI * hbar / (grid.dp() * (n as f64).sqrt());
    w.components().clone().map(|mut c| {
        if c.iter().all(|z| z.norm() == 0.0) {
            return None;
        }
        for mut row in c.rows_mut() {
            row.iter_mut().zip(&phase).for_each(|(z, ph)| *z *= ph * scale);
        }
        grid.dft().process_rows(&mut c, Sign::Plus);
        Some(shift_momentum_columns(grid, &c, s))
    })
}

/// `|⟨Ψ|Φ⟩|²` from the two sets of Wigner components, with the `ε⁻²`, `χ⁻²`
/// multipliers applied on a lattice staggered by half a step in both `p` and
/// `P`, where neither vanishes. Mixtures enter bilinearly.
pub fn overlap(wa: &WignerComponents, wb: &WignerComponents) -> Result<f64> {
    let grid = wa.grid();
    grid.ensure_same(wb.grid())?;
    let n = grid.n();
    let dp = grid.dp();
    let kin = Kinematics::new(grid);
    let ca = staggered_offsets(wa);
    let cb = staggered_offsets(wb);
    let mut total = C64::new(0.0, 0.0);
    for alpha in 0..2 {
        for beta in 0..2 {
            let (Some(x), Some(y)) = (&ca[2 * alpha + beta], &cb[2 * beta + alpha]) else {
                continue;
            };
            let even = alpha == beta;
            let rows: Vec<C64> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let pbar = grid.p(k) + 0.5 * dp;
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..n {
                        let big_p = (mu(n, m) as f64 + 0.5) * dp;
                        let (eps, chi) = kin.epsilon_chi(pbar + 0.5 * big_p, pbar - 0.5 * big_p);
                        let f = if even { eps } else { chi };
                        acc += x[(k, m)] * y[(k, n - 1 - m)] / (f * f);
                    }
                    acc
                })
                .collect();
            total += rows.iter().sum::<C64>();
        }
    }
    Ok(total.re * dp * dp)
}

/// `∫∫ W ε⁻² W dp dq` (and the odd analogue), equal to `1/(2πħ)` for a
/// normalized pure state and smaller for mixtures.
pub fn purity_functional(w: &WignerComponents) -> Result<f64> {
    Ok(overlap(w, w)? / (2.0 * std::f64::consts::PI * w.grid().hbar()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Row {
    pub sigma_p: f64,
    /// Half-width of the momentum window used for this row.
    pub p_max: f64,
    pub dx2_usual: f64,
    pub dx2_corrected: f64,
    pub reference_dx2: f64,
    /// Set when the row could not be represented and was skipped.
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Curve {
    pub rows: Vec<Fig2Row>,
    /// `Δp` where `Δx²` changes sign, if it does inside the sampled range.
    pub threshold: Option<f64>,
}

/// Momentum window for a Gaussian of width `sigma`: the geometric mean of the
/// smallest window holding the packet and the largest one whose coordinate
/// window still holds its transform, capped at `grid.p_max()`.
fn window_for(grid: &PhaseSpaceGrid, sigma: f64) -> f64 {
    (sigma * (std::f64::consts::PI * grid.n() as f64).sqrt()).min(grid.p_max())
}

fn dispersion_at(grid: &PhaseSpaceGrid, sigma: f64) -> Result<(f64, f64, f64)> {
    let p_max = window_for(grid, sigma);
    let g = make_grid(grid.n(), p_max, grid.hbar(), grid.mass(), grid.c())?;
    let state = make_gaussian(&g, sigma * sigma, Charge::Plus, 0.0, 0.0)?;
    let (usual, corr) = second_moment_corrected(&state)?;
    Ok((p_max, usual, corr))
}

/// `Δx²` of the Gaussian state for each `σ²`, usual and corrected, against
/// `ħ²/(4σ²)`. Each row gets its own momentum window at the grid's `n`.
pub fn fig2_curve(sigma2_list: &[f64], grid: &PhaseSpaceGrid) -> Fig2Curve {
    let h = grid.hbar();
    let rows: Vec<Fig2Row> = sigma2_list
        .par_iter()
        .map(|&s2| {
            let sigma = s2.sqrt();
            let reference_dx2 = h * h / (4.0 * s2);
            match dispersion_at(grid, sigma) {
                Ok((p_max, usual, corr)) => Fig2Row {
                    sigma_p: sigma,
                    p_max,
                    dx2_usual: usual,
                    dx2_corrected: usual - corr,
                    reference_dx2,
                    warning: None,
                },
                Err(e) => Fig2Row {
                    sigma_p: sigma,
                    p_max: window_for(grid, sigma),
                    dx2_usual: f64::NAN,
                    dx2_corrected: f64::NAN,
                    reference_dx2,
                    warning: Some(e.to_string()),
                },
            }
        })
        .collect();
    let valid: Vec<&Fig2Row> = rows.iter().filter(|r| r.warning.is_none()).collect();
    let threshold = valid
        .windows(2)
        .find(|w| w[0].dx2_corrected > 0.0 && w[1].dx2_corrected <= 0.0)
        .and_then(|w| dispersion_threshold(grid, w[0].sigma_p, w[1].sigma_p, 1e-10).ok());
    Fig2Curve { rows, threshold }
}

/// Bisection for the `Δp` at which the corrected `Δx²` vanishes, given a
/// bracket with `Δx²(lo) > 0 ≥ Δx²(hi)`.
pub fn dispersion_threshold(grid: &PhaseSpaceGrid, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = |s: f64| dispersion_at(grid, s).map(|(_, u, c)| u - c);
    let (mut lo, mut hi) = (lo, hi);
    if !(lo < hi && g(lo)? > 0.0 && g(hi)? <= 0.0) {
        return Err(Error::InvalidArgument(format!("no sign change of dx2 on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 { lo = mid } else { hi = mid }
    }
    Ok(0.5 * (lo + hi))
}
