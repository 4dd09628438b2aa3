//! Four-component Wigner function of a FV state, and the matrix-valued
//! Wigner function of a usual-representation state.
//!
//! Components are built in the mixed `(p, P)` representation,
//!
//! ```text
//! C_αβ(p, P) = f_αβ(p1, p2) Ψ_α*(p1) Ψ^β(p2),   p1,2 = p ± P/2
//! W_αβ(p, q) = (2πħ)^{-1} ∫ C_αβ(p, P) e^{-iPq/ħ} dP
//! ```
//!
//! with `f = ε` on the diagonal, `f = χ` off it, and the covariant bra
//! `Ψ_α = (τ₃Ψ)_α`: the `-` component enters the bra with a minus sign. So
//! `∫(w_pp + w_mm)` is the charge norm, `w_mp = conj(w_pm)`, and the even
//! antiparticle component is non-positive.
//!
//! `p1, p2` fall on the refined lattice of spacing `dp/2`; half-node values of
//! `Ψ` are band-limited interpolants, and `E` is evaluated exactly there. The
//! Nyquist offset column `P = -p_max` has no partner `+p_max` and is dropped.

use ndarray::{Array1, Array2, Zip};
use rayon::prelude::*;

use crate::grid::{PhaseSpaceGrid, Sign};
use crate::kinematics::Kinematics;
use crate::states::{Charge, FvState, Representation};
use crate::weyl::{mu, MatrixSymbol};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct WignerComponents {
    grid: PhaseSpaceGrid,
    /// `[w_pp, w_pm, w_mp, w_mm]`, index `2α + β`.
    comps: [Array2<C64>; 4],
}

/// Refined-lattice momenta and energies.
pub(crate) struct RefinedLattice {
    pub p: Vec<f64>,
    pub e: Vec<f64>,
    c2: f64,
}

impl RefinedLattice {
    pub fn new(grid: &PhaseSpaceGrid) -> Self {
        let kin = Kinematics::new(grid);
        let p: Vec<f64> = (0..2 * grid.n()).map(|r| grid.refined_p(r)).collect();
        let e = p.iter().map(|&x| kin.energy(x)).collect();
        Self { p, e, c2: grid.c() * grid.c() }
    }

    /// Refined indices of `p ± P/2` for the offset sample `(k, m)`.
    pub fn indices(&self, n: usize, k: usize, m: usize) -> (usize, usize) {
        let mu = mu(n, m);
        let two_n = 2 * n as isize;
        let k2 = 2 * k as isize;
        ((k2 + mu).rem_euclid(two_n) as usize, (k2 - mu).rem_euclid(two_n) as usize)
    }

    pub fn energy_difference(&self, r1: usize, r2: usize) -> f64 {
        let (p1, p2) = (self.p[r1], self.p[r2]);
        self.c2 * (p1 - p2) * (p1 + p2) / (self.e[r1] + self.e[r2])
    }

    pub fn epsilon_chi(&self, r1: usize, r2: usize) -> (f64, f64) {
        let d = 2.0 * (self.e[r1] * self.e[r2]).sqrt();
        ((self.e[r1] + self.e[r2]) / d, self.energy_difference(r1, r2) / d)
    }
}

fn offset_product(
    grid: &PhaseSpaceGrid,
    lat: &RefinedLattice,
    bra: &[C64],
    ket: &[C64],
    factor: impl Fn(usize, usize) -> f64 + Sync,
) -> Array2<C64> {
    let n = grid.n();
    let mut c = Array2::zeros((n, n));
    if bra.iter().all(|z| *z == ZERO) || ket.iter().all(|z| *z == ZERO) {
        return c;
    }
    c.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(k, mut row)| {
            for m in 1..n {
                let (r1, r2) = lat.indices(n, k, m);
                row[m] = bra[r1].conj() * ket[r2] * factor(r1, r2);
            }
        });
    c
}

/// `W = (2πħ)^{-1} Σ_P C e^{-iPq/ħ} dp`, row by row.
pub(crate) fn offset_to_wigner(grid: &PhaseSpaceGrid, mut c: Array2<C64>) -> Array2<C64> {
    grid.dft().process_rows(&mut c, Sign::Minus);
    let s = grid.dp() * (grid.n() as f64).sqrt() / (2.0 * std::f64::consts::PI * grid.hbar());
    c.mapv_inplace(|z| z * s);
    c
}

/// Inverse of [`offset_to_wigner`].
pub(crate) fn wigner_to_offset(grid: &PhaseSpaceGrid, w: &Array2<C64>) -> Array2<C64> {
    let mut c = w.as_standard_layout().into_owned();
    grid.dft().process_rows(&mut c, Sign::Plus);
    let s = 2.0 * std::f64::consts::PI * grid.hbar() / (grid.dp() * (grid.n() as f64).sqrt());
    c.mapv_inplace(|z| z * s);
    c
}

fn is_zero(a: &Array2<C64>) -> bool {
    a.iter().all(|z| *z == ZERO)
}

impl WignerComponents {
    pub fn from_components(grid: &PhaseSpaceGrid, comps: [Array2<C64>; 4]) -> Result<Self> {
        for c in &comps {
            if c.dim() != (grid.n(), grid.n()) {
                return Err(Error::AxisMismatch {
                    expected: format!("({0}, {0})", grid.n()),
                    found: format!("{:?}", c.dim()),
                });
            }
        }
        Ok(Self { grid: grid.clone(), comps })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    /// `W_α^β`, `α, β ∈ {Plus, Minus}`.
    pub fn component(&self, alpha: Charge, beta: Charge) -> &Array2<C64> {
        &self.comps[2 * alpha.index() + beta.index()]
    }

    pub fn w_pp(&self) -> &Array2<C64> { &self.comps[0] }
    pub fn w_pm(&self) -> &Array2<C64> { &self.comps[1] }
    pub fn w_mp(&self) -> &Array2<C64> { &self.comps[2] }
    pub fn w_mm(&self) -> &Array2<C64> { &self.comps[3] }

    pub fn components(&self) -> &[Array2<C64>; 4] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Array2<C64>; 4] {
        &mut self.comps
    }

    /// Scalar Wigner function `w_pp + w_mm + w_pm + w_mp` (real part).
    pub fn total(&self) -> Array2<f64> {
        let c = &self.comps;
        Zip::from(&c[0]).and(&c[1]).and(&c[2]).and(&c[3]).map_collect(|a, b, d, e| (a + b + d + e).re)
    }

    /// Convex combination `Σ s_n w_n`.
    pub fn mix(parts: &[(f64, &WignerComponents)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?
            .1;
        let mut comps = first.comps.clone().map(|c| c * C64::from(0.0));
        for (s, w) in parts {
            first.grid.ensure_same(&w.grid)?;
            for (acc, c) in comps.iter_mut().zip(&w.comps) {
                acc.scaled_add(C64::from(*s), c);
            }
        }
        Ok(Self { grid: first.grid.clone(), comps })
    }

    /// Offset-space samples `C_αβ(p_k, P_m)`.
    pub fn offset_components(&self) -> [Array2<C64>; 4] {
        self.comps.clone().map(|w| if is_zero(&w) { w } else { wigner_to_offset(&self.grid, &w) })
    }

    fn from_offset(grid: &PhaseSpaceGrid, offs: [Array2<C64>; 4]) -> Self {
        let comps = offs.map(|c| if is_zero(&c) { c } else { offset_to_wigner(grid, c) });
        Self { grid: grid.clone(), comps }
    }

    /// The populated charge when the odd components vanish and exactly one
    /// even component is nonzero.
    pub fn single_charge(&self) -> Option<Charge> {
        if !is_zero(&self.comps[1]) || !is_zero(&self.comps[2]) {
            return None;
        }
        match (is_zero(&self.comps[0]), is_zero(&self.comps[3])) {
            (false, true) => Some(Charge::Plus),
            (true, false) => Some(Charge::Minus),
            _ => None,
        }
    }

    pub fn max_abs_diff(&self, other: &WignerComponents) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| Zip::from(a).and(b).fold(0.0f64, |m, x, y| m.max((x - y).norm())))
            .fold(0.0, f64::max)
    }
}

/// The four Wigner components of a FV state.
pub fn fv_wigner_components(state: &FvState) -> Result<WignerComponents> {
    if state.representation() != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: state.representation().to_string(),
        });
    }
    state.check_boundary_decay()?;
    let grid = state.grid();
    let lat = RefinedLattice::new(grid);
    let refined = [state.refined_component(Charge::Plus), state.refined_component(Charge::Minus)];
    let metric = [1.0, -1.0];
    let offs: [Array2<C64>; 4] = std::array::from_fn(|i| {
        let (a, b) = (i / 2, i % 2);
        let s = metric[a];
        if a == b {
            offset_product(grid, &lat, &refined[a], &refined[b], |r1, r2| s * lat.epsilon_chi(r1, r2).0)
        } else {
            offset_product(grid, &lat, &refined[a], &refined[b], |r1, r2| s * lat.epsilon_chi(r1, r2).1)
        }
    });
    Ok(WignerComponents::from_offset(grid, offs))
}

/// Exact free propagation of the components: in `(p, P)` the even rows pick
/// up `exp(+iα(E1 - E2)t/ħ)` and the odd rows `exp(+iα(E1 + E2)t/ħ)`, with
/// `α` the sign of the first (bra) index.
pub fn evolve_components(w: &WignerComponents, t: f64) -> WignerComponents {
    let grid = &w.grid;
    let n = grid.n();
    let lat = RefinedLattice::new(grid);
    let hbar = grid.hbar();
    let mut offs = w.offset_components();
    for (i, c) in offs.iter_mut().enumerate() {
        if is_zero(c) {
            continue;
        }
        let (a, b) = (i / 2, i % 2);
        let alpha = if a == 0 { 1.0 } else { -1.0 };
        c.axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(k, mut row)| {
                for m in 0..n {
                    let (r1, r2) = lat.indices(n, k, m);
                    let de = if a == b {
                        lat.energy_difference(r1, r2)
                    } else {
                        lat.e[r1] + lat.e[r2]
                    };
                    row[m] *= C64::from_polar(1.0, alpha * de * t / hbar);
                }
            });
    }
    WignerComponents::from_offset(grid, offs)
}

fn single_charge_or_err(w: &WignerComponents) -> Result<Charge> {
    w.single_charge().ok_or(Error::NotSingleCharge)
}

/// `α ∫ w_αα dq = |Ψ^α(p)|²` for single-charge components.
pub fn momentum_marginal(w: &WignerComponents) -> Result<Array1<f64>> {
    let ch = single_charge_or_err(w)?;
    let comp = w.component(ch, ch);
    let s = ch.sign() * w.grid.dq();
    Ok(comp.rows().into_iter().map(|r| r.iter().map(|z| z.re).sum::<f64>() * s).collect())
}

/// `α ∫ w_αα dp`, the coordinate quasi-density; not sign-definite.
pub fn coordinate_quasidensity(w: &WignerComponents) -> Result<Array1<f64>> {
    let ch = single_charge_or_err(w)?;
    let comp = w.component(ch, ch);
    let s = ch.sign() * w.grid.dp();
    Ok(comp.columns().into_iter().map(|c| c.iter().map(|z| z.re).sum::<f64>() * s).collect())
}

/// Same numbers as `coordinate_quasidensity(fv_wigner_components(state))`,
/// summed over `p` in offset space so only O(n) memory is used.
pub fn state_coordinate_quasidensity(state: &FvState) -> Result<Array1<f64>> {
    if state.representation() != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: state.representation().to_string(),
        });
    }
    state.check_boundary_decay()?;
    let ch = state.single_charge().ok_or(Error::NotSingleCharge)?;
    let grid = state.grid();
    let n = grid.n();
    let lat = RefinedLattice::new(grid);
    let psi = state.refined_component(ch);
    let mut s: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|m| {
            if m == 0 {
                return ZERO;
            }
            let mut acc = ZERO;
            for k in 0..n {
                let (r1, r2) = lat.indices(n, k, m);
                acc += psi[r1].conj() * psi[r2] * lat.epsilon_chi(r1, r2).0;
            }
            acc
        })
        .collect();
    grid.dft().process(&mut s, Sign::Minus);
    let scale = grid.dp() * grid.dp() * (n as f64).sqrt() / (2.0 * std::f64::consts::PI * grid.hbar());
    Ok(s.iter().map(|z| z.re * scale).collect())
}

/// Both sides of the pure-state constraint on the `(p, P)` lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintResidual {
    /// `max |(E1-E2)² C_pp C_mm - (E1+E2)² C_pm C_mp|`
    pub max_abs: f64,
    /// Largest magnitude of either side.
    pub max_term: f64,
}

impl ConstraintResidual {
    /// `max_abs / max_term`, zero when both sides vanish identically.
    pub fn relative(&self) -> f64 {
        if self.max_term == 0.0 { 0.0 } else { self.max_abs / self.max_term }
    }
}

/// Pure-state constraint `(E1-E2)² F_pp F_mm = (E1+E2)² F_pm F_mp`, where
/// `F_αβ(p, P) = ∫ W_αβ(p, q) e^{iPq/ħ} dq`.
pub fn constraint_residual(w: &WignerComponents) -> ConstraintResidual {
    let grid = &w.grid;
    let n = grid.n();
    let lat = RefinedLattice::new(grid);
    let c = w.offset_components();
    let mut max_abs: f64 = 0.0;
    let mut max_term: f64 = 0.0;
    for k in 0..n {
        for m in 0..n {
            let (r1, r2) = lat.indices(n, k, m);
            let dm = lat.energy_difference(r1, r2);
            let sm = lat.e[r1] + lat.e[r2];
            let lhs = c[0][(k, m)] * c[3][(k, m)] * (dm * dm);
            let rhs = c[1][(k, m)] * c[2][(k, m)] * (sm * sm);
            max_abs = max_abs.max((lhs - rhs).norm());
            max_term = max_term.max(lhs.norm()).max(rhs.norm());
        }
    }
    ConstraintResidual { max_abs, max_term }
}

/// `(max |Im w_αα|, max |w_mp - conj w_pm|)`.
pub fn reality_report(w: &WignerComponents) -> (f64, f64) {
    let c = &w.comps;
    let im = c[0].iter().chain(c[3].iter()).fold(0.0f64, |m, z| m.max(z.im.abs()));
    let odd = Zip::from(&c[1]).and(&c[2]).fold(0.0f64, |m, pm, mp| m.max((mp - pm.conj()).norm()));
    (im, odd)
}

/// Matrix Wigner function `W̌` of a usual-representation state, with
/// `W̌_βα(p,q) = (2πħ)^{-1} ∫ Ψ^α*(p+P/2) Ψ^β(p-P/2) e^{-iPq/ħ} dP`
/// (positive-definite pairing). Averages are `tr ∫ A W̌ dp dq`.
pub fn matrix_wigner(state: &FvState) -> Result<MatrixSymbol> {
    if state.representation() != Representation::Usual {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Usual.to_string(),
            found: state.representation().to_string(),
        });
    }
    let grid = state.grid();
    let lat = RefinedLattice::new(grid);
    let refined = [state.refined_component(Charge::Plus), state.refined_component(Charge::Minus)];
    let entries: [Array2<C64>; 4] = std::array::from_fn(|i| {
        let (beta, alpha) = (i / 2, i % 2);
        let c = offset_product(grid, &lat, &refined[alpha], &refined[beta], |_, _| 1.0);
        if is_zero(&c) { c } else { offset_to_wigner(grid, c) }
    });
    MatrixSymbol::from_entries(grid, entries)
}

/// `tr ∫ A(p,q) W̌(p,q) dp dq`.
pub fn matrix_average(a: &MatrixSymbol, w: &MatrixSymbol) -> Result<C64> {
    a.grid().ensure_same(w.grid())?;
    let mut acc = C64::new(0.0, 0.0);
    for alpha in 0..2 {
        for beta in 0..2 {
            acc += Zip::from(a.entry(alpha, beta))
                .and(w.entry(beta, alpha))
                .fold(C64::new(0.0, 0.0), |s, x, y| s + x * y);
        }
    }
    let g = a.grid();
    Ok(acc * g.dp() * g.dq())
}

