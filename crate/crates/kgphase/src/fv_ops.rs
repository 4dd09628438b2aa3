//! Charge-invariant observables in the FV representation.
//!
//! A charge-invariant symbol `A(p,q)·δ` has the FV kernel
//! `R(p1,p2)·K_A(p1,p2)` with `R = εδ + χτ₁`. The `εδ` part is even (keeps the
//! charge sector), the `χτ₁` part is odd.

use ndarray::{Array1, Array2};

use crate::grid::PhaseSpaceGrid;
use crate::kinematics::{tau3_plus_i_tau2, Kinematics};
use crate::states::{FvState, Representation};
use crate::weyl::{
    kernel_index, kernel_to_offset, mu, offset_to_symbol, scalar_symbol_to_kernel, MatrixSymbol,
    OperatorKernel,
};
use crate::{Error, Result, C64};

/// Below this `|χ|` the odd part carries no information.
const CHI_FLOOR: f64 = 1e-12;

fn scalar_of(a: &MatrixSymbol) -> Result<Array2<C64>> {
    a.scalar_part(1e-12 * a.max_abs().max(1.0))
}

/// `ε(p_k1, p_k2)` and `χ(p_k1, p_k2)` on the node pairs.
fn node_factors(grid: &PhaseSpaceGrid) -> (Array2<f64>, Array2<f64>) {
    let kin = Kinematics::new(grid);
    let n = grid.n();
    let p = grid.momenta();
    let mut eps = Array2::zeros((n, n));
    let mut chi = Array2::zeros((n, n));
    for k1 in 0..n {
        for k2 in 0..n {
            let (e, c) = kin.epsilon_chi(p[k1], p[k2]);
            eps[(k1, k2)] = e;
            chi[(k1, k2)] = c;
        }
    }
    (eps, chi)
}

fn build(a: &MatrixSymbol, even: bool, odd: bool) -> Result<OperatorKernel> {
    let grid = a.grid();
    let s = scalar_of(a)?;
    let k = scalar_symbol_to_kernel(grid, &s);
    let (eps, chi) = node_factors(grid);
    let n = grid.n();
    let zero = Array2::<C64>::zeros((n, n));
    let diag = if even { &k * &eps.mapv(C64::from) } else { zero.clone() };
    let off = if odd { &k * &chi.mapv(C64::from) } else { zero };
    OperatorKernel::from_entries(grid, [diag.clone(), off.clone(), off, diag], Representation::Fv)
}

/// `⟨p1|Â^FV|p2⟩ = R(p1,p2) K_A(p1,p2)`.
pub fn fv_kernel(a: &MatrixSymbol) -> Result<OperatorKernel> {
    build(a, true, true)
}

/// `ε(p1,p2) K_A(p1,p2) δ`.
pub fn even_kernel(a: &MatrixSymbol) -> Result<OperatorKernel> {
    build(a, true, false)
}

/// `χ(p1,p2) K_A(p1,p2) τ₁`.
pub fn odd_kernel(a: &MatrixSymbol) -> Result<OperatorKernel> {
    build(a, false, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconstructMode {
    /// `½ tr(R⁻¹K)`
    Full,
    /// `½ tr(K)/ε`
    Even,
    /// `½ tr(τ₁K)/χ`, only where `χ ≠ 0`
    Odd,
}

/// A symbol recovered from a FV kernel.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// `A(p_k, q_j)`. In odd mode, offsets outside `mask` are taken as zero.
    pub symbol: Array2<C64>,
    /// `Ã(p_k, P_m)` on the offset lattice.
    pub offset: Array2<C64>,
    /// Offsets that were actually recovered.
    pub mask: Array2<bool>,
}

pub fn reconstruct_symbol(k: &OperatorKernel, mode: ReconstructMode) -> Result<Reconstruction> {
    if k.representation() != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: k.representation().to_string(),
        });
    }
    let grid = k.grid();
    let n = grid.n();
    let (eps, chi) = node_factors(grid);
    let e = k.entries();
    let half = C64::from(0.5);
    let mut kern_mask = Array2::from_elem((n, n), true);
    let scalar = match mode {
        ReconstructMode::Full => Array2::from_shape_fn((n, n), |ij| {
            ((e[0][ij] + e[3][ij]) * eps[ij] - (e[1][ij] + e[2][ij]) * chi[ij]) * half
        }),
        ReconstructMode::Even => Array2::from_shape_fn((n, n), |ij| (e[0][ij] + e[3][ij]) * half / eps[ij]),
        ReconstructMode::Odd => {
            let content = e[1].iter().chain(e[2].iter()).fold(0.0f64, |m, z| m.max(z.norm()));
            if content < 1e-12 / grid.dp() {
                return Err(Error::Unrecoverable);
            }
            Array2::from_shape_fn((n, n), |ij| {
                if chi[ij].abs() > CHI_FLOOR {
                    (e[1][ij] + e[2][ij]) * half / chi[ij]
                } else {
                    kern_mask[ij] = false;
                    C64::new(0.0, 0.0)
                }
            })
        }
    };
    // Odd-μ columns are interpolated from a whole column, so one hole spoils it.
    let bad_column: Vec<bool> = (0..n)
        .map(|m| (0..n).any(|kk| !kern_mask[kernel_index(n, kk, m)]))
        .collect();
    let mask = Array2::from_shape_fn((n, n), |(kk, m)| {
        if mu(n, m).rem_euclid(2) == 0 { kern_mask[kernel_index(n, kk, m)] } else { !bad_column[m] }
    });
    let mut offset = kernel_to_offset(grid, &scalar);
    offset.zip_mut_with(&mask, |z, ok| {
        if !ok {
            *z = C64::new(0.0, 0.0);
        }
    });
    let symbol = offset_to_symbol(grid, &offset);
    Ok(Reconstruction { symbol, offset, mask })
}

/// `max |odd - ((E1-E2)/(E1+E2)) τ₁ even|` over all kernel entries, with the
/// energy ratio taken from the node energy table.
pub fn even_odd_relation_residual(a: &MatrixSymbol) -> Result<f64> {
    let even = even_kernel(a)?;
    let odd = odd_kernel(a)?;
    let grid = a.grid();
    let e = Kinematics::new(grid).energies().clone();
    let n = grid.n();
    let mut worst: f64 = 0.0;
    for (alpha, beta) in [(0, 1), (1, 0), (0, 0), (1, 1)] {
        let lhs = odd.entry(alpha, beta);
        // (τ₁·even)_αβ = even_{1-α, β}
        let rhs = even.entry(1 - alpha, beta);
        for k1 in 0..n {
            for k2 in 0..n {
                let ratio = (e[k1] - e[k2]) / (e[k1] + e[k2]);
                worst = worst.max((lhs[(k1, k2)] - rhs[(k1, k2)] * ratio).norm());
            }
        }
    }
    Ok(worst)
}

/// Time derivative of a symbol `a(p) + b(p)·q` under the free Hamiltonian:
/// the diagonal kernel `b(p) E'(p) (τ₃ + iτ₂) / dp`.
pub fn time_derivative_kernel_linear(a: &MatrixSymbol) -> Result<OperatorKernel> {
    let grid = a.grid();
    let s = scalar_of(a)?;
    let n = grid.n();
    let scale = s.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let mut curvature: f64 = 0.0;
    for k in 0..n {
        for j in 1..n - 1 {
            let d2 = s[(k, j + 1)] - s[(k, j)] * 2.0 + s[(k, j - 1)];
            curvature = curvature.max(d2.norm());
        }
    }
    if curvature > 1e-9 * scale {
        return Err(Error::NotLinearInQ(curvature / scale));
    }
    let dq = grid.dq();
    let slope: Array1<C64> = (0..n).map(|k| (s[(k, n / 2 + 1)] - s[(k, n / 2)]) / dq).collect();
    let kin = Kinematics::new(grid);
    let nil = tau3_plus_i_tau2();
    let slope_at = |p: f64| {
        let k = ((p / grid.dp()).round() as isize + (n / 2) as isize) as usize;
        slope[k]
    };
    Ok(OperatorKernel::diagonal(grid, Representation::Fv, |p| nil * (slope_at(p) * kin.velocity(p))))
}

/// `⟨Ψ|τ₃ Â^FV|Ψ⟩` by direct kernel action.
pub fn expectation(a: &MatrixSymbol, state: &FvState) -> Result<f64> {
    if state.representation() != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: state.representation().to_string(),
        });
    }
    a.grid().ensure_same(state.grid())?;
    let k = fv_kernel(a)?;
    let (pp, pm) = (state.psi_plus(), state.psi_minus());
    let [kp, km] = k.apply([pp, pm]);
    let dp = state.grid().dp();
    let acc: C64 = pp.iter().zip(&kp).map(|(x, y)| x.conj() * y).sum::<C64>()
        - pm.iter().zip(&km).map(|(x, y)| x.conj() * y).sum::<C64>();
    Ok(acc.re * dp)
}
