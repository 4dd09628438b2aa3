//! Matrix-valued Weyl symbols and momentum-basis kernels.
//!
//! A scalar symbol `A(p, q)` maps to
//!
//! ```text
//! ⟨p1|Â|p2⟩ = (2πħ)^{-1} ∫ A((p1+p2)/2, q) e^{-i(p1-p2)q/ħ} dq
//! ```
//!
//! On the lattice, `Ã(p, P) = ∫ A(p, q) e^{-iPq/ħ} dq` is computed on the
//! integer momentum nodes. A kernel entry `(k1, k2)` has offset index
//! `μ = k1 - k2` (wrapped into `[-n/2, n/2)`); for even `μ` its midpoint is an
//! integer node, for odd `μ` it sits half a step above one. Columns with odd
//! `μ` are moved to those half nodes by band-limited interpolation, so the
//! map is an exact bijection between `n × n` symbols and `n × n` kernels.
//!
//! Products of kernels carry the `dp` weight of the intermediate momentum sum.

use ndarray::{Array1, Array2, Zip};

use crate::grid::{
    derivative_p_columns, derivative_q_rows, shift_momentum_columns, PhaseSpaceGrid, Sign,
};
use crate::kinematics::{delta, tau3, tau3_plus_i_tau2, Mat2};
use crate::states::Representation;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Offset index `μ = m - n/2` of column `m`.
pub(crate) fn mu(n: usize, m: usize) -> isize {
    m as isize - (n / 2) as isize
}

fn wrap(n: usize, i: isize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Kernel indices `(k1, k2)` that hold the offset-space sample `(k, m)`.
pub(crate) fn kernel_index(n: usize, k: usize, m: usize) -> (usize, usize) {
    let mu = mu(n, m);
    let k = k as isize;
    if mu.rem_euclid(2) == 0 {
        (wrap(n, k + mu / 2), wrap(n, k - mu / 2))
    } else {
        (wrap(n, k + (mu + 1) / 2), wrap(n, k - (mu - 1) / 2))
    }
}

/// `Ã(p_k, P_m) = ∫ A(p_k, q) e^{-iP_m q/ħ} dq`.
pub fn symbol_to_offset(grid: &PhaseSpaceGrid, a: &Array2<C64>) -> Array2<C64> {
    let mut t = a.as_standard_layout().into_owned();
    grid.dft().process_rows(&mut t, Sign::Minus);
    let scale = (grid.n() as f64).sqrt() * grid.dq();
    t.mapv_inplace(|z| z * scale);
    t
}

/// Inverse of [`symbol_to_offset`].
pub fn offset_to_symbol(grid: &PhaseSpaceGrid, at: &Array2<C64>) -> Array2<C64> {
    let mut t = at.as_standard_layout().into_owned();
    grid.dft().process_rows(&mut t, Sign::Plus);
    let scale = 1.0 / ((grid.n() as f64).sqrt() * grid.dq());
    t.mapv_inplace(|z| z * scale);
    t
}

/// Place offset-space samples (integer midpoints) into a kernel.
pub fn offset_to_kernel(grid: &PhaseSpaceGrid, at: &Array2<C64>) -> Array2<C64> {
    let n = grid.n();
    let shifted = shift_momentum_columns(grid, at, 0.5 * grid.dp());
    let norm = 1.0 / (2.0 * std::f64::consts::PI * grid.hbar());
    let mut kern = Array2::zeros((n, n));
    for k in 0..n {
        for m in 0..n {
            let src = if mu(n, m).rem_euclid(2) == 0 { at[(k, m)] } else { shifted[(k, m)] };
            kern[kernel_index(n, k, m)] = src * norm;
        }
    }
    kern
}

/// Inverse of [`offset_to_kernel`].
pub fn kernel_to_offset(grid: &PhaseSpaceGrid, kern: &Array2<C64>) -> Array2<C64> {
    let n = grid.n();
    let scale = 2.0 * std::f64::consts::PI * grid.hbar();
    let gathered = Array2::from_shape_fn((n, n), |(k, m)| kern[kernel_index(n, k, m)] * scale);
    let unshifted = shift_momentum_columns(grid, &gathered, -0.5 * grid.dp());
    Array2::from_shape_fn((n, n), |(k, m)| {
        if mu(n, m).rem_euclid(2) == 0 { gathered[(k, m)] } else { unshifted[(k, m)] }
    })
}

pub fn scalar_symbol_to_kernel(grid: &PhaseSpaceGrid, a: &Array2<C64>) -> Array2<C64> {
    offset_to_kernel(grid, &symbol_to_offset(grid, a))
}

pub fn scalar_kernel_to_symbol(grid: &PhaseSpaceGrid, kern: &Array2<C64>) -> Array2<C64> {
    offset_to_symbol(grid, &kernel_to_offset(grid, kern))
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    Zip::from(a).and(b).fold(0.0f64, |m, x, y| m.max((x - y).norm()))
}

fn is_zero(a: &Array2<C64>) -> bool {
    a.iter().all(|z| *z == ZERO)
}

/// 2×2 matrix of `(p, q)` fields, `A_α^β` stored at `[2α + β]` with
/// `α, β = 0` for `+` and `1` for `-`.
#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    grid: PhaseSpaceGrid,
    entries: [Array2<C64>; 4],
}

impl MatrixSymbol {
    pub fn zeros(grid: &PhaseSpaceGrid) -> Self {
        let z = Array2::zeros((grid.n(), grid.n()));
        Self { grid: grid.clone(), entries: [z.clone(), z.clone(), z.clone(), z] }
    }

    pub fn from_entries(grid: &PhaseSpaceGrid, entries: [Array2<C64>; 4]) -> Result<Self> {
        for e in &entries {
            if e.dim() != (grid.n(), grid.n()) {
                return Err(Error::AxisMismatch {
                    expected: format!("({0}, {0})", grid.n()),
                    found: format!("{:?}", e.dim()),
                });
            }
        }
        Ok(Self { grid: grid.clone(), entries })
    }

    /// Samples `f(p_k, q_j)`.
    pub fn from_fn(grid: &PhaseSpaceGrid, f: impl Fn(f64, f64) -> Mat2) -> Self {
        let n = grid.n();
        let mut s = Self::zeros(grid);
        for k in 0..n {
            for j in 0..n {
                let v = f(grid.p(k), grid.q(j));
                for a in 0..2 {
                    for b in 0..2 {
                        s.entries[2 * a + b][(k, j)] = v[(a, b)];
                    }
                }
            }
        }
        s
    }

    /// Charge-invariant symbol `a(p, q) δ`.
    pub fn scalar(grid: &PhaseSpaceGrid, a: Array2<C64>) -> Result<Self> {
        let z = Array2::zeros(a.dim());
        Self::from_entries(grid, [a.clone(), z.clone(), z, a])
    }

    /// Charge-invariant symbol sampled from a real function.
    pub fn scalar_fn(grid: &PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let a = Array2::from_shape_fn((n, n), |(k, j)| C64::from(f(grid.p(k), grid.q(j))));
        Self::scalar(grid, a).expect("shape from grid")
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn entry(&self, alpha: usize, beta: usize) -> &Array2<C64> {
        &self.entries[2 * alpha + beta]
    }

    pub fn entries(&self) -> &[Array2<C64>; 4] {
        &self.entries
    }

    pub fn at(&self, k: usize, j: usize) -> Mat2 {
        let e = &self.entries;
        Mat2::new(e[0][(k, j)], e[1][(k, j)], e[2][(k, j)], e[3][(k, j)])
    }

    pub fn map(&self, f: impl Fn(&Array2<C64>) -> Array2<C64>) -> Self {
        let e = &self.entries;
        Self { grid: self.grid.clone(), entries: [f(&e[0]), f(&e[1]), f(&e[2]), f(&e[3])] }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &MatrixSymbol, b: C64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        for (o, (x, y)) in out.entries.iter_mut().zip(self.entries.iter().zip(&other.entries)) {
            *o = x * a + y * b;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &MatrixSymbol) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// The scalar `a` of a charge-invariant symbol `a δ`; off-diagonal
    /// entries and the diagonal mismatch must be below `tol`.
    pub fn scalar_part(&self, tol: f64) -> Result<Array2<C64>> {
        let e = &self.entries;
        let off = max_abs(&e[1]).max(max_abs(&e[2]));
        if off > tol || max_abs_diff(&e[0], &e[3]) > tol {
            return Err(Error::NotChargeInvariant);
        }
        Ok(e[0].clone())
    }

    /// Pointwise matrix product `A(p,q) B(p,q)`.
    pub fn pointwise_product(&self, other: &MatrixSymbol) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = Self::zeros(&self.grid);
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Array2::zeros(self.entries[0].dim());
                for g in 0..2 {
                    acc = acc + &self.entries[2 * a + g] * &other.entries[2 * g + b];
                }
                out.entries[2 * a + b] = acc;
            }
        }
        Ok(out)
    }
}

/// 2×2 matrix of `(p1, p2)` kernels, same layout as [`MatrixSymbol`].
#[derive(Clone, Debug)]
pub struct OperatorKernel {
    grid: PhaseSpaceGrid,
    entries: [Array2<C64>; 4],
    representation: Representation,
}

impl OperatorKernel {
    pub fn from_entries(
        grid: &PhaseSpaceGrid,
        entries: [Array2<C64>; 4],
        representation: Representation,
    ) -> Result<Self> {
        for e in &entries {
            if e.dim() != (grid.n(), grid.n()) {
                return Err(Error::AxisMismatch {
                    expected: format!("({0}, {0})", grid.n()),
                    found: format!("{:?}", e.dim()),
                });
            }
        }
        Ok(Self { grid: grid.clone(), entries, representation })
    }

    /// Diagonal kernel `f(p)/dp`.
    pub fn diagonal(
        grid: &PhaseSpaceGrid,
        representation: Representation,
        f: impl Fn(f64) -> Mat2,
    ) -> Self {
        let n = grid.n();
        let mut entries: [Array2<C64>; 4] = std::array::from_fn(|_| Array2::zeros((n, n)));
        for k in 0..n {
            let v = f(grid.p(k)) / C64::from(grid.dp());
            for a in 0..2 {
                for b in 0..2 {
                    entries[2 * a + b][(k, k)] = v[(a, b)];
                }
            }
        }
        Self { grid: grid.clone(), entries, representation }
    }

    pub fn identity(grid: &PhaseSpaceGrid, representation: Representation) -> Self {
        Self::diagonal(grid, representation, |_| delta())
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn entry(&self, alpha: usize, beta: usize) -> &Array2<C64> {
        &self.entries[2 * alpha + beta]
    }

    pub fn entries(&self) -> &[Array2<C64>; 4] {
        &self.entries
    }

    pub fn at(&self, k1: usize, k2: usize) -> Mat2 {
        let e = &self.entries;
        Mat2::new(e[0][(k1, k2)], e[1][(k1, k2)], e[2][(k1, k2)], e[3][(k1, k2)])
    }

    fn check_compatible(&self, other: &OperatorKernel) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.representation != other.representation {
            return Err(Error::RepresentationMismatch {
                expected: self.representation.to_string(),
                found: other.representation.to_string(),
            });
        }
        Ok(())
    }

    /// Operator product `(self ∘ other)(p1,p2) = Σ_p self(p1,p) other(p,p2) dp`.
    pub fn compose(&self, other: &OperatorKernel) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.grid.n();
        let dp = C64::from(self.grid.dp());
        let mut entries: [Array2<C64>; 4] = std::array::from_fn(|_| Array2::zeros((n, n)));
        for a in 0..2 {
            for b in 0..2 {
                for g in 0..2 {
                    let (x, y) = (&self.entries[2 * a + g], &other.entries[2 * g + b]);
                    if is_zero(x) || is_zero(y) {
                        continue;
                    }
                    entries[2 * a + b] = &entries[2 * a + b] + &x.dot(y);
                }
                entries[2 * a + b].mapv_inplace(|z| z * dp);
            }
        }
        Ok(Self { grid: self.grid.clone(), entries, representation: self.representation })
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &OperatorKernel, b: C64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (o, (x, y)) in out.entries.iter_mut().zip(self.entries.iter().zip(&other.entries)) {
            *o = x * a + y * b;
        }
        Ok(out)
    }

    /// `(Kψ)(p1) = Σ_p2 K(p1,p2) ψ(p2) dp` on a two-component vector.
    pub fn apply(&self, psi: [&Array1<C64>; 2]) -> [Array1<C64>; 2] {
        let dp = C64::from(self.grid.dp());
        std::array::from_fn(|a| {
            (self.entries[2 * a].dot(psi[0]) + self.entries[2 * a + 1].dot(psi[1])) * dp
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OperatorKernel) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// `max |K_α^β(p1,p2) - conj K_β^α(p2,p1)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let x = &self.entries[2 * a + b];
                let y = &self.entries[2 * b + a];
                let r = Zip::from(x).and(&y.t()).fold(0.0f64, |m, u, v| m.max((u - v.conj()).norm()));
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Momentum-basis kernel of a matrix symbol (usual representation).
pub fn symbol_to_kernel(a: &MatrixSymbol) -> OperatorKernel {
    let g = &a.grid;
    let entries = std::array::from_fn(|i| {
        let e = &a.entries[i];
        if is_zero(e) { e.clone() } else { scalar_symbol_to_kernel(g, e) }
    });
    OperatorKernel { grid: g.clone(), entries, representation: Representation::Usual }
}

/// Symbol of a usual-representation kernel.
pub fn kernel_to_symbol(k: &OperatorKernel) -> Result<MatrixSymbol> {
    if k.representation != Representation::Usual {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Usual.to_string(),
            found: k.representation.to_string(),
        });
    }
    let g = &k.grid;
    let entries = std::array::from_fn(|i| {
        let e = &k.entries[i];
        if is_zero(e) { e.clone() } else { scalar_kernel_to_symbol(g, e) }
    });
    Ok(MatrixSymbol { grid: g.clone(), entries })
}

/// `A ⋆ B`, the symbol of the operator product.
pub fn star_product(a: &MatrixSymbol, b: &MatrixSymbol) -> Result<MatrixSymbol> {
    a.grid.ensure_same(&b.grid)?;
    kernel_to_symbol(&symbol_to_kernel(a).compose(&symbol_to_kernel(b))?)
}

/// `{A, B}_M = (A⋆B - B⋆A) / (iħ)`.
pub fn moyal_bracket(a: &MatrixSymbol, b: &MatrixSymbol) -> Result<MatrixSymbol> {
    a.grid.ensure_same(&b.grid)?;
    let (ka, kb) = (symbol_to_kernel(a), symbol_to_kernel(b));
    let comm = ka.compose(&kb)?.combine(C64::from(1.0), &kb.compose(&ka)?, C64::from(-1.0))?;
    let s = kernel_to_symbol(&comm)?;
    let f = C64::new(0.0, -1.0 / a.grid.hbar());
    Ok(s.map(|e| e * f))
}

/// Matrix-ordered Poisson bracket `∂_qA ∂_pB - ∂_pA ∂_qB` with spectral
/// derivatives.
pub fn poisson_bracket(a: &MatrixSymbol, b: &MatrixSymbol) -> Result<MatrixSymbol> {
    a.grid.ensure_same(&b.grid)?;
    let g = &a.grid;
    let dp = |s: &MatrixSymbol| s.map(|e| derivative_p_columns(g, e, 1));
    let dq = |s: &MatrixSymbol| s.map(|e| derivative_q_rows(g, e, 1));
    let first = dq(a).pointwise_product(&dp(b))?;
    let second = dp(a).pointwise_product(&dq(b))?;
    first.combine(C64::from(1.0), &second, C64::from(-1.0))
}

/// `[A, B]/(iħ) + ({A,B}_P - {B,A}_P)/2`, the leading terms of the Moyal
/// bracket as `ħ → 0` at fixed symbols.
pub fn classical_limit_bracket(a: &MatrixSymbol, b: &MatrixSymbol, hbar: f64) -> Result<MatrixSymbol> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("hbar must be > 0 (got {hbar})")));
    }
    let comm = a.pointwise_product(b)?.combine(C64::from(1.0), &b.pointwise_product(a)?, C64::from(-1.0))?;
    let pb = poisson_bracket(a, b)?.combine(C64::from(0.5), &poisson_bracket(b, a)?, C64::from(-0.5))?;
    comm.combine(C64::new(0.0, -1.0 / hbar), &pb, C64::from(1.0))
}

/// `H = (τ₃ + iτ₂)(p - eA(q))²/2m + τ₃mc² + eφ(q)δ`.
pub fn hamiltonian_symbol(
    grid: &PhaseSpaceGrid,
    phi: &Array1<f64>,
    a_vec: &Array1<f64>,
) -> Result<MatrixSymbol> {
    let n = grid.n();
    if phi.len() != n || a_vec.len() != n {
        return Err(Error::AxisMismatch {
            expected: format!("potentials of length {n}"),
            found: format!("{} and {}", phi.len(), a_vec.len()),
        });
    }
    let (m, c, e) = (grid.mass(), grid.c(), grid.e_charge());
    let nil = tau3_plus_i_tau2();
    let rest = tau3() * C64::from(m * c * c);
    let mut h = MatrixSymbol::zeros(grid);
    for k in 0..n {
        for j in 0..n {
            let kin = (grid.p(k) - e * a_vec[j]).powi(2) / (2.0 * m);
            let v = nil * C64::from(kin) + rest + delta() * C64::from(e * phi[j]);
            for a in 0..2 {
                for b in 0..2 {
                    h.entries[2 * a + b][(k, j)] = v[(a, b)];
                }
            }
        }
    }
    Ok(h)
}
