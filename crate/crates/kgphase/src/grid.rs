//! Momentum grid, its conjugate coordinate window, centered unitary DFTs and
//! quadrature.
//!
//! Nodes are placed symmetrically about zero:
//!
//! ```text
//! p_k = (k - n/2) dp      k = 0..n
//! q_j = (j - n/2) dq      j = 0..n
//! P_m = (m - n/2) dp      m = 0..n     (momentum offset p1 - p2)
//! ```
//!
//! with `dp = 2 p_max / n` and `dq = 2πħ / (n dp)`, so that
//! `P_m q_j / ħ = 2π (m - n/2)(j - n/2) / n` and the centered transforms below
//! are exactly unitary.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayD, IxDyn};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    n: usize,
    p_max: f64,
    hbar: f64,
    mass: f64,
    c: f64,
    e_charge: f64,
    dp: f64,
    dq: f64,
}

/// Build a grid; `e_charge` defaults to 1 (see [`PhaseSpaceGrid::with_charge`]).
pub fn make_grid(n: usize, p_max: f64, hbar: f64, mass: f64, c: f64) -> Result<PhaseSpaceGrid> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("n must be even and >= 8 (got {n})")));
    }
    for (name, v) in [("p_max", p_max), ("hbar", hbar), ("mass", mass), ("c", c)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidGrid(format!("{name} must be finite and > 0 (got {v})")));
        }
    }
    let dp = 2.0 * p_max / n as f64;
    let dq = 2.0 * std::f64::consts::PI * hbar / (n as f64 * dp);
    Ok(PhaseSpaceGrid { n, p_max, hbar, mass, c, e_charge: 1.0, dp, dq })
}

impl PhaseSpaceGrid {
    /// Grid in natural units, ħ = m = c = 1.
    pub fn natural(n: usize, p_max: f64) -> Result<Self> {
        make_grid(n, p_max, 1.0, 1.0, 1.0)
    }

    pub fn with_charge(mut self, e_charge: f64) -> Self {
        self.e_charge = e_charge;
        self
    }

    pub fn n(&self) -> usize { self.n }
    pub fn p_max(&self) -> f64 { self.p_max }
    pub fn hbar(&self) -> f64 { self.hbar }
    pub fn mass(&self) -> f64 { self.mass }
    pub fn c(&self) -> f64 { self.c }
    pub fn e_charge(&self) -> f64 { self.e_charge }
    pub fn dp(&self) -> f64 { self.dp }
    pub fn dq(&self) -> f64 { self.dq }

    /// Length of the periodic coordinate window, `n dq`.
    pub fn coordinate_window(&self) -> f64 {
        self.n as f64 * self.dq
    }

    fn centered(&self, i: usize) -> f64 {
        i as f64 - (self.n / 2) as f64
    }

    pub fn p(&self, k: usize) -> f64 {
        self.centered(k) * self.dp
    }

    pub fn q(&self, j: usize) -> f64 {
        self.centered(j) * self.dq
    }

    pub fn offset(&self, m: usize) -> f64 {
        self.centered(m) * self.dp
    }

    /// Momentum on the refined lattice of spacing `dp/2`, `r = 0..2n`.
    pub fn refined_p(&self, r: usize) -> f64 {
        (r as f64 * 0.5 - (self.n / 2) as f64) * self.dp
    }

    pub fn momenta(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |k| self.p(k))
    }

    pub fn coordinates(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |j| self.q(j))
    }

    pub fn offsets(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |m| self.offset(m))
    }

    pub(crate) fn dft(&self) -> CenteredDft {
        CenteredDft::new(self.n)
    }

    pub(crate) fn ensure_same(&self, other: &PhaseSpaceGrid) -> Result<()> {
        if self == other { Ok(()) } else { Err(Error::GridMismatch) }
    }
}

/// Sign of the exponent in a centered transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `F_m = n^{-1/2} Σ_j f_j exp(-i P_m q_j / ħ)`
    Minus,
    /// `F_j = n^{-1/2} Σ_m f_m exp(+i P_m q_j / ħ)`
    Plus,
}

/// Unitary DFT with both index ranges centered on `n/2`.
///
/// Evaluated with an ordinary FFT:
/// `exp(∓2πi(m-n/2)(j-n/2)/n) = (-1)^{m+j+n/2} exp(∓2πi m j/n)`.
#[derive(Clone)]
pub struct CenteredDft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CenteredDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Self { n, forward, inverse }
    }

    fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    fn run(&self, row: &mut [C64], sign: Sign, scratch: &mut [C64]) {
        debug_assert_eq!(row.len(), self.n);
        for x in row.iter_mut().skip(1).step_by(2) {
            *x = -*x;
        }
        match sign {
            Sign::Minus => self.forward.process_with_scratch(row, scratch),
            Sign::Plus => self.inverse.process_with_scratch(row, scratch),
        }
        let norm = 1.0 / (self.n as f64).sqrt();
        let base = if (self.n / 2) % 2 == 0 { norm } else { -norm };
        for (m, x) in row.iter_mut().enumerate() {
            *x *= if m % 2 == 0 { base } else { -base };
        }
    }

    pub fn process(&self, row: &mut [C64], sign: Sign) {
        let mut scratch = vec![C64::new(0.0, 0.0); self.scratch_len()];
        self.run(row, sign, &mut scratch);
    }

    /// Transform every row (last axis) of `a`, rows in parallel.
    pub fn process_rows(&self, a: &mut Array2<C64>, sign: Sign) {
        assert_eq!(a.ncols(), self.n);
        if !a.is_standard_layout() {
            *a = a.as_standard_layout().into_owned();
        }
        let len = self.scratch_len();
        a.as_slice_mut()
            .expect("standard layout")
            .par_chunks_mut(self.n)
            .for_each_init(
                || vec![C64::new(0.0, 0.0); len],
                |scratch, row| self.run(row, sign, scratch),
            );
    }

    /// Transform every column (first axis) of `a`.
    pub fn process_columns(&self, a: &mut Array2<C64>, sign: Sign) {
        assert_eq!(a.nrows(), self.n);
        let mut t = a.t().as_standard_layout().into_owned();
        self.process_rows(&mut t, sign);
        a.assign(&t.t());
    }
}

/// Phases `exp(-i s q_j / ħ)` that shift a momentum function by `s`.
fn shift_phases(grid: &PhaseSpaceGrid, s: f64) -> Vec<C64> {
    (0..grid.n())
        .map(|j| C64::from_polar(1.0, -s * grid.q(j) / grid.hbar()))
        .collect()
}

/// Band-limited value of `f(p + s)` on every node, from samples `f(p_k)`.
///
/// Exact for functions whose conjugate content lies inside the coordinate
/// window; unitary, so shifting by `-s` undoes it.
pub fn shift_momentum(grid: &PhaseSpaceGrid, f: &[C64], s: f64) -> Vec<C64> {
    let dft = grid.dft();
    let mut buf = f.to_vec();
    dft.process(&mut buf, Sign::Plus);
    for (x, ph) in buf.iter_mut().zip(shift_phases(grid, s)) {
        *x *= ph;
    }
    dft.process(&mut buf, Sign::Minus);
    buf
}

/// [`shift_momentum`] applied to every column of a `(p, ·)` array.
pub fn shift_momentum_columns(grid: &PhaseSpaceGrid, a: &Array2<C64>, s: f64) -> Array2<C64> {
    let dft = grid.dft();
    let phases = shift_phases(grid, s);
    let mut t = a.t().as_standard_layout().into_owned();
    dft.process_rows(&mut t, Sign::Plus);
    for mut row in t.rows_mut() {
        for (x, ph) in row.iter_mut().zip(&phases) {
            *x *= *ph;
        }
    }
    dft.process_rows(&mut t, Sign::Minus);
    t.t().as_standard_layout().into_owned()
}

/// Spectral `d^order f / dp^order` of a momentum function. The Nyquist
/// coordinate mode is dropped.
pub fn derivative_p(grid: &PhaseSpaceGrid, f: &[C64], order: u32) -> Vec<C64> {
    let dft = grid.dft();
    let mut buf = f.to_vec();
    dft.process(&mut buf, Sign::Plus);
    buf[0] = C64::new(0.0, 0.0);
    for (j, x) in buf.iter_mut().enumerate().skip(1) {
        *x *= C64::new(0.0, -grid.q(j) / grid.hbar()).powu(order);
    }
    dft.process(&mut buf, Sign::Minus);
    buf
}

/// Spectral derivative along the momentum axis (axis 0) of a `(p, q)` array.
pub fn derivative_p_columns(grid: &PhaseSpaceGrid, a: &Array2<C64>, order: u32) -> Array2<C64> {
    let dft = grid.dft();
    let mut t = a.t().as_standard_layout().into_owned();
    dft.process_rows(&mut t, Sign::Plus);
    for mut row in t.rows_mut() {
        row[0] = C64::new(0.0, 0.0);
        for j in 1..grid.n() {
            row[j] *= C64::new(0.0, -grid.q(j) / grid.hbar()).powu(order);
        }
    }
    dft.process_rows(&mut t, Sign::Minus);
    t.t().as_standard_layout().into_owned()
}

/// Spectral derivative along the coordinate axis (axis 1) of a `(p, q)` array.
pub fn derivative_q_rows(grid: &PhaseSpaceGrid, a: &Array2<C64>, order: u32) -> Array2<C64> {
    let dft = grid.dft();
    let mut t = a.as_standard_layout().into_owned();
    dft.process_rows(&mut t, Sign::Minus);
    for mut row in t.rows_mut() {
        row[0] = C64::new(0.0, 0.0);
        for m in 1..grid.n() {
            row[m] *= C64::new(0.0, grid.offset(m) / grid.hbar()).powu(order);
        }
    }
    dft.process_rows(&mut t, Sign::Plus);
    t
}

/// Which variable a field axis spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// `p` (or `p₁`, `p₂` for kernels), spacing `dp`
    Momentum,
    /// `q`, spacing `dq`
    Coordinate,
    /// `P = p₁ - p₂`, spacing `dp`
    Offset,
}

impl Axis {
    fn step(self, grid: &PhaseSpaceGrid) -> f64 {
        match self {
            Axis::Momentum | Axis::Offset => grid.dp(),
            Axis::Coordinate => grid.dq(),
        }
    }
}

/// Complex samples over one grid axis or a product of two.
#[derive(Clone, Debug)]
pub struct ComplexField {
    axes: Vec<Axis>,
    values: ArrayD<C64>,
}

impl ComplexField {
    pub fn new(grid: &PhaseSpaceGrid, axes: Vec<Axis>, values: ArrayD<C64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "a field spans one or two axes (got {})",
                axes.len()
            )));
        }
        let expected = vec![grid.n(); axes.len()];
        if values.shape() != expected.as_slice() {
            return Err(Error::AxisMismatch {
                expected: format!("{expected:?}"),
                found: format!("{:?}", values.shape()),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("field has non-finite entries".into()));
        }
        Ok(Self { axes, values })
    }

    pub fn from_array1(grid: &PhaseSpaceGrid, axis: Axis, values: Array1<C64>) -> Result<Self> {
        Self::new(grid, vec![axis], values.into_dyn())
    }

    pub fn from_array2(grid: &PhaseSpaceGrid, axes: [Axis; 2], values: Array2<C64>) -> Result<Self> {
        Self::new(grid, axes.to_vec(), values.into_dyn())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &ArrayD<C64> {
        &self.values
    }

    fn last_axis_as_2d(&self, want: Axis) -> Result<Array2<C64>> {
        let last = *self.axes.last().expect("at least one axis");
        if last != want {
            return Err(Error::AxisMismatch {
                expected: format!("{want:?} as last axis"),
                found: format!("{:?}", self.axes),
            });
        }
        let n = *self.values.shape().last().expect("non-empty shape");
        let rows = self.values.len() / n;
        Ok(self
            .values
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((rows, n))
            .expect("contiguous reshape"))
    }

    fn with_last_axis(&self, axis: Axis, a: Array2<C64>) -> Self {
        let mut axes = self.axes.clone();
        *axes.last_mut().expect("non-empty") = axis;
        let shape: Vec<usize> = self.values.shape().to_vec();
        let values = a.into_shape_with_order(IxDyn(&shape)).expect("same size");
        Self { axes, values }
    }
}

/// Unitary transform of the last axis from `q` to `P`, kernel `exp(-iPq/ħ)`.
#[allow(non_snake_case)]
pub fn transform_q_to_P(grid: &PhaseSpaceGrid, f: &ComplexField) -> Result<ComplexField> {
    let mut a = f.last_axis_as_2d(Axis::Coordinate)?;
    grid.dft().process_rows(&mut a, Sign::Minus);
    Ok(f.with_last_axis(Axis::Offset, a))
}

/// Inverse of [`transform_q_to_P`].
#[allow(non_snake_case)]
pub fn transform_P_to_q(grid: &PhaseSpaceGrid, f: &ComplexField) -> Result<ComplexField> {
    let mut a = f.last_axis_as_2d(Axis::Offset)?;
    grid.dft().process_rows(&mut a, Sign::Plus);
    Ok(f.with_last_axis(Axis::Coordinate, a))
}

/// Riemann sum of the field weighted by the cell volume of its axes.
pub fn quadrature(grid: &PhaseSpaceGrid, f: &ComplexField) -> C64 {
    let cell: f64 = f.axes.iter().map(|a| a.step(grid)).product();
    f.values.iter().sum::<C64>() * cell
}
