//! Two-component momentum-space wavefunctions.
//!
//! Coordinate amplitudes follow `φ(q) = (2πħ)^{-1/2} ∫ ψ(p) e^{ipq/ħ} dp`,
//! so `q̂ = iħ ∂_p` in the momentum representation.

use ndarray::Array1;

use crate::grid::{PhaseSpaceGrid, Sign};
use crate::kinematics::Kinematics;
use crate::{Error, Result, C64};

/// Largest amplitude tolerated on the boundary nodes of either window.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Fv,
    Usual,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::Fv => "fv",
            Representation::Usual => "usual",
        })
    }
}

/// Charge index: `Plus` is the particle component, `Minus` the antiparticle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Charge {
    Plus,
    Minus,
}

impl Charge {
    pub fn sign(self) -> f64 {
        match self {
            Charge::Plus => 1.0,
            Charge::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Charge::Plus => 0,
            Charge::Minus => 1,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Charge::Plus),
            -1 => Ok(Charge::Minus),
            _ => Err(Error::InvalidArgument(format!("charge must be +1 or -1 (got {s})"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FvState {
    grid: PhaseSpaceGrid,
    psi_plus: Array1<C64>,
    psi_minus: Array1<C64>,
    representation: Representation,
}

impl FvState {
    pub fn new(
        grid: &PhaseSpaceGrid,
        psi_plus: Array1<C64>,
        psi_minus: Array1<C64>,
        representation: Representation,
    ) -> Result<Self> {
        for (name, psi) in [("psi_plus", &psi_plus), ("psi_minus", &psi_minus)] {
            if psi.len() != grid.n() {
                return Err(Error::AxisMismatch {
                    expected: format!("{name} of length {}", grid.n()),
                    found: format!("length {}", psi.len()),
                });
            }
            if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { grid: grid.clone(), psi_plus, psi_minus, representation })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn psi_plus(&self) -> &Array1<C64> {
        &self.psi_plus
    }

    pub fn psi_minus(&self) -> &Array1<C64> {
        &self.psi_minus
    }

    pub fn component(&self, charge: Charge) -> &Array1<C64> {
        match charge {
            Charge::Plus => &self.psi_plus,
            Charge::Minus => &self.psi_minus,
        }
    }

    pub fn component_norm(&self, charge: Charge) -> f64 {
        self.component(charge).iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dp()
    }

    /// `⟨Ψ|τ₃|Ψ⟩ = Σ(|Ψ⁺|² - |Ψ⁻|²) dp`
    pub fn charge_norm(&self) -> f64 {
        self.component_norm(Charge::Plus) - self.component_norm(Charge::Minus)
    }

    /// `Σ(|Ψ⁺|² + |Ψ⁻|²) dp`
    pub fn pd_norm(&self) -> f64 {
        self.component_norm(Charge::Plus) + self.component_norm(Charge::Minus)
    }

    /// The populated charge, if exactly one component is nonzero.
    pub fn single_charge(&self) -> Option<Charge> {
        let plus = self.psi_plus.iter().any(|z| *z != C64::new(0.0, 0.0));
        let minus = self.psi_minus.iter().any(|z| *z != C64::new(0.0, 0.0));
        match (plus, minus) {
            (true, false) => Some(Charge::Plus),
            (false, true) => Some(Charge::Minus),
            _ => None,
        }
    }

    /// `φ(q_j)` for one component.
    pub fn coordinate_amplitude(&self, charge: Charge) -> Array1<C64> {
        let mut buf = self.component(charge).to_vec();
        self.grid.dft().process(&mut buf, Sign::Plus);
        let scale = (self.grid.dp() / self.grid.dq()).sqrt();
        Array1::from_iter(buf.into_iter().map(|z| z * scale))
    }

    /// Largest magnitude on the outermost nodes of the momentum and
    /// coordinate windows, over both components.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for charge in [Charge::Plus, Charge::Minus] {
            let psi = self.component(charge);
            let phi = self.coordinate_amplitude(charge);
            for v in [psi[0], psi[n - 1], phi[0], phi[n - 1]] {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn check_boundary_decay(&self) -> Result<()> {
        let b = self.boundary_amplitude();
        if b < BOUNDARY_TOL {
            Ok(())
        } else {
            Err(Error::BoundaryDecay(format!(
                "boundary amplitude {b:e} exceeds {BOUNDARY_TOL:e}"
            )))
        }
    }

    /// `a·A + b·B` on a shared grid and representation.
    pub fn combine(a: C64, sa: &FvState, b: C64, sb: &FvState) -> Result<FvState> {
        sa.grid.ensure_same(&sb.grid)?;
        if sa.representation != sb.representation {
            return Err(Error::RepresentationMismatch {
                expected: sa.representation.to_string(),
                found: sb.representation.to_string(),
            });
        }
        FvState::new(
            &sa.grid,
            &sa.psi_plus * a + &sb.psi_plus * b,
            &sa.psi_minus * a + &sb.psi_minus * b,
            sa.representation,
        )
    }

    /// Rescaled to unit positive-definite norm.
    pub fn normalized_pd(&self) -> FvState {
        let s = C64::from(1.0 / self.pd_norm().sqrt());
        FvState {
            psi_plus: &self.psi_plus * s,
            psi_minus: &self.psi_minus * s,
            ..self.clone()
        }
    }

    /// Values on the refined lattice `p = r dp/2 - p_max`, `r = 0..2n`; odd
    /// entries are band-limited interpolants.
    pub(crate) fn refined_component(&self, charge: Charge) -> Vec<C64> {
        let psi = self.component(charge);
        let half = crate::grid::shift_momentum(&self.grid, psi.as_slice().expect("contiguous"), 0.5 * self.grid.dp());
        let mut out = Vec::with_capacity(2 * psi.len());
        for (a, b) in psi.iter().zip(half) {
            out.push(*a);
            out.push(b);
        }
        out
    }
}

/// Gaussian momentum packet on one charge component:
/// `Ψ(p) = (2πσ²)^{-1/4} exp(-(p-p₀)²/(4σ²)) exp(-i q₀ p/ħ)`.
pub fn make_gaussian(
    grid: &PhaseSpaceGrid,
    sigma_p2: f64,
    charge: Charge,
    p_center: f64,
    q_center: f64,
) -> Result<FvState> {
    if !(sigma_p2.is_finite() && sigma_p2 > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma2 must be > 0 (got {sigma_p2})")));
    }
    if !p_center.is_finite() || !q_center.is_finite() {
        return Err(Error::InvalidArgument("packet center must be finite".into()));
    }
    let amp = (2.0 * std::f64::consts::PI * sigma_p2).powf(-0.25);
    let psi = Array1::from_shape_fn(grid.n(), |k| {
        let p = grid.p(k);
        let g = amp * (-(p - p_center).powi(2) / (4.0 * sigma_p2)).exp();
        C64::from_polar(g, -q_center * p / grid.hbar())
    });
    let zero = Array1::zeros(grid.n());
    let (plus, minus) = match charge {
        Charge::Plus => (psi, zero),
        Charge::Minus => (zero, psi),
    };
    let state = FvState::new(grid, plus, minus, Representation::Fv)?;
    state.check_boundary_decay().map_err(|e| match e {
        Error::BoundaryDecay(msg) => Error::BoundaryDecay(format!(
            "sigma2={sigma_p2} does not fit the grid windows: {msg}"
        )),
        other => other,
    })?;
    Ok(state)
}

fn apply_pointwise(state: &FvState, to: Representation, fv: bool) -> Result<FvState> {
    let from = match to {
        Representation::Fv => Representation::Usual,
        Representation::Usual => Representation::Fv,
    };
    if state.representation != from {
        return Err(Error::RepresentationMismatch {
            expected: from.to_string(),
            found: state.representation.to_string(),
        });
    }
    let kin = Kinematics::new(&state.grid);
    let n = state.grid.n();
    let mut plus = Array1::zeros(n);
    let mut minus = Array1::zeros(n);
    for k in 0..n {
        let p = state.grid.p(k);
        let u = if fv { kin.U_matrix(p) } else { kin.U_inverse(p) };
        let (a, b) = (state.psi_plus[k], state.psi_minus[k]);
        plus[k] = u[(0, 0)] * a + u[(0, 1)] * b;
        minus[k] = u[(1, 0)] * a + u[(1, 1)] * b;
    }
    FvState::new(&state.grid, plus, minus, to)
}

/// `Ψ_FV(p) = U(p) Ψ(p)`.
pub fn to_fv(state: &FvState) -> Result<FvState> {
    apply_pointwise(state, Representation::Fv, true)
}

/// `Ψ(p) = U⁻¹(p) Ψ_FV(p)`.
pub fn from_fv(state: &FvState) -> Result<FvState> {
    apply_pointwise(state, Representation::Usual, false)
}

/// Free propagation `Ψ^±(p) ↦ exp(∓iE(p)t/ħ) Ψ^±(p)`.
pub fn evolve_free(state: &FvState, t: f64) -> Result<FvState> {
    if state.representation != Representation::Fv {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Fv.to_string(),
            found: state.representation.to_string(),
        });
    }
    let grid = &state.grid;
    let energies = Kinematics::new(grid).energies().clone();
    let hbar = grid.hbar();
    let phase = |sign: f64| energies.mapv(|e| C64::from_polar(1.0, -sign * e * t / hbar));
    Ok(FvState {
        psi_plus: &state.psi_plus * &phase(1.0),
        psi_minus: &state.psi_minus * &phase(-1.0),
        ..state.clone()
    })
}
