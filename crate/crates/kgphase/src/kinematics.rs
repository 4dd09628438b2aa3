//! Relativistic kinematic functions and the charge-space matrices.
//!
//! ```text
//! E(p)      = (m²c⁴ + c²p²)^{1/2}
//! ε(p1,p2)  = (E1 + E2) / (2 √(E1 E2))
//! χ(p1,p2)  = (E1 - E2) / (2 √(E1 E2))
//! R(p1,p2)  = ε δ + χ τ₁
//! G(p1,p,p2)= E(p)² / (2 √(E1 E2)) (τ₃ + iτ₂)
//! U(p)      = [(E + mc²) δ + (E - mc²) τ₁] / (2 √(mc² E))
//! ```

use nalgebra::Matrix2;
use ndarray::Array1;

use crate::grid::PhaseSpaceGrid;
use crate::C64;

pub type Mat2 = Matrix2<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn delta() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, ONE)
}

pub fn tau1() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn tau2() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn tau3() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `τ₃ + iτ₂ = [[1, 1], [-1, -1]]`, nilpotent.
pub fn tau3_plus_i_tau2() -> Mat2 {
    tau3() + tau2() * I
}

/// Energies on the momentum nodes plus the constants needed off-grid.
#[derive(Clone, Debug)]
pub struct Kinematics {
    mass: f64,
    c: f64,
    energies: Array1<f64>,
}

impl Kinematics {
    pub fn new(grid: &PhaseSpaceGrid) -> Self {
        let (mass, c) = (grid.mass(), grid.c());
        let energies = grid.momenta().mapv(|p| energy_with(mass, c, p));
        Self { mass, c, energies }
    }

    /// Energy table on the grid nodes.
    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }

    pub fn energy(&self, p: f64) -> f64 {
        energy_with(self.mass, self.c, p)
    }

    /// Group velocity `dE/dp = c²p/E`.
    pub fn velocity(&self, p: f64) -> f64 {
        self.c * self.c * p / self.energy(p)
    }

    /// `E(p1) - E(p2)` without cancellation.
    pub fn energy_difference(&self, p1: f64, p2: f64) -> f64 {
        let c2 = self.c * self.c;
        c2 * (p1 - p2) * (p1 + p2) / (self.energy(p1) + self.energy(p2))
    }

    pub fn epsilon_chi(&self, p1: f64, p2: f64) -> (f64, f64) {
        let (e1, e2) = (self.energy(p1), self.energy(p2));
        let d = 2.0 * (e1 * e2).sqrt();
        ((e1 + e2) / d, self.energy_difference(p1, p2) / d)
    }

    pub fn epsilon(&self, p1: f64, p2: f64) -> f64 {
        self.epsilon_chi(p1, p2).0
    }

    pub fn chi(&self, p1: f64, p2: f64) -> f64 {
        self.epsilon_chi(p1, p2).1
    }

    #[allow(non_snake_case)]
    pub fn R_matrix(&self, p1: f64, p2: f64) -> Mat2 {
        let (eps, chi) = self.epsilon_chi(p1, p2);
        delta() * C64::from(eps) + tau1() * C64::from(chi)
    }

    #[allow(non_snake_case)]
    pub fn G_fn(&self, p1: f64, p: f64, p2: f64) -> Mat2 {
        let e = self.energy(p);
        let s = e * e / (2.0 * (self.energy(p1) * self.energy(p2)).sqrt());
        tau3_plus_i_tau2() * C64::from(s)
    }

    fn u_coefficients(&self, p: f64) -> (f64, f64) {
        let mc2 = self.rest_energy();
        let e = self.energy(p);
        let d = 2.0 * (mc2 * e).sqrt();
        let below = self.c * self.c * p * p / (e + mc2);
        ((e + mc2) / d, below / d)
    }

    #[allow(non_snake_case)]
    pub fn U_matrix(&self, p: f64) -> Mat2 {
        let (a, b) = self.u_coefficients(p);
        delta() * C64::from(a) + tau1() * C64::from(b)
    }

    #[allow(non_snake_case)]
    pub fn U_inverse(&self, p: f64) -> Mat2 {
        let (a, b) = self.u_coefficients(p);
        delta() * C64::from(a) - tau1() * C64::from(b)
    }
}

fn energy_with(mass: f64, c: f64, p: f64) -> f64 {
    let mc2 = mass * c * c;
    (mc2 * mc2 + c * c * p * p).sqrt()
}
