use kgphase::grid::{make_grid, PhaseSpaceGrid};
use kgphase::states::{make_gaussian, Charge, FvState};
use kgphase::stats::{
    average, coordinate_moment, dispersion_threshold, fig2_curve, overlap, purity_criterion_residual,
    purity_functional, second_moment_corrected, MomentRoute, Parity,
};
use kgphase::weyl::MatrixSymbol;
use kgphase::wigner::{fv_wigner_components, WignerComponents};
use kgphase::{Error, C64};
use std::f64::consts::PI;

/// Correction term `∫|Ψ|²(p/2E²)²dp` at `σ² = 1`, natural units, from
/// adaptive quadrature.
const CORRECTION_SIGMA1: f64 = 0.03891988560469963;
/// `Δp` where the corrected `Δx²` of the Gaussian crosses zero.
const DISPERSION_THRESHOLD: f64 = 2.76307;

fn default_grid() -> PhaseSpaceGrid {
    PhaseSpaceGrid::natural(1024, 16.0).unwrap()
}

fn route_states(g: &PhaseSpaceGrid) -> Vec<FvState> {
    vec![
        make_gaussian(g, 1.0, Charge::Plus, 0.0, 0.0).unwrap(),
        make_gaussian(g, 0.5, Charge::Plus, 1.0, 0.5).unwrap(),
        make_gaussian(g, 2.0, Charge::Plus, -0.5, -1.0).unwrap(),
        make_gaussian(g, 0.3, Charge::Minus, 0.2, 2.0).unwrap(),
        make_gaussian(g, 0.1, Charge::Plus, 2.0, 0.0).unwrap(),
    ]
}

#[test]
fn averages_of_simple_symbols() {
    let g = PhaseSpaceGrid::natural(256, 12.0).unwrap();
    let s = make_gaussian(&g, 0.6, Charge::Plus, 0.7, -1.2).unwrap();
    let w = fv_wigner_components(&s).unwrap();
    let one = average(&MatrixSymbol::scalar_fn(&g, |_, _| 1.0), &w).unwrap();
    let p = average(&MatrixSymbol::scalar_fn(&g, |p, _| p), &w).unwrap();
    assert!((one - 1.0).abs() < 1e-10);
    assert!((p - 0.7).abs() < 1e-10);
    // ⟨q⟩ through W equals the formula route
    let q = average(&MatrixSymbol::scalar_fn(&g, |_, q| q), &w).unwrap();
    let m = coordinate_moment(&s, 1).unwrap();
    assert!((q - m.formula).abs() < 1e-8, "{q} vs {}", m.formula);
}

#[test]
fn moment_routes_agree() {
    let g = default_grid();
    for s in route_states(&g) {
        for order in [1, 2] {
            let m = coordinate_moment(&s, order).unwrap();
            let scale = m.formula.abs().max(second_moment_corrected(&s).unwrap().0.powf(order as f64 / 2.0));
            assert!(m.discrepancy() <= 1e-6 * scale, "order {order}: {m:?}");
            assert_eq!(m.value(MomentRoute::Grid), m.grid);
        }
    }
}

#[test]
fn higher_moments_are_available() {
    let s = make_gaussian(&default_grid(), 1.0, Charge::Plus, 0.0, 0.5).unwrap();
    for order in [3, 4] {
        coordinate_moment(&s, order).unwrap();
    }
    assert!(matches!(coordinate_moment(&s, 5), Err(Error::InvalidArgument(_))));
}

#[test]
fn second_moment_of_a_wide_packet() {
    let s = make_gaussian(&default_grid(), 1.0, Charge::Plus, 0.0, 0.0).unwrap();
    let (usual, corr) = second_moment_corrected(&s).unwrap();
    assert!((usual - 0.25).abs() < 1e-10);
    assert!((corr - CORRECTION_SIGMA1).abs() < 1e-6, "{corr}");
    let m = coordinate_moment(&s, 2).unwrap();
    assert!((m.formula - (usual - corr)).abs() < 1e-10);
}

#[test]
fn second_moment_non_relativistic_limit() {
    let n = 512;
    let sigma2 = 1e-3;
    let sigma = f64::sqrt(sigma2);
    let g = make_grid(n, sigma * (PI * n as f64).sqrt(), 1.0, 1.0, 1.0).unwrap();
    let s = make_gaussian(&g, sigma2, Charge::Plus, 0.0, 0.0).unwrap();
    let q2 = coordinate_moment(&s, 2).unwrap().formula;
    let want = 1.0 / (4.0 * sigma2);
    assert!((q2 / want - 1.0).abs() < 1e-3);
}

#[test]
fn purity_of_pure_states_and_a_mixture() {
    let g = PhaseSpaceGrid::natural(256, 12.0).unwrap();
    let target = 1.0 / (2.0 * PI * g.hbar());
    let a = make_gaussian(&g, 0.5, Charge::Plus, 0.3, 0.4).unwrap();
    let b = make_gaussian(&g, 0.8, Charge::Minus, -0.2, -0.6).unwrap();
    let sup = FvState::combine(C64::from(0.6), &a, C64::new(0.3, 0.7), &b).unwrap().normalized_pd();
    for s in [&a, &b, &sup] {
        let p = purity_functional(&fv_wigner_components(s).unwrap()).unwrap();
        assert!((p - target).abs() < 1e-8, "{p} vs {target}");
    }
    let wa = fv_wigner_components(&a).unwrap();
    let wb = fv_wigner_components(&b).unwrap();
    let mix = WignerComponents::mix(&[(0.5, &wa), (0.5, &wb)]).unwrap();
    assert!((purity_functional(&mix).unwrap() - 0.5 * target).abs() < 1e-6);
    assert!(overlap(&wa, &wb).unwrap().abs() < 1e-12);
}

#[test]
fn overlap_of_displaced_gaussians() {
    let g = PhaseSpaceGrid::natural(256, 12.0).unwrap();
    let sigma2 = 0.7;
    let (pa, qa, pb, qb) = (0.4, -0.5, -0.3, 0.6);
    let wa = fv_wigner_components(&make_gaussian(&g, sigma2, Charge::Plus, pa, qa).unwrap()).unwrap();
    let wb = fv_wigner_components(&make_gaussian(&g, sigma2, Charge::Plus, pb, qb).unwrap()).unwrap();
    let ab = overlap(&wa, &wb).unwrap();
    let ba = overlap(&wb, &wa).unwrap();
    assert!((ab - ba).abs() < 1e-12);
    let h = g.hbar();
    let want = (-(pa - pb) * (pa - pb) / (4.0 * sigma2) - sigma2 * (qa - qb) * (qa - qb) / (h * h)).exp();
    assert!((ab - want).abs() < 1e-8, "{ab} vs {want}");
}

#[test]
fn purity_criterion_separates_pure_from_mixed() {
    let g = PhaseSpaceGrid::natural(256, 12.0).unwrap();
    let pure = fv_wigner_components(&make_gaussian(&g, 1.0, Charge::Plus, 0.0, 0.0).unwrap()).unwrap();
    let r_pure = purity_criterion_residual(&pure, Parity::Even).unwrap();
    assert!(r_pure.max_abs < 5e-3, "{}", r_pure.max_abs);
    assert!(r_pure.probed > 0);
    let a = fv_wigner_components(&make_gaussian(&g, 1.0, Charge::Plus, 1.5, 0.0).unwrap()).unwrap();
    let b = fv_wigner_components(&make_gaussian(&g, 1.0, Charge::Plus, -1.5, 0.0).unwrap()).unwrap();
    let mix = WignerComponents::mix(&[(0.5, &a), (0.5, &b)]).unwrap();
    let r_mix = purity_criterion_residual(&mix, Parity::Even).unwrap();
    assert!(r_mix.max_abs > 10.0 * r_pure.max_abs, "{} vs {}", r_mix.max_abs, r_pure.max_abs);
}

#[test]
fn odd_criterion_on_a_superposition() {
    let g = PhaseSpaceGrid::natural(256, 12.0).unwrap();
    let a = make_gaussian(&g, 1.0, Charge::Plus, 0.5, 0.0).unwrap();
    let b = make_gaussian(&g, 1.0, Charge::Minus, -0.5, 0.0).unwrap();
    let s = FvState::combine(C64::from(1.0), &a, C64::from(1.0), &b).unwrap().normalized_pd();
    let r = purity_criterion_residual(&fv_wigner_components(&s).unwrap(), Parity::Odd).unwrap();
    assert!(r.max_abs < 5e-3, "{}", r.max_abs);
    let single = fv_wigner_components(&a).unwrap();
    assert!(matches!(purity_criterion_residual(&single, Parity::Odd), Err(Error::EmptyRegion)));
}

fn fig2_sigmas(points: usize) -> Vec<f64> {
    let (lo, hi) = (0.01f64.ln(), 4.0f64.ln());
    (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp().powi(2)).collect()
}

#[test]
fn dispersion_curve() {
    let g = PhaseSpaceGrid::natural(4096, 64.0).unwrap();
    let curve = fig2_curve(&fig2_sigmas(60), &g);
    assert!(curve.rows.iter().all(|r| r.warning.is_none()));
    for r in &curve.rows {
        assert!(r.dx2_corrected < r.reference_dx2, "{r:?}");
        assert!((r.dx2_usual / r.reference_dx2 - 1.0).abs() < 1e-8, "{r:?}");
    }
    let first = &curve.rows[0];
    assert!((first.sigma_p - 0.01).abs() < 1e-12);
    assert!((first.dx2_corrected.sqrt() * first.sigma_p - 0.5).abs() < 1e-3);
    let changes = curve.rows.windows(2).filter(|w| (w[0].dx2_corrected > 0.0) != (w[1].dx2_corrected > 0.0)).count();
    assert_eq!(changes, 1);
    let t = curve.threshold.unwrap();
    assert!((t - DISPERSION_THRESHOLD).abs() < 1e-4, "{t}");
    assert!(dispersion_threshold(&g, 0.1, 0.2, 1e-6).is_err());
}
