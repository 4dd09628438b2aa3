use kgphase::grid::{derivative_p, make_grid, PhaseSpaceGrid};
use kgphase::kinematics::{delta, tau1, tau2, tau3, Mat2};
use kgphase::states::Representation;
use kgphase::weyl::*;
use kgphase::C64;
use ndarray::Array1;
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

fn small_grid() -> PhaseSpaceGrid {
    make_grid(128, 8.0, 1.0, 1.0, 1.0).unwrap()
}

fn gaussian(g: &PhaseSpaceGrid, p0: f64, s: f64) -> Array1<C64> {
    Array1::from_shape_fn(g.n(), |k| C64::from((-(g.p(k) - p0).powi(2) / (4.0 * s * s)).exp()))
}

fn max_dev(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Matrix symbol with Gaussian entries and fixed pseudo-random parameters.
fn random_symbol(g: &PhaseSpaceGrid, seed: u64) -> MatrixSymbol {
    let mut x = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    let params: Vec<[f64; 6]> = (0..4)
        .map(|_| [next() - 0.5, next() - 0.5, 0.8 + next(), 0.8 + next(), next() - 0.5, next() - 0.5])
        .collect();
    MatrixSymbol::from_fn(g, |p, q| {
        let e = |c: &[f64; 6]| {
            let v = (-(p - c[0]).powi(2) / (2.0 * c[2]) - (q - c[1]).powi(2) / (2.0 * c[3])).exp();
            C64::new(c[4], c[5]) * v
        };
        Mat2::new(e(&params[0]), e(&params[1]), e(&params[2]), e(&params[3]))
    })
}

#[test]
fn identity_and_momentum_symbols_give_diagonal_kernels() {
    let g = small_grid();
    let k = symbol_to_kernel(&MatrixSymbol::scalar_fn(&g, |_, _| 1.0));
    assert!(k.max_abs_diff(&OperatorKernel::identity(&g, Representation::Usual)) < 1e-12);
    let k = symbol_to_kernel(&MatrixSymbol::scalar_fn(&g, |p, _| p));
    let want = OperatorKernel::diagonal(&g, Representation::Usual, |p| delta() * C64::from(p));
    assert!(k.max_abs_diff(&want) < 1e-12);
    assert_eq!(k.entry(0, 1).iter().map(|z| z.norm()).sum::<f64>(), 0.0);
}

#[test]
fn position_symbol_acts_as_momentum_derivative() {
    let g = small_grid();
    let psi = gaussian(&g, 0.4, 0.5);
    let z = Array1::zeros(g.n());
    let out = symbol_to_kernel(&MatrixSymbol::scalar_fn(&g, |_, q| q)).apply([&psi, &z]);
    let d: Array1<C64> = derivative_p(&g, psi.as_slice().unwrap(), 1).into();
    assert!(max_dev(&out[0], &d.mapv(|x| x * I * g.hbar())) < 1e-8);
    assert!(out[1].iter().all(|x| x.norm() == 0.0));
}

#[test]
fn diagonal_kernel_maps_back_to_momentum_symbol() {
    let g = small_grid();
    let k = OperatorKernel::diagonal(&g, Representation::Usual, |p| tau1() * C64::from((-p * p).exp()));
    let s = kernel_to_symbol(&k).unwrap();
    let want = MatrixSymbol::from_fn(&g, |p, _| tau1() * C64::from((-p * p).exp()));
    assert!(s.max_abs_diff(&want) < 1e-12);
}

#[test]
fn fv_kernel_is_rejected_by_the_usual_inverse() {
    let g = small_grid();
    assert!(kernel_to_symbol(&OperatorKernel::identity(&g, Representation::Fv)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn symbol_kernel_round_trip(seed in any::<u64>()) {
        let g = small_grid();
        let a = random_symbol(&g, seed);
        let back = kernel_to_symbol(&symbol_to_kernel(&a)).unwrap();
        prop_assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn star_product_matches_composition(seed in any::<u64>()) {
        let g = small_grid();
        let (a, b) = (random_symbol(&g, seed), random_symbol(&g, seed.wrapping_add(1)));
        let lhs = symbol_to_kernel(&star_product(&a, &b).unwrap());
        let rhs = symbol_to_kernel(&a).compose(&symbol_to_kernel(&b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn star_product_is_associative(seed in any::<u64>()) {
        let g = small_grid();
        let (a, b, c) = (random_symbol(&g, seed), random_symbol(&g, seed ^ 5), random_symbol(&g, seed ^ 9));
        let l = star_product(&star_product(&a, &b).unwrap(), &c).unwrap();
        let r = star_product(&a, &star_product(&b, &c).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-8);
    }

    #[test]
    fn moyal_bracket_antisymmetry_and_jacobi(seed in any::<u64>()) {
        let g = small_grid();
        let (a, b, c) = (random_symbol(&g, seed), random_symbol(&g, seed ^ 3), random_symbol(&g, seed ^ 6));
        let ab = moyal_bracket(&a, &b).unwrap();
        let ba = moyal_bracket(&b, &a).unwrap();
        prop_assert_eq!(ab.combine(C64::from(1.0), &ba, C64::from(1.0)).unwrap().max_abs(), 0.0);
        prop_assert_eq!(moyal_bracket(&a, &a).unwrap().max_abs(), 0.0);
        let j = |x: &MatrixSymbol, y: &MatrixSymbol, z: &MatrixSymbol| {
            moyal_bracket(x, &moyal_bracket(y, z).unwrap()).unwrap()
        };
        let sum = j(&a, &b, &c)
            .combine(C64::from(1.0), &j(&b, &c, &a), C64::from(1.0)).unwrap()
            .combine(C64::from(1.0), &j(&c, &a, &b), C64::from(1.0)).unwrap();
        prop_assert!(sum.max_abs() < 1e-8);
    }
}

#[test]
fn identity_is_the_star_unit() {
    let g = small_grid();
    let b = random_symbol(&g, 42);
    let one = MatrixSymbol::scalar_fn(&g, |_, _| 1.0);
    assert!(star_product(&one, &b).unwrap().max_abs_diff(&b) < 1e-12);
    assert!(star_product(&b, &one).unwrap().max_abs_diff(&b) < 1e-12);
}

/// Linear symbols are not periodic on the grid, so they are compared through
/// their action on states localized well inside both windows.
#[test]
fn momentum_star_position_is_the_ordered_product() {
    let g = small_grid();
    let h = g.hbar();
    let p = MatrixSymbol::scalar_fn(&g, |p, _| p);
    let q = MatrixSymbol::scalar_fn(&g, |_, q| q);
    let psi = gaussian(&g, 0.3, 0.5);
    let z = Array1::zeros(g.n());
    let d: Array1<C64> = derivative_p(&g, psi.as_slice().unwrap(), 1).into();
    // Weyl(pq - iħ/2) = p̂q̂ = p·iħ∂_p
    let want = Array1::from_shape_fn(g.n(), |k| I * h * g.p(k) * d[k]);
    let out = symbol_to_kernel(&star_product(&p, &q).unwrap()).apply([&psi, &z]);
    assert!(max_dev(&out[0], &want) < 1e-8);

    let bracket = moyal_bracket(&p, &q).unwrap();
    let out = symbol_to_kernel(&bracket).apply([&psi, &z]);
    assert!(max_dev(&out[0], &psi.mapv(|x| -x)) < 1e-12);
}

fn f_sym(p: f64, q: f64) -> f64 {
    (-(p - 0.3).powi(2) / 2.0 - (q + 0.2).powi(2) / 2.0).exp()
}

fn g_sym(p: f64, q: f64) -> f64 {
    (-(p + 0.2).powi(2) / 1.5 - (q - 0.4).powi(2)).exp()
}

fn scaling_grid(hbar: f64) -> PhaseSpaceGrid {
    make_grid(256, 8.0, hbar, 1.0, 1.0).unwrap()
}

#[test]
fn scalar_moyal_minus_poisson_is_second_order() {
    let r: Vec<f64> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&h| {
            let g = scaling_grid(h);
            let (a, b) = (MatrixSymbol::scalar_fn(&g, f_sym), MatrixSymbol::scalar_fn(&g, g_sym));
            moyal_bracket(&a, &b).unwrap().max_abs_diff(&poisson_bracket(&a, &b).unwrap())
        })
        .collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }
}

#[test]
fn commuting_matrices_reduce_to_the_poisson_bracket() {
    let g = scaling_grid(0.2);
    let a = MatrixSymbol::from_fn(&g, |p, q| tau3() * C64::from(f_sym(p, q)));
    let b = MatrixSymbol::from_fn(&g, |p, q| delta() * C64::from(g_sym(p, q)));
    let cl = classical_limit_bracket(&a, &b, g.hbar()).unwrap();
    assert!(cl.max_abs_diff(&poisson_bracket(&a, &b).unwrap()) < 1e-12);
}

#[test]
fn noncommuting_parts_make_the_bracket_diverge() {
    let norms: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let g = make_grid(512, 8.0, h, 1.0, 1.0).unwrap();
            let a = MatrixSymbol::from_fn(&g, |p, q| tau1() * C64::from(f_sym(p, q)));
            let b = MatrixSymbol::from_fn(&g, |p, q| tau3() * C64::from(g_sym(p, q)));
            moyal_bracket(&a, &b).unwrap().max_abs()
        })
        .collect();
    for w in norms.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }
}

#[test]
fn order_hbar_commutator_has_a_classical_limit() {
    let d: Vec<f64> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&h| {
            let g = scaling_grid(h);
            let a = MatrixSymbol::from_fn(&g, |p, q| {
                delta() * C64::from(f_sym(p, q)) + tau3() * C64::from(h * g_sym(p, q))
            });
            let b = MatrixSymbol::from_fn(&g, |p, q| {
                tau2() * C64::from(g_sym(p, q)) + delta() * C64::from(f_sym(p, q) * p)
            });
            moyal_bracket(&a, &b).unwrap().max_abs_diff(&classical_limit_bracket(&a, &b, h).unwrap())
        })
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2]);
    assert!(d[1] / d[2] > 1.5);
}

#[test]
fn free_hamiltonian_symbol() {
    let g = small_grid();
    let zero = Array1::zeros(g.n());
    let h = hamiltonian_symbol(&g, &zero, &zero).unwrap();
    let k0 = g.n() / 2;
    assert_eq!(h.at(k0, 7), tau3());
    let k = k0 + 10;
    let p = g.p(k);
    assert!((h.entry(0, 0)[(k, 3)] - C64::from(p * p / 2.0 + 1.0)).norm() < 1e-14);
}

#[test]
fn hamiltonian_is_pseudo_hermitian() {
    let g = small_grid();
    let phi = g.coordinates().mapv(|q| 0.3 * (-q * q / 4.0).exp());
    let a = g.coordinates().mapv(|q| 0.1 * (-q * q / 9.0).exp());
    let h = hamiltonian_symbol(&g.clone().with_charge(-1.0), &phi, &a).unwrap();
    let mut worst: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for k in (0..g.n()).step_by(7) {
        for j in (0..g.n()).step_by(5) {
            let m = h.at(k, j);
            worst = worst.max((tau3() * m.adjoint() * tau3() - m).norm());
            skew = skew.max((m.adjoint() - m).norm());
        }
    }
    assert_eq!(worst, 0.0);
    assert!(skew > 0.1);
}

/// `Σ_{k<3} (-1)^k (ħ/2)^{2k} / (2k+1)! · A Λ^{2k+1} B` with
/// `AΛB = ∂_qA ∂_pB - ∂_pA ∂_qB`.
fn sine_series(g: &PhaseSpaceGrid, a: &MatrixSymbol, b: &MatrixSymbol) -> ndarray::Array2<C64> {
    use kgphase::grid::{derivative_p_columns, derivative_q_rows};
    let d = |x: &ndarray::Array2<C64>, np: u32, nq: u32| {
        let y = if np > 0 { derivative_p_columns(g, x, np) } else { x.clone() };
        if nq > 0 { derivative_q_rows(g, &y, nq) } else { y }
    };
    let (a, b) = (a.entry(0, 0), b.entry(0, 0));
    let binom = |n: u32, j: u32| (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let mut out = ndarray::Array2::<C64>::zeros(a.dim());
    let mut fact = 1.0;
    for k in 0..3u32 {
        let n = 2 * k + 1;
        if k > 0 {
            fact *= ((2 * k) * (2 * k + 1)) as f64;
        }
        let coef = (-1f64).powi(k as i32) * (g.hbar() / 2.0).powi(2 * k as i32) / fact;
        for j in 0..=n {
            let s = binom(n, j) * (-1f64).powi(j as i32) * coef;
            out = out + &(d(a, j, n - j) * &d(b, n - j, j)).mapv(|z| z * s);
        }
    }
    out
}

#[test]
fn scalar_moyal_bracket_follows_the_sine_series() {
    let r: Vec<f64> = [0.4, 0.2]
        .iter()
        .map(|&h| {
            let g = make_grid(256, 8.0, h, 1.0, 1.0).unwrap();
            let (a, b) = (MatrixSymbol::scalar_fn(&g, f_sym), MatrixSymbol::scalar_fn(&g, g_sym));
            let m = moyal_bracket(&a, &b).unwrap();
            let s = sine_series(&g, &a, &b);
            m.entry(0, 0).iter().zip(&s).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        })
        .collect();
    let order = (r[0] / r[1]).log2();
    assert!(order > 5.5, "observed order {order}");
}
