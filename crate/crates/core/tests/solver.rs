use commutator_lsd::identity;
use commutator_lsd::kernels::KernelTag;
use commutator_lsd::measures::{Atom, HalfPlanePoint, SpectralMeasure};
use commutator_lsd::solver::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn two_atoms(a: f64, b: f64) -> SpectralMeasure {
    SpectralMeasure::new(vec![Atom { location: a, weight: 0.5 }, Atom { location: b, weight: 0.5 }], 0.0).unwrap()
}

fn point_for(kernel: KernelTag, x: f64, dist: f64) -> HalfPlanePoint {
    HalfPlanePoint::near_axis(kernel, x, dist).unwrap()
}

/// `Re h` (skew) or `Im h` (Hermitian) rebuilt from the moments.
fn identity_gap(sol: &FixedPointSolution, c: f64, kernel: KernelTag) -> f64 {
    let z = sol.z.value();
    let k2 = kernel.modulus(c * sol.h).unwrap();
    match kernel {
        KernelTag::Skew => (sol.h.re - (-z.re * sol.i1 + c * sol.h.re * k2 * sol.i2)).abs(),
        KernelTag::Hermitian => (sol.h.im - (z.im * sol.i1 + c * sol.h.im * k2 * sol.i2)).abs(),
    }
}

#[test]
fn identity_covariance_matches_closed_form_transform() {
    let h = SpectralMeasure::point(1.0).unwrap();
    let cfg = FixedPointConfig::default();
    for c in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for (re, im) in [(-1.0, 0.0), (-0.3, 2.0), (-0.05, -1.0), (-2.0, 4.0)] {
            let z = HalfPlanePoint::left(re, im).unwrap();
            let sol = solve_h(z, c, &h, KernelTag::Skew, &cfg).unwrap();
            let exact = identity::stieltjes(z, c).unwrap();
            assert!((sol.h - exact).norm() < 1e-9, "c={c} z={}", z.value());
            assert!((sol.s - exact).norm() < 1e-9);
        }
    }
}

#[test]
fn curve_for_identity_matches_closed_form() {
    let h = SpectralMeasure::point(1.0).unwrap();
    let curve = lsd_curve(1.0, &h, KernelTag::Skew, &GridSpec::default(), &CurveConfig::default()).unwrap();
    let upper = identity::support(1.0).unwrap().upper;
    for (x, f) in curve.grid.iter().zip(&curve.density) {
        if x.abs() <= 0.95 * upper {
            assert!((f - identity::density(*x, 1.0).unwrap()).abs() < 1e-4, "x={x}");
        }
    }
    assert!(curve.normalization_error() < 1e-4);
    assert!(curve.point_mass_zero.abs() < 1e-6);
    assert!((curve.support.1 - upper).abs() < 0.05);
}

#[test]
fn atom_at_zero_above_threshold() {
    let h = SpectralMeasure::with_zero_mass(0.7, 1.0).unwrap();
    let curve = lsd_curve(4.0, &h, KernelTag::Skew, &GridSpec::default(), &CurveConfig::default()).unwrap();
    assert!((curve.point_mass_zero - 0.5).abs() < 1e-3);
    assert_eq!(curve.point_mass_analytic, Some(0.5));
    assert!(curve.normalization_error() < 1e-3);
}

#[test]
fn curves_are_symmetric_for_both_kernels() {
    let h = SpectralMeasure::parse("zero_mass 0.1\n0.5 0.4\n2 0.5\n").unwrap();
    for kernel in [KernelTag::Skew, KernelTag::Hermitian] {
        let grid = GridSpec { points: 401, half_width: None };
        let curve = lsd_curve(1.3, &h, kernel, &grid, &CurveConfig::default()).unwrap();
        assert!(curve.symmetry_error() <= 1e-10);
        for (x, mx) in curve.grid.iter().zip(curve.grid.iter().rev()) {
            assert_eq!(*x, -*mx);
        }
    }
}

#[test]
fn kernels_give_the_same_density() {
    let h = two_atoms(0.5, 2.0);
    let grid = GridSpec { points: 301, half_width: Some(8.0) };
    let a = lsd_curve(0.7, &h, KernelTag::Skew, &grid, &CurveConfig::default()).unwrap();
    let b = lsd_curve(0.7, &h, KernelTag::Hermitian, &grid, &CurveConfig::default()).unwrap();
    for (fa, fb) in a.density.iter().zip(&b.density) {
        assert!((fa - fb).abs() < 1e-8);
    }
}

#[test]
fn solver_failure_is_reported() {
    let h = SpectralMeasure::point(1.0).unwrap();
    let mut cfg = CurveConfig::default();
    cfg.solver.max_iter = 1;
    cfg.solver.newton_fallback = false;
    let grid = GridSpec { points: 5, half_width: Some(1.0) };
    match lsd_curve(1.0, &h, KernelTag::Skew, &grid, &cfg) {
        Err(commutator_lsd::LsdError::NoConvergence { .. }) | Err(commutator_lsd::LsdError::GridFailure { .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn numeric_mass_is_complete() {
    let h = SpectralMeasure::point(1.0).unwrap();
    let cfg = CurveConfig::default();
    let m = continuous_mass_numeric(2.0, &h, KernelTag::Skew, -12.0, 12.0, 0.0, &cfg).unwrap();
    assert!((m.value - 1.0).abs() < 1e-6);
}

#[test]
fn continuity_in_spectrum() {
    // Splitting δ₁ into two atoms at Lévy distance δ moves h by O(δ).
    let cfg = FixedPointConfig::default();
    let base = SpectralMeasure::point(1.0).unwrap();
    for (re, im) in [(-0.5, 1.0), (-0.1, 0.3), (-1.0, 3.0)] {
        let z = HalfPlanePoint::left(re, im).unwrap();
        let h0 = solve_h(z, 1.5, &base, KernelTag::Skew, &cfg).unwrap().h;
        for delta in [1e-3, 5e-4, 1e-4] {
            let h1 = solve_h(z, 1.5, &two_atoms(1.0 - delta, 1.0 + delta), KernelTag::Skew, &cfg).unwrap().h;
            assert!((h1 - h0).norm() <= 10.0 * delta, "z={re}+{im}i delta={delta}");
        }
        let shifted = SpectralMeasure::point(1.0 + 1e-3).unwrap();
        let h2 = solve_h(z, 1.5, &shifted, KernelTag::Skew, &cfg).unwrap().h;
        assert!((h2 - h0).norm() <= 1e-2);
    }
}

fn spectrum() -> impl Strategy<Value = SpectralMeasure> {
    (prop::collection::vec((0.05f64..5.0, 0.05f64..1.0), 1..5), 0.0f64..0.5).prop_map(|(atoms, zero)| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let atoms = atoms
            .into_iter()
            .map(|(l, w)| Atom { location: l, weight: w / total * (1.0 - zero) })
            .collect();
        SpectralMeasure::new(atoms, zero).unwrap()
    })
}

fn kernel() -> impl Strategy<Value = KernelTag> {
    prop_oneof![Just(KernelTag::Skew), Just(KernelTag::Hermitian)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solution_invariants(h in spectrum(), k in kernel(), c in 0.1f64..6.0, x in -8.0f64..8.0, d in 0.01f64..3.0) {
        let z = point_for(k, x, d);
        let sol = solve_h(z, c, &h, k, &FixedPointConfig::default()).unwrap();
        prop_assert!(k.in_value_half_plane(c * sol.h));
        prop_assert!(sol.residual <= 1e-12);
        prop_assert!(sol.gamma < 1.0, "gamma = {}", sol.gamma);
        prop_assert!(identity_gap(&sol, c, k) <= 1e-10);
        // Conjugate point gives the mirrored solution.
        let mirrored = solve_h(z.conj(), c, &h, k, &FixedPointConfig::default()).unwrap();
        let expected = match k { KernelTag::Skew => sol.h.conj(), KernelTag::Hermitian => -sol.h.conj() };
        prop_assert!((mirrored.h - expected).norm() <= 1e-10);
    }

    #[test]
    fn start_point_does_not_matter(h in spectrum(), k in kernel(), c in 0.2f64..4.0, x in -4.0f64..4.0, d in 0.1f64..2.0,
                                   starts in prop::collection::vec((0.01f64..5.0, -5.0f64..5.0), 20)) {
        let z = point_for(k, x, d);
        let cfg = FixedPointConfig::default();
        let reference = solve_h(z, c, &h, k, &cfg).unwrap().h;
        for (a, b) in starts {
            let h0 = match k { KernelTag::Skew => Complex64::new(a, b), KernelTag::Hermitian => Complex64::new(b, a) };
            let sol = solve_h(z, c, &h, k, &FixedPointConfig { initial_h: Some(h0), ..cfg }).unwrap();
            prop_assert!((sol.h - reference).norm() <= 10.0 * cfg.tol * reference.norm().max(1.0),
                "h0={h0} got {} want {reference}", sol.h);
        }
    }

    #[test]
    fn far_field_normalization(h in spectrum(), k in kernel(), c in 0.1f64..6.0) {
        let y = 1e4;
        let z = match k { KernelTag::Skew => HalfPlanePoint::left(-y, 0.0), KernelTag::Hermitian => HalfPlanePoint::upper(0.0, y) }.unwrap();
        let s = solve_h(z, c, &h, k, &FixedPointConfig::default()).unwrap().s;
        // s(z) ≈ −1/z far from the support.
        prop_assert!((s * z.value() + 1.0).norm() < 1e-3);
    }
}
