use commutator_lsd::identity::{closed_form_curve, support};
use commutator_lsd::kernels::KernelTag;
use commutator_lsd::measures::LsdCurve;
use commutator_lsd::simulate::{simulate, EigenPath, EnsembleConfig, EntryDist, EsdSample};
use commutator_lsd::stats::compare;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(c: f64) -> LsdCurve {
    let u = support(c).unwrap().upper;
    closed_form_curve(c, KernelTag::Skew, &LsdCurve::symmetric_grid(1.1 * u, 4001)).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

#[test]
fn iid_draws_from_the_curve_pass_ks() {
    let c1 = curve(1.0);
    let cdf = c1.cdf_view();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut passes = 0;
    for _ in 0..20 {
        let coords = (0..2000).map(|_| cdf.quantile(rng.random::<f64>())).collect();
        let sample = EsdSample::new(coords, 2000, KernelTag::Skew).unwrap();
        let r = compare(&sample, &c1, 40, None).unwrap();
        assert!(r.levy <= r.ks);
        if r.ks <= 1.36 / 2000f64.sqrt() {
            passes += 1;
        }
    }
    // About 95% expected; 16 of 20 is far in the tail of Binomial(20, 0.95).
    assert!(passes >= 16, "passes = {passes}");
}

#[test]
fn ks_shrinks_with_dimension() {
    let c1 = curve(1.0);
    let ks_at = |p: usize| {
        let ks = (0..10u64)
            .map(|seed| {
                let cfg = EnsembleConfig::new(p, p, EntryDist::Gaussian, KernelTag::Skew, 500 + seed);
                compare(&simulate(&cfg, EigenPath::Real).unwrap(), &c1, 40, None).unwrap().ks
            })
            .collect();
        median(ks)
    };
    let small = ks_at(500);
    let large = ks_at(2000);
    assert!(small > large, "median ks: p=500 {small}, p=2000 {large}");
}
