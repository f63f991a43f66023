use std::f64::consts::TAU;

use oam_sieve::field::{field_power, phase_winding, rotate_field, superpose_rotations, ComplexField, GridSpec};
use oam_sieve::lg::{synthesize, CoeffTable, LgBasis};
use oam_sieve::Complex64;
use proptest::prelude::*;

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    (s / n as f64).sqrt()
}

fn rms_rel(a: &ComplexField, b: &ComplexField) -> f64 {
    rms(a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).norm())) / rms(b.samples.iter().map(|x| x.norm()))
}

/// Band-limited test field: a few low-order LG modes with seeded coefficients.
fn mixture(coeffs: &[(usize, i64, f64, f64)], n: usize) -> ComplexField {
    let basis = LgBasis::symmetric(1.0, 2, 4, 12.0).unwrap();
    let mut c = CoeffTable::zeros(basis);
    for &(p, l, re, im) in coeffs {
        c.set(p, l, Complex64::new(re, im)).unwrap();
    }
    synthesize(&c, &GridSpec::square(n, 12.0).unwrap()).unwrap()
}

fn mixture_strategy() -> impl Strategy<Value = Vec<(usize, i64, f64, f64)>> {
    prop::collection::vec((0usize..3, -4i64..5, -1.0..1.0f64, -1.0..1.0f64), 1..5)
        .prop_filter("zero field", |v| v.iter().any(|c| c.2.abs() + c.3.abs() > 0.1))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rotations_compose(c in mixture_strategy(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let f = mixture(&c, 257);
        let two = rotate_field(&rotate_field(&f, a).unwrap(), b).unwrap();
        let one = rotate_field(&f, a + b).unwrap();
        prop_assert!(rms_rel(&two, &one) < 2e-3, "{}", rms_rel(&two, &one));
    }

    #[test]
    fn rotation_never_creates_power(c in mixture_strategy(), a in -3.0..3.0f64) {
        let f = mixture(&c, 193);
        let p0 = field_power(&f);
        let p1 = field_power(&rotate_field(&f, a).unwrap());
        prop_assert!(p1 <= p0 * (1.0 + 1e-3));
        prop_assert!((p1 - p0).abs() < 1e-3 * p0);
    }

    #[test]
    fn superposition_has_m_fold_intensity(c in mixture_strategy(), m in 2u32..7) {
        let f = mixture(&c, 193);
        let g = superpose_rotations(&f, m).unwrap();
        let r = rotate_field(&g, TAU / m as f64).unwrap();
        let norm = rms(g.samples.iter().map(|s| s.norm()));
        // Mixtures with no ℓ ≡ 0 (mod m) content cancel down to interpolation noise.
        prop_assume!(norm > 0.05 * rms(f.samples.iter().map(|s| s.norm())));
        let d = rms(g.samples.iter().zip(&r.samples).map(|(x, y)| x.norm() - y.norm()));
        prop_assert!(d < 1e-3 * norm, "{} vs {}", d, norm);
    }

    #[test]
    fn conjugation_negates_winding(ell in -4i64..5, re in 0.2..1.0f64, im in -1.0..1.0f64) {
        let f = mixture(&[(0, ell, re, im)], 193);
        let r = 1.0 + 0.2 * ell.abs() as f64;
        let w = phase_winding(&f, r, 256).unwrap();
        let wc = phase_winding(&f.conjugate(), r, 256).unwrap();
        prop_assert_eq!(w.winding, ell);
        prop_assert_eq!(wc.winding, -w.winding);
        prop_assert_eq!(wc.residual, -w.residual);
    }
}

#[test]
fn quarter_turn_is_a_permutation() {
    let f = mixture(&[(1, 3, 0.4, -0.2), (0, -1, 0.1, 0.9)], 193);
    let r = rotate_field(&f, std::f64::consts::FRAC_PI_2).unwrap();
    let mut a: Vec<_> = f.samples.iter().map(|s| (s.re.to_bits(), s.im.to_bits())).collect();
    let mut b: Vec<_> = r.samples.iter().map(|s| (s.re.to_bits(), s.im.to_bits())).collect();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
    let back = rotate_field(&rotate_field(&r, std::f64::consts::PI).unwrap(), std::f64::consts::FRAC_PI_2).unwrap();
    assert_eq!(back, f);
}

#[test]
fn rotated_vortex_picks_up_its_phase() {
    let ell = 4;
    let delta = std::f64::consts::PI / 7.0;
    let f = mixture(&[(0, ell, 1.0, 0.0)], 513);
    let r = rotate_field(&f, delta).unwrap();
    let expected = f.scaled(Complex64::from_polar(1.0, ell as f64 * delta));
    assert!(rms_rel(&r, &expected) < 1e-3, "{}", rms_rel(&r, &expected));
}
