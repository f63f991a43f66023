use std::f64::consts::TAU;

use oam_sieve::mask::{
    compound_mask, explicit_motif, fermat_motif, mirror_mask, replicate, same_centre_set, Handedness, Motif,
    PinholeMask,
};
use oam_sieve::Error;
use proptest::prelude::*;

const LAMBDA: f64 = 2.5e-12;
const Z: f64 = 6.696;
const RADIUS: f64 = 1e-7;

fn handedness() -> impl Strategy<Value = Handedness> {
    prop_oneof![Just(Handedness::Ccw), Just(Handedness::Cw)]
}

/// Fermat motifs that can be built and replicated without overlap.
fn fermat_case() -> impl Strategy<Value = (Motif, u32)> {
    (3usize..12, 5e-6..2e-5f64, 1i64..8, handedness(), 1u32..8).prop_filter_map(
        "motif overlaps or is infeasible",
        |(n, r0, ell, h, m)| {
            let motif = fermat_motif(n, r0, ell, LAMBDA, Z, RADIUS, h).ok()?;
            replicate(&motif, m).ok()?;
            Some((motif, m))
        },
    )
}

fn mirror_motif(m: &Motif) -> Motif {
    let mut out = m.clone();
    out.pinholes.iter_mut().for_each(|p| p.y = -p.y);
    out.spec = out.spec.mirrored();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn replicated_mask_is_rotation_invariant((motif, m) in fermat_case()) {
        let mask = replicate(&motif, m).unwrap();
        prop_assert_eq!(mask.len(), motif.pinholes.len() * m as usize);
        prop_assert_eq!(mask.symmetry_m, m);
        for k in 0..m {
            let angle = TAU * k as f64 / m as f64;
            prop_assert!(mask.is_invariant_under(angle, 1e-12), "not invariant under k = {}", k);
        }
    }

    #[test]
    fn mirroring_commutes_with_replication((motif, m) in fermat_case()) {
        let a = mirror_mask(&replicate(&motif, m).unwrap());
        let b = replicate(&mirror_motif(&motif), m).unwrap();
        prop_assert!(same_centre_set(&a.pinholes, &b.pinholes, 1e-12));
    }

    #[test]
    fn fermat_radii_increase(n in 2usize..40, r0 in 1e-6..3e-5f64, ell in -9i64..10, h in handedness()) {
        prop_assume!(ell != 0);
        // Positive ell·z: r² = r0² + nλz/ell grows with n.
        if ell > 0 {
            let motif = fermat_motif(n, r0, ell, LAMBDA, Z, 1e-9, h).unwrap();
            for w in motif.pinholes.windows(2) {
                prop_assert!(w[1].r() > w[0].r());
            }
        } else {
            match fermat_motif(n, r0, ell, LAMBDA, Z, 1e-9, h) {
                Ok(motif) => for w in motif.pinholes.windows(2) {
                    prop_assert!(w[1].r() < w[0].r());
                },
                Err(e) => prop_assert!(matches!(e, Error::NegativeRadicand { .. }), "{}", e),
            }
        }
    }

    #[test]
    fn compound_symmetry_divides_parts(m1 in 1u32..13, m2 in 1u32..13, m3 in 1u32..13) {
        let parts: Vec<PinholeMask> = [(m1, 1e-5), (m2, 2e-5), (m3, 3e-5)]
            .iter()
            .map(|&(m, r)| replicate(&explicit_motif(&[(r, 0.0)], RADIUS).unwrap(), m).unwrap())
            .collect();
        let c = compound_mask(&parts).unwrap();
        for p in &parts {
            prop_assert_eq!(p.symmetry_m % c.symmetry_m, 0);
        }
        prop_assert!(c.is_invariant_under(TAU / c.symmetry_m as f64, 1e-12));
    }
}

#[test]
fn compound_of_coprime_orders_has_no_symmetry() {
    let a = replicate(&explicit_motif(&[(1e-5, 0.0)], RADIUS).unwrap(), 4).unwrap();
    let b = replicate(&explicit_motif(&[(2e-5, 0.0)], RADIUS).unwrap(), 9).unwrap();
    assert_eq!(compound_mask(&[a, b]).unwrap().symmetry_m, 1);
}

#[test]
fn overlapping_replicas_are_rejected() {
    // Twelve copies of a point 1 μm from the axis are about 0.52 μm apart.
    let motif = explicit_motif(&[(1e-6, 0.0)], 3e-7).unwrap();
    assert!(matches!(replicate(&motif, 12), Err(Error::Overlap { .. })));
    assert!(replicate(&motif, 6).is_ok());
}
