//! Scans 11-arm Fermat sieves for geometries whose observation-plane beam
//! shows three rings with charges -11, +44, -55 and 44/55 necklace peaks.
//!
//! Usage: compound_search N_LO N_HI R0_LO_UM R0_HI_UM R0_STEP_UM

use std::f64::consts::TAU;

use oam_sieve::diffraction::{effective_geometry, propagate_points, OpticalSetup};
use oam_sieve::field::{periodic_maxima, winding_of_loop};
use oam_sieve::mask::{fermat_motif, replicate, Handedness, PinholeMask};
use oam_sieve::Complex64;

const LAMBDA: f64 = 2.5e-12;
const FOCAL: f64 = 0.015;
const DEFOCUS: f64 = -74.6e-6;
const RADIUS: f64 = 300e-9;
const ARMS: u32 = 11;

fn circle(mask: &PinholeMask, setup: &OpticalSetup, r: f64, n: usize) -> Vec<Complex64> {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            (r * t.cos(), r * t.sin())
        })
        .collect();
    propagate_points(mask, setup, &pts).expect("valid geometry")
}

struct Ring {
    radius: f64,
    winding: Option<i64>,
    peaks: usize,
}

fn measure(mask: &PinholeMask, setup: &OpticalSetup, r: f64) -> Ring {
    let v = circle(mask, setup, r, 1024);
    let intensity: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    Ring {
        radius: r,
        winding: winding_of_loop(&v).ok().map(|w| w.winding),
        peaks: periodic_maxima(&intensity),
    }
}

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("number")).collect();
    let [n_lo, n_hi, r_lo, r_hi, r_step] = args[..] else {
        eprintln!("usage: compound_search N_LO N_HI R0_LO_UM R0_HI_UM R0_STEP_UM");
        std::process::exit(2);
    };
    let setup = OpticalSetup::lens(LAMBDA, FOCAL, DEFOCUS);
    let z = effective_geometry(&setup).expect("valid setup").z_eff;
    let want = [-11, 44, -55];
    for n in n_lo as usize..=n_hi as usize {
        let mut r0 = r_lo;
        while r0 <= r_hi + 1e-9 {
            for (ell, hand) in [(11, Handedness::Cw), (-11, Handedness::Ccw)] {
                let Ok(arm) = fermat_motif(n, r0 * 1e-6, ell, LAMBDA, z, RADIUS, hand) else { continue };
                let Ok(mask) = replicate(&arm, ARMS) else { continue };
                let step = 0.4e-9;
                let profile: Vec<f64> = (1..=150)
                    .map(|i| circle(&mask, &setup, step * i as f64, 128).iter().map(|c| c.norm_sqr()).sum::<f64>())
                    .collect();
                let mut maxima: Vec<(usize, f64)> = (1..profile.len() - 1)
                    .filter(|&i| profile[i] > profile[i - 1] && profile[i] > profile[i + 1])
                    .map(|i| (i, profile[i]))
                    .collect();
                maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
                maxima.truncate(3);
                maxima.sort_by_key(|m| m.0);
                let rings: Vec<Ring> = maxima.iter().map(|&(i, _)| measure(&mask, &setup, step * (i + 1) as f64)).collect();
                let windings: Vec<Option<i64>> = rings.iter().map(|r| r.winding).collect();
                let charges_ok = rings.len() == 3 && windings.iter().zip(want).all(|(w, c)| *w == Some(c));
                // Radii inside each outer ring's half-maximum band where both measurements match.
                let mut band_hits = Vec::new();
                if charges_ok {
                    for (k, target) in [(1usize, 44i64), (2, -55)] {
                        let (i, peak) = maxima[k];
                        let mut hits = Vec::new();
                        for d in -12i64..=12 {
                            let r = step * (i as f64 + 1.0 + d as f64 / 4.0);
                            let pi = ((r / step) as usize).saturating_sub(1).min(profile.len() - 1);
                            if profile[pi] < 0.5 * peak {
                                continue;
                            }
                            let m = measure(&mask, &setup, r);
                            if m.winding == Some(target) && m.peaks == target.unsigned_abs() as usize {
                                hits.push(r * 1e9);
                            }
                        }
                        band_hits.push(hits);
                    }
                }
                println!(
                    "N {n} r0 {r0:.2} ell {ell} | rings {} | peaks {} | charges_ok {charges_ok} | band {:?}",
                    rings.iter().map(|r| format!("{:.1}:{:?}", r.radius * 1e9, r.winding)).collect::<Vec<_>>().join(" "),
                    rings.iter().map(|r| r.peaks.to_string()).collect::<Vec<_>>().join("/"),
                    band_hits
                );
            }
            r0 += r_step;
        }
    }
}
