//! Special functions used by the propagation kernels and the LG basis.

use std::f64::consts::{FRAC_PI_4, PI};

/// Bessel function of the first kind, order one.
///
/// Power series below |x| = 8, Miller's backward recurrence up to 60 and the
/// Hankel asymptotic expansion beyond. Absolute error is below 1e-13 over the
/// whole real line.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 8.0 {
        j1_series(ax)
    } else if ax < 60.0 {
        j1_miller(ax)
    } else {
        j1_asymptotic(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn j1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..60 {
        term *= -q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{n-1} = (2n/x) J_n - J_{n+1}` from far above the
/// turning point, normalised by `J_0 + 2 Σ J_{2k} = 1`.
fn j1_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let (mut next, mut cur) = (0.0, 1e-30);
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let prev = 2.0 * n as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{n-1}.
        if n - 1 == 1 {
            j1 = cur;
        }
        if (n - 1) % 2 == 0 && n > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    j1 / norm
}

fn j1_asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // k odd feeds Q, k even feeds P, with alternating signs in each.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if last < 1e-17 {
            break;
        }
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Airy-pattern amplitude factor `2 J1(x) / x`, equal to 1 at the origin.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 8.0 + x2 * x2 / 192.0
    } else {
        2.0 * bessel_j1(x) / x
    }
}

/// Fills `out[p] = L_p^alpha(x)` for `p = 0..out.len()` by the three-term
/// recurrence.
pub fn laguerre_all(alpha: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 1.0 + alpha - x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
    }
}

/// Generalised Laguerre polynomial `L_p^alpha(x)`.
pub fn laguerre(p: usize, alpha: f64, x: f64) -> f64 {
    let mut buf = vec![0.0; p + 1];
    laguerre_all(alpha, x, &mut buf);
    buf[p]
}

/// `ln(n!)`, i.e. `ln Γ(n + 1)` for integer arguments.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit mpmath evaluation.
    const J1_REF: &[(f64, f64)] = &[
        (0.5, 0.242_268_457_674_873_9),
        (1.0, 0.440_050_585_744_933_5),
        (3.831_705_970_207_512, 0.0),
        (5.0, -0.327_579_137_591_465_2),
        (7.9, 0.219_179_399_921_751_2),
        (8.1, 0.247_607_766_981_592_9),
        (12.0, -0.223_447_104_490_627_6),
        (30.0, -0.118_751_062_616_622_9),
        (100.0, -0.077_145_352_014_112_16),
    ];

    #[test]
    fn j1_matches_reference() {
        for &(x, want) in J1_REF {
            let got = bessel_j1(x);
            assert!((got - want).abs() < 1e-12, "J1({x}) = {got}, want {want}");
            assert!((bessel_j1(-x) + want).abs() < 1e-12);
        }
    }

    #[test]
    fn jinc_is_continuous_at_switch() {
        assert_eq!(jinc(0.0), 1.0);
        let a = jinc(0.999_999e-4);
        let b = jinc(1.000_001e-4);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn laguerre_low_orders() {
        // L_2^a(x) = ((x^2) - 2(a+2)x + (a+1)(a+2)) / 2
        for &(a, x) in &[(0.0, 0.3), (3.0, 1.7), (11.0, 20.0)] {
            let want = (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0)) / 2.0;
            assert!((laguerre(2, a, x) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
        assert_eq!(laguerre(0, 5.0, 2.0), 1.0);
    }

    #[test]
    fn ln_factorial_small() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        // 65! overflows nothing in log form
        assert!(ln_factorial(65).is_finite());
    }
}
