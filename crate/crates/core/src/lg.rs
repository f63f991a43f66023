//! Laguerre-Gaussian basis, modal decomposition and OAM spectra.
//!
//! Modes are evaluated in the waist plane and normalised so that
//! `∬|φ_{p,ℓ}|² dA = 1`. Overlap integrals use midpoint Riemann sums on the
//! Cartesian grid, restricted to a square window centred on the axis.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};
use crate::par;
use crate::special::{laguerre_all, ln_factorial};

/// Log of the normalisation constant `sqrt(2 p! / (π (p+|ℓ|)!)) / w0`.
fn ln_norm(p: usize, abs_ell: usize, w0: f64) -> f64 {
    0.5 * (2.0f64.ln() + ln_factorial(p) - PI.ln() - ln_factorial(p + abs_ell)) - w0.ln()
}

/// Radial amplitudes `A_{p,|ℓ|}(ρ)` for all `p = 0..out.len()` at one radius.
///
/// `ln_norms[p]` must hold [`ln_norm`] for the same `|ℓ|` and `w0`; `lag` is
/// scratch space of the same length as `out`.
fn radial_amplitudes(rho: f64, abs_ell: usize, w0: f64, ln_norms: &[f64], lag: &mut [f64], out: &mut [f64]) {
    let s = rho / w0;
    let x = 2.0 * s * s;
    if abs_ell > 0 && rho == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    laguerre_all(abs_ell as f64, x, lag);
    let ln_pow = if abs_ell == 0 {
        0.0
    } else {
        abs_ell as f64 * (std::f64::consts::SQRT_2 * s).ln()
    };
    for ((o, l), n) in out.iter_mut().zip(lag.iter()).zip(ln_norms) {
        *o = (n + ln_pow - s * s).exp() * l;
    }
}

/// Waist-plane Laguerre-Gaussian mode `φ_{p,ℓ}` at the physical point `(x, y)`
/// relative to the beam axis.
pub fn lg_eval(p: usize, ell: i64, w0: f64, x: f64, y: f64) -> Complex64 {
    let abs_ell = ell.unsigned_abs() as usize;
    let ln_norms: Vec<f64> = (0..=p).map(|q| ln_norm(q, abs_ell, w0)).collect();
    let mut lag = vec![0.0; p + 1];
    let mut amp = vec![0.0; p + 1];
    radial_amplitudes(x.hypot(y), abs_ell, w0, &ln_norms, &mut lag, &mut amp);
    Complex64::from_polar(amp[p], ell as f64 * y.atan2(x))
}

/// Truncated LG basis over a square window centred on the grid origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgBasis {
    pub w0: f64,
    pub p_max: usize,
    pub ell_min: i64,
    pub ell_max: i64,
    /// Side length of the square expansion window (m).
    pub window: f64,
}

impl LgBasis {
    pub fn new(w0: f64, p_max: usize, ell_min: i64, ell_max: i64, window: f64) -> Result<Self> {
        let b = LgBasis {
            w0,
            p_max,
            ell_min,
            ell_max,
            window,
        };
        b.validate()?;
        Ok(b)
    }

    /// Symmetric range `|ℓ| ≤ ell_abs_max`.
    pub fn symmetric(w0: f64, p_max: usize, ell_abs_max: i64, window: f64) -> Result<Self> {
        Self::new(w0, p_max, -ell_abs_max, ell_abs_max, window)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(Error::InvalidArgument(format!("basis waist {} must be positive", self.w0)));
        }
        if self.ell_min > self.ell_max {
            return Err(Error::InvalidArgument(format!(
                "ell_min {} exceeds ell_max {}",
                self.ell_min, self.ell_max
            )));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::InvalidArgument(format!("window {} must be positive", self.window)));
        }
        Ok(())
    }

    /// False when the window is narrower than four waists, where truncation
    /// visibly breaks orthonormality.
    pub fn window_is_adequate(&self) -> bool {
        self.window >= 4.0 * self.w0
    }

    pub fn n_ell(&self) -> usize {
        (self.ell_max - self.ell_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        (self.p_max + 1) * self.n_ell()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, p: usize, ell: i64) -> Option<usize> {
        if p > self.p_max || ell < self.ell_min || ell > self.ell_max {
            None
        } else {
            Some(p * self.n_ell() + (ell - self.ell_min) as usize)
        }
    }

    /// All `(p, ℓ)` pairs in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        (0..=self.p_max).flat_map(move |p| (self.ell_min..=self.ell_max).map(move |l| (p, l)))
    }

    fn abs_ells(&self) -> Vec<usize> {
        let lo = if self.ell_min <= 0 && self.ell_max >= 0 {
            0
        } else {
            self.ell_min.unsigned_abs().min(self.ell_max.unsigned_abs()) as usize
        };
        let hi = self.ell_min.unsigned_abs().max(self.ell_max.unsigned_abs()) as usize;
        (lo..=hi)
            .filter(|&a| {
                let a = a as i64;
                (self.ell_min..=self.ell_max).contains(&a) || (self.ell_min..=self.ell_max).contains(&-a)
            })
            .collect()
    }
}

/// LG expansion coefficients `c_{p,ℓ}` for every mode of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub basis: LgBasis,
    entries: Vec<Complex64>,
}

impl CoeffTable {
    pub fn zeros(basis: LgBasis) -> Self {
        CoeffTable {
            entries: vec![Complex64::new(0.0, 0.0); basis.len()],
            basis,
        }
    }

    pub fn get(&self, p: usize, ell: i64) -> Complex64 {
        self.basis
            .index(p, ell)
            .map(|k| self.entries[k])
            .unwrap_or_default()
    }

    pub fn set(&mut self, p: usize, ell: i64, c: Complex64) -> Result<()> {
        let k = self
            .basis
            .index(p, ell)
            .ok_or_else(|| Error::InvalidArgument(format!("mode ({p}, {ell}) is outside the basis")))?;
        self.entries[k] = c;
        Ok(())
    }

    /// `(p, ℓ, c)` triples in storage order (p outer, ℓ ascending).
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        self.basis.modes().zip(&self.entries).map(|((p, l), c)| (p, l, *c))
    }

    /// Copy with every azimuthal index other than `ell` zeroed.
    pub fn only_ell(&self, ell: i64) -> CoeffTable {
        let mut out = self.clone();
        for ((_, l), e) in self.basis.modes().zip(out.entries.iter_mut()) {
            if l != ell {
                *e = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn total_power(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference `|a - b|` between two tables on the same basis.
    pub fn max_abs_diff(&self, other: &CoeffTable) -> f64 {
        assert_eq!(self.basis, other.basis, "tables on different bases");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_resolution(grid: &GridSpec, w0: f64) -> Result<()> {
    let limit = w0 / 16.0;
    if grid.pitch_x > limit * (1.0 + 1e-12) || grid.pitch_y > limit * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!(
            "grid pitch ({:.3e}, {:.3e}) m exceeds w0/16 = {limit:.3e} m",
            grid.pitch_x, grid.pitch_y
        )));
    }
    Ok(())
}

/// Samples of `f` that fall inside the expansion window, as
/// `(ρ, θ, value)` with coordinates relative to the grid origin.
fn window_samples(f: &ComplexField, window: f64) -> Result<Vec<(f64, f64, Complex64)>> {
    let g = &f.grid;
    let half = 0.5 * window;
    let ((x0, x1), (y0, y1)) = g.sample_bounds();
    let (ox, oy) = g.origin;
    let slack_x = 0.5 * g.pitch_x * (1.0 + 1e-9);
    let slack_y = 0.5 * g.pitch_y * (1.0 + 1e-9);
    if ox - half < x0 - slack_x || ox + half > x1 + slack_x || oy - half < y0 - slack_y || oy + half > y1 + slack_y {
        return Err(Error::Window(format!(
            "window of side {window:.3e} m exceeds the sampled grid extent"
        )));
    }
    let tol = 1e-9 * window;
    let mut out = Vec::new();
    for j in 0..g.ny {
        let dy = g.y(j) - oy;
        if dy.abs() > half + tol {
            continue;
        }
        for i in 0..g.nx {
            let dx = g.x(i) - ox;
            if dx.abs() > half + tol {
                continue;
            }
            out.push((dx.hypot(dy), dy.atan2(dx), f.at(i, j)));
        }
    }
    Ok(out)
}

/// Overlap integrals `c_{p,ℓ} = Σ f · conj(φ_{p,ℓ}) · dA` over the window.
///
/// Work is split by `|ℓ|`; each task sums its in-window samples in a fixed
/// order, so coefficients do not depend on the thread count.
pub fn decompose(f: &ComplexField, basis: &LgBasis) -> Result<CoeffTable> {
    basis.validate()?;
    check_resolution(&f.grid, basis.w0)?;
    let samples = window_samples(f, basis.window)?;
    let area = f.grid.pixel_area();
    let abs_ells = basis.abs_ells();
    let np = basis.p_max + 1;

    // Per |ℓ|: coefficient sums for +|ℓ| and -|ℓ| for each p.
    let sums = par::map_range(abs_ells.len(), |k| {
        let a = abs_ells[k];
        let ln_norms: Vec<f64> = (0..np).map(|p| ln_norm(p, a, basis.w0)).collect();
        let mut lag = vec![0.0; np];
        let mut amp = vec![0.0; np];
        let mut pos = vec![Complex64::new(0.0, 0.0); np];
        let mut neg = vec![Complex64::new(0.0, 0.0); np];
        for &(rho, theta, v) in &samples {
            radial_amplitudes(rho, a, basis.w0, &ln_norms, &mut lag, &mut amp);
            // conj(exp(iℓθ)) for ℓ = ±|ℓ|
            let e = Complex64::from_polar(1.0, -(a as f64) * theta);
            let vp = v * e;
            let vn = v * e.conj();
            for p in 0..np {
                pos[p] += vp * amp[p];
                neg[p] += vn * amp[p];
            }
        }
        (pos, neg)
    });

    let mut table = CoeffTable::zeros(*basis);
    for (k, (pos, neg)) in sums.into_iter().enumerate() {
        let a = abs_ells[k] as i64;
        for p in 0..np {
            if let Some(idx) = basis.index(p, a) {
                table.entries[idx] = pos[p] * area;
            }
            if a != 0 {
                if let Some(idx) = basis.index(p, -a) {
                    table.entries[idx] = neg[p] * area;
                }
            }
        }
    }
    Ok(table)
}

/// Pointwise modal sum `Σ c_{p,ℓ} φ_{p,ℓ}` on a grid (basis centred on the grid origin).
pub fn synthesize(c: &CoeffTable, grid: &GridSpec) -> Result<ComplexField> {
    let basis = c.basis;
    basis.validate()?;
    grid.validate()?;
    check_resolution(grid, basis.w0)?;
    let np = basis.p_max + 1;
    let abs_ells = basis.abs_ells();
    let norms: Vec<Vec<f64>> = abs_ells
        .iter()
        .map(|&a| (0..np).map(|p| ln_norm(p, a, basis.w0)).collect())
        .collect();
    let (ox, oy) = grid.origin;
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    par::fill_rows(&mut samples, grid.nx, |j, row| {
        let dy = grid.y(j) - oy;
        let mut lag = vec![0.0; np];
        let mut amp = vec![0.0; np];
        for (i, out) in row.iter_mut().enumerate() {
            let dx = grid.x(i) - ox;
            let rho = dx.hypot(dy);
            let theta = dy.atan2(dx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &a) in abs_ells.iter().enumerate() {
                radial_amplitudes(rho, a, basis.w0, &norms[k], &mut lag, &mut amp);
                let e = Complex64::from_polar(1.0, a as f64 * theta);
                let ai = a as i64;
                for (p, amp_p) in amp.iter().enumerate() {
                    if let Some(idx) = basis.index(p, ai) {
                        acc += c.entries[idx] * e * *amp_p;
                    }
                    if ai != 0 {
                        if let Some(idx) = basis.index(p, -ai) {
                            acc += c.entries[idx] * e.conj() * *amp_p;
                        }
                    }
                }
            }
            *out = acc;
        }
    });
    ComplexField::new(*grid, samples, 0.0)
}

/// Normalised OAM power spectrum `P(ℓ) = Σ_p |c_{p,ℓ}|² / Σ |c|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OamSpectrum {
    /// `(ℓ, P(ℓ))`, ascending in ℓ, covering the computed basis range.
    pub entries: Vec<(i64, f64)>,
    /// Total captured power before normalisation.
    pub normalization: f64,
}

impl OamSpectrum {
    pub fn power(&self, ell: i64) -> f64 {
        self.entries
            .binary_search_by_key(&ell, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    /// Mode with the largest power (lowest ℓ on ties).
    pub fn dominant(&self) -> (i64, f64) {
        self.entries
            .iter()
            .cloned()
            .fold((0, f64::NEG_INFINITY), |best, e| if e.1 > best.1 { e } else { best })
    }

    /// Total power at ℓ not divisible by `m`.
    pub fn off_support(&self, m: u32) -> f64 {
        self.entries
            .iter()
            .filter(|(l, _)| l.rem_euclid(m as i64) != 0)
            .map(|e| e.1)
            .sum()
    }

    /// Spectrum restricted to `|ℓ| ≤ ell_abs_max`, renormalised.
    pub fn restricted(&self, ell_abs_max: i64) -> Result<OamSpectrum> {
        let kept: Vec<(i64, f64)> = self.entries.iter().cloned().filter(|(l, _)| l.abs() <= ell_abs_max).collect();
        let total: f64 = kept.iter().map(|e| e.1).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroPower);
        }
        Ok(OamSpectrum {
            entries: kept.into_iter().map(|(l, p)| (l, p / total)).collect(),
            normalization: total * self.normalization,
        })
    }
}

pub fn oam_spectrum(c: &CoeffTable) -> Result<OamSpectrum> {
    let mut per_ell: BTreeMap<i64, f64> = BTreeMap::new();
    for (_, l, v) in c.iter() {
        *per_ell.entry(l).or_insert(0.0) += v.norm_sqr();
    }
    let total: f64 = per_ell.values().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroPower);
    }
    Ok(OamSpectrum {
        entries: per_ell.into_iter().map(|(l, p)| (l, p / total)).collect(),
        normalization: total,
    })
}

/// Closed-form geometric-series factor: `m` when `m | ℓ`, else 0.
pub fn selection_factor(ell: i64, m: u32) -> i64 {
    assert!(m >= 1, "rotation order must be at least 1");
    if ell.rem_euclid(m as i64) == 0 {
        m as i64
    } else {
        0
    }
}

/// Direct evaluation of `Σ_{s=0}^{m-1} exp(iℓ 2πs/m)`.
pub fn selection_sum(ell: i64, m: u32) -> Complex64 {
    (0..m)
        .map(|s| Complex64::from_polar(1.0, ell as f64 * TAU * s as f64 / m as f64))
        .sum()
}

/// Coefficient-space form of the rotational superposition: entries with
/// `ℓ ≡ 0 (mod m)` are scaled by `m`, all others vanish.
pub fn symmetric_filter_coeffs(c: &CoeffTable, m: u32) -> Result<CoeffTable> {
    if m == 0 {
        return Err(Error::InvalidArgument("rotation order m must be at least 1".into()));
    }
    let mut out = c.clone();
    for ((_, l), e) in c.basis.modes().zip(out.entries.iter_mut()) {
        *e *= selection_factor(l, m) as f64;
    }
    Ok(out)
}

/// One row of the selection-rule self check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRow {
    pub m: u32,
    pub ell: i64,
    pub factor: i64,
    pub sum: Complex64,
    pub error: f64,
}

/// Compares the closed form with the direct sum for every `(m, ℓ)` pair.
pub fn selection_table(ms: &[u32], ells: impl IntoIterator<Item = i64> + Clone) -> Vec<SelectionRow> {
    let mut rows = Vec::new();
    for &m in ms {
        for ell in ells.clone() {
            let factor = selection_factor(ell, m);
            let sum = selection_sum(ell, m);
            let error = (sum - Complex64::new(factor as f64, 0.0)).norm();
            rows.push(SelectionRow {
                m,
                ell,
                factor,
                sum,
                error,
            });
        }
    }
    rows
}

/// Gram matrix deviation `max |<φ_a, φ_b>_window - δ_ab|` of a sampled basis.
pub fn gram_deviation(basis: &LgBasis, grid: &GridSpec) -> Result<f64> {
    let modes: Vec<(usize, i64)> = basis.modes().collect();
    let fields: Vec<ComplexField> = modes
        .iter()
        .map(|&(p, l)| {
            let mut t = CoeffTable::zeros(*basis);
            t.set(p, l, Complex64::new(1.0, 0.0)).expect("mode in basis");
            synthesize(&t, grid)
        })
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (a, f) in fields.iter().enumerate() {
        let c = decompose(f, basis)?;
        for (b, (_, _, v)) in c.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v - want).norm());
        }
    }
    Ok(worst)
}
