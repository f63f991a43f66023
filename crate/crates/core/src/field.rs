//! Uniformly sampled complex fields on a physical grid.
//!
//! Sample `(i, j)` sits at `origin + ((i - nx/2) * pitch_x, (j - ny/2) * pitch_y)`
//! with integer division, so odd grids have a sample exactly on the axis and
//! are mirror symmetric about it. Storage is row-major with `j` outer.
//! The grid origin is the beam axis for every azimuthal operation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub pitch_x: f64,
    pub pitch_y: f64,
    pub origin: (f64, f64),
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, pitch_x: f64, pitch_y: f64, origin: (f64, f64)) -> Result<Self> {
        let g = GridSpec {
            nx,
            ny,
            pitch_x,
            pitch_y,
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square `n x n` grid covering `window` meters, centred on the axis.
    pub fn square(n: usize, window: f64) -> Result<Self> {
        Self::new(n, n, window / n as f64, window / n as f64, (0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 samples, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.pitch_x > 0.0 && self.pitch_x.is_finite() && self.pitch_y > 0.0 && self.pitch_y.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "pitches must be positive and finite, got ({}, {})",
                self.pitch_x, self.pitch_y
            )));
        }
        if !(self.origin.0.is_finite() && self.origin.1.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn cx(&self) -> f64 {
        (self.nx / 2) as f64
    }

    #[inline]
    fn cy(&self) -> f64 {
        (self.ny / 2) as f64
    }

    /// Physical x coordinate of column `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + (i as f64 - self.cx()) * self.pitch_x
    }

    /// Physical y coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + (j as f64 - self.cy()) * self.pitch_y
    }

    /// Physical coordinates of sample `(i, j)`.
    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x(i), self.y(j))
    }

    /// Fractional sample index of a physical point (inverse of [`coords`](Self::coords)).
    #[inline]
    pub fn fractional_index(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin.0) / self.pitch_x + self.cx(),
            (y - self.origin.1) / self.pitch_y + self.cy(),
        )
    }

    /// Nearest sample to a physical point, if it lies on the grid.
    pub fn index_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (fi, fj) = self.fractional_index(x, y);
        let (i, j) = (fi.round(), fj.round());
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }

    pub fn pixel_area(&self) -> f64 {
        self.pitch_x * self.pitch_y
    }

    /// Physical bounds of the sample centres: `((xmin, xmax), (ymin, ymax))`.
    pub fn sample_bounds(&self) -> ((f64, f64), (f64, f64)) {
        ((self.x(0), self.x(self.nx - 1)), (self.y(0), self.y(self.ny - 1)))
    }

    /// Radius of the largest axis-centred circle whose points stay inside the
    /// sample-centre bounds.
    pub fn inscribed_radius(&self) -> f64 {
        let ((x0, x1), (y0, y1)) = self.sample_bounds();
        let (ox, oy) = self.origin;
        (ox - x0).min(x1 - ox).min(oy - y0).min(y1 - oy)
    }

    fn is_square_lattice(&self) -> bool {
        self.nx == self.ny && self.pitch_x == self.pitch_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
    /// Plane annotation in meters; informational only.
    pub z_label: f64,
}

impl ComplexField {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>, z_label: f64) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match {}x{} grid",
                samples.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(ComplexField {
            grid,
            samples,
            z_label,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
            z_label: 0.0,
        }
    }

    /// Samples a function of physical coordinates on the grid.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync + Send,
    {
        let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
        par::fill_rows(&mut samples, grid.nx, |j, row| {
            let y = grid.y(j);
            for (i, s) in row.iter_mut().enumerate() {
                *s = f(grid.x(i), y);
            }
        });
        ComplexField {
            grid,
            samples,
            z_label: 0.0,
        }
    }

    pub fn with_z_label(mut self, z: f64) -> Self {
        self.z_label = z;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[j * self.grid.nx + i]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.arg()).collect()
    }

    pub fn conjugate(&self) -> Self {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s.conj()).collect(),
            z_label: self.z_label,
        }
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * k).collect(),
            z_label: self.z_label,
        }
    }

    /// Interpolated complex sample at a physical point: Keys cubic convolution
    /// where the 4×4 stencil fits, bilinear in the outermost cell, zero outside
    /// the sampled domain.
    pub fn interpolate(&self, x: f64, y: f64) -> Complex64 {
        let (fi, fj) = self.grid.fractional_index(x, y);
        self.interpolate_index(fi, fj)
    }

    fn interpolate_index(&self, fi: f64, fj: f64) -> Complex64 {
        let g = &self.grid;
        let (maxi, maxj) = ((g.nx - 1) as f64, (g.ny - 1) as f64);
        if !(fi >= 0.0 && fj >= 0.0 && fi <= maxi && fj <= maxj) {
            return Complex64::new(0.0, 0.0);
        }
        let i0 = (fi.floor() as usize).min(g.nx - 2);
        let j0 = (fj.floor() as usize).min(g.ny - 2);
        let tx = fi - i0 as f64;
        let ty = fj - j0 as f64;
        if i0 >= 1 && j0 >= 1 && i0 + 2 < g.nx && j0 + 2 < g.ny {
            // Bilinear interpolation of a rapidly winding phase dips in
            // amplitude at cell edges, which shows up as spurious maxima.
            let (wx, wy) = (keys_weights(tx), keys_weights(ty));
            let mut s = Complex64::new(0.0, 0.0);
            for (b, wyb) in wy.iter().enumerate() {
                let row: Complex64 = wx
                    .iter()
                    .enumerate()
                    .map(|(a, wxa)| self.at(i0 + a - 1, j0 + b - 1) * wxa)
                    .sum();
                s += row * wyb;
            }
            return s;
        }
        let a = self.at(i0, j0);
        let b = self.at(i0 + 1, j0);
        let c = self.at(i0, j0 + 1);
        let d = self.at(i0 + 1, j0 + 1);
        (a * (1.0 - tx) + b * tx) * (1.0 - ty) + (c * (1.0 - tx) + d * tx) * ty
    }

    /// `Σ|s|² · pixel area`.
    pub fn power(&self) -> f64 {
        field_power(self)
    }
}

/// Keys (a = −1/2) cubic convolution weights for offsets −1, 0, 1, 2.
fn keys_weights(t: f64) -> [f64; 4] {
    let near = |x: f64| (1.5 * x - 2.5) * x * x + 1.0;
    let far = |x: f64| ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    [far(1.0 + t), near(t), near(1.0 - t), far(2.0 - t)]
}

/// Rotates a field about the grid origin: the output at polar `(ρ, θ)` is the
/// input at `(ρ, θ + angle)`.
///
/// Multiples of a quarter turn on square lattices are exact sample
/// permutations; other angles interpolate the real and imaginary parts
/// (see [`ComplexField::interpolate`]). Points whose source falls off the grid become zero.
pub fn rotate_field(f: &ComplexField, angle: f64) -> Result<ComplexField> {
    if !angle.is_finite() {
        return Err(Error::InvalidArgument(format!("rotation angle {angle} is not finite")));
    }
    f.grid.validate()?;
    if angle == 0.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    let quarter = angle / FRAC_PI_2;
    let q = quarter.round();
    if g.is_square_lattice() && (quarter - q).abs() < 1e-12 {
        return Ok(rotate_quarter_turns(f, (q as i64).rem_euclid(4)));
    }
    let (s, c) = angle.sin_cos();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    par::fill_rows(&mut out, g.nx, |j, row| {
        let dy = g.y(j) - g.origin.1;
        for (i, o) in row.iter_mut().enumerate() {
            let dx = g.x(i) - g.origin.0;
            let sx = g.origin.0 + c * dx - s * dy;
            let sy = g.origin.1 + s * dx + c * dy;
            *o = f.interpolate(sx, sy);
        }
    });
    Ok(ComplexField {
        grid: g,
        samples: out,
        z_label: f.z_label,
    })
}

fn rotate_quarter_turns(f: &ComplexField, q: i64) -> ComplexField {
    let g = f.grid;
    if q == 0 {
        return f.clone();
    }
    let n = g.nx as i64;
    let c = (g.nx / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    par::fill_rows(&mut out, g.nx, |j, row| {
        let dj = j as i64 - c;
        for (i, o) in row.iter_mut().enumerate() {
            let di = i as i64 - c;
            // source offset = R(q·π/2) · (di, dj)
            let (si, sj) = match q {
                1 => (-dj, di),
                2 => (-di, -dj),
                _ => (dj, -di),
            };
            let (si, sj) = (si + c, sj + c);
            if (0..n).contains(&si) && (0..n).contains(&sj) {
                *o = f.at(si as usize, sj as usize);
            }
        }
    });
    ComplexField {
        grid: g,
        samples: out,
        z_label: f.z_label,
    }
}

/// Sum of `m` copies of `f` rotated by `2πs/m`, `s = 0..m`. No normalisation.
pub fn superpose_rotations(f: &ComplexField, m: u32) -> Result<ComplexField> {
    if m == 0 {
        return Err(Error::InvalidArgument("rotation order m must be at least 1".into()));
    }
    let mut acc = f.clone();
    for s in 1..m {
        let r = rotate_field(f, TAU * s as f64 / m as f64)?;
        for (a, b) in acc.samples.iter_mut().zip(&r.samples) {
            *a += b;
        }
    }
    Ok(acc)
}

/// Result of a winding-number measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Accumulated phase / 2π minus the rounded winding.
    pub residual: f64,
}

fn circle_samples(f: &ComplexField, radius: f64, n_samples: usize) -> Result<Vec<Complex64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("circle radius {radius} must be positive")));
    }
    if n_samples < 8 {
        return Err(Error::Undersampled(format!("{n_samples} samples on the circle; need at least 8")));
    }
    if radius > f.grid.inscribed_radius() {
        return Err(Error::Extent(format!(
            "circle of radius {radius:.4e} m leaves the sampled domain (max {:.4e} m)",
            f.grid.inscribed_radius()
        )));
    }
    let (ox, oy) = f.grid.origin;
    Ok((0..n_samples)
        .map(|k| {
            let t = TAU * k as f64 / n_samples as f64;
            f.interpolate(ox + radius * t.cos(), oy + radius * t.sin())
        })
        .collect())
}

/// Topological charge enclosed by a circle about the axis: the counterclockwise
/// phase accumulated around it divided by 2π.
pub fn phase_winding(f: &ComplexField, radius: f64, n_samples: usize) -> Result<Winding> {
    let ring = circle_samples(f, radius, n_samples)?;
    winding_of_loop(&ring)
}

/// Winding number of a closed, uniformly sampled loop of complex values.
pub fn winding_of_loop(ring: &[Complex64]) -> Result<Winding> {
    let max = ring.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let min = ring.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min < 1e-6 * max {
        return Err(Error::AmplitudeTooLow {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    let n = ring.len();
    let mut total = 0.0;
    for k in 0..n {
        let step = (ring[(k + 1) % n] * ring[k].conj()).arg();
        if step.abs() > FRAC_PI_2 {
            return Err(Error::Undersampled(format!(
                "phase step {step:.3} rad between samples {k} and {} exceeds π/2",
                (k + 1) % n
            )));
        }
        total += step;
    }
    let turns = total / TAU;
    let winding = turns.round();
    let residual = turns - winding;
    if residual.abs() >= 0.25 {
        return Err(Error::Undersampled(format!(
            "winding residual {residual:.3} is not close to an integer"
        )));
    }
    Ok(Winding {
        winding: winding as i64,
        residual,
    })
}

/// Number of strict local maxima of `|f|²` on a circle about the axis
/// (periodic, with equal-valued plateaus merged).
pub fn angular_peak_count(f: &ComplexField, radius: f64, n_samples: usize) -> Result<usize> {
    let ring = circle_samples(f, radius, n_samples)?;
    let intensity: Vec<f64> = ring.iter().map(|s| s.norm_sqr()).collect();
    let count = periodic_maxima(&intensity);
    if 4 * count > n_samples {
        return Err(Error::Undersampled(format!(
            "{count} peaks resolved with only {n_samples} samples; need at least 4 per peak"
        )));
    }
    Ok(count)
}

/// Counts strict local maxima of a periodic sequence, merging plateaus.
pub fn periodic_maxima(values: &[f64]) -> usize {
    // Collapse runs of equal values, then compare each run with its neighbours.
    let mut runs: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    if runs.len() > 1 && runs.first() == runs.last() {
        runs.pop();
    }
    let n = runs.len();
    if n < 2 {
        return 0;
    }
    (0..n)
        .filter(|&k| {
            let prev = runs[(k + n - 1) % n];
            let next = runs[(k + 1) % n];
            runs[k] > prev && runs[k] > next
        })
        .count()
}

/// Total power `Σ|s|² · pitch_x · pitch_y`.
pub fn field_power(f: &ComplexField) -> f64 {
    f.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * f.grid.pixel_area()
}

/// Azimuthally averaged intensity over `n_bins` equal-width annuli spanning the
/// inscribed circle. Returns `(bin-centre radius, mean intensity)` for every
/// non-empty bin.
pub fn radial_profile(f: &ComplexField, n_bins: usize) -> Result<Vec<(f64, f64)>> {
    if n_bins == 0 {
        return Err(Error::InvalidArgument("need at least one radial bin".into()));
    }
    let g = &f.grid;
    let r_max = g.inscribed_radius();
    let width = r_max / n_bins as f64;
    let mut sum = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for j in 0..g.ny {
        let dy = g.y(j) - g.origin.1;
        for i in 0..g.nx {
            let dx = g.x(i) - g.origin.0;
            let r = dx.hypot(dy);
            let b = (r / width) as usize;
            if b < n_bins {
                sum[b] += f.at(i, j).norm_sqr();
                count[b] += 1;
            }
        }
    }
    Ok((0..n_bins)
        .filter(|&b| count[b] > 0)
        .map(|b| ((b as f64 + 0.5) * width, sum[b] / count[b] as f64))
        .collect())
}

/// Intensity-weighted rms radius about the axis, restricted to `ρ < r_max`.
pub fn rms_radius(f: &ComplexField, r_max: f64) -> f64 {
    let g = &f.grid;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..g.ny {
        let dy = g.y(j) - g.origin.1;
        for i in 0..g.nx {
            let dx = g.x(i) - g.origin.0;
            let r2 = dx * dx + dy * dy;
            if r2 < r_max * r_max {
                let w = f.at(i, j).norm_sqr();
                num += w * r2;
                den += w;
            }
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lg::lg_eval;

    fn lg_field(n: usize, window: f64, w0: f64, p: usize, ell: i64) -> ComplexField {
        let g = GridSpec::square(n, window).unwrap();
        ComplexField::from_fn(g, |x, y| lg_eval(p, ell, w0, x, y))
    }

    fn rel_rms(a: &ComplexField, b: &ComplexField) -> f64 {
        let num: f64 = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.samples.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn grid_mapping_roundtrip() {
        let g = GridSpec::new(7, 4, 0.5, 2.0, (1.0, -3.0)).unwrap();
        assert_eq!(g.coords(3, 2), (1.0, -3.0));
        assert_eq!(g.coords(0, 0), (1.0 - 1.5, -3.0 - 4.0));
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = g.coords(i, j);
                assert_eq!(g.index_of(x, y), Some((i, j)));
            }
        }
        assert!(GridSpec::new(1, 4, 1.0, 1.0, (0.0, 0.0)).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0, (0.0, 0.0)).is_err());
        assert!(ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 3], 0.0).is_err());
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let f = lg_field(33, 8.0, 1.0, 1, 3);
        assert_eq!(rotate_field(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn quarter_turn_is_exact_permutation() {
        let g = GridSpec::square(9, 9.0).unwrap();
        let f = ComplexField::from_fn(g, |x, y| Complex64::new(x + 10.0 * y, x * y - 1.0));
        let r = rotate_field(&f, FRAC_PI_2).unwrap();
        let mut a: Vec<(u64, u64)> = f.samples.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect();
        let mut b: Vec<(u64, u64)> = r.samples.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        // out(ρ, θ) = in(ρ, θ + π/2): the sample at (+1, 0) comes from (0, +1)
        let (i, j) = g.index_of(1.0, 0.0).unwrap();
        let (si, sj) = g.index_of(0.0, 1.0).unwrap();
        assert_eq!(r.at(i, j), f.at(si, sj));
    }

    #[test]
    fn rotating_lg_mode_multiplies_by_phase() {
        let (ell, delta) = (4, PI / 7.0);
        let f = lg_field(512, 8.0, 1.0, 0, ell);
        let r = rotate_field(&f, delta).unwrap();
        let want = f.scaled(Complex64::from_polar(1.0, ell as f64 * delta));
        assert!(rel_rms(&r, &want) < 1e-3);
    }

    #[test]
    fn superposition_keeps_only_multiples_of_m() {
        let f5 = lg_field(257, 8.0, 1.0, 0, 5);
        let s5 = superpose_rotations(&f5, 5).unwrap();
        assert!(rel_rms(&s5, &f5.scaled(Complex64::new(5.0, 0.0))) < 1e-3);

        let f3 = lg_field(257, 8.0, 1.0, 0, 3);
        let s3 = superpose_rotations(&f3, 5).unwrap();
        let rms = |f: &ComplexField| (f.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / f.samples.len() as f64).sqrt();
        assert!(rms(&s3) < 1e-3 * rms(&f3));

        let g = GridSpec::square(16, 1.0).unwrap();
        let c = ComplexField::from_fn(g, |_, _| Complex64::new(0.3, -0.2));
        // constant fields survive rotation only where the source stays on the grid
        let inner: Vec<_> = superpose_rotations(&c, 4).unwrap().samples;
        let (i, j) = g.index_of(0.0, 0.0).unwrap();
        assert!((inner[j * 16 + i] - Complex64::new(1.2, -0.8)).norm() < 1e-12);
        assert!(superpose_rotations(&c, 0).is_err());
    }

    #[test]
    fn superposition_on_odd_grid_scales_constant_field() {
        let g = GridSpec::square(33, 1.0).unwrap();
        let c = ComplexField::from_fn(g, |_, _| Complex64::new(1.0, 0.5));
        let s = superpose_rotations(&c, 5).unwrap();
        let (ox, oy) = (0.0, 0.0);
        let r_in = g.inscribed_radius();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = g.coords(i, j);
                if (x - ox).hypot(y - oy) < r_in - 1e-12 {
                    assert!((s.at(i, j) - Complex64::new(5.0, 2.5)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn winding_of_synthesized_vortex() {
        let w0 = 1.0;
        let f = lg_field(257, 8.0, w0, 0, -11);
        let r_peak = w0 * (11.0f64 / 2.0).sqrt();
        let w = phase_winding(&f, r_peak, 1024).unwrap();
        assert_eq!(w.winding, -11);
        assert!(w.residual.abs() < 1e-6);
        let wc = phase_winding(&f.conjugate(), r_peak, 1024).unwrap();
        assert_eq!(wc.winding, 11);
    }

    #[test]
    fn winding_errors() {
        let f = lg_field(129, 8.0, 1.0, 0, 6);
        // far outside the beam the amplitude is ~0 everywhere, and at the axis too
        let g = GridSpec::square(64, 8.0).unwrap();
        let zero = ComplexField::zeros(g);
        assert!(matches!(phase_winding(&zero, 1.0, 64), Err(Error::AmplitudeTooLow { .. })));
        assert!(matches!(phase_winding(&f, 1.7, 16), Err(Error::Undersampled(_))));
        assert!(matches!(phase_winding(&f, 10.0, 64), Err(Error::Extent(_))));
    }

    #[test]
    fn peak_counts() {
        assert_eq!(periodic_maxima(&[1.0; 32]), 0);
        let ring: Vec<f64> = (0..1024).map(|k| 1.0 + (44.0 * TAU * k as f64 / 1024.0).cos()).collect();
        assert_eq!(periodic_maxima(&ring), 44);
        // plateau merging, including across the wrap point
        assert_eq!(periodic_maxima(&[2.0, 0.0, 1.0, 1.0, 0.0, 2.0]), 2);

        let g = GridSpec::square(201, 4.0).unwrap();
        let f = ComplexField::from_fn(g, |x, y| {
            let t = y.atan2(x);
            Complex64::new((1.0 + (44.0 * t).cos()).sqrt(), 0.0)
        });
        assert_eq!(angular_peak_count(&f, 1.5, 2048).unwrap(), 44);
        assert!(matches!(angular_peak_count(&f, 1.5, 100), Err(Error::Undersampled(_))));
    }

    #[test]
    fn power_definitions() {
        let g = GridSpec::square(8, 8e-9).unwrap();
        assert_eq!(field_power(&ComplexField::zeros(g)), 0.0);
        let mut f = ComplexField::zeros(g);
        f.samples[5] = Complex64::new(1.0, 0.0);
        assert!((field_power(&f) - 1e-18).abs() < 1e-30);
    }

    #[test]
    fn radial_profile_peaks_at_lg_ring() {
        // Dense 1D scan of ρ^{10} exp(-2ρ²/w0²) puts the maximum at w0·sqrt(2.5)
        // = 1.5811388 w0 (frozen from that scan, step 1e-6 w0).
        let w0 = 1.0;
        let f = lg_field(401, 8.0, w0, 0, 5);
        let prof = radial_profile(&f, 80).unwrap();
        let width = f.grid.inscribed_radius() / 80.0;
        let (r_best, _) = prof.iter().cloned().fold((0.0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!((r_best - 1.581_138_8).abs() <= width, "peak at {r_best}");
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    }
}
