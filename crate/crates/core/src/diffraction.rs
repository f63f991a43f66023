//! Fresnel propagation of plane-wave illumination through a pinhole mask.
//!
//! A lens of focal length `f` observed at defocus `Δf` is replaced by free
//! space over `z_eff = f²/|Δf|` with observation coordinates scaled by
//! `mag = -f/Δf`. Each pinhole contributes a paraxial point kernel times the
//! circular-aperture form factor `jinc`, which holds while the pinhole Fresnel
//! number `a²/(λ z_eff)` is small.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{rms_radius, rotate_field, ComplexField, GridSpec};
use crate::mask::PinholeMask;
use crate::par;
use crate::special::jinc;

/// Largest pinhole Fresnel number accepted by [`propagate_sieve`].
pub const FRESNEL_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PropagationModel {
    FreeSpace { z: f64 },
    Lens { f: f64, delta_f: f64 },
}

/// First-order astigmatism: defocus along two orthogonal axes, the first at
/// `orientation` from the x axis. Under the free-space model the values are
/// added to `z` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Astigmatism {
    pub delta_f_x: f64,
    pub delta_f_y: f64,
    pub orientation: f64,
}

impl Astigmatism {
    /// Splits `delta_f` symmetrically by `0.1 |delta_f|` along axes at π/4.
    pub fn default_for(delta_f: f64) -> Self {
        let h = 0.05 * delta_f.abs();
        Astigmatism {
            delta_f_x: delta_f + h,
            delta_f_y: delta_f - h,
            orientation: FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSetup {
    pub lambda: f64,
    pub model: PropagationModel,
    pub astig: Option<Astigmatism>,
}

impl OpticalSetup {
    pub fn free_space(lambda: f64, z: f64) -> Self {
        OpticalSetup {
            lambda,
            model: PropagationModel::FreeSpace { z },
            astig: None,
        }
    }

    pub fn lens(lambda: f64, f: f64, delta_f: f64) -> Self {
        OpticalSetup {
            lambda,
            model: PropagationModel::Lens { f, delta_f },
            astig: None,
        }
    }

    pub fn with_astig(mut self, astig: Astigmatism) -> Self {
        self.astig = Some(astig);
        self
    }

    /// Same setup observed at a different defocus (lens) or distance (free space).
    pub fn with_defocus(mut self, value: f64) -> Self {
        self.model = match self.model {
            PropagationModel::FreeSpace { .. } => PropagationModel::FreeSpace { z: value },
            PropagationModel::Lens { f, .. } => PropagationModel::Lens { f, delta_f: value },
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Geometry(m));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("wavelength {} must be positive", self.lambda));
        }
        match self.model {
            PropagationModel::FreeSpace { z } if !(z > 0.0 && z.is_finite()) => {
                return bad(format!("propagation distance {z} must be positive"))
            }
            PropagationModel::Lens { f, .. } if !(f > 0.0 && f.is_finite()) => {
                return bad(format!("focal length {f} must be positive"))
            }
            PropagationModel::Lens { delta_f, .. } if delta_f == 0.0 || !delta_f.is_finite() => {
                return bad("defocus must be nonzero and finite; the focal plane is not modelled".into())
            }
            _ => {}
        }
        if let Some(a) = self.astig {
            if !(0.0..PI).contains(&a.orientation) {
                return bad(format!("astigmatism orientation {} must lie in [0, π)", a.orientation));
            }
            if !(a.delta_f_x.is_finite() && a.delta_f_y.is_finite()) {
                return bad("astigmatic defocus values must be finite".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGeometry {
    pub z_eff: f64,
    pub mag: f64,
    /// +1 for a diverging, free-space-like kernel `exp(+ik|u'-c|²/2z)`.
    pub chirp_sign: f64,
}

fn lens_axis(f: f64, delta_f: f64) -> Result<EffectiveGeometry> {
    if delta_f == 0.0 {
        return Err(Error::Geometry("defocus must be nonzero along every axis".into()));
    }
    Ok(EffectiveGeometry {
        z_eff: f * f / delta_f.abs(),
        mag: -f / delta_f,
        chirp_sign: -delta_f.signum(),
    })
}

pub fn effective_geometry(setup: &OpticalSetup) -> Result<EffectiveGeometry> {
    setup.validate()?;
    match setup.model {
        PropagationModel::FreeSpace { z } => Ok(EffectiveGeometry {
            z_eff: z,
            mag: 1.0,
            chirp_sign: 1.0,
        }),
        PropagationModel::Lens { f, delta_f } => lens_axis(f, delta_f),
    }
}

/// Per-axis effective geometry along the astigmatic axes.
fn axis_geometry(setup: &OpticalSetup) -> Result<[EffectiveGeometry; 2]> {
    let iso = effective_geometry(setup)?;
    let Some(a) = setup.astig else {
        return Ok([iso, iso]);
    };
    match setup.model {
        PropagationModel::FreeSpace { z } => {
            let axis = |d: f64| {
                let za = z + d;
                if za > 0.0 {
                    Ok(EffectiveGeometry {
                        z_eff: za,
                        mag: 1.0,
                        chirp_sign: 1.0,
                    })
                } else {
                    Err(Error::Geometry(format!("astigmatic distance {za} must stay positive")))
                }
            };
            Ok([axis(a.delta_f_x)?, axis(a.delta_f_y)?])
        }
        PropagationModel::Lens { f, .. } => Ok([lens_axis(f, a.delta_f_x)?, lens_axis(f, a.delta_f_y)?]),
    }
}

/// Pinhole Fresnel number `a²/(λ z)`.
pub fn fresnel_number(radius: f64, lambda: f64, z: f64) -> f64 {
    radius * radius / (lambda * z)
}

fn check_fresnel(mask: &PinholeMask, lambda: f64, z_min: f64) -> Result<()> {
    for (index, p) in mask.pinholes.iter().enumerate() {
        let fresnel = fresnel_number(p.radius, lambda, z_min);
        if fresnel >= FRESNEL_LIMIT {
            return Err(Error::FresnelNumber {
                index,
                fresnel,
                limit: FRESNEL_LIMIT,
            });
        }
    }
    Ok(())
}

/// Paraxial kernel expressed in the astigmatic frame.
struct Kernel {
    k: f64,
    cos: f64,
    sin: f64,
    axes: [EffectiveGeometry; 2],
    /// `∏ 1/sqrt(i s λ z)` over both axes.
    prefactor: Complex64,
}

impl Kernel {
    fn new(setup: &OpticalSetup) -> Result<Self> {
        let axes = axis_geometry(setup)?;
        let orientation = setup.astig.map_or(0.0, |a| a.orientation);
        let (sin, cos) = if orientation == 0.0 { (0.0, 1.0) } else { orientation.sin_cos() };
        let prefactor = if axes[0] == axes[1] {
            Complex64::new(0.0, axes[0].chirp_sign * setup.lambda * axes[0].z_eff).inv()
        } else {
            axes.iter()
                .map(|g| Complex64::new(0.0, g.chirp_sign * setup.lambda * g.z_eff).sqrt().inv())
                .product()
        };
        Ok(Kernel {
            k: TAU / setup.lambda,
            cos,
            sin,
            axes,
            prefactor,
        })
    }

    #[inline]
    fn to_frame(&self, x: f64, y: f64) -> (f64, f64) {
        (self.cos * x + self.sin * y, -self.sin * x + self.cos * y)
    }

    /// Observation point in effective (mask-scale) frame coordinates.
    #[inline]
    fn observation(&self, x: f64, y: f64) -> (f64, f64) {
        let (a, b) = self.to_frame(x, y);
        (a * self.axes[0].mag, b * self.axes[1].mag)
    }

    #[inline]
    fn phase(&self, da: f64, db: f64) -> f64 {
        let [ga, gb] = &self.axes;
        0.5 * self.k * (ga.chirp_sign * da * da / ga.z_eff + gb.chirp_sign * db * db / gb.z_eff)
    }

    #[inline]
    fn jinc_arg(&self, radius: f64, da: f64, db: f64) -> f64 {
        self.k * radius * (da / self.axes[0].z_eff).hypot(db / self.axes[1].z_eff)
    }
}

/// Pinholes in the kernel frame as `(a, b, area, radius)`.
struct Sieve {
    kernel: Kernel,
    centres: Vec<(f64, f64, f64, f64)>,
    z_min: f64,
}

impl Sieve {
    fn new(mask: &PinholeMask, setup: &OpticalSetup) -> Result<Self> {
        let kernel = Kernel::new(setup)?;
        let z_min = kernel.axes[0].z_eff.min(kernel.axes[1].z_eff);
        check_fresnel(mask, setup.lambda, z_min)?;
        let centres = mask
            .pinholes
            .iter()
            .map(|p| {
                let (a, b) = kernel.to_frame(p.x, p.y);
                (a, b, PI * p.radius * p.radius, p.radius)
            })
            .collect();
        Ok(Sieve { kernel, centres, z_min })
    }

    #[inline]
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        let kernel = &self.kernel;
        let (ua, ub) = kernel.observation(x, y);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(ca, cb, area, r) in &self.centres {
            let (da, db) = (ua - ca, ub - cb);
            let (s, c) = kernel.phase(da, db).sin_cos();
            acc += Complex64::new(c, s) * (area * jinc(kernel.jinc_arg(r, da, db)));
        }
        acc * kernel.prefactor
    }
}

fn sieve_field(mask: &PinholeMask, setup: &OpticalSetup, obs: &GridSpec) -> Result<ComplexField> {
    obs.validate()?;
    let sieve = Sieve::new(mask, setup)?;
    Ok(ComplexField::from_fn(*obs, |x, y| sieve.eval(x, y)).with_z_label(sieve.z_min))
}

/// [`propagate_sieve`] evaluated at arbitrary observation points.
pub fn propagate_points(mask: &PinholeMask, setup: &OpticalSetup, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let iso = OpticalSetup { astig: None, ..*setup };
    let sieve = Sieve::new(mask, &iso)?;
    Ok(par::map_range(points.len(), |k| sieve.eval(points[k].0, points[k].1)))
}

/// Field at the observation plane for unit plane-wave illumination. The
/// constant phase `exp(ikz)` is omitted. Any astigmatism in `setup` is
/// ignored; use [`astigmatic_propagate`] for that.
pub fn propagate_sieve(mask: &PinholeMask, setup: &OpticalSetup, obs: &GridSpec) -> Result<ComplexField> {
    let iso = OpticalSetup { astig: None, ..*setup };
    sieve_field(mask, &iso, obs)
}

/// [`propagate_sieve`] with anisotropic defocus along the astigmatic axes.
pub fn astigmatic_propagate(mask: &PinholeMask, setup: &OpticalSetup, obs: &GridSpec) -> Result<ComplexField> {
    if setup.astig.is_none() {
        return Err(Error::Geometry("astigmatic propagation needs an astigmatism setting".into()));
    }
    sieve_field(mask, setup, obs)
}

/// Equal-area quadrature nodes on the unit disc: the centre plus rings
/// `r = 1..q-1` carrying `6r` nodes each, `1 + 3q(q-1)` in total. Returns
/// `(x, y)` with weights `π / count`.
pub fn disc_nodes(q_radial: usize) -> Vec<(f64, f64)> {
    let total = 1 + 3 * q_radial * (q_radial.saturating_sub(1));
    let cumulative = |r: usize| (1 + 3 * r * (r + 1)) as f64;
    let mut nodes = vec![(0.0, 0.0)];
    for r in 1..q_radial {
        let rho = ((cumulative(r - 1) + cumulative(r)) / (2.0 * total as f64)).sqrt();
        let count = 6 * r;
        let offset = if r % 2 == 1 { PI / count as f64 } else { 0.0 };
        for k in 0..count {
            let t = offset + TAU * k as f64 / count as f64;
            nodes.push((rho * t.cos(), rho * t.sin()));
        }
    }
    nodes
}

/// Brute-force reference: every pinhole disc is integrated with the paraxial
/// point kernel on [`disc_nodes`], with no form-factor approximation.
pub fn propagate_oracle(mask: &PinholeMask, setup: &OpticalSetup, obs: &GridSpec, q_radial: usize) -> Result<ComplexField> {
    if q_radial == 0 {
        return Err(Error::InvalidArgument("q_radial must be at least 1".into()));
    }
    obs.validate()?;
    let kernel = Kernel::new(setup)?;
    let unit = disc_nodes(q_radial);
    let mut nodes = Vec::with_capacity(unit.len() * mask.len());
    for p in &mask.pinholes {
        let w = PI * p.radius * p.radius / unit.len() as f64;
        for &(nx, ny) in &unit {
            let (a, b) = kernel.to_frame(p.x + p.radius * nx, p.y + p.radius * ny);
            nodes.push((a, b, w));
        }
    }
    let field = ComplexField::from_fn(*obs, |x, y| {
        let (ua, ub) = kernel.observation(x, y);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b, w) in &nodes {
            let (s, c) = kernel.phase(ua - a, ub - b).sin_cos();
            acc += Complex64::new(c, s) * w;
        }
        acc * kernel.prefactor
    });
    Ok(field.with_z_label(kernel.axes[0].z_eff))
}

/// Largest sample deviation divided by the largest reference magnitude.
pub fn max_relative_deviation(a: &ComplexField, reference: &ComplexField) -> f64 {
    let peak = reference.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let dev = a
        .samples
        .iter()
        .zip(&reference.samples)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    dev / peak
}

/// Separable astigmatic Fresnel step applied to a sampled field: the field is
/// propagated over signed distances `z_a`, `z_b` along the axes at
/// `orientation` and `orientation + π/2`. A negative distance propagates
/// backwards. With `z_a = -z_b` equal to the Rayleigh range of a vortex at its
/// waist the step acts as a π/2 mode converter.
pub fn astigmatic_transform(f: &ComplexField, lambda: f64, z_a: f64, z_b: f64, orientation: f64) -> Result<ComplexField> {
    if !(lambda > 0.0) || z_a == 0.0 || z_b == 0.0 || !(z_a.is_finite() && z_b.is_finite()) {
        return Err(Error::Geometry("astigmatic step needs positive λ and nonzero finite distances".into()));
    }
    let g = f.grid;
    let aligned = rotate_field(f, orientation)?;
    let k = TAU / lambda;
    let kernel_1d = |n: usize, pitch: f64, z: f64, coord: &dyn Fn(usize) -> f64| -> Vec<Complex64> {
        let pre = Complex64::new(0.0, lambda * z).sqrt().inv() * pitch;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for out in 0..n {
            for src in 0..n {
                let d = coord(out) - coord(src);
                let (s, c) = (0.5 * k * d * d / z).sin_cos();
                m[out * n + src] = pre * Complex64::new(c, s);
            }
        }
        m
    };
    let kx = kernel_1d(g.nx, g.pitch_x, z_a, &|i| g.x(i));
    let ky = kernel_1d(g.ny, g.pitch_y, z_b, &|j| g.y(j));
    let mut rows = vec![Complex64::new(0.0, 0.0); g.len()];
    par::fill_rows(&mut rows, g.nx, |j, row| {
        let src = &aligned.samples[j * g.nx..(j + 1) * g.nx];
        for (i, out) in row.iter_mut().enumerate() {
            let kr = &kx[i * g.nx..(i + 1) * g.nx];
            *out = kr.iter().zip(src).map(|(a, b)| a * b).sum();
        }
    });
    let mut samples = vec![Complex64::new(0.0, 0.0); g.len()];
    par::fill_rows(&mut samples, g.nx, |j, row| {
        let kr = &ky[j * g.ny..(j + 1) * g.ny];
        for (i, out) in row.iter_mut().enumerate() {
            *out = kr.iter().enumerate().map(|(jj, a)| a * rows[jj * g.nx + i]).sum();
        }
    });
    let stepped = ComplexField::new(g, samples, f.z_label)?;
    rotate_field(&stepped, -orientation)
}

/// Intensity centroid `(x, y)`.
pub fn intensity_centroid(f: &ComplexField) -> Result<(f64, f64)> {
    let g = &f.grid;
    let (mut sx, mut sy, mut s) = (0.0, 0.0, 0.0);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let w = f.at(i, j).norm_sqr();
            sx += w * g.x(i);
            sy += w * g.y(j);
            s += w;
        }
    }
    if s > 0.0 {
        Ok((sx / s, sy / s))
    } else {
        Err(Error::NoPattern)
    }
}

/// Direction in `[0, π)` of the major axis of the intensity distribution,
/// from its second central moments.
pub fn intensity_major_axis(f: &ComplexField) -> Result<f64> {
    let (cx, cy) = intensity_centroid(f)?;
    let g = &f.grid;
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for j in 0..g.ny {
        let dy = g.y(j) - cy;
        for i in 0..g.nx {
            let dx = g.x(i) - cx;
            let w = f.at(i, j).norm_sqr();
            xx += w * dx * dx;
            yy += w * dy * dy;
            xy += w * dx * dy;
        }
    }
    Ok((0.5 * (2.0 * xy).atan2(xx - yy)).rem_euclid(PI))
}

/// Fraction of the flanking maxima a minimum must fall below to count as a stripe.
pub const STRIPE_DEPTH: f64 = 0.2;
/// Maxima weaker than this fraction of the profile peak are treated as background.
pub const STRIPE_FLOOR: f64 = 0.05;

/// Dark stripes crossed by the line through the intensity centroid along
/// `orientation` (the stripe normal). A strict local minimum counts when it is
/// below [`STRIPE_DEPTH`] times both neighbouring maxima.
pub fn count_dark_stripes(f: &ComplexField, orientation: f64) -> Result<usize> {
    let (cx, cy) = intensity_centroid(f)?;
    let g = &f.grid;
    let ((x0, x1), (y0, y1)) = g.sample_bounds();
    let (dx, dy) = (orientation.cos(), orientation.sin());
    // Longest chord through the centroid that stays inside the sampled area.
    let reach = |c: f64, d: f64, lo: f64, hi: f64| {
        if d.abs() < 1e-12 {
            f64::INFINITY
        } else {
            ((hi - c) / d).abs().min(((lo - c) / d).abs())
        }
    };
    let half = reach(cx, dx, x0, x1).min(reach(cy, dy, y0, y1));
    let n = 8 * g.nx.max(g.ny);
    let profile: Vec<f64> = (0..=n)
        .map(|k| {
            let t = -half + 2.0 * half * k as f64 / n as f64;
            f.interpolate(cx + t * dx, cy + t * dy).norm_sqr()
        })
        .collect();
    Ok(count_profile_minima(&profile)?.len())
}

/// Indices of qualifying dark minima in a 1D intensity profile.
pub fn count_profile_minima(profile: &[f64]) -> Result<Vec<usize>> {
    let peak = profile.iter().copied().fold(0.0, f64::max);
    // Collapse plateaus to their first index.
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (k, &v) in profile.iter().enumerate() {
        if runs.last().map(|r| r.1) != Some(v) {
            runs.push((k, v));
        }
    }
    let mut extrema: Vec<(usize, f64, bool)> = Vec::new();
    for w in 1..runs.len().saturating_sub(1) {
        let (prev, (k, v), next) = (runs[w - 1].1, runs[w], runs[w + 1].1);
        if v > prev && v > next && v >= STRIPE_FLOOR * peak {
            extrema.push((k, v, true));
        } else if v < prev && v < next {
            extrema.push((k, v, false));
        }
    }
    let maxima: Vec<(usize, f64)> = extrema.iter().filter(|e| e.2).map(|e| (e.0, e.1)).collect();
    if maxima.is_empty() {
        return Err(Error::NoPattern);
    }
    let mut found = Vec::new();
    for w in maxima.windows(2) {
        let (left, right) = (w[0], w[1]);
        // The deepest minimum between two significant maxima stands for the gap.
        let deepest = extrema
            .iter()
            .filter(|e| !e.2 && e.0 > left.0 && e.0 < right.0)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(&(k, v, _)) = deepest {
            if v < STRIPE_DEPTH * left.1.min(right.1) {
                found.push(k);
            }
        }
    }
    Ok(found)
}

/// Result of a defocus scan.
#[derive(Debug, Clone)]
pub struct ZStack {
    pub delta_f: Vec<f64>,
    pub fields: Vec<ComplexField>,
    /// Intensity along the grid's central column, one row per slice.
    pub yz_slice: Vec<Vec<f64>>,
    /// Intensity rms radius within the inner-ring cutoff, per slice.
    pub ring_rms: Vec<f64>,
}

impl ZStack {
    /// Index of the slice with the smallest inner-ring rms radius.
    pub fn waist_index(&self) -> usize {
        self.ring_rms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }
}

/// Propagates the mask at each defocus (free-space distance for the
/// free-space model). `ring_cutoff` bounds the radius used for the rms
/// measurement of the inner ring.
pub fn z_stack(
    mask: &PinholeMask,
    setup: &OpticalSetup,
    delta_f: &[f64],
    obs: &GridSpec,
    ring_cutoff: f64,
) -> Result<ZStack> {
    if delta_f.is_empty() {
        return Err(Error::InvalidArgument("defocus list is empty".into()));
    }
    let increasing = delta_f.windows(2).all(|w| w[1] > w[0]);
    let decreasing = delta_f.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidArgument("defocus list must be strictly monotone".into()));
    }
    let mut fields = Vec::with_capacity(delta_f.len());
    for &d in delta_f {
        fields.push(propagate_sieve(mask, &setup.with_defocus(d), obs)?.with_z_label(d));
    }
    let column = obs.nx / 2;
    let yz_slice = fields
        .iter()
        .map(|f| (0..obs.ny).map(|j| f.at(column, j).norm_sqr()).collect())
        .collect();
    let ring_rms = fields.iter().map(|f| rms_radius(f, ring_cutoff)).collect();
    Ok(ZStack {
        delta_f: delta_f.to_vec(),
        fields,
        yz_slice,
        ring_rms,
    })
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
    }
}
