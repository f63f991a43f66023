//! Pinhole masks: spiral motifs, m-fold replication, compounds and
//! rasterisation to binary amplitude fields.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pinhole {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Pinhole {
    pub fn polar(r: f64, theta: f64, radius: f64) -> Self {
        Pinhole {
            x: r * theta.cos(),
            y: r * theta.sin(),
            radius,
        }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Pinhole {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            radius: self.radius,
        }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Sense of a spiral: `Ccw` means pinhole angle grows counterclockwise with
/// index; `Cw` negates every angular coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handedness {
    Ccw,
    Cw,
}

impl Handedness {
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Ccw => 1.0,
            Handedness::Cw => -1.0,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Handedness::Ccw),
            -1 => Ok(Handedness::Cw),
            _ => Err(Error::InvalidArgument(format!("handedness must be +1 or -1, got {s}"))),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Handedness::Ccw => Handedness::Cw,
            Handedness::Cw => Handedness::Ccw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotifKind {
    Explicit { points: Vec<(f64, f64)> },
    /// `r = r0 · exp(b |θ|)`
    Logarithmic { r0: f64, b: f64, theta_span: f64 },
    /// `r = a + b |θ|`
    Archimedean { a: f64, b: f64, theta_span: f64 },
    /// `r_n = sqrt(r0² + ℓ z λ α_n / π)`, `α_n = 2πn/N`
    Fermat { r0: f64, ell: i64, lambda: f64, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifSpec {
    pub kind: MotifKind,
    pub n: usize,
    pub pinhole_radius: f64,
    pub handedness: Handedness,
}

impl MotifSpec {
    pub fn mirrored(&self) -> MotifSpec {
        let mut m = self.clone();
        match &mut m.kind {
            MotifKind::Explicit { points } => points.iter_mut().for_each(|p| p.1 = -p.1),
            _ => m.handedness = self.handedness.flipped(),
        }
        m
    }
}

/// A motif specification together with its generated pinholes.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub spec: MotifSpec,
    pub pinholes: Vec<Pinhole>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinholeMask {
    pub pinholes: Vec<Pinhole>,
    /// Declared rotational order; 1 means no symmetry.
    pub symmetry_m: u32,
    /// Motifs and replication orders this mask was built from.
    pub provenance: Vec<(MotifSpec, u32)>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("a motif needs at least one pinhole".into()))
    } else {
        Ok(())
    }
}

/// Fermat spiral motif. Pinhole `n` sits at polar `(r_n, h·α_n)` with
/// `α_n = 2πn/N` and `r_n² = r0² + ℓ z λ α_n / π`, so its on-axis Fresnel
/// phase at distance `z` advances by `ℓ α_n`.
pub fn fermat_motif(
    n: usize,
    r0: f64,
    ell: i64,
    lambda: f64,
    z: f64,
    pinhole_radius: f64,
    handedness: Handedness,
) -> Result<Motif> {
    check_count(n)?;
    positive("r0", r0)?;
    positive("wavelength", lambda)?;
    positive("design distance", z)?;
    positive("pinhole radius", pinhole_radius)?;
    let mut pinholes = Vec::with_capacity(n);
    for k in 0..n {
        let alpha = TAU * k as f64 / n as f64;
        let r2 = r0 * r0 + ell as f64 * z * lambda * alpha / PI;
        if r2 <= 0.0 {
            return Err(Error::NegativeRadicand { index: k, value: r2 });
        }
        pinholes.push(Pinhole::polar(r2.sqrt(), handedness.sign() * alpha, pinhole_radius));
    }
    Ok(Motif {
        spec: MotifSpec {
            kind: MotifKind::Fermat { r0, ell, lambda, z },
            n,
            pinhole_radius,
            handedness,
        },
        pinholes,
    })
}

fn spiral_angles(n: usize, theta_span: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if n == 1 { 0.0 } else { k as f64 * theta_span / (n - 1) as f64 })
}

/// Logarithmic spiral motif `r = r0 exp(b|θ|)`, `θ_n = h · n · span/(N-1)`.
pub fn log_spiral_motif(
    n: usize,
    r0: f64,
    b: f64,
    theta_span: f64,
    pinhole_radius: f64,
    handedness: Handedness,
) -> Result<Motif> {
    check_count(n)?;
    positive("r0", r0)?;
    positive("theta span", theta_span)?;
    positive("pinhole radius", pinhole_radius)?;
    if !b.is_finite() {
        return Err(Error::InvalidArgument(format!("growth rate b = {b} is not finite")));
    }
    let pinholes = spiral_angles(n, theta_span)
        .map(|t| Pinhole::polar(r0 * (b * t).exp(), handedness.sign() * t, pinhole_radius))
        .collect();
    Ok(Motif {
        spec: MotifSpec {
            kind: MotifKind::Logarithmic { r0, b, theta_span },
            n,
            pinhole_radius,
            handedness,
        },
        pinholes,
    })
}

/// Archimedean spiral motif `r = a + b|θ|`, `θ_n = h · n · span/(N-1)`.
pub fn archimedean_motif(
    n: usize,
    a: f64,
    b: f64,
    theta_span: f64,
    pinhole_radius: f64,
    handedness: Handedness,
) -> Result<Motif> {
    check_count(n)?;
    positive("a", a)?;
    positive("theta span", theta_span)?;
    positive("pinhole radius", pinhole_radius)?;
    if !b.is_finite() {
        return Err(Error::InvalidArgument(format!("b = {b} is not finite")));
    }
    let mut pinholes = Vec::with_capacity(n);
    for (k, t) in spiral_angles(n, theta_span).enumerate() {
        let r = a + b * t;
        if r <= 0.0 {
            return Err(Error::InvalidArgument(format!("pinhole {k} has non-positive radius {r}")));
        }
        pinholes.push(Pinhole::polar(r, handedness.sign() * t, pinhole_radius));
    }
    Ok(Motif {
        spec: MotifSpec {
            kind: MotifKind::Archimedean { a, b, theta_span },
            n,
            pinhole_radius,
            handedness,
        },
        pinholes,
    })
}

/// Motif from explicit pinhole centres.
pub fn explicit_motif(points: &[(f64, f64)], pinhole_radius: f64) -> Result<Motif> {
    check_count(points.len())?;
    positive("pinhole radius", pinhole_radius)?;
    if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::InvalidArgument("pinhole coordinates must be finite".into()));
    }
    Ok(Motif {
        spec: MotifSpec {
            kind: MotifKind::Explicit {
                points: points.to_vec(),
            },
            n: points.len(),
            pinhole_radius,
            handedness: Handedness::Ccw,
        },
        pinholes: points
            .iter()
            .map(|&(x, y)| Pinhole {
                x,
                y,
                radius: pinhole_radius,
            })
            .collect(),
    })
}

/// Indices of every overlapping pair: centre distance not exceeding the sum of radii.
pub fn overlapping_pairs(pinholes: &[Pinhole]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..pinholes.len()).collect();
    order.sort_by(|&a, &b| pinholes[a].x.total_cmp(&pinholes[b].x));
    let r_max = pinholes.iter().map(|p| p.radius).fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for (k, &a) in order.iter().enumerate() {
        let pa = &pinholes[a];
        for &b in &order[k + 1..] {
            let pb = &pinholes[b];
            if pb.x - pa.x > pa.radius + r_max {
                break;
            }
            let d = (pa.x - pb.x).hypot(pa.y - pb.y);
            if d <= pa.radius + pb.radius {
                pairs.push((a.min(b), a.max(b)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

impl PinholeMask {
    /// Mask from raw pinholes with no declared symmetry.
    pub fn from_pinholes(pinholes: Vec<Pinhole>) -> Result<Self> {
        Self::checked(pinholes, 1, Vec::new())
    }

    fn checked(pinholes: Vec<Pinhole>, symmetry_m: u32, provenance: Vec<(MotifSpec, u32)>) -> Result<Self> {
        for p in &pinholes {
            positive("pinhole radius", p.radius)?;
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidArgument("pinhole coordinates must be finite".into()));
            }
        }
        let pairs = overlapping_pairs(&pinholes);
        if !pairs.is_empty() {
            return Err(Error::Overlap { pairs });
        }
        Ok(PinholeMask {
            pinholes,
            symmetry_m,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.pinholes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pinholes.is_empty()
    }

    /// Mask rotated rigidly about the origin.
    pub fn rotated(&self, angle: f64) -> PinholeMask {
        PinholeMask {
            pinholes: self.pinholes.iter().map(|p| p.rotated(angle)).collect(),
            symmetry_m: self.symmetry_m,
            provenance: self.provenance.clone(),
        }
    }

    /// Largest distance of any pinhole edge from the origin.
    pub fn outer_radius(&self) -> f64 {
        self.pinholes.iter().map(|p| p.r() + p.radius).fold(0.0, f64::max)
    }

    /// True when the centre set maps onto itself under rotation by `angle`,
    /// matching every centre to within `tol` meters.
    pub fn is_invariant_under(&self, angle: f64, tol: f64) -> bool {
        same_centre_set(&self.pinholes, &self.rotated(angle).pinholes, tol)
    }
}

/// Set equality of pinhole centres within `tol` meters.
pub fn same_centre_set(a: &[Pinhole], b: &[Pinhole], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut bs: Vec<&Pinhole> = b.iter().collect();
    bs.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut used = vec![false; bs.len()];
    'outer: for p in a {
        let start = bs.partition_point(|q| q.x < p.x - tol);
        for k in start..bs.len() {
            let q = bs[k];
            if q.x > p.x + tol {
                break;
            }
            if !used[k] && (q.y - p.y).abs() <= tol && (q.x - p.x).abs() <= tol && q.radius == p.radius {
                used[k] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Union of `m` copies of the motif rotated by `2πs/m` about the origin.
pub fn replicate(motif: &Motif, m: u32) -> Result<PinholeMask> {
    if m == 0 {
        return Err(Error::InvalidArgument("replication order m must be at least 1".into()));
    }
    let mut pinholes = Vec::with_capacity(motif.pinholes.len() * m as usize);
    pinholes.extend_from_slice(&motif.pinholes);
    for s in 1..m {
        let angle = TAU * s as f64 / m as f64;
        pinholes.extend(motif.pinholes.iter().map(|p| p.rotated(angle)));
    }
    PinholeMask::checked(pinholes, m, vec![(motif.spec.clone(), m)])
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Union of several masks; the declared symmetry is the gcd of the parts'.
pub fn compound_mask(parts: &[PinholeMask]) -> Result<PinholeMask> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("compound mask needs at least one part".into()));
    }
    let symmetry_m = parts.iter().map(|p| p.symmetry_m).fold(0, gcd).max(1);
    let pinholes = parts.iter().flat_map(|p| p.pinholes.iter().copied()).collect();
    let provenance = parts.iter().flat_map(|p| p.provenance.iter().cloned()).collect();
    PinholeMask::checked(pinholes, symmetry_m, provenance)
}

/// Reflection about the x axis, `(x, y) → (x, -y)`.
pub fn mirror_mask(mask: &PinholeMask) -> PinholeMask {
    PinholeMask {
        pinholes: mask
            .pinholes
            .iter()
            .map(|p| Pinhole {
                x: p.x,
                y: -p.y,
                radius: p.radius,
            })
            .collect(),
        symmetry_m: mask.symmetry_m,
        provenance: mask.provenance.iter().map(|(s, m)| (s.mirrored(), *m)).collect(),
    }
}

/// Binary amplitude image: 1 where a sample centre lies inside any pinhole.
pub fn rasterize(mask: &PinholeMask, grid: &GridSpec) -> Result<ComplexField> {
    grid.validate()?;
    let ((x0, x1), (y0, y1)) = grid.sample_bounds();
    for (k, p) in mask.pinholes.iter().enumerate() {
        if grid.pitch_x > p.radius / 4.0 || grid.pitch_y > p.radius / 4.0 {
            return Err(Error::Resolution(format!(
                "pitch ({:.3e}, {:.3e}) m is coarser than radius/4 = {:.3e} m for pinhole {k}",
                grid.pitch_x,
                grid.pitch_y,
                p.radius / 4.0
            )));
        }
        if p.x - p.radius < x0 || p.x + p.radius > x1 || p.y - p.radius < y0 || p.y + p.radius > y1 {
            return Err(Error::Extent(format!("pinhole {k} at ({:.4e}, {:.4e}) m is clipped by the grid", p.x, p.y)));
        }
    }
    let mut field = ComplexField::zeros(*grid);
    let one = Complex64::new(1.0, 0.0);
    for p in &mask.pinholes {
        let (fi0, fj0) = grid.fractional_index(p.x - p.radius, p.y - p.radius);
        let (fi1, fj1) = grid.fractional_index(p.x + p.radius, p.y + p.radius);
        let (i0, j0) = (fi0.floor().max(0.0) as usize, fj0.floor().max(0.0) as usize);
        let (i1, j1) = (
            (fi1.ceil() as usize).min(grid.nx - 1),
            (fj1.ceil() as usize).min(grid.ny - 1),
        );
        let r2 = p.radius * p.radius;
        for j in j0..=j1 {
            let dy = grid.y(j) - p.y;
            for i in i0..=i1 {
                let dx = grid.x(i) - p.x;
                if dx * dx + dy * dy <= r2 {
                    field.samples[j * grid.nx + i] = one;
                }
            }
        }
    }
    Ok(field)
}

/// JSON mask recipe: each motif is replicated by the matching entry of
/// `replications`; with `compound` the resulting masks are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskRecipe {
    pub motifs: Vec<MotifRecipe>,
    pub replications: Vec<u32>,
    pub compound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifRecipe {
    pub kind: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub params: Map<String, Value>,
    pub pinhole_radius_m: f64,
    pub handedness: i64,
}

fn take_f64(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("motif params: missing or non-numeric `{key}`")))
}

fn only_keys(params: &Map<String, Value>, kind: &str, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown {kind} motif parameter `{k}`")));
        }
    }
    Ok(())
}

impl MotifRecipe {
    /// Builds the motif. A Fermat motif without `z_m` uses `default_z`
    /// (normally the effective distance of the observation setup).
    pub fn build(&self, default_z: Option<f64>) -> Result<Motif> {
        let h = Handedness::from_sign(self.handedness).map_err(|e| Error::Config(e.to_string()))?;
        let p = &self.params;
        let a = self.pinhole_radius_m;
        match self.kind.as_str() {
            "explicit" => {
                only_keys(p, "explicit", &["points_m"])?;
                let pts = p
                    .get("points_m")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("explicit motif needs `points_m`".into()))?;
                let points = pts
                    .iter()
                    .map(|v| match v.as_array().map(|a| a.as_slice()) {
                        Some([x, y]) => match (x.as_f64(), y.as_f64()) {
                            (Some(x), Some(y)) => Ok((x, y)),
                            _ => Err(Error::Config("explicit point coordinates must be numbers".into())),
                        },
                        _ => Err(Error::Config("explicit points must be [x, y] pairs".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if points.len() != self.n {
                    return Err(Error::Config(format!(
                        "explicit motif declares N = {} but lists {} points",
                        self.n,
                        points.len()
                    )));
                }
                let mut m = explicit_motif(&points, a)?;
                if h == Handedness::Cw {
                    m.pinholes.iter_mut().for_each(|q| q.y = -q.y);
                    m.spec = m.spec.mirrored();
                }
                Ok(m)
            }
            "logarithmic" => {
                only_keys(p, "logarithmic", &["r0_m", "b", "theta_span_rad"])?;
                log_spiral_motif(self.n, take_f64(p, "r0_m")?, take_f64(p, "b")?, take_f64(p, "theta_span_rad")?, a, h)
            }
            "archimedean" => {
                only_keys(p, "archimedean", &["a_m", "b_m_per_rad", "theta_span_rad"])?;
                archimedean_motif(
                    self.n,
                    take_f64(p, "a_m")?,
                    take_f64(p, "b_m_per_rad")?,
                    take_f64(p, "theta_span_rad")?,
                    a,
                    h,
                )
            }
            "fermat" => {
                only_keys(p, "fermat", &["r0_m", "ell", "lambda_m", "z_m"])?;
                let ell = p
                    .get("ell")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| Error::Config("fermat motif needs integer `ell`".into()))?;
                let z = match p.get("z_m") {
                    Some(v) => v.as_f64().ok_or_else(|| Error::Config("`z_m` must be a number".into()))?,
                    None => default_z.ok_or_else(|| Error::Config("fermat motif needs `z_m`".into()))?,
                };
                fermat_motif(self.n, take_f64(p, "r0_m")?, ell, take_f64(p, "lambda_m")?, z, a, h)
            }
            other => Err(Error::Config(format!("unknown motif kind `{other}`"))),
        }
    }
}

impl MaskRecipe {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self, default_z: Option<f64>) -> Result<PinholeMask> {
        if self.motifs.is_empty() {
            return Err(Error::Config("recipe lists no motifs".into()));
        }
        if self.motifs.len() != self.replications.len() {
            return Err(Error::Config(format!(
                "{} motifs but {} replication orders",
                self.motifs.len(),
                self.replications.len()
            )));
        }
        if self.motifs.len() > 1 && !self.compound {
            return Err(Error::Config("several motifs require `compound: true`".into()));
        }
        let parts = self
            .motifs
            .iter()
            .zip(&self.replications)
            .map(|(m, &r)| replicate(&m.build(default_z)?, r))
            .collect::<Result<Vec<_>>>()?;
        if parts.len() == 1 {
            Ok(parts.into_iter().next().expect("one part"))
        } else {
            compound_mask(&parts)
        }
    }
}
