//! File formats: CVF1 complex fields, 16-bit PGM images and CSV tables.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};
use crate::lg::{CoeffTable, OamSpectrum};
use crate::mask::Pinhole;

const MAGIC: &[u8; 4] = b"CVF1";

/// Writes a field as CVF1: magic, `u32` nx and ny, five `f64` header values
/// (pitch_x, pitch_y, origin_x, origin_y, z_label), then `(re, im)` pairs with
/// `j` outer. All numbers little-endian.
pub fn write_cvf1<W: Write>(f: &ComplexField, mut w: W) -> Result<()> {
    let g = &f.grid;
    let (nx, ny) = (u32::try_from(g.nx), u32::try_from(g.ny));
    let (Ok(nx), Ok(ny)) = (nx, ny) else {
        return Err(Error::Format("grid dimensions exceed u32".into()));
    };
    let mut buf = Vec::with_capacity(52 + 16 * f.samples.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&nx.to_le_bytes());
    buf.extend_from_slice(&ny.to_le_bytes());
    for v in [g.pitch_x, g.pitch_y, g.origin.0, g.origin.1, f.z_label] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for s in &f.samples {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_cvf1<R: Read>(mut r: R) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 52 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing CVF1 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let (nx, ny) = (u32_at(4), u32_at(8));
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(52))
        .ok_or_else(|| Error::Format("CVF1 dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!("CVF1 payload is {} bytes, expected {expected}", bytes.len())));
    }
    let grid = GridSpec::new(nx, ny, f64_at(12), f64_at(20), (f64_at(28), f64_at(36)))
        .map_err(|e| Error::Format(e.to_string()))?;
    let samples = (0..nx * ny)
        .map(|k| Complex64::new(f64_at(52 + 16 * k), f64_at(60 + 16 * k)))
        .collect();
    ComplexField::new(grid, samples, f64_at(44))
}

/// Writes 16-bit `P5` PGM levels; the top image row is the largest `y`.
fn write_pgm<W: Write>(grid: &GridSpec, levels: &[u16], mut w: W) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n65535\n", grid.nx, grid.ny).into_bytes();
    for j in (0..grid.ny).rev() {
        for &v in &levels[j * grid.nx..(j + 1) * grid.nx] {
            buf.extend_from_slice(&v.to_be_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Intensity scaled linearly from 0 to its maximum.
pub fn write_intensity_pgm<W: Write>(f: &ComplexField, w: W) -> Result<()> {
    let intensity = f.intensity();
    let max = intensity.iter().copied().fold(0.0, f64::max);
    let levels: Vec<u16> = intensity
        .iter()
        .map(|&v| if max > 0.0 { (v / max * 65535.0).round() as u16 } else { 0 })
        .collect();
    write_pgm(&f.grid, &levels, w)
}

/// Phase mapped from `(-π, π]` onto `0..=65535`; reported at every pixel.
pub fn write_phase_pgm<W: Write>(f: &ComplexField, w: W) -> Result<()> {
    let levels: Vec<u16> = f
        .samples
        .iter()
        .map(|s| {
            let p = if s.arg() == -PI { PI } else { s.arg() };
            ((p + PI) / (2.0 * PI) * 65535.0).round() as u16
        })
        .collect();
    write_pgm(&f.grid, &levels, w)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_mask_csv<W: Write>(pinholes: &[Pinhole], mut w: W) -> Result<()> {
    let mut s = String::from("x_m,y_m,radius_m\n");
    for p in pinholes {
        s.push_str(&format!("{},{},{}\n", num(p.x), num(p.y), num(p.radius)));
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_mask_csv<R: Read>(mut r: R) -> Result<Vec<Pinhole>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("x_m,y_m,radius_m") {
        return Err(Error::Format("mask CSV must start with header x_m,y_m,radius_m".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("mask CSV row {}: {e}", k + 1)))?;
            match v.as_slice() {
                &[x, y, radius] => Ok(Pinhole { x, y, radius }),
                _ => Err(Error::Format(format!("mask CSV row {} needs 3 columns", k + 1))),
            }
        })
        .collect()
}

pub fn write_spectrum_csv<W: Write>(s: &OamSpectrum, mut w: W) -> Result<()> {
    let mut out = String::from("ell,power\n");
    for &(ell, p) in &s.entries {
        out.push_str(&format!("{ell},{}\n", num(p)));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_coeffs_csv<W: Write>(c: &CoeffTable, mut w: W) -> Result<()> {
    let mut out = String::from("p,ell,re,im\n");
    for (p, ell, v) in c.iter() {
        out.push_str(&format!("{p},{ell},{},{}\n", num(v.re), num(v.im)));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_zstack_manifest<W: Write>(delta_f: &[f64], ring_rms: &[f64], mut w: W) -> Result<()> {
    let mut out = String::from("delta_f_m,ring_rms_radius_m\n");
    for (d, r) in delta_f.iter().zip(ring_rms) {
        out.push_str(&format!("{},{}\n", num(*d), num(*r)));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
