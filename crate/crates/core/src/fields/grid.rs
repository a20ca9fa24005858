use super::FormField;
use crate::error::{Error, Result};
use crate::exterior::{binomial, Multivector};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Uniform grid on `[-L, L)^n` with `N` (even) points per axis; node `j` sits at `-L + j h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, points: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid dimension must be positive".into()));
        }
        if points == 0 || points % 2 == 1 {
            return Err(Error::InvalidArgument(format!("points per axis must be even, got {points}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self {
            n,
            half_width,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Multi-index of a flat (row-major) index.
    pub fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.n).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn point(&self, flat: usize, x: &mut [f64]) {
        let h = self.spacing();
        let mut f = flat;
        for a in (0..self.n).rev() {
            x[a] = -self.half_width + (f % self.points) as f64 * h;
            f /= self.points;
        }
    }

    /// The frequency grid: spacing `1/(2L)`, half width `N/(4L)`.
    pub fn dual(&self) -> Self {
        Self {
            n: self.n,
            half_width: self.points as f64 / (4.0 * self.half_width),
            points: self.points,
        }
    }

    /// A grid with the same spacing and `factor` times the extent.
    pub fn extended(&self, factor: usize) -> Self {
        Self {
            n: self.n,
            half_width: self.half_width * factor as f64,
            points: self.points * factor,
        }
    }

    /// Offset of this grid's node 0 inside `outer`, when the nodes align.
    pub fn offset_in(&self, outer: &GridSpec) -> Result<usize> {
        let h = self.spacing();
        let shift = (self.half_width - outer.half_width) / h;
        let off = (-shift).round();
        if self.n != outer.n
            || (outer.spacing() - h).abs() > 1e-12 * h
            || (off + shift).abs() > 1e-9
            || off < 0.0
            || off as usize + self.points > outer.points
        {
            return Err(Error::InvalidArgument("grids are not nested on a common lattice".into()));
        }
        Ok(off as usize)
    }

    fn contains_axis(&self, t: f64) -> bool {
        let s = (t + self.half_width) / self.spacing();
        (0.0..=(self.points - 1) as f64).contains(&s)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&t| self.contains_axis(t))
    }
}

/// Lagrange weights of the 4-point stencil covering `t` on axis of `grid`.
fn cubic_stencil(grid: &GridSpec, t: f64) -> (usize, [f64; 4]) {
    let s = (t + grid.half_width) / grid.spacing();
    let last = grid.points as isize - 4;
    let base = ((s.floor() as isize) - 1).clamp(0, last.max(0)) as usize;
    let u = s - base as f64;
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut acc = 1.0;
        for m in 0..4 {
            if m != j {
                acc *= (u - m as f64) / (j as f64 - m as f64);
            }
        }
        *wj = acc;
    }
    (base, w)
}

/// Tensor-product cubic Lagrange interpolation of `ncomp`-component data.
pub(crate) fn interpolate_cubic(grid: &GridSpec, ncomp: usize, data: &[f64], x: &[f64], out: &mut [f64]) -> Result<()> {
    let n = grid.n;
    if !grid.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let stencils: Vec<(usize, [f64; 4])> = x.iter().map(|&t| cubic_stencil(grid, t)).collect();
    out.iter_mut().for_each(|v| *v = 0.0);
    let taps = 4usize.pow(n as u32);
    for tap in 0..taps {
        let mut flat = 0;
        let mut w = 1.0;
        let mut t = tap;
        for (base, ws) in &stencils {
            let j = t % 4;
            t /= 4;
            flat = flat * grid.points + base + j;
            w *= ws[j];
        }
        if w == 0.0 {
            continue;
        }
        let row = &data[flat * ncomp..(flat + 1) * ncomp];
        for (o, v) in out.iter_mut().zip(row) {
            *o += w * v;
        }
    }
    Ok(())
}

/// A `p`-form sampled on a grid; layout is row-major over axes, then blade rank.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: GridSpec,
    p: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    format_version: u32,
    n: usize,
    p: usize,
    grid: GridHeader,
    blade_order: String,
    layout: String,
    scalar: String,
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    points: usize,
}

const LAYOUT: &str = "row-major axes then blade rank";

impl GridField {
    pub fn zeros(grid: GridSpec, p: usize) -> Self {
        let len = grid.len() * binomial(grid.n, p);
        Self {
            grid,
            p,
            data: vec![0.0; len],
        }
    }

    pub fn from_data(grid: GridSpec, p: usize, data: Vec<f64>) -> Result<Self> {
        if p > grid.n {
            return Err(Error::DegreeOutOfRange { degree: p, n: grid.n });
        }
        let len = grid.len() * binomial(grid.n, p);
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: data.len(),
            });
        }
        Ok(Self { grid, p, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn components(&self) -> usize {
        binomial(self.grid.n, self.p)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn value(&self, flat: usize) -> &[f64] {
        let c = self.components();
        &self.data[flat * c..(flat + 1) * c]
    }

    pub fn value_at(&self, idx: &[usize]) -> Multivector {
        Multivector::from_coeffs(self.grid.n, self.p, self.value(self.grid.flatten(idx)).to_vec()).expect("stored values are valid")
    }

    pub fn interpolate(&self, x: &[f64]) -> Result<Multivector> {
        let mut out = vec![0.0; self.components()];
        interpolate_cubic(&self.grid, self.components(), &self.data, x, &mut out)?;
        Multivector::from_coeffs(self.grid.n, self.p, out)
    }

    /// `sqrt(h^n Σ |F|²)`, the grid approximation of the L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn rel_l2_error(&self, reference: &Self) -> Result<f64> {
        self.check_compatible(reference)?;
        let num: f64 = self.data.iter().zip(&reference.data).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = reference.data.iter().map(|b| b * b).sum();
        Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
    }

    pub fn linf_error(&self, reference: &Self) -> Result<f64> {
        self.check_compatible(reference)?;
        Ok(self.data.iter().zip(&reference.data).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.p != other.p {
            return Err(Error::InvalidArgument("fields live on different grids or degrees".into()));
        }
        Ok(())
    }

    /// The restriction of this field to a nested grid with the same spacing.
    pub fn crop(&self, inner: &GridSpec) -> Result<Self> {
        let off = inner.offset_in(&self.grid)?;
        let c = self.components();
        let mut out = Self::zeros(*inner, self.p);
        let mut idx = vec![0; inner.n];
        for flat in 0..inner.len() {
            inner.unflatten(flat, &mut idx);
            idx.iter_mut().for_each(|i| *i += off);
            let src = self.grid.flatten(&idx);
            out.data[flat * c..(flat + 1) * c].copy_from_slice(&self.data[src * c..(src + 1) * c]);
        }
        Ok(out)
    }

    /// Embeds this field in a larger aligned grid, filling the rest with zeros.
    pub fn zero_pad(&self, outer: &GridSpec) -> Result<Self> {
        let off = self.grid.offset_in(outer)?;
        let c = self.components();
        let mut out = Self::zeros(*outer, self.p);
        let mut idx = vec![0; self.grid.n];
        for flat in 0..self.grid.len() {
            self.grid.unflatten(flat, &mut idx);
            idx.iter_mut().for_each(|i| *i += off);
            let dst = outer.flatten(&idx);
            out.data[dst * c..(dst + 1) * c].copy_from_slice(&self.data[flat * c..(flat + 1) * c]);
        }
        Ok(out)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = FieldHeader {
            format_version: 1,
            n: self.grid.n,
            p: self.p,
            grid: GridHeader {
                half_width: self.grid.half_width,
                points: self.grid.points,
            },
            blade_order: "lex".into(),
            layout: LAYOUT.into(),
            scalar: "f64-le".into(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let header: FieldHeader = serde_json::from_str(line.trim_end())?;
        if header.format_version != 1 || header.blade_order != "lex" || header.layout != LAYOUT || header.scalar != "f64-le" {
            return Err(Error::Format("unsupported field header".into()));
        }
        let grid = GridSpec::new(header.n, header.grid.half_width, header.grid.points)?;
        let len = grid.len() * binomial(header.n, header.p);
        let mut bytes = Vec::with_capacity(len * 8);
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(Error::Format(format!("payload has {} bytes, expected {}", bytes.len(), len * 8)));
        }
        let data = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        Self::from_data(grid, header.p, data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

/// A grid field viewed as a form on all of `R^n`, zero outside the grid box.
pub struct ZeroExtended<'a>(pub &'a GridField);

impl FormField for ZeroExtended<'_> {
    fn n(&self) -> usize {
        self.0.grid.n
    }

    fn degree(&self) -> usize {
        self.0.p
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let f = self.0;
        if interpolate_cubic(&f.grid, f.components(), &f.data, x, out).is_err() {
            out.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = GridSpec::new(2, 8.0, 64).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.coord(32), 0.0);
        let d = g.dual();
        assert_eq!(d.spacing(), 1.0 / 16.0);
        assert_eq!(d.dual(), g);
        assert!(GridSpec::new(2, 8.0, 63).is_err());
        let mut idx = [0; 2];
        g.unflatten(g.flatten(&[3, 17]), &mut idx);
        assert_eq!(idx, [3, 17]);
    }

    #[test]
    fn crop_and_pad_round_trip() {
        let g = GridSpec::new(2, 2.0, 8).unwrap();
        let data: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
        let f = GridField::from_data(g, 0, data).unwrap();
        let big = g.extended(2);
        let padded = f.zero_pad(&big).unwrap();
        assert_eq!(padded.crop(&g).unwrap(), f);
        assert_eq!(padded.value_at(&[0, 0]).coeffs()[0], 0.0);
        assert_eq!(padded.value_at(&[4, 4]).coeffs()[0], 0.0 + f.value(0)[0]);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = GridSpec::new(2, 1.0, 10).unwrap();
        let f = |x: &[f64]| 1.0 + x[0] - 2.0 * x[1] * x[1] * x[0] + x[1].powi(3);
        let mut data = vec![0.0; g.len()];
        let mut x = [0.0; 2];
        for (i, d) in data.iter_mut().enumerate() {
            g.point(i, &mut x);
            *d = f(&x);
        }
        let field = GridField::from_data(g, 0, data).unwrap();
        for q in [[0.13, -0.77], [-1.0, 0.79], [0.5, 0.5]] {
            let v = field.interpolate(&q).unwrap().coeffs()[0];
            assert!((v - f(&q)).abs() < 1e-12, "{q:?}");
        }
        assert!(field.interpolate(&[0.9, 0.0]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let g = GridSpec::new(3, 1.5, 4).unwrap();
        let data: Vec<f64> = (0..g.len() * 3).map(|i| (i as f64).sin()).collect();
        let f = GridField::from_data(g, 1, data).unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let header_end = buf.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&buf[..header_end]).unwrap();
        assert_eq!(header["grid"]["N"], 4);
        assert_eq!(header["layout"], LAYOUT);
        assert_eq!(buf.len() - header_end - 1, g.len() * 3 * 8);
        let back = GridField::read_from(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert!(GridField::read_from(&buf[..buf.len() - 1]).is_err());
    }
}
