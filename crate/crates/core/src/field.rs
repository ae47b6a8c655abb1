//! Dense square-grid scalar fields over a disk, with serialization.
//!
//! A field covers the bounding box `[-R, R]^2` of the disk of radius `R` with
//! an odd number of nodes per side so the center lands on a node. Values are
//! stored row-major over the full box; the mask marks strict-interior disk
//! nodes. Nodes outside the open disk form the boundary layer where Dirichlet
//! data lives (nearest-node boundary treatment: no cut cells). The extent of
//! the box equals `R` exactly, so every masked-interior node has its four
//! neighbors in-grid by construction.
//!
//! Two on-disk formats are supported and round-trip bit-identically:
//! a compact binary dump (magic `DCLF`) and a plain CSV table.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DCLF";
const FORMAT_VERSION: u16 = 1;

/// Disk-domain description: radius and grid spacing. The spacing must divide
/// the radius so nodes land exactly on the axes' boundary points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub radius: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn new(radius: f64, h: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Argument(format!(
                "domain radius must be positive, got {radius}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Argument(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let half = (radius / h).round();
        if half < 2.0 || (half * h - radius).abs() > 1e-9 * radius.max(1.0) {
            return Err(Error::Argument(format!(
                "grid spacing {h} must divide the radius {radius} with at least 2 cells per half-side"
            )));
        }
        Ok(GridSpec { radius, h })
    }

    /// Nodes per side (odd, center on a node).
    pub fn nodes_per_side(&self) -> usize {
        2 * ((self.radius / self.h).round() as usize) + 1
    }
}

/// Scalar values on the uniform grid covering `[-R, R]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n: usize,
    h: f64,
    origin: [f64; 2],
    radius: f64,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Field {
    /// Zero-filled field on the disk grid.
    pub fn disk(radius: f64, h: f64) -> Result<Self> {
        let spec = GridSpec::new(radius, h)?;
        let n = spec.nodes_per_side();
        let half = (n / 2) as f64;
        let origin = [-half * h, -half * h];
        let mut mask = vec![false; n * n];
        let r2_cut = radius * radius * (1.0 - 1e-12);
        for i in 0..n {
            let x = origin[0] + i as f64 * h;
            for j in 0..n {
                let y = origin[1] + j as f64 * h;
                mask[i * n + j] = x * x + y * y < r2_cut;
            }
        }
        Ok(Field {
            n,
            h,
            origin,
            radius,
            values: vec![0.0; n * n],
            mask,
        })
    }

    /// Field sampled from a function of physical coordinates; the function is
    /// evaluated on the boundary layer too, so exact solutions extend cleanly
    /// past the disk for stencil tests.
    pub fn from_fn(radius: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut field = Self::disk(radius, h)?;
        for i in 0..field.n {
            for j in 0..field.n {
                let (x, y) = field.point(i, j);
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::Argument(format!(
                        "field value not finite at ({x}, {y}): {v}"
                    )));
                }
                field.values[i * field.n + j] = v;
            }
        }
        Ok(field)
    }

    pub fn constant(radius: f64, h: f64, c: f64) -> Result<Self> {
        Self::from_fn(radius, h, |_, _| c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn set_value(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n + j] = v;
    }

    /// Physical coordinates of node `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        )
    }

    /// True when the node lies strictly inside the disk.
    #[inline]
    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Indices of all strict-interior nodes, row-major order.
    pub fn interior_indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.mask[i * self.n + j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Overwrite the boundary layer (mask complement) from a function of
    /// physical coordinates; interior values are untouched.
    pub fn fill_exterior(&mut self, f: impl Fn(f64, f64) -> f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.mask[i * self.n + j] {
                    let (x, y) = self.point(i, j);
                    self.values[i * self.n + j] = f(x, y);
                }
            }
        }
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        self.n == other.n
            && self.h == other.h
            && (self.origin[0] - other.origin[0]).abs() <= 1e-12
            && (self.origin[1] - other.origin[1]).abs() <= 1e-12
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} grid (h = {}) vs {}x{} grid (h = {})",
                self.n, self.n, self.h, other.n, other.n, other.h
            )))
        }
    }

    /// Sup norm over strict-interior nodes.
    pub fn interior_sup_abs(&self) -> f64 {
        let mut sup = 0.0f64;
        for (k, &v) in self.values.iter().enumerate() {
            if self.mask[k] {
                sup = sup.max(v.abs());
            }
        }
        sup
    }

    pub fn interior_max(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (k, &v) in self.values.iter().enumerate() {
            if self.mask[k] {
                m = m.max(v);
            }
        }
        m
    }

    pub fn interior_min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (k, &v) in self.values.iter().enumerate() {
            if self.mask[k] {
                m = m.min(v);
            }
        }
        m
    }

    /// Bilinear interpolation at a physical point; the point must lie within
    /// the grid's bounding box.
    pub fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        let fx = (x - self.origin[0]) / self.h;
        let fy = (y - self.origin[1]) / self.h;
        let max = (self.n - 1) as f64;
        if !(fx >= -1e-9 && fx <= max + 1e-9 && fy >= -1e-9 && fy <= max + 1e-9) {
            return Err(Error::Argument(format!(
                "interpolation point ({x}, {y}) outside the grid box"
            )));
        }
        let i0 = (fx.floor().max(0.0) as usize).min(self.n - 2);
        let j0 = (fy.floor().max(0.0) as usize).min(self.n - 2);
        let tx = (fx - i0 as f64).clamp(0.0, 1.0);
        let ty = (fy - j0 as f64).clamp(0.0, 1.0);
        let v00 = self.value(i0, j0);
        let v10 = self.value(i0 + 1, j0);
        let v01 = self.value(i0, j0 + 1);
        let v11 = self.value(i0 + 1, j0 + 1);
        Ok(v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty)
    }

    // -- serialization ----------------------------------------------------

    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n as f64).to_le_bytes())?;
        w.write_all(&self.h.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config(format!(
                "field file: bad magic {magic:?}, expected {MAGIC:?}"
            )));
        }
        let mut v2 = [0u8; 2];
        r.read_exact(&mut v2)?;
        let version = u16::from_le_bytes(v2);
        if version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "field file: unsupported version {version}"
            )));
        }
        let mut v8 = [0u8; 8];
        r.read_exact(&mut v8)?;
        let n_f = f64::from_le_bytes(v8);
        r.read_exact(&mut v8)?;
        let h = f64::from_le_bytes(v8);
        if !(n_f.is_finite() && n_f >= 5.0 && n_f.fract() == 0.0) {
            return Err(Error::Config(format!(
                "field file: node count must be an integer >= 5, got {n_f}"
            )));
        }
        let n = n_f as usize;
        if n % 2 == 0 {
            return Err(Error::Config(format!(
                "field file: node count must be odd (center on a node), got {n}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!(
                "field file: spacing must be positive, got {h}"
            )));
        }
        let mut values = vec![0.0f64; n * n];
        for v in values.iter_mut() {
            r.read_exact(&mut v8)?;
            *v = f64::from_le_bytes(v8);
        }
        let radius = (n / 2) as f64 * h;
        let mut field = Field::disk(radius, h)?;
        field.values = values;
        Ok(field)
    }

    pub fn write_binary_file(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_binary_file(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_binary(&mut r)
    }

    /// CSV with header `i,j,x,y,value`, one row per node in row-major order,
    /// LF line endings, shortest round-trip float formatting.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"i,j,x,y,value\n")?;
        for i in 0..self.n {
            for j in 0..self.n {
                let (x, y) = self.point(i, j);
                writeln!(w, "{i},{j},{x},{y},{}", self.value(i, j))?;
            }
        }
        Ok(())
    }

    pub fn read_csv(r: &mut impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("field csv: empty file".into()))??;
        if header.trim_end() != "i,j,x,y,value" {
            return Err(Error::Config(format!(
                "field csv: bad header {header:?}"
            )));
        }
        let mut rows: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 5 {
                return Err(Error::Config(format!(
                    "field csv: expected 5 columns, got {}",
                    parts.len()
                )));
            }
            let parse_u = |s: &str| {
                s.trim().parse::<usize>().map_err(|e| {
                    Error::Config(format!("field csv: bad index {s:?}: {e}"))
                })
            };
            let parse_f = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("field csv: bad number {s:?}: {e}"))
                })
            };
            rows.push((
                parse_u(parts[0])?,
                parse_u(parts[1])?,
                parse_f(parts[2])?,
                parse_f(parts[3])?,
                parse_f(parts[4])?,
            ));
        }
        let n = rows
            .iter()
            .map(|r| r.0.max(r.1))
            .max()
            .ok_or_else(|| Error::Config("field csv: no data rows".into()))?
            + 1;
        if n < 5 || n % 2 == 0 {
            return Err(Error::Config(format!(
                "field csv: node count must be odd and >= 5, got {n}"
            )));
        }
        if rows.len() != n * n {
            return Err(Error::Config(format!(
                "field csv: expected {} rows for a {n}x{n} grid, got {}",
                n * n,
                rows.len()
            )));
        }
        let mut x_at_0 = None;
        let mut x_at_1 = None;
        for &(i, _, x, _, _) in &rows {
            if i == 0 {
                x_at_0 = Some(x);
            } else if i == 1 {
                x_at_1 = Some(x);
            }
        }
        let (x0, x1) = match (x_at_0, x_at_1) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Config("field csv: missing index rows".into())),
        };
        let h = x1 - x0;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!(
                "field csv: inferred spacing not positive: {h}"
            )));
        }
        let radius = (n / 2) as f64 * h;
        let mut field = Field::disk(radius, h)?;
        let mut seen = vec![false; n * n];
        for (i, j, _, _, v) in rows {
            if i >= n || j >= n {
                return Err(Error::Config(format!(
                    "field csv: index ({i}, {j}) outside {n}x{n} grid"
                )));
            }
            if seen[i * n + j] {
                return Err(Error::Config(format!(
                    "field csv: duplicate row for ({i}, {j})"
                )));
            }
            seen[i * n + j] = true;
            field.values[i * n + j] = v;
        }
        Ok(field)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_csv(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disk_grid_geometry() {
        let f = Field::disk(1.0, 0.25).unwrap();
        assert_eq!(f.n(), 9);
        let (cx, cy) = f.point(4, 4);
        assert_eq!((cx, cy), (0.0, 0.0));
        let (x, y) = f.point(0, 0);
        assert_eq!((x, y), (-1.0, -1.0));
        assert!(f.is_inside(4, 4));
        // Axis endpoints sit exactly on the circle: boundary layer.
        assert!(!f.is_inside(0, 4));
        assert!(!f.is_inside(8, 4));
        assert!(!f.is_inside(0, 0));
    }

    #[test]
    fn every_interior_node_has_in_grid_neighbors() {
        let f = Field::disk(1.0, 1.0 / 16.0).unwrap();
        for (i, j) in f.interior_indices() {
            assert!(i >= 1 && i + 1 < f.n() && j >= 1 && j + 1 < f.n());
        }
        // Interior area approximates the disk area.
        let area = f.interior_count() as f64 * f.h() * f.h();
        assert_relative_eq!(area, std::f64::consts::PI, max_relative = 0.05);
    }

    #[test]
    fn spacing_must_divide_the_radius() {
        assert!(Field::disk(1.0, 0.3).is_err());
        assert!(Field::disk(1.0, 0.26).is_err());
        assert!(Field::disk(1.0, 0.6).is_err()); // fewer than 2 cells per half-side
        assert!(Field::disk(0.0, 0.1).is_err());
        assert!(GridSpec::new(1.0, 1.0 / 256.0).is_ok());
    }

    #[test]
    fn from_fn_rejects_non_finite_values() {
        assert!(Field::from_fn(1.0, 0.25, |x, _| 1.0 / x).is_err());
        let f = Field::from_fn(1.0, 0.25, |x, y| x + y).unwrap();
        assert_eq!(f.value(4, 4), 0.0);
        let (x, y) = f.point(6, 2);
        assert_eq!(f.value(6, 2), x + y);
    }

    #[test]
    fn exterior_fill_leaves_interior_untouched() {
        let mut f = Field::constant(1.0, 0.25, 2.0).unwrap();
        f.fill_exterior(|_, _| -1.0);
        assert_eq!(f.value(4, 4), 2.0);
        assert_eq!(f.value(0, 0), -1.0);
        assert_eq!(f.interior_min(), 2.0);
        assert_eq!(f.interior_max(), 2.0);
    }

    #[test]
    fn binary_round_trip_is_bit_identical() {
        let mut f = Field::from_fn(1.0, 1.0 / 8.0, |x, y| (x * 117.3).sin() * y + 1.0 / 3.0).unwrap();
        f.set_value(3, 5, 1e-300);
        f.set_value(2, 2, -2.5e17);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        let g = Field::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(f.n(), g.n());
        assert_eq!(f.h(), g.h());
        assert_eq!(f.mask(), g.mask());
    }

    #[test]
    fn binary_rejects_corrupt_headers() {
        let f = Field::constant(1.0, 0.25, 1.0).unwrap();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(Field::read_binary(&mut bad_magic.as_slice()).is_err());

        let mut bad_version = buf.clone();
        bad_version[4] = 9;
        assert!(Field::read_binary(&mut bad_version.as_slice()).is_err());

        let truncated = &buf[..buf.len() - 3];
        assert!(Field::read_binary(&mut &truncated[..]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let mut f = Field::from_fn(1.0, 1.0 / 8.0, |x, y| x * x - 0.7 * y).unwrap();
        f.set_value(1, 1, 1.0 / 3.0);
        f.set_value(5, 9, -1e-17);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,x,y,value\n"));
        assert!(!text.contains('\r'));
        let g = Field::read_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(f.h(), g.h());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(Field::read_csv(&mut "nope\n1,2,3\n".as_bytes()).is_err());
        assert!(Field::read_csv(&mut "i,j,x,y,value\n0,0,0,0\n".as_bytes()).is_err());
        // Wrong row count for the inferred grid.
        assert!(Field::read_csv(&mut "i,j,x,y,value\n6,6,1,1,0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn interpolation_matches_bilinear_hand_values() {
        let f = Field::from_fn(1.0, 0.5, |x, y| 2.0 * x + 3.0 * y).unwrap();
        // Linear functions are reproduced exactly.
        assert_relative_eq!(f.interpolate(0.3, -0.2).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            f.interpolate(0.13, 0.41).unwrap(),
            2.0 * 0.13 + 3.0 * 0.41,
            epsilon = 1e-12
        );
        assert!(f.interpolate(1.5, 0.0).is_err());
    }

    #[test]
    fn grid_identity_checks() {
        let a = Field::disk(1.0, 0.25).unwrap();
        let b = Field::disk(1.0, 0.25).unwrap();
        let c = Field::disk(1.0, 0.125).unwrap();
        assert!(a.same_grid(&b));
        assert!(!a.same_grid(&c));
        assert!(a.check_same_grid(&c).is_err());
    }
}
