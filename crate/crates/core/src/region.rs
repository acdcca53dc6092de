//! Secrecy maps over a floor grid: per-cell upper bound with the
//! eavesdropper at the cell centre, and the mask of cells where the
//! secrecy capacity is zero.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::avg_bounds::{upper_bound_avg, AvgConstraints};
use crate::error::{Error, Result};
use crate::peak_bounds::{upper_bound_peak, PeakConstraints};
use crate::scenario::{channel_gain, is_degraded_secure, validate_sigmas, LinkGains, PdParams, Position};

/// Rectangular grid of cells on a horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Height of the receiver plane.
    pub z: f64,
}

/// Upper limit on `nx * ny` for a region map.
pub const MAX_GRID_CELLS: usize = 25_000_000;

impl FloorGrid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize, z: f64) -> Result<Self> {
        let g = Self { x_range, y_range, nx, ny, z };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_range.0, self.x_range.1, self.y_range.0, self.y_range.1, self.z]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_range.1 <= self.x_range.0 || self.y_range.1 <= self.y_range.0 {
            return Err(Error::invalid("grid extents must be finite with positive width"));
        }
        if self.nx.saturating_mul(self.ny) > MAX_GRID_CELLS {
            return Err(Error::invalid(format!(
                "grid of {} x {} cells exceeds the limit of {MAX_GRID_CELLS}",
                self.nx, self.ny
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 cells per axis (got {} x {})",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn cell_width(&self) -> (f64, f64) {
        (
            (self.x_range.1 - self.x_range.0) / self.nx as f64,
            (self.y_range.1 - self.y_range.0) / self.ny as f64,
        )
    }

    /// Centre of cell `(i, j)`; `i` indexes x, `j` indexes y.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let (dx, dy) = self.cell_width();
        (
            self.x_range.0 + (i as f64 + 0.5) * dx,
            self.y_range.0 + (j as f64 + 0.5) * dy,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    AvgUpper,
    PeakUpper,
}

/// Operating point used for the per-cell bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionConstraints {
    Avg(AvgConstraints),
    Peak(PeakConstraints),
}

impl RegionConstraints {
    pub fn kind(&self) -> BoundKind {
        match self {
            Self::Avg(_) => BoundKind::AvgUpper,
            Self::Peak(_) => BoundKind::PeakUpper,
        }
    }
}

/// Fixed part of the scenario while the eavesdropper moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSetup {
    pub alice: Position,
    pub bob: Position,
    pub pd: PdParams,
    pub sigma_b: f64,
    pub sigma_e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub grid: FloorGrid,
    /// `values[i][j]` is the raw upper bound with Eve at cell `(i, j)`, or
    /// 0 where the cell is insecure.
    pub values: Vec<Vec<f64>>,
    pub insecure_mask: Vec<Vec<bool>>,
}

impl RegionMap {
    pub fn insecure_count(&self) -> usize {
        self.insecure_mask.iter().flatten().filter(|&&b| b).count()
    }
}

/// Evaluates the selected upper bound for every cell. Cells are processed
/// in parallel; the output layout does not depend on scheduling.
pub fn insecure_region(setup: &RegionSetup, grid: &FloorGrid, constraints: &RegionConstraints) -> Result<RegionMap> {
    grid.validate()?;
    validate_sigmas(setup.sigma_b, setup.sigma_e)?;
    setup.pd.validate()?;
    if setup.alice.z <= grid.z {
        return Err(Error::invalid("transmitter must be above the receiver plane"));
    }
    let h_b = channel_gain(setup.alice, setup.bob, &setup.pd)?;

    let cells: Vec<(f64, bool)> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / grid.ny, k % grid.ny);
            let (x, y) = grid.center(i, j);
            let h_e = channel_gain(setup.alice, Position::new(x, y, grid.z), &setup.pd)?;
            let g = LinkGains { h_b, h_e };
            if !is_degraded_secure(&g, setup.sigma_b, setup.sigma_e) {
                return Ok((0.0, true));
            }
            let v = match constraints {
                RegionConstraints::Avg(c) => upper_bound_avg(&g, c, setup.sigma_b, setup.sigma_e)?,
                RegionConstraints::Peak(c) => upper_bound_peak(&g, c, setup.sigma_b, setup.sigma_e)?,
            };
            Ok((v, false))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; grid.ny]; grid.nx];
    let mut insecure_mask = vec![vec![false; grid.ny]; grid.nx];
    for (k, (v, bad)) in cells.into_iter().enumerate() {
        values[k / grid.ny][k % grid.ny] = v;
        insecure_mask[k / grid.ny][k % grid.ny] = bad;
    }
    Ok(RegionMap {
        grid: *grid,
        values,
        insecure_mask,
    })
}

/// Formats `v` with 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.8e}");
    // Prefer plain notation when it is no longer than scientific.
    let exp: i32 = s.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let plain = format!("{v:.decimals$}");
        let plain = if plain.contains('.') {
            plain.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            plain
        };
        return plain;
    }
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

/// Writes the map as CSV with header `x,y,bound_nats,insecure`, one row
/// per cell, x-major (all y for the first x, then the next x).
pub fn write_region_csv<W: Write>(m: &RegionMap, out: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "x,y,bound_nats,insecure")?;
    for i in 0..m.grid.nx {
        for j in 0..m.grid.ny {
            let (x, y) = m.grid.center(i, j);
            writeln!(
                w,
                "{},{},{},{}",
                fmt_sig9(x),
                fmt_sig9(y),
                fmt_sig9(m.values[i][j]),
                u8::from(m.insecure_mask[i][j])
            )?;
        }
    }
    w.flush()
}

pub fn export_region_csv(m: &RegionMap, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_region_csv(m, file).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One parsed row of a region CSV.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct RegionRow {
    pub x: f64,
    pub y: f64,
    pub bound_nats: f64,
    #[serde(deserialize_with = "de_flag")]
    pub insecure: bool,
}

fn de_flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let v: u8 = serde::Deserialize::deserialize(d)?;
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(serde::de::Error::custom("insecure flag must be 0 or 1")),
    }
}

/// Parses region CSV text. Header and column order must match
/// [`write_region_csv`].
pub fn parse_region_csv<R: Read>(input: R) -> std::result::Result<Vec<RegionRow>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "bound_nats", "insecure"] {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", headers),
        )));
    }
    rdr.deserialize().collect()
}

pub fn read_region_csv(path: &Path) -> Result<Vec<RegionRow>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_region_csv(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(bob: Position) -> RegionSetup {
        RegionSetup {
            alice: Position::new(5.0, 5.0, 3.0),
            bob,
            pd: PdParams::table_i(),
            sigma_b: 1.0,
            sigma_e: 1.0,
        }
    }

    fn avg() -> RegionConstraints {
        RegionConstraints::Avg(AvgConstraints::new(0.2, 1e6).unwrap())
    }

    #[test]
    fn grid_validation() {
        assert!(FloorGrid::new((0.0, 10.0), (0.0, 10.0), 1, 5, 0.0).is_err());
        assert!(FloorGrid::new((0.0, 0.0), (0.0, 10.0), 5, 5, 0.0).is_err());
        let g = FloorGrid::new((0.0, 10.0), (0.0, 4.0), 5, 2, 0.0).unwrap();
        assert_eq!(g.center(0, 0), (1.0, 1.0));
        assert_eq!(g.center(4, 1), (9.0, 3.0));
    }

    #[test]
    fn values_grow_along_rays_from_the_nadir() {
        // Cell centers at multiples of 0.1 so that (5, 5) is a center.
        let grid = FloorGrid::new((-0.05, 10.05), (-0.05, 10.05), 101, 101, 0.0).unwrap();
        let peak = RegionConstraints::Peak(PeakConstraints::new(0.3, 1e6, 1e6).unwrap());
        for c in [avg(), peak] {
            let m = insecure_region(&setup(Position::new(6.5, 4.0, 0.0)), &grid, &c).unwrap();
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)] {
                let ray: Vec<f64> = (0..=50i64)
                    .map(|k| m.values[(50 + k * di) as usize][(50 + k * dj) as usize])
                    .collect();
                assert!(ray.windows(2).all(|w| w[1] >= w[0]), "direction ({di}, {dj})");
                assert_eq!(ray[0], 0.0);
            }
        }
    }

    #[test]
    fn nadir_bob_has_no_insecure_cells() {
        let grid = FloorGrid::new((0.0, 10.0), (0.0, 10.0), 40, 40, 0.0).unwrap();
        let m = insecure_region(&setup(Position::new(5.0, 5.0, 0.0)), &grid, &avg()).unwrap();
        assert_eq!(m.insecure_count(), 0);
    }

    #[test]
    fn corner_bob_makes_everything_insecure() {
        let grid = FloorGrid::new((0.0, 10.0), (0.0, 10.0), 40, 40, 0.0).unwrap();
        let m = insecure_region(&setup(Position::new(0.0, 0.0, 0.0)), &grid, &avg()).unwrap();
        assert_eq!(m.insecure_count(), 1600);
    }

    #[test]
    fn mask_matches_values() {
        let grid = FloorGrid::new((0.0, 10.0), (0.0, 10.0), 30, 30, 0.0).unwrap();
        let m = insecure_region(&setup(Position::new(3.0, 6.0, 0.0)), &grid, &avg()).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                if m.insecure_mask[i][j] {
                    assert_eq!(m.values[i][j], 0.0);
                } else {
                    assert!(m.values[i][j] != 0.0);
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let grid = FloorGrid::new((0.0, 10.0), (0.0, 10.0), 2, 2, 0.0).unwrap();
        let m = insecure_region(&setup(Position::new(4.0, 5.0, 0.0)), &grid, &avg()).unwrap();
        let mut buf = Vec::new();
        write_region_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 5);
        let rows = parse_region_csv(buf.as_slice()).unwrap();
        for (k, r) in rows.iter().enumerate() {
            let v = m.values[k / 2][k % 2];
            // Nine significant digits bound the relative rounding error by 5e-9.
            assert!((r.bound_nats - v).abs() <= 5e-9 * v.abs().max(1e-300));
            assert_eq!(r.insecure, m.insecure_mask[k / 2][k % 2]);
        }
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(parse_region_csv("a,b,c,d\n1,2,3,0\n".as_bytes()).is_err());
        assert!(parse_region_csv("x,y,bound_nats,insecure\n1,2,3,7\n".as_bytes()).is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(0.123456789123), "0.123456789");
        assert_eq!(fmt_sig9(123456.789123), "123456.789");
        assert_eq!(fmt_sig9(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig9(-2.0e12), "-2e12");
        assert_eq!(fmt_sig9(0.0), "0");
        let v = std::f64::consts::PI;
        assert!((fmt_sig9(v).parse::<f64>().unwrap() - v).abs() < 1e-8);
    }
}
