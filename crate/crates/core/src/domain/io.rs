//! CSV bodies with JSON headers for profiles and grid fields.
//!
//! A profile is written as `<stem>.csv` with columns `rho,value` and
//! `<stem>.json` holding [`ProfileHeader`]; a grid field as `x,y,value`
//! (non-exterior nodes only) with [`FieldHeader`].

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::planar::{GridField, NodeKind, PlanarGrid};
use super::radial::{kappa, radial_weight, RadialBall, RadialProfile};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub n: usize,
    pub radius: f64,
    pub grid_length: usize,
    pub kappa: f64,
    pub radial_weight: f64,
}

impl ProfileHeader {
    pub fn for_ball(ball: &RadialBall) -> Self {
        Self {
            n: ball.n(),
            radius: ball.radius(),
            grid_length: ball.len(),
            kappa: kappa(ball.n()),
            radial_weight: radial_weight(ball.n()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub h: f64,
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub mask_checksum: u64,
}

impl FieldHeader {
    pub fn for_grid(grid: &PlanarGrid) -> Self {
        let (x0, x1, y0, y1) = grid.bounds();
        Self {
            h: grid.h(),
            bounds: [x0, x1, y0, y1],
            nx: grid.nx(),
            ny: grid.ny(),
            mask_checksum: grid.mask_checksum(),
        }
    }
}

pub fn write_profile_csv<W: Write>(profile: &RadialProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "value"])?;
    for (r, v) in profile.ball().rho().iter().zip(profile.values()) {
        w.write_record([fmt(*r), fmt(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_header<W: Write>(profile: &RadialProfile, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ProfileHeader::for_ball(profile.ball()))?;
    Ok(())
}

/// Reads a profile back; the grid is taken from the `rho` column.
pub fn read_profile<R: Read, H: Read>(csv_in: R, header_in: H) -> Result<RadialProfile> {
    let header: ProfileHeader = serde_json::from_reader(header_in)?;
    let mut rdr = csv::Reader::from_reader(csv_in);
    let mut rho = Vec::new();
    let mut v = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rho.push(parse(&rec, 0)?);
        v.push(parse(&rec, 1)?);
    }
    if rho.len() != header.grid_length {
        return Err(LabError::ShapeMismatch { expected: header.grid_length, got: rho.len() });
    }
    let ball = Arc::new(RadialBall::from_grid(header.n, header.radius, rho)?);
    RadialProfile::raw(ball, v)
}

pub fn write_field_csv<W: Write>(field: &GridField, out: W) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value"])?;
    for (k, v) in field.values().iter().enumerate() {
        if grid.kind(k) == NodeKind::Exterior {
            continue;
        }
        let (x, y) = grid.coords(k);
        w.write_record([fmt(x), fmt(y), fmt(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_header<W: Write>(field: &GridField, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &FieldHeader::for_grid(field.grid()))?;
    Ok(())
}

/// Reads field values for an existing grid; the header checksum must
/// match the grid's mask.
pub fn read_field<R: Read, H: Read>(grid: Arc<PlanarGrid>, csv_in: R, header_in: H) -> Result<GridField> {
    let header: FieldHeader = serde_json::from_reader(header_in)?;
    if header.mask_checksum != grid.mask_checksum() || header.nx != grid.nx() || header.ny != grid.ny() {
        return Err(LabError::InvalidDomain("field header does not match grid".into()));
    }
    let mut values = vec![0.0; grid.len()];
    let nodes: Vec<usize> = (0..grid.len()).filter(|&k| grid.kind(k) != NodeKind::Exterior).collect();
    let mut rdr = csv::Reader::from_reader(csv_in);
    let mut count = 0;
    for (rec, &k) in rdr.records().zip(&nodes) {
        values[k] = parse(&rec?, 2)?;
        count += 1;
    }
    if count != nodes.len() {
        return Err(LabError::ShapeMismatch { expected: nodes.len(), got: count });
    }
    GridField::new(grid, values)
}

/// Locale-independent shortest round-trip formatting.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn parse(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| LabError::Parameter(format!("bad CSV field {i} in record {rec:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_roundtrip() {
        let ball = Arc::new(RadialBall::graded(2, 1.5, 64, 1e-8, 1.1).unwrap());
        let p = RadialProfile::from_fn(ball, |r| 0.3 * (r - 2.25)).unwrap();
        let (mut body, mut head) = (Vec::new(), Vec::new());
        write_profile_csv(&p, &mut body).unwrap();
        write_profile_header(&p, &mut head).unwrap();
        let q = read_profile(&body[..], &head[..]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn field_roundtrip_and_checksum() {
        let grid = Arc::new(PlanarGrid::disc(0.0, 0.0, 1.0, 20).unwrap());
        let u = GridField::potential_from_fn(grid.clone(), |x, y| x * x + y * y - 1.0).unwrap();
        let (mut body, mut head) = (Vec::new(), Vec::new());
        write_field_csv(&u, &mut body).unwrap();
        write_field_header(&u, &mut head).unwrap();
        assert_eq!(read_field(grid, &body[..], &head[..]).unwrap(), u);
        let other = Arc::new(PlanarGrid::unit_square(20).unwrap());
        assert!(read_field(other, &body[..], &head[..]).is_err());
    }
}
