//! Field dumps: a flat binary file of little-endian `f64` in row-major node
//! order (`<stem>.bin`) next to a JSON sidecar describing it (`<stem>.json`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cpn::{RadialChart, RadialPotential};
use crate::error::{check_len, Error, Result};
use crate::geometry::TestbedKind;
use crate::torus::{PotentialField, TorusGrid};

pub const FORMAT: &str = "f64-le-row-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub testbed: TestbedKind,
    pub n: usize,
    /// Grid shape; `[N; 2n]` on the torus, `[M]` on the radial chart.
    pub shape: Vec<usize>,
    /// One name per value stored at each node.
    pub columns: Vec<String>,
    /// Constant removed from the stored potential, if any.
    #[serde(default)]
    pub mean: f64,
    /// Radial node positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl FieldHeader {
    pub fn new(testbed: TestbedKind, n: usize, shape: Vec<usize>, columns: Vec<String>) -> Self {
        Self { format: FORMAT.into(), testbed, n, shape, columns, mean: 0.0, nodes: None, extra: Default::default() }
    }

    pub fn num_nodes(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn for_torus(grid: &TorusGrid, columns: Vec<String>) -> Self {
        Self::new(TestbedKind::Torus, grid.dim(), vec![grid.nodes_per_axis(); grid.axes()], columns)
    }

    pub fn for_chart(chart: &RadialChart, columns: Vec<String>) -> Self {
        let mut h = Self::new(TestbedKind::Projective, chart.dim(), vec![chart.num_nodes()], columns);
        h.nodes = Some(chart.nodes().to_vec());
        h
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `data` (node-major, `columns.len()` values per node) and its sidecar.
pub fn write_fields(stem: &Path, header: &FieldHeader, data: &[f64]) -> Result<()> {
    check_len(header.num_nodes() * header.columns.len(), data.len())?;
    let (bin, json) = paths(stem);
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_string_pretty(header)?)?;
    Ok(())
}

pub fn read_fields(stem: &Path) -> Result<(FieldHeader, Vec<f64>)> {
    let (bin, json) = paths(stem);
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(json)?)?;
    if header.format != FORMAT {
        return Err(Error::Domain(format!("unsupported field format `{}`", header.format)));
    }
    let bytes = fs::read(bin)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Domain(format!("binary field length {} is not a multiple of 8", bytes.len())));
    }
    let data: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    check_len(header.num_nodes() * header.columns.len(), data.len())?;
    Ok((header, data))
}

/// Interleaves equally long columns into node-major order.
pub fn interleave(columns: &[&[f64]]) -> Vec<f64> {
    let m = columns.first().map_or(0, |c| c.len());
    (0..m).flat_map(|j| columns.iter().map(move |c| c[j])).collect()
}

pub fn save_torus_potential(stem: &Path, grid: &TorusGrid, phi: &PotentialField) -> Result<()> {
    let mut h = FieldHeader::for_torus(grid, vec!["phi".into()]);
    h.mean = phi.mean;
    write_fields(stem, &h, &phi.values)
}

pub fn load_torus_potential(stem: &Path, grid: &TorusGrid) -> Result<PotentialField> {
    let (h, values) = read_fields(stem)?;
    let expected = FieldHeader::for_torus(grid, vec!["phi".into()]);
    if h.testbed != TestbedKind::Torus
        || h.n != expected.n
        || h.shape != expected.shape
        || h.columns != expected.columns
    {
        return Err(Error::Domain(format!(
            "field header ({} n={} shape {:?}) does not match the grid",
            h.testbed, h.n, h.shape
        )));
    }
    Ok(PotentialField { values, mean: h.mean })
}

/// Stores the potential's values at the chart nodes; loading interpolates
/// them back into a Chebyshev series.
pub fn save_radial_potential(stem: &Path, chart: &RadialChart, phi: &RadialPotential) -> Result<()> {
    let h = FieldHeader::for_chart(chart, vec!["phi".into()]);
    write_fields(stem, &h, &phi.phi_values(chart))
}

pub fn load_radial_potential(stem: &Path, chart: &RadialChart) -> Result<RadialPotential> {
    let (h, values) = read_fields(stem)?;
    if h.testbed != TestbedKind::Projective
        || h.n != chart.dim()
        || h.shape != [chart.num_nodes()]
        || h.columns.len() != 1
    {
        return Err(Error::Domain(format!(
            "field header ({} n={} shape {:?}) does not match the chart",
            h.testbed, h.n, h.shape
        )));
    }
    RadialPotential::from_values(chart, &values, crate::cpn::CHOP_TOL)
}
