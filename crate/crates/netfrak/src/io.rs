//! CSV file formats and run manifests.
//!
//! Networks are exchanged as `x1,y1,x2,y2` segment rows; patterns as `x,y`
//! rows snapped onto the network. Floats are emitted with 17 significant
//! digits so every CSV round-trips to the exact in-memory value.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::envelope::EnvelopeResult;
use crate::error::{Error, Result};
use crate::geometry::{
    build_network, snap_to_network, LinearNetwork, NetworkLocation, PointPattern, GEOM_REL_TOL,
};
use crate::intensity::IntensitySurface;
use crate::summaries::SummaryEstimate;

/// Full-precision float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, path: &Path, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| {
        Error::Format(format!(
            "{}:{}: not a number: {:?}",
            path.display(),
            line,
            s
        ))
    })
}

/// Read a network from segment rows, deduplicating endpoint coordinates
/// within 1e-9 of the bounding-box diameter.
pub fn read_network_csv(path: &Path) -> Result<LinearNetwork> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x1,y1,x2,y2" => {}
        _ => {
            return Err(Error::Format(format!(
                "{}: expected header x1,y1,x2,y2",
                path.display()
            )))
        }
    }
    let mut endpoints: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Format(format!(
                "{}:{}: expected 4 columns",
                path.display(),
                i + 1
            )));
        }
        let v: Vec<f64> = cols
            .iter()
            .map(|c| parse_f64(c, path, i + 1))
            .collect::<Result<_>>()?;
        endpoints.push(([v[0], v[1]], [v[2], v[3]]));
    }
    if endpoints.is_empty() {
        return Err(Error::EmptyNetwork);
    }

    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (a, b) in &endpoints {
        for p in [a, b] {
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
    }
    let diameter = ((xmax - xmin).powi(2) + (ymax - ymin).powi(2)).sqrt();
    let tol = GEOM_REL_TOL * diameter;

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let index_of = |p: [f64; 2], vertices: &mut Vec<[f64; 2]>| -> usize {
        for (i, v) in vertices.iter().enumerate() {
            if crate::geometry::dist2(*v, p) <= tol {
                return i;
            }
        }
        vertices.push(p);
        vertices.len() - 1
    };
    let mut segments = Vec::with_capacity(endpoints.len());
    for (a, b) in endpoints {
        let ia = index_of(a, &mut vertices);
        let ib = index_of(b, &mut vertices);
        segments.push((ia, ib));
    }
    build_network(vertices, segments)
}

/// Write a network back out as segment rows.
pub fn write_network_csv(path: &Path, net: &LinearNetwork) -> Result<()> {
    let mut out = String::from("x1,y1,x2,y2\n");
    for &(a, b) in net.segments() {
        let pa = net.vertices()[a];
        let pb = net.vertices()[b];
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(pa[0]),
            fmt_f64(pa[1]),
            fmt_f64(pb[0]),
            fmt_f64(pb[1])
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read `x,y` rows and snap each onto the network within `tol`.
pub fn read_pattern_csv(path: &Path, net: &LinearNetwork, tol: f64) -> Result<PointPattern> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,y" => {}
        _ => {
            return Err(Error::Format(format!(
                "{}: expected header x,y",
                path.display()
            )))
        }
    }
    let mut pts = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::Format(format!(
                "{}:{}: expected 2 columns",
                path.display(),
                i + 1
            )));
        }
        let x = parse_f64(cols[0], path, i + 1)?;
        let y = parse_f64(cols[1], path, i + 1)?;
        pts.push(snap_to_network(net, [x, y], tol)?);
    }
    PointPattern::new(net, pts)
}

pub fn write_pattern_csv(path: &Path, net: &LinearNetwork, pattern: &PointPattern) -> Result<()> {
    let mut out = String::from("x,y\n");
    for p in pattern.points() {
        let xy = p.to_xy(net);
        out.push_str(&format!("{},{}\n", fmt_f64(xy[0]), fmt_f64(xy[1])));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Summary curve rows: `r,value,defined,n_grid,n_points`; undefined values
/// become empty cells.
pub fn write_summary_csv(path: &Path, est: &SummaryEstimate) -> Result<()> {
    let mut out = String::from("r,value,defined,n_grid,n_points\n");
    for i in 0..est.r.len() {
        let value = est.value[i].map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(est.r[i]),
            value,
            est.value[i].is_some(),
            est.meta.n_grid[i],
            est.meta.n_data[i]
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Envelope rows: `r,obs,lo,hi,mean,defined_count`.
pub fn write_envelope_csv(path: &Path, env: &EnvelopeResult) -> Result<()> {
    let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = String::from("r,obs,lo,hi,mean,defined_count\n");
    for i in 0..env.r.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(env.r[i]),
            cell(env.observed[i]),
            cell(env.lo[i]),
            cell(env.hi[i]),
            cell(env.sim_mean[i]),
            env.defined_count[i]
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Intensity evaluations: `x,y,segment,offset,rho_hat`.
pub fn write_intensity_csv(
    path: &Path,
    net: &LinearNetwork,
    surface: &IntensitySurface,
    grid: &[NetworkLocation],
) -> Result<()> {
    let mut out = String::from("x,y,segment,offset,rho_hat\n");
    for &u in grid {
        let xy = u.to_xy(net);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(xy[0]),
            fmt_f64(xy[1]),
            u.segment,
            fmt_f64(u.offset),
            fmt_f64(surface.eval(net, u))
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reproducibility record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// SHA-256 digests of the input files, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            params: BTreeMap::new(),
            seed: None,
            inputs: BTreeMap::new(),
            duration_secs: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(e.to_string()))?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::star3;

    #[test]
    fn network_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.csv");
        let net = star3();
        write_network_csv(&path, &net).unwrap();
        let back = read_network_csv(&path).unwrap();
        assert_eq!(back.segments().len(), 3);
        assert_eq!(back.vertices().len(), 4);
        assert_eq!(back.total_length(), 3.0);
    }

    #[test]
    fn network_csv_deduplicates_vertices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.csv");
        std::fs::write(&path, "x1,y1,x2,y2\n0,0,1,0\n1,0,1,1\n").unwrap();
        let net = read_network_csv(&path).unwrap();
        assert_eq!(net.vertices().len(), 3);
    }

    #[test]
    fn pattern_csv_round_trip_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let net = star3();
        let pts = vec![
            NetworkLocation::new(0, 1.0 / 3.0),
            NetworkLocation::new(2, 0.123456789012345678),
        ];
        let pattern = PointPattern::new(&net, pts).unwrap();
        write_pattern_csv(&path, &net, &pattern).unwrap();
        let back = read_pattern_csv(&path, &net, 1e-9).unwrap();
        for (a, b) in pattern.points().iter().zip(back.points()) {
            let da = a.to_xy(&net);
            let db = b.to_xy(&net);
            assert_eq!(da, db);
        }
    }

    #[test]
    fn rejects_bad_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_network_csv(&path).is_err());
        assert!(read_pattern_csv(&path, &star3(), 1.0).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.csv");
        std::fs::write(&input, "x,y\n").unwrap();
        let path = dir.path().join("manifest.json");
        let mut m = RunManifest::new("summary");
        m.param("stat", "j").param("nr", 513);
        m.seed = Some(42);
        m.input(&input).unwrap();
        m.write(&path).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back.subcommand, "summary");
        assert_eq!(back.params["stat"], "j");
        assert_eq!(back.seed, Some(42));
        assert_eq!(back.inputs.len(), 1);
    }
}
