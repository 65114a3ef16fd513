//! Snapshot files: one header line `# t=<value> problem=<kind> n=<nodes>`,
//! then one row `alpha value1 [value2]` per node, every number written with
//! 17 significant digits so that it reads back bit-exactly.

use std::fmt::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, ensure, Context, Result};
use muskat_core::curve::{Curve, GraphInterface, PeriodicField, PeriodicGrid, DEFAULT_DELTA_RHO};
use muskat_core::dynamics::{RealLineGraph, TwoPhaseState};

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub t: f64,
    pub problem: String,
    /// `columns[0]` holds the abscissae
    pub columns: Vec<Vec<f64>>,
}

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl SnapshotFile {
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.columns[0]
    }

    pub fn render(&self) -> String {
        let n = self.n();
        let mut out = format!("# t={} problem={} n={n}\n", fmt17(self.t), self.problem);
        for i in 0..n {
            let row: Vec<String> = self.columns.iter().map(|c| fmt17(c[i])).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| anyhow!("empty snapshot file"))?;
        let rest = header.strip_prefix("# ").ok_or_else(|| anyhow!("line 1: header must start with `# `"))?;
        let (mut t, mut problem, mut n) = (None, None, None);
        for field in rest.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| anyhow!("line 1: malformed header field {field:?}"))?;
            match k {
                "t" => t = Some(v.parse::<f64>().with_context(|| format!("line 1: bad time {v:?}"))?),
                "problem" => problem = Some(v.to_string()),
                "n" => n = Some(v.parse::<usize>().with_context(|| format!("line 1: bad node count {v:?}"))?),
                _ => bail!("line 1: unknown header field {k:?}"),
            }
        }
        let (t, problem, n) = match (t, problem, n) {
            (Some(t), Some(p), Some(n)) => (t, p, n),
            _ => bail!("line 1: header needs t=, problem= and n="),
        };
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for (i, line) in lines.enumerate() {
            let nums = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().with_context(|| format!("line {}: bad number {s:?}", i + 2)))
                .collect::<Result<Vec<_>>>()?;
            if columns.is_empty() {
                ensure!((2..=3).contains(&nums.len()), "line {}: expected 2 or 3 columns", i + 2);
                columns = vec![Vec::with_capacity(n); nums.len()];
            }
            ensure!(nums.len() == columns.len(), "line {}: expected {} columns, found {}", i + 2, columns.len(), nums.len());
            for (c, v) in columns.iter_mut().zip(nums) {
                c.push(v);
            }
        }
        ensure!(!columns.is_empty() && columns[0].len() == n, "header announces {n} rows, file has {}", columns.first().map_or(0, Vec::len));
        Ok(Self { t, problem, columns })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn expect(&self, problems: &[&str], columns: usize) -> Result<()> {
        ensure!(problems.contains(&self.problem.as_str()), "snapshot holds a {} state, expected {}", self.problem, problems.join(" or "));
        ensure!(self.columns.len() == columns, "{} snapshot needs {} columns", self.problem, columns);
        Ok(())
    }

    /// The grid of the abscissae; flagged uniform when the nodes are exactly
    /// the uniform ones.
    pub fn grid(&self) -> Result<Arc<PeriodicGrid>> {
        let x = self.abscissae();
        let uni = PeriodicGrid::uniform(x.len())?;
        Ok(Arc::new(if uni.alphas() == x { uni } else { PeriodicGrid::from_nodes(x.to_vec())? }))
    }
}

/// A state that can be written to and read from a snapshot file.
pub trait SnapshotState: Sized {
    fn to_snapshot(&self, t: f64, problem: &str) -> SnapshotFile;
    /// `like` supplies what the file does not store (densities, `Δρ`).
    fn from_snapshot(file: &SnapshotFile, like: Option<&Self>) -> Result<Self>;
}

impl SnapshotState for GraphInterface {
    fn to_snapshot(&self, t: f64, problem: &str) -> SnapshotFile {
        SnapshotFile { t, problem: problem.into(), columns: vec![self.grid().alphas().to_vec(), self.values().to_vec()] }
    }

    fn from_snapshot(file: &SnapshotFile, _: Option<&Self>) -> Result<Self> {
        file.expect(&["periodic-graph"], 2)?;
        Ok(GraphInterface::new(PeriodicField::new(file.grid()?, file.columns[1].clone())?))
    }
}

impl SnapshotState for TwoPhaseState {
    fn to_snapshot(&self, t: f64, problem: &str) -> SnapshotFile {
        SnapshotFile {
            t,
            problem: problem.into(),
            columns: vec![self.grid().alphas().to_vec(), self.f.values().to_vec(), self.g.values().to_vec()],
        }
    }

    fn from_snapshot(file: &SnapshotFile, like: Option<&Self>) -> Result<Self> {
        file.expect(&["two-phase"], 3)?;
        let like = like.ok_or_else(|| anyhow!("a two-phase snapshot needs the densities from its run"))?;
        let grid = file.grid()?;
        let f = GraphInterface::new(PeriodicField::new(grid.clone(), file.columns[1].clone())?);
        let g = GraphInterface::new(PeriodicField::new(grid, file.columns[2].clone())?);
        Ok(TwoPhaseState::new(f, g, like.rho_bar_1, like.rho_bar_2)?)
    }
}

impl SnapshotState for RealLineGraph {
    fn to_snapshot(&self, t: f64, problem: &str) -> SnapshotFile {
        SnapshotFile { t, problem: problem.into(), columns: vec![self.nodes(), self.values().to_vec()] }
    }

    fn from_snapshot(file: &SnapshotFile, _: Option<&Self>) -> Result<Self> {
        file.expect(&["real-line"], 2)?;
        let half_width = -file.abscissae()[0];
        ensure!(half_width > 0.0, "real-line abscissae must start at -L < 0");
        Ok(RealLineGraph::new(half_width, file.columns[1].clone())?)
    }
}

impl SnapshotState for Curve {
    /// Rows hold `α, z₁(α), z₂(α)`.
    fn to_snapshot(&self, t: f64, problem: &str) -> SnapshotFile {
        SnapshotFile { t, problem: problem.into(), columns: vec![self.grid().alphas().to_vec(), self.z1_values(), self.z2().values().to_vec()] }
    }

    fn from_snapshot(file: &SnapshotFile, like: Option<&Self>) -> Result<Self> {
        file.expect(&["contour", "galerkin"], 3)?;
        let grid = file.grid()?;
        let p: Vec<f64> = file.columns[1].iter().zip(file.abscissae()).map(|(z, a)| z - a).collect();
        let delta_rho = like.map_or(DEFAULT_DELTA_RHO, Curve::delta_rho);
        Ok(Curve::new(PeriodicField::new(grid.clone(), p)?, PeriodicField::new(grid, file.columns[2].clone())?, delta_rho)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Arc::new(PeriodicGrid::uniform(16).unwrap());
        let f = GraphInterface::new(PeriodicField::from_fn(grid, |a| (a / 3.0).sin() + 1.0 / 7.0));
        let text = f.to_snapshot(1.0 / 3.0, "periodic-graph").render();
        let file = SnapshotFile::parse(&text).unwrap();
        assert_eq!(file.t, 1.0 / 3.0);
        let back = GraphInterface::from_snapshot(&file, None).unwrap();
        assert_eq!(back, f);
        assert!(back.grid().is_uniform());
        assert_eq!(file.render(), text);
    }

    #[test]
    fn header_and_rows_are_checked() {
        assert!(SnapshotFile::parse("t=0\n").is_err());
        let e = SnapshotFile::parse("# t=0 problem=periodic-graph n=2\n0 1\n0 x\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 3"));
        assert!(SnapshotFile::parse("# t=0 problem=periodic-graph n=3\n0 1\n1 1\n").is_err());
    }
}
