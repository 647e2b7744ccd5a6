//! Plot descriptions rendered from CSV files on disk. Nothing here
//! recomputes dynamics; every plotted number is read back from a CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::svg::{Figure, Mark, RefLine, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Position against step, one series per trajectory CSV.
    Trajectory,
    /// Map curve, identity, fixed points and a cobweb path. Sources in
    /// order: curve CSV, path CSV, fixed-point CSV.
    Cobweb,
    /// Velocity against position of a second-order trajectory.
    PhasePortrait,
    /// `gamma` against step from a long-format `schedule,step,gamma` CSV.
    ScheduleComparison,
    /// Scatter of `x,y` point lists, one series per source.
    SampleScatter,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub kind: PlotKind,
    /// `(legend label, CSV path)`.
    pub sources: Vec<(String, PathBuf)>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub ref_lines: Vec<RefLine>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: &str, x_label: &str, y_label: &str) -> Self {
        PlotSpec {
            kind,
            sources: Vec::new(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range: None,
            y_range: None,
            ref_lines: Vec::new(),
        }
    }

    pub fn source(mut self, label: &str, path: impl Into<PathBuf>) -> Self {
        self.sources.push((label.into(), path.into()));
        self
    }

    pub fn hline(mut self, label: &str, value: f64) -> Self {
        self.ref_lines.push(RefLine {
            label: label.into(),
            value,
            vertical: false,
        });
        self
    }

    pub fn render(&self) -> Result<String> {
        if self.sources.is_empty() {
            bail!("plot `{}` has no data source", self.title);
        }
        let series = match self.kind {
            PlotKind::Trajectory => {
                let mut out = Vec::new();
                for (label, path) in &self.sources {
                    let t = Table::read(path)?;
                    let pos = if t.has("a") { "a" } else { "x" };
                    out.push(Series::new(label, t.pairs("step", pos)?, Mark::Line));
                }
                out
            }
            PlotKind::PhasePortrait => {
                let mut out = Vec::new();
                for (label, path) in &self.sources {
                    out.push(Series::new(
                        label,
                        Table::read(path)?.pairs("x", "v")?,
                        Mark::Line,
                    ));
                }
                out
            }
            PlotKind::Cobweb => self.cobweb_series()?,
            PlotKind::ScheduleComparison => {
                let t = Table::read(&self.sources[0].1)?;
                let names = t.text_column("schedule")?;
                let steps = t.column("step")?;
                let gammas = t.column("gamma")?;
                let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
                let mut order = Vec::new();
                for ((n, s), g) in names.iter().zip(steps).zip(gammas) {
                    if !groups.contains_key(n.as_str()) {
                        order.push(n.as_str());
                    }
                    groups.entry(n).or_default().push((s, g));
                }
                order
                    .into_iter()
                    .map(|n| Series::new(n, groups.remove(n).unwrap_or_default(), Mark::Line))
                    .collect()
            }
            PlotKind::SampleScatter => {
                let mut out = Vec::new();
                for (label, path) in &self.sources {
                    out.push(Series::new(
                        label,
                        Table::read(path)?.pairs("x", "y")?,
                        Mark::Dots,
                    ));
                }
                out
            }
        };
        Ok(Figure {
            title: self.title.clone(),
            x_label: self.x_label.clone(),
            y_label: self.y_label.clone(),
            x_range: self.x_range,
            y_range: self.y_range,
            series,
            ref_lines: self.ref_lines.clone(),
        }
        .render())
    }

    fn cobweb_series(&self) -> Result<Vec<Series>> {
        let [curve, path, fixed] = match self.sources.as_slice() {
            [a, b, c] => [a, b, c],
            _ => bail!("cobweb plot needs curve, path and fixed-point sources"),
        };
        let curve_pts = Table::read(&curve.1)?.pairs("a", "f_a")?;
        let ident: Vec<(f64, f64)> = match (curve_pts.first(), curve_pts.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => vec![(lo, lo), (hi, hi)],
            _ => bail!("empty map curve"),
        };
        let steps = Table::read(&path.1)?.pairs("a", "f_a")?;
        let mut web = Vec::with_capacity(2 * steps.len() + 1);
        if let Some(&(a0, _)) = steps.first() {
            web.push((a0, 0.0));
        }
        for &(a, fa) in &steps {
            web.push((a, fa));
            web.push((fa, fa));
        }
        let fixed_pts: Vec<(f64, f64)> = Table::read(&fixed.1)?
            .column("a")?
            .into_iter()
            .map(|a| (a, a))
            .collect();
        Ok(vec![
            Series::new(&curve.0, curve_pts, Mark::Line).color(0),
            Series::new("y = a", ident, Mark::Dashed).color(7),
            Series::new(&path.0, web, Mark::Line).color(2),
            Series::new(&fixed.0, fixed_pts, Mark::Dots).color(1),
        ])
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()?).with_context(|| format!("writing {}", path.display()))
    }
}

/// A CSV file read fully into memory.
pub struct Table {
    path: PathBuf,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r =
            csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{}: no column `{name}`", self.path.display()))
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<String>> {
        let i = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    /// Numeric column; empty cells become NaN.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let cell = r[i].trim();
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse().with_context(|| {
                        format!(
                            "{} row {}: `{cell}` in `{name}`",
                            self.path.display(),
                            k + 1
                        )
                    })
                }
            })
            .collect()
    }

    pub fn pairs(&self, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
        Ok(self.column(x)?.into_iter().zip(self.column(y)?).collect())
    }
}
