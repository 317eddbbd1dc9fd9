//! Datasets for the three standard curve families, written as plain
//! whitespace-separated files plus a gnuplot script.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::sweep::{run_sweep, Scale, SweepRow, SweepSpec, SweepVariable};

pub const FIGURE_PUMP: f64 = 0.1;
pub const FIGURE_GAMMA_PAR: f64 = 0.1;
/// Thresholds of curves 1, 2, 3 in the Δₙ and g₂ versus `2κ/γ⊥` figures.
pub const KAPPA_FIGURE_THRESHOLDS: [f64; 3] = [15.0, 10.0, 5.0];
/// `2κ/γ⊥` of curves 1, 2, 3 in the g₂ versus pump figure.
pub const PUMP_FIGURE_RATIOS: [f64; 3] = [6.0, 2.0, 0.2];
/// Solid and dashed thresholds in the g₂ versus pump figure.
pub const PUMP_FIGURE_THRESHOLDS: [f64; 2] = [5.0, 10.0];
pub const POINTS_PER_CURVE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Δₙ versus `2κ/γ⊥`.
    Fig3,
    /// g₂ versus `2κ/γ⊥`.
    Fig4,
    /// g₂ versus pump.
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" | "3" => Ok(Figure::Fig3),
            "fig4" | "4" => Ok(Figure::Fig4),
            "fig5" | "5" => Ok(Figure::Fig5),
            _ => Err(Error::InvalidSpec(format!("unknown figure '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    /// File stem, e.g. `fig5_r6_nth5`.
    pub name: String,
    /// Legend text.
    pub label: String,
    pub dashed: bool,
    pub rows: Vec<SweepRow>,
}

impl Series {
    pub fn ordinate(&self, figure: Figure) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| if figure == Figure::Fig3 { r.delta_n } else { r.g2_closed })
            .collect()
    }
}

fn kappa_series(figure: Figure, n_emitters: f64) -> Result<Vec<Series>> {
    KAPPA_FIGURE_THRESHOLDS
        .iter()
        .enumerate()
        .map(|(i, &nth)| {
            let base = ModelParams::from_kappa_ratio(1.0, FIGURE_GAMMA_PAR, FIGURE_PUMP, nth, n_emitters);
            let spec = SweepSpec::new(base, SweepVariable::KappaRatio, 0.1, 10.0, POINTS_PER_CURVE, Scale::Log);
            Ok(Series {
                name: format!("{}_nth{}", figure.name(), nth),
                label: format!("{} N_th={}", i + 1, nth),
                dashed: false,
                rows: run_sweep(&spec)?,
            })
        })
        .collect()
}

fn pump_series(n_emitters: f64) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for &nth in &PUMP_FIGURE_THRESHOLDS {
        for (i, &r) in PUMP_FIGURE_RATIOS.iter().enumerate() {
            let base = ModelParams::from_kappa_ratio(r, FIGURE_GAMMA_PAR, FIGURE_PUMP, nth, n_emitters);
            let spec = SweepSpec::new(base, SweepVariable::Pump, 0.01, 1.0, POINTS_PER_CURVE, Scale::Log);
            out.push(Series {
                name: format!("fig5_r{r}_nth{nth}"),
                label: format!("{} 2k/g={} N_th={}", i + 1, r, nth),
                dashed: nth != PUMP_FIGURE_THRESHOLDS[0],
                rows: run_sweep(&spec)?,
            });
        }
    }
    Ok(out)
}

/// Curves of `figure` for `N₀ = n_emitters`.
pub fn figure_series(figure: Figure, n_emitters: f64) -> Result<Vec<Series>> {
    match figure {
        Figure::Fig3 | Figure::Fig4 => kappa_series(figure, n_emitters),
        Figure::Fig5 => pump_series(n_emitters),
    }
}

fn data_file(figure: Figure, series: &Series) -> String {
    let (x, y) = match figure {
        Figure::Fig3 => ("kappa_ratio", "delta_n"),
        Figure::Fig4 => ("kappa_ratio", "g2"),
        Figure::Fig5 => ("pump", "g2"),
    };
    let mut s = format!("# {}\n# {x} {y} flags\n", series.label);
    for (row, v) in series.rows.iter().zip(series.ordinate(figure)) {
        let flags = if row.flags.is_empty() { "-" } else { &row.flags };
        let _ = writeln!(s, "{} {} {}", row.value, v, flags);
    }
    s
}

fn plot_script(figure: Figure, series: &[Series]) -> String {
    let (xlabel, ylabel) = match figure {
        Figure::Fig3 => ("2{/Symbol k}/{/Symbol g}_{/Symbol \\136}", "{/Symbol D}_n"),
        Figure::Fig4 => ("2{/Symbol k}/{/Symbol g}_{/Symbol \\136}", "g_2"),
        Figure::Fig5 => ("P", "g_2"),
    };
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo enhanced size 800,600");
    let _ = writeln!(s, "set output '{}.png'", figure.name());
    let _ = writeln!(s, "set logscale x");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let _ = writeln!(s, "set key top left");
    let plots: Vec<String> = series
        .iter()
        .map(|se| {
            format!(
                "'{}.dat' using 1:2 with lines dt {} lw 2 title '{}'",
                se.name,
                if se.dashed { 2 } else { 1 },
                se.label
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Writes one `.dat` file per curve and `<figure>.gp` into `dir`; returns the paths.
pub fn write_figure(figure: Figure, n_emitters: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    let series = figure_series(figure, n_emitters)?;
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for se in &series {
        let p = dir.join(format!("{}.dat", se.name));
        fs::write(&p, data_file(figure, se))?;
        paths.push(p);
    }
    let p = dir.join(format!("{}.gp", figure.name()));
    fs::write(&p, plot_script(figure, &series))?;
    paths.push(p);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g2_figure_is_bounded_and_ordered() {
        let series = figure_series(Figure::Fig4, 20.0).unwrap();
        assert_eq!(series.len(), 3);
        let g: Vec<Vec<f64>> = series.iter().map(|s| s.ordinate(Figure::Fig4)).collect();
        for col in g.iter().flatten() {
            assert!(*col > 2.0 && *col <= 6.0);
        }
        // curve 3 (N_th=5) > curve 2 (10) > curve 1 (15)
        for ((c1, c2), c3) in g[0].iter().zip(&g[1]).zip(&g[2]) {
            assert!(c3 > c2 && c2 > c1);
        }
    }

    #[test]
    fn pump_figure_solid_above_dashed() {
        let series = figure_series(Figure::Fig5, 20.0).unwrap();
        assert_eq!(series.len(), 6);
        for r in 0..3 {
            let solid = series[r].ordinate(Figure::Fig5);
            let dashed = series[r + 3].ordinate(Figure::Fig5);
            assert!(solid.iter().zip(&dashed).all(|(s, d)| s > d));
        }
    }

    #[test]
    fn written_files_are_deterministic() {
        let dir = std::env::temp_dir().join(format!("ledstat-fig-{}", std::process::id()));
        let a = write_figure(Figure::Fig3, 20.0, &dir).unwrap();
        let first: Vec<Vec<u8>> = a.iter().map(|p| fs::read(p).unwrap()).collect();
        let b = write_figure(Figure::Fig3, 20.0, &dir).unwrap();
        assert_eq!(a, b);
        let second: Vec<Vec<u8>> = b.iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        assert!(String::from_utf8(first.last().unwrap().clone()).unwrap().contains("fig3_nth15.dat"));
        fs::remove_dir_all(dir).unwrap();
    }
}
