//! Visit-count exports: top-view CSV grids and per-depth graymaps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{CubeConfig, CubeState};
use crate::error::{Error, Result};

/// `[w][b]` = number of distinct depths visited in column `(g, w, b)`.
pub fn top_view(visits: &[u64], config: &CubeConfig, g: usize) -> Vec<Vec<usize>> {
    (0..config.width)
        .map(|w| {
            (0..config.breadth)
                .map(|b| {
                    (0..config.depth)
                        .filter(|&d| visits[config.index(CubeState { g, w, b, d })] > 0)
                        .count()
                })
                .collect()
        })
        .collect()
}

/// `[w][b]` = whether cell `(g, w, b, d)` was visited.
pub fn depth_grid(visits: &[u64], config: &CubeConfig, g: usize, d: usize) -> Vec<Vec<bool>> {
    (0..config.width)
        .map(|w| {
            (0..config.breadth)
                .map(|b| visits[config.index(CubeState { g, w, b, d })] > 0)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct HeatmapFiles {
    pub top: Vec<PathBuf>,
    pub depth: Vec<PathBuf>,
}

/// Writes `cube<g>_top.csv` and `cube<g>_depth<d>.pgm` for every cube. Rows
/// are `w`, columns are `b`.
pub fn write_heatmaps(dir: &Path, visits: &[u64], config: &CubeConfig) -> Result<HeatmapFiles> {
    check_len(visits, config)?;
    fs::create_dir_all(dir)?;
    let mut files = HeatmapFiles::default();
    for g in 0..config.cubes {
        let mut csv = String::new();
        for row in top_view(visits, config, g) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        let path = dir.join(format!("cube{g}_top.csv"));
        fs::write(&path, csv)?;
        files.top.push(path);

        for d in 0..config.depth {
            let mut pgm = format!("P2\n{} {}\n255\n", config.breadth, config.width);
            for row in depth_grid(visits, config, g, d) {
                let cells: Vec<&str> = row.iter().map(|&v| if v { "255" } else { "0" }).collect();
                pgm.push_str(&cells.join(" "));
                pgm.push('\n');
            }
            let path = dir.join(format!("cube{g}_depth{d}.pgm"));
            fs::write(&path, pgm)?;
            files.depth.push(path);
        }
    }
    Ok(files)
}

fn check_len(visits: &[u64], config: &CubeConfig) -> Result<()> {
    if visits.len() == config.cells() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} visit counts for a world of {} cells",
            visits.len(),
            config.cells()
        )))
    }
}

/// `g,w,b,d,visits` with one row per cell.
pub fn write_visits_csv(path: &Path, visits: &[u64], config: &CubeConfig) -> Result<()> {
    check_len(visits, config)?;
    let mut out = String::from("g,w,b,d,visits\n");
    for (i, v) in visits.iter().enumerate() {
        let s = config.state_at(i);
        let _ = writeln!(out, "{},{},{},{},{v}", s.g, s.w, s.b, s.d);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_visits_csv(path: &Path, config: &CubeConfig) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path)?;
    let mut visits = vec![0; config.cells()];
    let bad = |line: &str| Error::Config(format!("{}: bad visit row `{line}`", path.display()));
    for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
        let f: Vec<usize> = line
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| bad(line)))
            .collect::<Result<_>>()?;
        let [g, w, b, d, v] = f[..] else {
            return Err(bad(line));
        };
        if g >= config.cubes || w >= config.width || b >= config.breadth || d >= config.depth {
            return Err(bad(line));
        }
        visits[config.index(CubeState { g, w, b, d })] += v as u64;
    }
    Ok(visits)
}
