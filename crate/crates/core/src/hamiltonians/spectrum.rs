use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, fix_phase, CMatrix, C64};

/// Relative gap below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Overlap magnitude below which the grid is refined.
const MIN_OVERLAP: f64 = 0.9;
const MAX_REFINEMENTS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyFlag {
    pub s: f64,
    /// Lower level of the near-degenerate pair.
    pub level: usize,
    pub gap: f64,
}

/// Eigensystem along s with a continuous gauge.
#[derive(Clone, Debug)]
pub struct SpectrumTrack {
    pub grid: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
    pub vectors: Vec<CMatrix>,
    pub min_gap: f64,
    pub min_gap_s: f64,
    pub degeneracies: Vec<DegeneracyFlag>,
}

struct Point {
    s: f64,
    energies: Vec<f64>,
    vectors: CMatrix,
}

fn solve<F>(h: &F, s: f64) -> Result<Point>
where
    F: Fn(f64) -> Result<CMatrix> + Sync,
{
    let m = h(s)?;
    let (energies, mut vectors) = eigh(&m);
    for col in 0..vectors.ncols() {
        fix_phase(&mut vectors, col);
    }
    Ok(Point { s, energies, vectors })
}

fn overlap(a: &CMatrix, b: &CMatrix, col: usize) -> C64 {
    a.column(col).dotc(&b.column(col))
}

/// Track the eigensystem of `h` across `grid`, inserting midpoints wherever
/// consecutive eigenvectors overlap by less than 0.9, and aligning signs so
/// that consecutive overlaps have non-negative real part.
pub fn spectrum_track<F>(h: F, grid: &[f64]) -> Result<SpectrumTrack>
where
    F: Fn(f64) -> Result<CMatrix> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    let mut initial: Vec<Point> = grid.par_iter().map(|&s| solve(&h, s)).collect::<Result<_>>()?;
    let mut points: Vec<Point> = Vec::with_capacity(initial.len());
    let mut degeneracies = Vec::new();
    let mut rest = initial.drain(..);
    points.push(rest.next().expect("grid is non-empty"));
    for next in rest {
        let mut pending = vec![next];
        let mut depth = 0;
        while let Some(candidate) = pending.pop() {
            let prev = points.last().expect("seeded");
            let dim = candidate.vectors.ncols();
            let weak = (0..dim).any(|col| overlap(&prev.vectors, &candidate.vectors, col).norm() < MIN_OVERLAP);
            if weak && depth < MAX_REFINEMENTS && candidate.s - prev.s > 1e-14 {
                let mid = solve(&h, 0.5 * (prev.s + candidate.s))?;
                pending.push(candidate);
                pending.push(mid);
                depth += 1;
                continue;
            }
            let mut candidate = candidate;
            for col in 0..dim {
                if overlap(&prev.vectors, &candidate.vectors, col).re < 0.0 {
                    candidate.vectors.column_mut(col).neg_mut();
                }
            }
            points.push(candidate);
        }
    }
    let mut min_gap = f64::INFINITY;
    let mut min_gap_s = points[0].s;
    for p in &points {
        let scale = p.energies.iter().fold(0.0f64, |acc, e| acc.max(e.abs())).max(f64::MIN_POSITIVE);
        for (level, w) in p.energies.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap < DEGENERACY_TOL * scale {
                degeneracies.push(DegeneracyFlag { s: p.s, level, gap });
            }
        }
        if p.energies.len() > 1 {
            let gap = p.energies[1] - p.energies[0];
            if gap < min_gap {
                min_gap = gap;
                min_gap_s = p.s;
            }
        }
    }
    let mut track = SpectrumTrack {
        grid: Vec::with_capacity(points.len()),
        energies: Vec::with_capacity(points.len()),
        vectors: Vec::with_capacity(points.len()),
        min_gap,
        min_gap_s,
        degeneracies,
    };
    for p in points {
        track.grid.push(p.s);
        track.energies.push(p.energies);
        track.vectors.push(p.vectors);
    }
    Ok(track)
}

/// Ground-state gap ε₁ - ε₀ of `h` at `s`.
pub fn ground_gap<F>(h: &F, s: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let (e, _) = eigh(&h(s)?);
    if e.len() < 2 {
        return Err(Error::InvalidParameter("need at least two levels for a gap".into()));
    }
    Ok(e[1] - e[0])
}

/// Refine the minimum gap on [lo, hi] by golden-section search.
pub fn refine_min_gap<F>(h: &F, lo: f64, hi: f64, iterations: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = ground_gap(h, x1)?;
    let mut f2 = ground_gap(h, x2)?;
    for _ in 0..iterations {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = ground_gap(h, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = ground_gap(h, x2)?;
        }
    }
    let s = 0.5 * (a + b);
    Ok((s, ground_gap(h, s)?))
}
