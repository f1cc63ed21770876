use serde::Serialize;

use super::TimeScale;
use crate::error::{Error, Result};

/// Points `a = t₀ < t₁ < … < t_n = b` of a time scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    /// Checks membership, snaps every point to its representative in `scale`
    /// and requires strict increase.
    pub fn new(scale: &TimeScale, points: Vec<f64>) -> Result<Partition> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("a partition needs at least two points".into()));
        }
        let points = points.into_iter().map(|t| scale.canonical(t)).collect::<Result<Vec<_>>>()?;
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "points must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Partition { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn a(&self) -> f64 {
        self.points[0]
    }

    pub fn b(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Number of cells `n`.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cells `[t_{i-1}, t_i)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn mesh(&self) -> f64 {
        self.cells().map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    pub fn is_refinement_of(&self, other: &Partition) -> bool {
        let mut i = 0;
        for p in &other.points {
            while i < self.points.len() && self.points[i] < *p {
                i += 1;
            }
            if i == self.points.len() || self.points[i] != *p {
                return false;
            }
        }
        true
    }

    /// Adds the points of `extra` (which must lie in `scale` and inside `[a, b]`).
    pub fn refine(&self, scale: &TimeScale, extra: &[f64]) -> Result<Partition> {
        let mut pts = self.points.clone();
        for &t in extra {
            let t = scale.canonical(t)?;
            if t < self.a() || t > self.b() {
                return Err(Error::InvalidPartition(format!("{t} is outside [{}, {}]", self.a(), self.b())));
            }
            pts.push(t);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(Partition { points: pts })
    }
}

/// A partition of `[a, b]_T` containing every scattered point (tail points down
/// to the cutoff) and splitting dense stretches into pieces no longer than `target_mesh`.
pub fn make_partition(scale: &TimeScale, a: f64, b: f64, target_mesh: f64) -> Result<Partition> {
    if !(target_mesh > 0.0) {
        return Err(Error::InvalidArgument(format!("mesh must be positive, got {target_mesh}")));
    }
    let (mut pts, stretches) = scale.skeleton(a, b)?;
    for (lo, hi) in stretches {
        let n = ((hi - lo) / target_mesh).ceil().max(1.0);
        if n > 1e7 {
            return Err(Error::InvalidArgument(format!("mesh {target_mesh} needs too many points")));
        }
        let n = n as usize;
        pts.extend((1..n).map(|i| lo + (hi - lo) * (i as f64 / n as f64)));
        pts.push(hi);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(Partition { points: pts })
}

/// The union of two partitions of the same `[a, b]_T`.
pub fn common_refinement(p1: &Partition, p2: &Partition) -> Result<Partition> {
    if p1.a() != p2.a() || p1.b() != p2.b() {
        return Err(Error::MismatchedEndpoints { a1: p1.a(), b1: p1.b(), a2: p2.a(), b2: p2.b() });
    }
    let (x, y) = (&p1.points, &p2.points);
    let mut pts = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&u), Some(&v)) if u == v => {
                i += 1;
                j += 1;
                u
            }
            (Some(&u), Some(&v)) if u < v => {
                i += 1;
                u
            }
            (Some(&u), None) => {
                i += 1;
                u
            }
            (_, Some(&v)) => {
                j += 1;
                v
            }
            (None, None) => unreachable!(),
        };
        pts.push(next);
    }
    Ok(Partition { points: pts })
}
