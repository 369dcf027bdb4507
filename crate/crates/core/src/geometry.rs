//! Finite metric site sets.
//!
//! Sites are dense indices `0..n`. The tensor-product ordering used by
//! [`crate::quantum`] follows this index order, site 0 being the leftmost
//! factor.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when validating metric axioms on user supplied tables.
const METRIC_TOL: f64 = 1e-12;

/// A finite set of sites with a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    coords: Option<Vec<Vec<usize>>>,
}

impl MetricSpace {
    /// Open chain `0 - 1 - ... - (len-1)` with graph distance.
    pub fn chain(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("chain length must be at least 1"));
        }
        let dist = (0..len)
            .flat_map(|i| (0..len).map(move |j| i.abs_diff(j) as f64))
            .collect();
        Ok(Self {
            n: len,
            dist,
            coords: Some((0..len).map(|i| vec![i]).collect()),
        })
    }

    /// Open hypercubic grid `{0..side}^dim` with the l1 graph distance.
    ///
    /// Site index is the row-major flattening of the coordinate, the last
    /// coordinate varying fastest.
    pub fn grid(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::invalid("grid dimension and side must be at least 1"));
        }
        let n = side
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::ResourceLimit(format!("grid {side}^{dim} too large")))?;
        let coords: Vec<Vec<usize>> = (0..n)
            .map(|mut idx| {
                let mut c = vec![0; dim];
                for slot in c.iter_mut().rev() {
                    *slot = idx % side;
                    idx /= side;
                }
                c
            })
            .collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| a.abs_diff(*b))
                    .sum::<usize>() as f64;
            }
        }
        Ok(Self {
            n,
            dist,
            coords: Some(coords),
        })
    }

    /// Arbitrary metric given as a full distance table.
    ///
    /// All metric axioms are checked eagerly; the triangle inequality check
    /// is cubic in the number of sites.
    pub fn from_table(table: &[Vec<f64>]) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::invalid("distance table is empty"));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "distance table row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::invalid(format!("d({i},{j}) = {d} is not a finite nonnegative number")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::invalid(format!("d({i},{i}) = {d} must be 0")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::invalid(format!("d({i},{j}) must be positive for distinct sites")));
                }
                if (d - dist[j * n + i]).abs() > METRIC_TOL {
                    return Err(Error::invalid(format!("distance table is not symmetric at ({i},{j})")));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if dist[x * n + z] > dist[x * n + y] + dist[y * n + z] + METRIC_TOL {
                        return Err(Error::invalid(format!(
                            "triangle inequality fails for ({x},{y},{z})"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            n,
            dist,
            coords: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    /// Lattice coordinate of a site, when the space was built from a lattice.
    pub fn coord(&self, x: usize) -> Option<&[usize]> {
        self.coords.as_ref().and_then(|c| c.get(x)).map(Vec::as_slice)
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    fn check_site(&self, x: usize) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::invalid(format!("site {x} is not in a space of {} sites", self.n)))
        }
    }

    fn check_set(&self, set: &[usize], what: &str) -> Result<()> {
        if set.is_empty() {
            return Err(Error::invalid(format!("{what} must be a nonempty site set")));
        }
        set.iter().try_for_each(|&x| self.check_site(x))
    }

    /// `#{y : d(x,y) <= r}`.
    pub fn ball_count(&self, x: usize, r: f64) -> Result<usize> {
        self.check_site(x)?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::invalid(format!("ball radius {r} must be nonnegative")));
        }
        Ok(self.row(x).iter().filter(|&&d| d <= r).count())
    }

    /// `#{y : lo < d(x,y) <= hi}`.
    pub fn shell_count(&self, x: usize, lo: f64, hi: f64) -> Result<usize> {
        self.check_site(x)?;
        Ok(self.row(x).iter().filter(|&&d| d > lo && d <= hi).count())
    }

    /// Largest distance from `x` to any site.
    pub fn eccentricity(&self, x: usize) -> f64 {
        self.row(x).iter().copied().fold(0.0, f64::max)
    }

    fn row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    /// `d(x, X) = min_{y in X} d(x, y)`.
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> Result<f64> {
        self.check_site(x)?;
        self.check_set(set, "set")?;
        Ok(set.iter().map(|&y| self.dist(x, y)).fold(f64::INFINITY, f64::min))
    }

    /// The closed r-neighbourhood `{x : d(x, X) <= r}` in ascending order.
    pub fn neighborhood(&self, set: &[usize], r: f64) -> Result<Vec<usize>> {
        self.check_set(set, "X")?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::invalid(format!("neighbourhood radius {r} must be nonnegative")));
        }
        Ok(self
            .sites()
            .filter(|&x| set.iter().any(|&y| self.dist(x, y) <= r))
            .collect())
    }

    /// `d(X, Y)`: the minimum distance over pairs.
    pub fn set_distance(&self, xs: &[usize], ys: &[usize]) -> Result<f64> {
        self.check_set(xs, "X")?;
        self.check_set(ys, "Y")?;
        Ok(xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.dist(x, y))
            .fold(f64::INFINITY, f64::min))
    }

    /// `diam(Z)`: the maximum distance over pairs, 0 for a singleton.
    pub fn set_diameter(&self, zs: &[usize]) -> Result<f64> {
        self.check_set(zs, "Z")?;
        Ok(zs
            .iter()
            .flat_map(|&x| zs.iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.dist(x, y))
            .fold(0.0, f64::max))
    }

    /// Distinct distances realised between pairs of sites (including 0), ascending.
    pub fn realized_distances(&self) -> Vec<f64> {
        let mut ds = self.dist.clone();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        ds
    }

    /// Minimal `C` with `ball_count(x, r) <= C (1 + r)^D` for every site and every `r >= 0`.
    ///
    /// Ball counts are right-continuous step functions jumping only at realised
    /// distances and `(1 + r)^D` is increasing, so the supremum over `r` is
    /// attained at a realised distance.
    pub fn fit_growth_constant(&self, dimension: f64) -> Result<GrowthCertificate> {
        if !(dimension > 0.0) || !dimension.is_finite() {
            return Err(Error::invalid(format!("growth dimension {dimension} must be positive")));
        }
        let radii = self.realized_distances();
        let mut c = 0.0_f64;
        for x in self.sites() {
            for &r in &radii {
                let count = self.ball_count(x, r)? as f64;
                c = c.max(count / (1.0 + r).powf(dimension));
            }
        }
        let shell_c = if dimension >= 1.0 {
            Some(self.fit_shell_constant(dimension))
        } else {
            None
        };
        Ok(GrowthCertificate {
            c,
            dimension,
            shell_c,
        })
    }

    /// Minimal `C_s` with `#{z : rho < d(x,z) <= rho + 1} <= C_s (1 + rho)^(D-1)`
    /// for all sites and all `rho >= 0`. Requires `D >= 1`.
    ///
    /// The unit-width shell count is piecewise constant with breakpoints at
    /// realised distances `d` and at `d - 1`; on each piece the ratio is
    /// largest at the left end.
    fn fit_shell_constant(&self, dimension: f64) -> f64 {
        let mut breaks: Vec<f64> = vec![0.0];
        for d in self.realized_distances() {
            breaks.push(d);
            if d >= 1.0 {
                breaks.push(d - 1.0);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut c = 0.0_f64;
        for x in self.sites() {
            for &rho in &breaks {
                let count = self.row(x).iter().filter(|&&d| d > rho && d <= rho + 1.0).count() as f64;
                c = c.max(count / (1.0 + rho).powf(dimension - 1.0));
            }
        }
        c
    }
}

/// Polynomial growth certificate `g(r) = C (1 + r)^D` for ball cardinalities.
///
/// `shell_c`, when present, certifies unit-width shells:
/// `#{z : rho < d(x,z) <= rho + 1} <= shell_c (1 + rho)^(D-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub c: f64,
    pub dimension: f64,
    pub shell_c: Option<f64>,
}

impl GrowthCertificate {
    pub fn g(&self, r: f64) -> f64 {
        self.c * (1.0 + r).powf(self.dimension)
    }

    /// Integer dimension, when `D` is a whole number.
    pub fn integer_dimension(&self) -> Option<u32> {
        let d = self.dimension;
        (d.fract() == 0.0 && d >= 0.0 && d <= u32::MAX as f64).then_some(d as u32)
    }
}

/// Ascending, duplicate-free copy of a site list.
pub fn normalize_sites(sites: &[usize]) -> Vec<usize> {
    sites.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}
