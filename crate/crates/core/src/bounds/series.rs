//! Brute-force evaluation of the iterated series
//! `a_n = Σ_{Z_1∩X≠∅} Σ_{Z_2∩Z_1≠∅} ... Σ_{Z_n∩Z_{n-1}≠∅, Z_n∩Y≠∅} Π ‖h_{Z_i}^{(<R)}‖`.

use crate::error::{Error, Result};
use crate::model::{Interaction, InteractionTerm};

/// Default cap on the number of partial chains visited by [`series_a_n`].
pub const DEFAULT_CHAIN_LIMIT: u64 = 50_000_000;

/// `a_n` for the short-range part (`diam Z < R`) of `interaction`, by
/// enumerating every chain of overlapping supports.
///
/// Fails with [`Error::ResourceLimit`] once more than `limit` partial chains
/// have been visited.
pub fn series_a_n(
    interaction: &Interaction,
    xs: &[usize],
    ys: &[usize],
    cutoff: f64,
    n: usize,
    limit: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("series index n must be at least 1"));
    }
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::invalid("X and Y must be nonempty"));
    }
    let short: Vec<&InteractionTerm> = interaction.terms().iter().filter(|t| t.diameter() < cutoff).collect();
    let overlaps = |a: &InteractionTerm, b: &InteractionTerm| a.support().iter().any(|&s| b.contains(s));

    struct Walk<'a, F> {
        terms: &'a [&'a InteractionTerm],
        ys: &'a [usize],
        overlaps: F,
        visited: u64,
        limit: u64,
    }

    impl<F: Fn(&InteractionTerm, &InteractionTerm) -> bool> Walk<'_, F> {
        fn extend(&mut self, last: usize, weight: f64, remaining: usize) -> Result<f64> {
            self.visited += 1;
            if self.visited > self.limit {
                return Err(Error::ResourceLimit(format!(
                    "a_n enumeration visited more than {} chains",
                    self.limit
                )));
            }
            if remaining == 0 {
                return Ok(if self.terms[last].intersects(self.ys) { weight } else { 0.0 });
            }
            let mut total = 0.0;
            for next in 0..self.terms.len() {
                if (self.overlaps)(self.terms[last], self.terms[next]) {
                    total += self.extend(next, weight * self.terms[next].norm(), remaining - 1)?;
                }
            }
            Ok(total)
        }
    }

    let mut walk = Walk {
        terms: &short,
        ys,
        overlaps,
        visited: 0,
        limit,
    };
    let mut total = 0.0;
    for (first, term) in short.iter().enumerate() {
        if term.intersects(xs) {
            total += walk.extend(first, term.norm(), n - 1)?;
        }
    }
    Ok(total)
}
