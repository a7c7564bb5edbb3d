//! Density and covering diagnostics for support sets.

use serde::{Deserialize, Serialize};

use super::interval::{IntervalUnion, RealInterval};
use super::sampling::uniform_nodes;
use crate::error::{Error, Result};

/// Inclusion slack: a set difference of at most this measure counts as empty.
const INCLUSION_TOL: f64 = 1e-12;

fn window_measure(k: &IntervalUnion, x: f64, r: f64) -> f64 {
    let w = RealInterval::new(x, x + r).expect("positive window length");
    k.intersect_interval(&w).measure()
}

/// For each `R`, the infimum over window positions `x` of `|K ∩ [x, x+R]|`,
/// with `x` restricted so that `[x, x+R]` stays inside `window`.
///
/// `x -> |K ∩ [x, x+R]|` is piecewise linear with kinks where `x` or
/// `x + R` crosses an endpoint of `K`, so the scan evaluates a uniform grid
/// together with every kink; the minimum over those points is the exact
/// infimum on the allowed range.
pub fn beurling_lower_density_scan(
    k: &IntervalUnion,
    r_values: &[f64],
    window: &RealInterval,
) -> Result<Vec<(f64, f64)>> {
    if r_values.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument("window lengths must be positive".into()));
    }
    if r_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("window lengths must increase".into()));
    }
    let mut out = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if r > window.length() {
            return Err(Error::InvalidArgument(format!(
                "window length {r} exceeds the scan window {}",
                window.length()
            )));
        }
        let range = RealInterval::new(window.lo(), window.hi() - r)?;
        let mut xs = uniform_nodes(&range, (range.length() / 1000.0).max(1e-3));
        for c in k.intervals() {
            for p in [c.lo(), c.hi(), c.lo() - r, c.hi() - r] {
                if range.contains(p) {
                    xs.push(p);
                }
            }
        }
        let inf = xs
            .iter()
            .map(|&x| window_measure(k, x, r))
            .fold(f64::INFINITY, f64::min);
        out.push((r, inf + 0.0));
    }
    Ok(out)
}

/// Outcome of the three covering inclusions for shifts `0, b1, b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// `K ⊂ (K + b1) ∪ (K + b2)`
    pub base_covered: bool,
    /// `K + b1 ⊂ K ∪ (K + b2)`
    pub first_covered: bool,
    /// `K + b2 ⊂ (K + b1) ∪ K`
    pub second_covered: bool,
}

impl CoverReport {
    pub fn as_tuple(&self) -> (bool, bool, bool) {
        (self.base_covered, self.first_covered, self.second_covered)
    }
}

/// Evaluates the three inclusions a support set must satisfy for a
/// three-translate dependence. Inclusion means the set difference has
/// measure at most `1e-12`.
///
/// `core` restricts every set difference to a sub-interval, which discards
/// the artificial boundary of a truncated (conceptually infinite) `K`.
pub fn support_cover_check(
    k: &IntervalUnion,
    b1: f64,
    b2: f64,
    core: Option<&RealInterval>,
) -> Result<CoverReport> {
    if b1 == 0.0 || b2 == 0.0 || b1 == b2 {
        return Err(Error::InvalidArgument(
            "shifts must be nonzero and distinct".into(),
        ));
    }
    let k1 = k.translate(b1);
    let k2 = k.translate(b2);
    let covered = |a: &IntervalUnion, b: &IntervalUnion, c: &IntervalUnion| {
        let mut diff = a.subtract(&b.union(c));
        if let Some(core) = core {
            diff = diff.intersect_interval(core);
        }
        diff.measure() <= INCLUSION_TOL
    };
    Ok(CoverReport {
        base_covered: covered(k, &k1, &k2),
        first_covered: covered(&k1, k, &k2),
        second_covered: covered(&k2, &k1, k),
    })
}
