//! Unmemoized, literal transcriptions of the reputation and expectation
//! recursions. Exponential in the number of tiers; meant as a reference
//! for checking [`TrustModel`](super::TrustModel) on small inputs.

use super::{is_zero, AssertionSet, TrustError};
use crate::label::{ItemId, LabelName, SourceId};

pub fn naive_reputation(j: &SourceId, data: &AssertionSet) -> Result<f64, TrustError> {
    let tier = data
        .tier(j)
        .ok_or_else(|| TrustError::UnknownSource(j.clone()))?;
    if tier.get() == 0 {
        return Ok(1.0);
    }
    let mut n = 0.0;
    let mut d = 0.0;
    for (i, k, v) in data.assertions_by(j) {
        let e = naive_expectation(i, k, i64::from(tier.get()) - 1, data);
        let x = if is_zero(e) {
            continue;
        } else if e > 0.0 {
            1.0
        } else {
            -1.0
        };
        n += f64::abs(v.as_f64() - x);
        d += 1.0;
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(f64::max(1.0 - n / d, 0.0))
}

pub fn naive_expectation(i: &ItemId, k: &LabelName, t: i64, data: &AssertionSet) -> f64 {
    if t < 0 {
        return 0.0;
    }
    let above = naive_expectation(i, k, t - 1, data);
    if !is_zero(above) {
        return above;
    }
    let mut n = 0.0;
    let mut d = 0.0;
    for (j, tier) in data.sources() {
        if i64::from(tier.get()) != t {
            continue;
        }
        let Some(v) = data.value(j, i, k) else {
            continue;
        };
        let r = naive_reputation(j, data).expect("source comes from the tier table");
        n += r * v.as_f64();
        d += r;
    }
    if d == 0.0 {
        return 0.0;
    }
    n / d
}
