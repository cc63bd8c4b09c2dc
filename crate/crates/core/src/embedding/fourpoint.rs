use serde::Serialize;

use super::{lp_dist, lp_pow};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `RHS - LHS` of the four-point inequalities for the quadrilateral `u, v, w, x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FourPointSlack<F> {
    /// `|u-v|^2 + |v-w|^2 + |x-w|^2 + |u-x|^2 - |u-w|^2 - (p-1)|x-v|^2`, for `1 <= p <= 2`.
    pub slack_1p2: Option<F>,
    /// `2^(p-2) (|u-v|^p + |v-w|^p + |x-w|^p + |u-x|^p) - |u-w|^p - |x-v|^p`, for `p >= 2`.
    pub slack_pg2: Option<F>,
    /// Largest right-hand side, for relative tolerances.
    pub scale: F,
}

impl<F: Real> FourPointSlack<F> {
    pub fn min_slack(&self) -> F {
        [self.slack_1p2, self.slack_pg2].into_iter().flatten().fold(F::infinity(), F::min)
    }

    pub fn holds(&self, rel: F) -> bool {
        self.min_slack() >= -rel * self.scale.max(F::one())
    }
}

pub fn fourpoint<F: Real>(u: &[F], v: &[F], w: &[F], x: &[F], p: F) -> Result<FourPointSlack<F>> {
    let dim = u.len();
    for pt in [v, w, x] {
        if pt.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: pt.len() });
        }
    }
    if !(p >= F::one()) {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")));
    }
    let two = F::lit(2.0);
    let mut scale = F::zero();
    let slack_1p2 = (p <= two).then(|| {
        let sq = |a: &[F], b: &[F]| {
            let t = lp_dist(a, b, p);
            t * t
        };
        let rhs = sq(u, v) + sq(v, w) + sq(x, w) + sq(u, x);
        scale = scale.max(rhs);
        rhs - sq(u, w) - (p - F::one()) * sq(x, v)
    });
    let slack_pg2 = (p >= two).then(|| {
        let rhs = two.powf(p - two) * (lp_pow(u, v, p) + lp_pow(v, w, p) + lp_pow(x, w, p) + lp_pow(u, x, p));
        scale = scale.max(rhs);
        rhs - lp_pow(u, w, p) - lp_pow(x, v, p)
    });
    Ok(FourPointSlack { slack_1p2, slack_pg2, scale })
}
