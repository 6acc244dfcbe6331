//! Closed-form checks of the sampling and radius hypotheses under which the
//! ambient Cech and Rips complexes recover the homotopy type of the target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of a weighted sample: reach (or mu-reach), ambient dimension,
/// noise level, covering radius and radius extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionInput {
    pub tau: f64,
    pub dim: usize,
    /// Largest distance from a sample to the target.
    pub eps: f64,
    /// Radius at which the samples cover the target.
    pub delta: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl ReconstructionInput {
    pub fn uniform(tau: f64, dim: usize, eps: f64, delta: f64, r: f64) -> Self {
        Self { tau, dim, eps, delta, r_min: r, r_max: r }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.tau, self.eps, self.delta, self.r_min, self.r_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(self.tau > 0.0 && self.eps >= 0.0 && self.eps < self.tau) {
            return Err(Error::InvalidArgument(format!("need 0 <= eps < tau, got eps={} tau={}", self.eps, self.tau)));
        }
        if !(self.delta > 0.0 && self.r_min > 0.0 && self.r_min <= self.r_max) {
            return Err(Error::InvalidArgument("need delta > 0 and 0 < r_min <= r_max".into()));
        }
        Ok(())
    }

    fn q(&self) -> f64 {
        dim_ratio(self.dim)
    }
}

/// `d / (d + 1)`, which tends to 1 as the dimension grows.
pub fn dim_ratio(d: usize) -> f64 {
    d as f64 / (d as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    /// NaN when the right-hand side leaves the domain of its square roots.
    pub rhs: f64,
    pub ok: bool,
}

impl Inequality {
    /// `lhs <= rhs`; NaN on either side fails.
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ok = lhs <= rhs;
        Self { label: label.into(), lhs, rhs, ok }
    }

    /// `rhs - lhs`, or negative infinity outside the domain.
    pub fn slack(&self) -> f64 {
        let s = self.rhs - self.lhs;
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub inequalities: Vec<Inequality>,
    pub all_satisfied: bool,
}

impl ConditionReport {
    pub fn new(name: impl Into<String>, inequalities: Vec<Inequality>) -> Self {
        let all_satisfied = inequalities.iter().all(|i| i.ok);
        Self { name: name.into(), inequalities, all_satisfied }
    }

    pub fn get(&self, label: &str) -> Option<&Inequality> {
        self.inequalities.iter().find(|i| i.label == label)
    }
}

fn sqrt_or_nan(x: f64) -> f64 {
    if x >= 0.0 {
        x.sqrt()
    } else {
        f64::NAN
    }
}

/// Largest radius for which restricted balls around a point at distance `dist`
/// still meet the target in a contractible set.
pub fn nerve_radius_bound(tau: f64, dist: f64) -> Result<f64> {
    if !(0.0..=tau).contains(&dist) {
        return Err(Error::InvalidArgument(format!("distance {dist} outside [0, {tau}]")));
    }
    Ok((tau * tau + (tau - dist).powi(2)).sqrt())
}

/// Radius of the restricted ball that contains the ambient ball of radius `r`.
pub fn interleave_cech_radius(r: f64, dist: f64, tau: f64) -> Result<f64> {
    if !(dist >= 0.0 && dist < tau) {
        return Err(Error::InvalidArgument(format!("distance {dist} outside [0, {tau})")));
    }
    Ok((2.0 * r * r + dist * (2.0 * tau - dist)).sqrt())
}

/// Restricted radius that the Rips complex at `r` is interleaved with.
pub fn interleave_rips_radius(r: f64, dist: f64, tau: f64, d: usize) -> Result<f64> {
    if !(dist >= 0.0 && dist < tau) {
        return Err(Error::InvalidArgument(format!("distance {dist} outside [0, {tau})")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok((4.0 * dim_ratio(d) * r * r + dist * (2.0 * tau - dist)).sqrt())
}

/// `sqrt(2d / (d + 1))`: a Rips complex at `r` sits inside the Cech complex at this multiple of `r`.
pub fn rips_cech_factor(d: usize) -> f64 {
    (2.0 * dim_ratio(d)).sqrt()
}

/// First covering inequality for the Cech complex, as `(lhs, rhs)`.
pub(crate) fn cech_first(tau: f64, eps: f64, delta: f64, r_min: f64, r_max: f64) -> (f64, f64) {
    let t = tau - eps;
    let bend = r_max * r_max / (t + sqrt_or_nan(t * t - r_max * r_max));
    let inner = r_min - bend - eps - delta;
    let lhs = delta + sqrt_or_nan(r_max * r_max + eps * (2.0 * tau - eps) - 0.25 * inner * inner);
    (lhs, r_min)
}

/// First covering inequality for the Rips complex, as `(lhs, rhs)` with `lhs = delta`.
pub(crate) fn rips_first(tau: f64, eps: f64, delta: f64, r_min: f64, r_max: f64, q: f64) -> (f64, f64) {
    let m = 0.5 * q * r_max * r_max + eps * (2.0 * tau - eps);
    let rhs = r_min - 0.5 * sqrt_or_nan(2.0 * tau * m / (tau + sqrt_or_nan(tau * tau - m)));
    (delta, rhs)
}

/// Terms of the second covering inequality. Both complexes share it; the
/// mu-reach variants substitute different scales into its pieces.
pub(crate) struct SecondCovering {
    /// Noise term subtracted from `r_min^2` in the first root.
    pub noise_a: f64,
    /// Noise term added to `r_min^2` in the second root.
    pub noise_b: f64,
    pub tau_inner: f64,
    /// Scale under the nested root of the denominator.
    pub tau_outer: f64,
    pub r_min: f64,
    pub q: f64,
}

impl SecondCovering {
    pub(crate) fn rhs(&self) -> f64 {
        let r2 = self.r_min * self.r_min;
        let first = (2.0 / self.q).sqrt() * sqrt_or_nan((r2 - self.noise_a) / 2.0);
        let m = r2 + self.noise_b;
        let den = 2.0 * self.tau_inner + sqrt_or_nan(4.0 * self.tau_outer * self.tau_outer - 2.0 * m);
        let second = sqrt_or_nan(2.0 * self.tau_inner * m / den);
        0.5 * (first - second)
    }

    fn plain(tau: f64, eps: f64, r_min: f64, q: f64) -> Self {
        let n = eps * (2.0 * tau - eps);
        Self { noise_a: n, noise_b: n, tau_inner: tau, tau_outer: tau, r_min, q }
    }
}

/// Radius and covering hypotheses for the ambient Cech complex.
pub fn check_cech_theorem(input: &ReconstructionInput) -> Result<ConditionReport> {
    input.validate()?;
    let ReconstructionInput { tau, eps, delta, r_min, r_max, .. } = *input;
    let (l1, r1) = cech_first(tau, eps, delta, r_min, r_max);
    let second = SecondCovering::plain(tau, eps, r_min, input.q());
    Ok(ConditionReport::new(
        "cech",
        vec![
            Inequality::new("radius", r_max, tau - eps),
            Inequality::new("covering_1", l1, r1),
            Inequality::new("covering_2", delta, second.rhs()),
        ],
    ))
}

/// Radius and covering hypotheses for the Rips complex.
pub fn check_rips_theorem(input: &ReconstructionInput) -> Result<ConditionReport> {
    input.validate()?;
    let ReconstructionInput { tau, eps, delta, r_min, r_max, .. } = *input;
    let q = input.q();
    let (l1, r1) = rips_first(tau, eps, delta, r_min, r_max, q);
    let second = SecondCovering::plain(tau, eps, r_min, q);
    Ok(ConditionReport::new(
        "rips",
        vec![
            Inequality::new("radius", r_max, (0.5 / q).sqrt() * (tau - eps)),
            Inequality::new("covering_1", l1, r1),
            Inequality::new("covering_2", delta, second.rhs()),
        ],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Cech,
    Rips,
}

/// How to read the bare reach symbols left in the mu-reach covering inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TauReading {
    /// Keep them as the mu-reach, exactly as displayed.
    #[default]
    Literal,
    /// Replace them by `r_max + eps`, the reach of the double offset.
    Substituted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuReachReport {
    pub report: ConditionReport,
    pub mu: f64,
    pub reading: TauReading,
    /// Reach lower bound of the double offset, `r_max + eps`.
    pub offset_reach: f64,
}

/// Covering hypotheses when the target only has positive mu-reach `input.tau`.
/// Requires `r_max + eps <= mu * tau` so that the double offset has reach at least `r_max + eps`.
pub fn check_mureach_corollary(
    input: &ReconstructionInput,
    mu: f64,
    kind: ComplexKind,
    reading: TauReading,
) -> Result<MuReachReport> {
    input.validate()?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!("mu must lie in (0, 1], got {mu}")));
    }
    let ReconstructionInput { tau, eps, delta, r_min, r_max, .. } = *input;
    let t = r_max + eps;
    if t > mu * tau {
        return Err(Error::Precondition(format!("r_max + eps = {t} exceeds mu * mu-reach = {}", mu * tau)));
    }
    let q = input.q();
    let bare = match reading {
        TauReading::Literal => tau,
        TauReading::Substituted => t,
    };
    let near = eps * (2.0 * t - eps);
    let far = eps * (2.0 * bare - eps);
    let (first, second) = match kind {
        ComplexKind::Cech => (
            cech_first(t, eps, delta, r_min, r_max),
            SecondCovering { noise_a: near, noise_b: far, tau_inner: bare, tau_outer: t, r_min, q },
        ),
        ComplexKind::Rips => (
            rips_first(t, eps, delta, r_min, r_max, q),
            SecondCovering { noise_a: near, noise_b: near, tau_inner: bare, tau_outer: bare, r_min, q },
        ),
    };
    let name = match kind {
        ComplexKind::Cech => "cech_mu_reach",
        ComplexKind::Rips => "rips_mu_reach",
    };
    let report = ConditionReport::new(
        name,
        vec![Inequality::new("covering_1", first.0, first.1), Inequality::new("covering_2", delta, second.rhs())],
    );
    Ok(MuReachReport { report, mu, reading, offset_reach: t })
}
