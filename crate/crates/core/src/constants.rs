//! Largest admissible ratio between the Hausdorff distance and the reach for
//! equal radii, found by bisection over the normalized covering inequalities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{cech_first, dim_ratio, rips_first, ComplexKind, SecondCovering};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Noise and covering radius both equal to the ratio.
    General,
    /// Covering radius sent to zero, noise equal to the ratio.
    NoisyAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "d")]
pub enum DimConvention {
    Finite(usize),
    /// The limit of large ambient dimension.
    #[default]
    Limit,
}

impl DimConvention {
    /// `d / (d + 1)`.
    pub fn ratio(self) -> f64 {
        match self {
            DimConvention::Finite(d) => dim_ratio(d),
            DimConvention::Limit => 1.0,
        }
    }

    pub fn label(self) -> String {
        match self {
            DimConvention::Finite(d) => format!("d={d}"),
            DimConvention::Limit => "d=inf".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProblem {
    pub kind: ComplexKind,
    pub regime: Regime,
    pub dim: DimConvention,
    /// Grid size for the inner search over `r / tau`.
    pub scan_grid: usize,
    /// When set, the single noise term written as `rho (2 tau - rho)` uses this
    /// reach instead of the normalized value 1.
    pub literal_tau: Option<f64>,
}

impl RatioProblem {
    pub fn new(kind: ComplexKind, regime: Regime) -> Self {
        Self { kind, regime, dim: DimConvention::Limit, scan_grid: 10_000, literal_tau: None }
    }

    pub fn with_dim(mut self, dim: DimConvention) -> Self {
        self.dim = dim;
        self
    }

    pub fn name(&self) -> String {
        let kind = match self.kind {
            ComplexKind::Cech => "cech",
            ComplexKind::Rips => "rips",
        };
        let regime = match self.regime {
            Regime::General => "general",
            Regime::NoisyAsymptotic => "noisy",
        };
        format!("{kind}-{regime}")
    }

    fn validate(&self) -> Result<()> {
        if self.scan_grid < 1000 {
            return Err(Error::InvalidArgument(format!("scan grid needs at least 1000 points, got {}", self.scan_grid)));
        }
        if let DimConvention::Finite(0) = self.dim {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(())
    }

    fn delta(&self, rho: f64) -> f64 {
        match self.regime {
            Regime::General => rho,
            Regime::NoisyAsymptotic => 0.0,
        }
    }

    /// Slack of the radius-dependent inequality at `x = r / tau`.
    fn first_slack(&self, rho: f64, x: f64) -> f64 {
        let delta = self.delta(rho);
        let (lhs, rhs) = match self.kind {
            ComplexKind::Cech => cech_first(1.0, rho, delta, x, x),
            ComplexKind::Rips => rips_first(1.0, rho, delta, x, x, self.dim.ratio()),
        };
        let s = rhs - lhs;
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }

    /// Radius the second inequality is evaluated at: the largest allowed by the radius condition.
    fn largest_radius(&self, rho: f64) -> f64 {
        match self.kind {
            ComplexKind::Cech => 1.0 - rho,
            ComplexKind::Rips => (0.5 / self.dim.ratio()).sqrt() * (1.0 - rho),
        }
    }

    fn second_slack(&self, rho: f64) -> f64 {
        let tau_a = self.literal_tau.unwrap_or(1.0);
        let c = SecondCovering {
            noise_a: rho * (2.0 * tau_a - rho),
            noise_b: rho * (2.0 - rho),
            tau_inner: 1.0,
            tau_outer: 1.0,
            r_min: self.largest_radius(rho),
            q: self.dim.ratio(),
        };
        let s = c.rhs() - self.delta(rho);
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }

    /// Best slack of the first inequality and the radius achieving it. The Cech
    /// radius is free in `(0, 1 - rho]`; the Rips radius is pinned at its bound.
    fn best_first(&self, rho: f64) -> (f64, f64) {
        match self.kind {
            ComplexKind::Rips => {
                let x = self.largest_radius(rho);
                (self.first_slack(rho, x), x)
            }
            ComplexKind::Cech => {
                let n = self.scan_grid;
                let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
                for i in 1..=n {
                    let x = i as f64 / n as f64;
                    let s = self.first_slack(rho, x);
                    if s > best {
                        best = s;
                        arg = x;
                    }
                }
                if best.is_finite() {
                    let step = 1.0 / n as f64;
                    let (x, s) = golden_max(|x| self.first_slack(rho, x), (arg - step).max(1e-12), (arg + step).min(1.0));
                    if s > best {
                        return (s, x);
                    }
                }
                (best, arg)
            }
        }
    }

    pub fn evaluate(&self, rho: f64) -> CurveRow {
        let (first, x) = self.best_first(rho);
        let second = self.second_slack(rho);
        CurveRow { rho, feasible: first >= 0.0 && second >= 0.0, first_slack: first, second_slack: second, best_radius: x }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub rho: f64,
    pub feasible: bool,
    /// Largest slack of the radius-dependent inequality over admissible radii.
    pub first_slack: f64,
    pub second_slack: f64,
    /// Radius over reach at which `first_slack` is attained.
    pub best_radius: f64,
}

impl CurveRow {
    pub fn best_slack(&self) -> f64 {
        self.first_slack.min(self.second_slack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRatio {
    pub problem: String,
    pub convention: String,
    pub value: f64,
    /// Set when even `rho = tol` is infeasible; `value` is then 0.
    pub infeasible: bool,
    /// Largest ratio each inequality allows on its own.
    pub first_only: f64,
    pub second_only: f64,
}

fn bisect(tol: f64, ok: impl Fn(f64) -> bool) -> Option<f64> {
    if !ok(tol) {
        return None;
    }
    let (mut lo, mut hi) = (tol, 0.5);
    if ok(hi) {
        return Some(hi);
    }
    while hi - lo > tol * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Supremum of feasible ratios in `(0, 0.5)`, by bisection to within `tol`.
pub fn max_ratio(problem: &RatioProblem, tol: f64) -> Result<MaxRatio> {
    problem.validate()?;
    if !(1e-6..0.5).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in [1e-6, 0.5), got {tol}")));
    }
    let joint = bisect(tol, |rho| problem.evaluate(rho).feasible);
    let first_only = bisect(tol, |rho| problem.best_first(rho).0 >= 0.0).unwrap_or(0.0);
    let second_only = bisect(tol, |rho| problem.second_slack(rho) >= 0.0).unwrap_or(0.0);
    Ok(MaxRatio {
        problem: problem.name(),
        convention: problem.dim.label(),
        value: joint.unwrap_or(0.0),
        infeasible: joint.is_none(),
        first_only,
        second_only,
    })
}

/// Feasibility and slacks along a sorted grid of ratios.
pub fn ratio_curve(problem: &RatioProblem, rhos: &[f64]) -> Result<Vec<CurveRow>> {
    problem.validate()?;
    if rhos.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("ratio grid must be sorted".into()));
    }
    Ok(rhos.par_iter().map(|&rho| problem.evaluate(rho)).collect())
}

/// Ratio bounds from earlier reconstruction results, keyed by source and complex.
pub fn comparison_constants() -> BTreeMap<&'static str, f64> {
    let s2 = 2f64.sqrt();
    BTreeMap::from([
        ("nsw_cech", 3.0 - 8f64.sqrt()),
        ("attali_cech", (-3.0 + 22f64.sqrt()) / 13.0),
        ("attali_rips", (2.0 * (2.0 - s2).sqrt() - s2) / (2.0 + s2)),
    ])
}

pub const DIM_CONVENTIONS: [DimConvention; 6] = [
    DimConvention::Finite(1),
    DimConvention::Finite(2),
    DimConvention::Finite(3),
    DimConvention::Finite(10),
    DimConvention::Finite(100),
    DimConvention::Limit,
];

/// All four problems under every convention in [`DIM_CONVENTIONS`].
pub fn convention_table(tol: f64) -> Result<Vec<MaxRatio>> {
    let mut out = Vec::new();
    for dim in DIM_CONVENTIONS {
        for kind in [ComplexKind::Cech, ComplexKind::Rips] {
            for regime in [Regime::General, Regime::NoisyAsymptotic] {
                out.push(max_ratio(&RatioProblem::new(kind, regime).with_dim(dim), tol)?);
            }
        }
    }
    Ok(out)
}
