//! Time-stepping schemes over sparse weight maps.
//!
//! The target statistic `E[(X(T) - x_ini)^alpha]` equals the weight on
//! `n = 0` after propagating the indicator weight at `alpha` through `M`
//! applications of an approximation of `exp((T/M) L)`:
//!
//! * `Explicit1`:  `1 + h L` with `h = T/M`; 1st-order convergence in `1/M`.
//! * `Explicit2`:  `1 + h L + (h L)^2 / 2`; 2nd-order.
//! * `Implicit1`:  elementwise-approximated resolvent `(1 - h L)^-1`;
//!   1st-order.
//! * `Implicit2`:  `(1 - h L)^-1 (1 + h L)` with the half step `h = T/(2M)`
//!   and a resolvent approximation correct to second order in `h`;
//!   2nd-order.
//!
//! All schemes keep the weight support finite: each step can only reach
//! states at most one, two, or three event displacements away.

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::index::{multi_range, MultiIndex};
use crate::polynomial::binomial;
use crate::weight_map::WeightMap;
use std::collections::BTreeMap;

/// Magnitudes beyond this abort the run as divergent; first-order schemes
/// can blow up for high moment orders at small `M`.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

/// Resolvent denominators smaller than this raise
/// [`Error::SingularDiagonal`]: the step size is too large for the
/// generator's diagonal.
pub const SINGULAR_TOLERANCE: f64 = 1e-8;

/// Walk enumeration is exponential in the step count; longer runs must use
/// the dynamic-programming propagator.
pub const MAX_ENUMERATION_STEPS: usize = 8;

/// Selects a time-stepping scheme.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepScheme {
    Explicit1,
    Explicit2,
    Implicit1,
    /// `keep_two_hop_denominator` retains the resolvent-product denominator
    /// of the two-hop term. It only adds a higher-order contribution and is
    /// off by default, but can sometimes improve accuracy.
    Implicit2 { keep_two_hop_denominator: bool },
}

impl StepScheme {
    pub const ALL: [StepScheme; 4] = [
        StepScheme::Explicit1,
        StepScheme::Explicit2,
        StepScheme::Implicit1,
        StepScheme::Implicit2 {
            keep_two_hop_denominator: false,
        },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StepScheme::Explicit1 => "explicit1",
            StepScheme::Explicit2 => "explicit2",
            StepScheme::Implicit1 => "implicit1",
            StepScheme::Implicit2 { .. } => "implicit2",
        }
    }

    /// Order of convergence in `1/M`.
    pub fn order(&self) -> u32 {
        match self {
            StepScheme::Explicit1 | StepScheme::Implicit1 => 1,
            StepScheme::Explicit2 | StepScheme::Implicit2 { .. } => 2,
        }
    }
}

impl std::str::FromStr for StepScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "explicit1" => Ok(StepScheme::Explicit1),
            "explicit2" => Ok(StepScheme::Explicit2),
            "implicit1" => Ok(StepScheme::Implicit1),
            "implicit2" => Ok(StepScheme::Implicit2 {
                keep_two_hop_denominator: false,
            }),
            other => Err(format!(
                "unknown method `{other}` (expected explicit1, explicit2, implicit1 or implicit2)"
            )),
        }
    }
}

/// A complete propagation request.
#[derive(Clone, PartialEq, Debug)]
pub struct RunPlan {
    pub horizon: f64,
    pub steps: usize,
    pub alpha: MultiIndex,
    pub scheme: StepScheme,
    /// Optional magnitude pruning between steps; an approximation, `None`
    /// keeps every nonzero weight.
    pub prune_threshold: Option<f64>,
}

impl RunPlan {
    pub fn new(horizon: f64, steps: usize, alpha: MultiIndex, scheme: StepScheme) -> Self {
        RunPlan {
            horizon,
            steps,
            alpha,
            scheme,
            prune_threshold: None,
        }
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = Some(threshold);
        self
    }

    fn validate(&self, dimension: usize) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidPlan(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidPlan("step count must be at least 1".into()));
        }
        if self.alpha.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: self.alpha.len(),
            });
        }
        Ok(())
    }
}

/// `out = w + h L w`.
pub fn step_explicit1(g: &Generator, w: &WeightMap, h: f64) -> WeightMap {
    let lw = g.apply(w);
    let mut out = w.clone();
    for (n, c) in lw.iter() {
        out.accumulate(n.clone(), h * c);
    }
    out.prune_zeros();
    out
}

/// `out = w + h L w + (h^2/2) L (L w)`; `L w` is computed once and reused.
pub fn step_explicit2(g: &Generator, w: &WeightMap, h: f64) -> WeightMap {
    let lw = g.apply(w);
    let llw = g.apply(&lw);
    let mut out = w.clone();
    for (n, c) in lw.iter() {
        out.accumulate(n.clone(), h * c);
    }
    let half_h2 = 0.5 * h * h;
    for (n, c) in llw.iter() {
        out.accumulate(n.clone(), half_h2 * c);
    }
    out.prune_zeros();
    out
}

fn checked_denominator(value: f64, state: &MultiIndex) -> Result<f64> {
    if value.abs() < SINGULAR_TOLERANCE {
        return Err(Error::SingularDiagonal {
            state: state.clone(),
            magnitude: value.abs(),
        });
    }
    Ok(value)
}

/// First-order elementwise resolvent: diagonal `1 / (1 - h [L]_nn)`,
/// off-diagonal `h [L]_{n'n} / ((1 - h [L]_{n'n'}) (1 - h [L]_nn))`.
pub fn step_implicit1(g: &Generator, w: &WeightMap, h: f64) -> Result<WeightMap> {
    let mut out = WeightMap::new();
    for (n, wn) in w.iter() {
        let den_n = checked_denominator(1.0 - h * g.diag_element(n), n)?;
        out.accumulate(n.clone(), wn / den_n);
        for (target, value) in g.offdiag_targets(n) {
            let den_t = checked_denominator(1.0 - h * g.diag_element(&target), &target)?;
            out.accumulate(target, wn * h * value / (den_t * den_n));
        }
    }
    out.prune_zeros();
    Ok(out)
}

/// Applies the second-order elementwise approximation of the resolvent
/// `(1 - h L)^-1`.
///
/// Diagonal:
///
/// ```text
/// 1 / (1 - h [L]_nn - h^2 sum_{m != n} [L]_{nm} [L]_{mn})
/// ```
///
/// Off-diagonal, for `n' != n`:
///
/// ```text
/// h [L]_{n'n} / ((1 - h [L]_{n'n'}) (1 - h [L]_nn))
///   + h^2 sum_{m != n', n} [L]_{n'm} [L]_{mn}
/// ```
///
/// The sums run over ordered pairs of events, so only states one or two
/// displacements away contribute. With `keep_two_hop_denominator` the
/// two-hop term is divided by the product of the three diagonal resolvent
/// factors along the path; the difference is of higher order.
pub fn resolvent2_apply(
    g: &Generator,
    w: &WeightMap,
    h: f64,
    keep_two_hop_denominator: bool,
) -> Result<WeightMap> {
    let mut out = WeightMap::new();
    for (n, wn) in w.iter() {
        let den_n = checked_denominator(1.0 - h * g.diag_element(n), n)?;

        // diagonal: gather round trips n -> m -> n
        let mut round_trips = 0.0;
        for event in g.hopping_events() {
            let outward = event.gamma().eval_lattice(n);
            if outward == 0.0 {
                continue;
            }
            let back: smallvec::SmallVec<[i32; 4]> =
                event.shift().iter().map(|c| -c).collect();
            let Some(back_event) = g.event_with_shift(&back) else {
                continue;
            };
            let mid = n
                .offset(event.shift())
                .expect("nonzero event weight cannot leave the lattice");
            round_trips += outward * back_event.gamma().eval_lattice(&mid);
        }
        let den_diag =
            checked_denominator(1.0 - h * g.diag_element(n) - h * h * round_trips, n)?;
        out.accumulate(n.clone(), wn / den_diag);

        // single hops
        for (target, value) in g.offdiag_targets(n) {
            let den_t = checked_denominator(1.0 - h * g.diag_element(&target), &target)?;
            out.accumulate(target, wn * h * value / (den_t * den_n));
        }

        // double hops n -> m -> n', excluding paths that return to n
        for second in g.hopping_events() {
            let first_leg = second.gamma().eval_lattice(n);
            if first_leg == 0.0 {
                continue;
            }
            let mid = n
                .offset(second.shift())
                .expect("nonzero event weight cannot leave the lattice");
            for first in g.hopping_events() {
                if first
                    .shift()
                    .iter()
                    .zip(second.shift())
                    .all(|(a, b)| a + b == 0)
                {
                    continue; // round trip: already in the diagonal sum
                }
                let second_leg = first.gamma().eval_lattice(&mid);
                if second_leg == 0.0 {
                    continue;
                }
                let target = mid
                    .offset(first.shift())
                    .expect("nonzero event weight cannot leave the lattice");
                let mut term = h * h * first_leg * second_leg;
                if keep_two_hop_denominator {
                    let den_t =
                        checked_denominator(1.0 - h * g.diag_element(&target), &target)?;
                    let den_m = checked_denominator(1.0 - h * g.diag_element(&mid), &mid)?;
                    term /= den_t * den_m * den_n;
                }
                out.accumulate(target, wn * term);
            }
        }
    }
    out.prune_zeros();
    Ok(out)
}

/// One implicit 2nd-order step with half step `h_half = T/(2M)`: the forward
/// factor `1 + h L` first, then the approximate resolvent.
pub fn step_implicit2(
    g: &Generator,
    w: &WeightMap,
    h_half: f64,
    keep_two_hop_denominator: bool,
) -> Result<WeightMap> {
    let forward = step_explicit1(g, w, h_half);
    resolvent2_apply(g, &forward, h_half, keep_two_hop_denominator)
}

/// Propagates the indicator weight at `plan.alpha` over `plan.steps` steps
/// and returns the weight at `n = 0`, i.e. the estimate of
/// `E[(X(T) - x_ini)^alpha]`.
pub fn run(g: &Generator, plan: &RunPlan) -> Result<f64> {
    plan.validate(g.dimension())?;
    let m = plan.steps;
    let mut w = WeightMap::unit(plan.alpha.clone());
    for step in 0..m {
        w = match plan.scheme {
            StepScheme::Explicit1 => step_explicit1(g, &w, plan.horizon / m as f64),
            StepScheme::Explicit2 => step_explicit2(g, &w, plan.horizon / m as f64),
            StepScheme::Implicit1 => step_implicit1(g, &w, plan.horizon / m as f64)?,
            StepScheme::Implicit2 {
                keep_two_hop_denominator,
            } => step_implicit2(
                g,
                &w,
                plan.horizon / (2.0 * m as f64),
                keep_two_hop_denominator,
            )?,
        };
        if let Some(threshold) = plan.prune_threshold {
            w.prune_below(threshold);
        }
        let magnitude = w.max_abs();
        if !magnitude.is_finite() || magnitude > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { step, magnitude });
        }
    }
    Ok(w.get(&MultiIndex::zeros(g.dimension())))
}

/// Brute-force oracle for the explicit 1st-order scheme: enumerates every
/// length-`M` sequence of events and identity moves from `alpha` to `0`,
/// multiplying the per-step factors (`1` for the identity, `h gamma_r(n)`
/// for event `r`). Exponential in `M`; capped at
/// [`MAX_ENUMERATION_STEPS`].
pub fn enumerate_walks(g: &Generator, plan: &RunPlan) -> Result<f64> {
    plan.validate(g.dimension())?;
    if plan.scheme != StepScheme::Explicit1 {
        return Err(Error::WalkScheme);
    }
    if plan.steps > MAX_ENUMERATION_STEPS {
        return Err(Error::WalkLimit {
            steps: plan.steps,
            max: MAX_ENUMERATION_STEPS,
        });
    }
    let h = plan.horizon / plan.steps as f64;
    let mut total = 0.0;
    walk(g, plan.alpha.clone(), plan.steps, 1.0, h, &mut total);
    Ok(total)
}

fn walk(g: &Generator, n: MultiIndex, remaining: usize, factor: f64, h: f64, total: &mut f64) {
    if remaining == 0 {
        if n.is_zero() {
            *total += factor;
        }
        return;
    }
    walk(g, n.clone(), remaining - 1, factor, h, total);
    for event in g.events() {
        let value = event.gamma().eval_lattice(&n);
        if value == 0.0 {
            continue;
        }
        let next = n
            .offset(event.shift())
            .expect("nonzero event weight cannot leave the lattice");
        walk(g, next, remaining - 1, factor * h * value, h, total);
    }
}

/// Recovers the raw moment `E[X(T)^alpha]` from the shifted moments
/// `E[(X(T) - origin)^beta]` for all `beta <= alpha`, by binomial
/// expansion of `((X - origin) + origin)^alpha`.
pub fn recover_raw_moment(
    shifted: &BTreeMap<MultiIndex, f64>,
    alpha: &MultiIndex,
    origin: &[f64],
) -> Result<f64> {
    if alpha.len() != origin.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: origin.len(),
        });
    }
    let mut total = 0.0;
    for beta in multi_range(alpha) {
        let value = shifted
            .get(&beta)
            .copied()
            .ok_or_else(|| Error::MissingMoment(beta.clone()))?;
        let mut weight = 1.0;
        for d in 0..alpha.len() {
            weight *= binomial(alpha[d], beta[d]) * origin[d].powi((alpha[d] - beta[d]) as i32);
        }
        total += weight * value;
    }
    Ok(total)
}
