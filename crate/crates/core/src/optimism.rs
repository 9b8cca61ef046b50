//! The bandit optimism map and the policies built from it.
//!
//! For arm posteriors with means `m_i` and inverse rates `B_i`,
//!
//! ```text
//! G(π) = Σ_i π_i (m_i + B_i(−log π_i))
//! ```
//!
//! is concave on the simplex and upper-bounds `E max_i μ_i` at the Thompson
//! sampling policy. VBOS plays its maximizer; K-learning plays the maximizer
//! of the same bound with one shared temperature.

use crate::error::{check_len, Error, Result};
use crate::posteriors::{Belief, DEGENERATE_VAR};
use crate::rng::RngStream;

const SUM_TOL: f64 = 1e-9;

/// A probability vector over arms.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    probs: Vec<f64>,
}

impl Policy {
    /// Validates non-negativity and unit sum (to 1e-9), then renormalizes
    /// away the rounding.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("policy over zero arms".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidInput(format!("policy entry {i} is {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidInput(format!("policy sums to {s}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / s).collect(),
        })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || !s.is_finite() || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidInput("weights must be non-negative with positive finite sum".into()));
        }
        Self::new(weights.into_iter().map(|w| w / s).collect())
    }

    pub fn uniform(arms: usize) -> Self {
        assert!(arms > 0);
        Self {
            probs: vec![1.0 / arms as f64; arms],
        }
    }

    pub fn point_mass(arms: usize, index: usize) -> Self {
        assert!(index < arms);
        let mut probs = vec![0.0; arms];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.probs)
    }

    /// Lowest index of the largest entry.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    /// Entries clamped to `[floor, 1]`, then renormalized.
    pub fn clamped(&self, floor: f64) -> Policy {
        if self.probs.len() == 1 {
            return self.clone();
        }
        let mut p: Vec<f64> = self.probs.iter().map(|&x| x.max(floor)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        Policy { probs: p }
    }

    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimismEvaluation {
    pub value: f64,
    /// `Σ π_i m_i`.
    pub exploit: f64,
    /// `Σ π_i B_i(−log π_i)`, scaled by the exploration weight.
    pub explore: f64,
    /// `B_i(−log π_i)`; zero where `π_i = 0`.
    pub per_arm_bonus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tolerance: f64,
    pub interior_floor: f64,
    pub mc_samples: usize,
    /// Multiplier on the exploration term of the optimism map used by the
    /// VBOS solvers. Membership tests always use weight one.
    pub explore_weight: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tolerance: 1e-8,
            interior_floor: 1e-12,
            mc_samples: 200_000,
            explore_weight: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, arms: usize) -> Result<()> {
        if self.max_iters == 0 || !(self.tolerance > 0.0) || self.mc_samples == 0 {
            return Err(Error::InvalidInput("solver config needs positive iteration, tolerance and sample counts".into()));
        }
        if !(self.interior_floor > 0.0) || self.interior_floor * arms as f64 >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "interior floor {} unusable with {arms} arms",
                self.interior_floor
            )));
        }
        if !(self.explore_weight >= 0.0) {
            return Err(Error::InvalidInput("explore weight must be non-negative".into()));
        }
        Ok(())
    }
}

fn budget(p: f64) -> f64 {
    (-p.ln()).max(0.0)
}

pub fn optimism_map<B: Belief>(arms: &[B], pi: &Policy) -> Result<OptimismEvaluation> {
    optimism_map_weighted(arms, pi, 1.0)
}

pub fn optimism_map_weighted<B: Belief>(
    arms: &[B],
    pi: &Policy,
    explore_weight: f64,
) -> Result<OptimismEvaluation> {
    check_len(arms.len(), pi.len())?;
    let mut exploit = 0.0;
    let mut explore = 0.0;
    let mut per_arm_bonus = vec![0.0; arms.len()];
    for (j, (arm, &p)) in arms.iter().zip(pi.probs()).enumerate() {
        if p <= 0.0 {
            continue;
        }
        let b = arm.rate_bonus(budget(p)).radius;
        per_arm_bonus[j] = b;
        exploit += p * arm.mean();
        explore += p * explore_weight * b;
    }
    Ok(OptimismEvaluation {
        value: exploit + explore,
        exploit,
        explore,
        per_arm_bonus,
    })
}

/// Gradient `∂G/∂π_i = m_i + B_i(y_i) − τ*_i(y_i)` with `y_i = −log π_i`.
/// Only defined in the interior; entries outside
/// `[floor, 1 − floor]` are rejected.
pub fn optimism_gradient<B: Belief>(arms: &[B], pi: &Policy, cfg: &SolverConfig) -> Result<Vec<f64>> {
    check_len(arms.len(), pi.len())?;
    let floor = cfg.interior_floor;
    for (index, &value) in pi.probs().iter().enumerate() {
        if value < floor || value > 1.0 - floor {
            return Err(Error::NotInterior { index, value, floor });
        }
    }
    Ok(gradient_unchecked(arms, pi.probs(), cfg.explore_weight))
}

fn gradient_unchecked<B: Belief>(arms: &[B], p: &[f64], w: f64) -> Vec<f64> {
    arms.iter()
        .zip(p)
        .map(|(arm, &pj)| {
            let rb = arm.rate_bonus(budget(pj));
            let tau = if rb.tau.is_finite() { rb.tau } else { f64::MAX };
            arm.mean() + w * (rb.radius - tau)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VbosSolution {
    pub policy: Policy,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// The VBOS policy `argmax_{π∈Δ} G(π)`.
///
/// All-Gaussian arms are solved exactly from the KKT conditions: every arm
/// in the support satisfies `m_i + σ_i(u_i − 1/u_i) = ν` with
/// `π_i = exp(−u_i²/2)`, and `ν` is found by bisection on `Σπ_i = 1`.
/// Other laws use entropic mirror ascent with backtracking.
pub fn vbos_policy<B: Belief>(arms: &[B], cfg: &SolverConfig) -> Result<VbosSolution> {
    if arms.is_empty() {
        return Err(Error::InvalidInput("no arms".into()));
    }
    cfg.validate(arms.len())?;
    if arms.len() == 1 {
        let policy = Policy::uniform(1);
        let value = optimism_map_weighted(arms, &policy, cfg.explore_weight)?.value;
        return Ok(VbosSolution {
            policy,
            value,
            converged: true,
            iterations: 0,
        });
    }
    let (raw, converged, iterations) = vbos_unclamped(arms, cfg);
    let policy = Policy { probs: raw }.clamped(cfg.interior_floor);
    let value = optimism_map_weighted(arms, &policy, cfg.explore_weight)?.value;
    Ok(VbosSolution {
        policy,
        value,
        converged,
        iterations,
    })
}

/// Maximizer before interior clamping. Assumes a validated config and at
/// least two arms.
pub(crate) fn vbos_unclamped<B: Belief>(arms: &[B], cfg: &SolverConfig) -> (Vec<f64>, bool, usize) {
    let gaussian: Option<Vec<f64>> = arms.iter().map(|a| a.gaussian_variance()).collect();
    match gaussian {
        Some(vars) => {
            let means: Vec<f64> = arms.iter().map(|a| a.mean()).collect();
            let sds: Vec<f64> = vars
                .iter()
                .map(|&v| {
                    if v < DEGENERATE_VAR {
                        0.0
                    } else {
                        cfg.explore_weight * v.sqrt()
                    }
                })
                .collect();
            let (p, iters) = water_fill(&means, &sds);
            (p, true, iters)
        }
        None => mirror_ascent(arms, cfg),
    }
}

fn waterline_mass(nu: f64, means: &[f64], sds: &[f64], out: Option<&mut [f64]>) -> f64 {
    let mut total = 0.0;
    let mut out = out;
    for (j, (&m, &s)) in means.iter().zip(sds).enumerate() {
        if s <= 0.0 {
            continue;
        }
        let c = (nu - m) / s;
        let r = (c * c + 4.0).sqrt();
        let u = if c >= 0.0 { 0.5 * (c + r) } else { 2.0 / (r - c) };
        let p = (-0.5 * u * u).exp();
        total += p;
        if let Some(o) = out.as_deref_mut() {
            o[j] = p;
        }
    }
    total
}

/// Exact maximizer of `Σ π_i (m_i + s_i √(−2 log π_i))`.
pub(crate) fn water_fill(means: &[f64], sds: &[f64]) -> (Vec<f64>, usize) {
    let a = means.len();
    let live: Vec<usize> = (0..a).filter(|&j| sds[j] > 0.0).collect();
    let dead_best = (0..a)
        .filter(|&j| sds[j] <= 0.0)
        .fold(None, |acc: Option<usize>, j| match acc {
            Some(b) if means[b] >= means[j] => Some(b),
            _ => Some(j),
        });
    let mut p = vec![0.0; a];
    if live.is_empty() {
        p[argmax(means)] = 1.0;
        return (p, 0);
    }
    if live.len() == 1 && dead_best.is_none() {
        p[live[0]] = 1.0;
        return (p, 0);
    }
    if let Some(d) = dead_best {
        let nu0 = means[d];
        let mass = waterline_mass(nu0, means, sds, Some(&mut p));
        if mass <= 1.0 {
            p[d] = 1.0 - mass;
            return (p, 0);
        }
    }

    let smax = live.iter().map(|&j| sds[j]).fold(0.0, f64::max);
    let mmax = live.iter().map(|&j| means[j]).fold(f64::NEG_INFINITY, f64::max);
    let mmin = live.iter().map(|&j| means[j]).fold(f64::INFINITY, f64::min);
    let mut hi = mmax + smax;
    let mut step = smax;
    while waterline_mass(hi, means, sds, None) > 1.0 {
        hi += step;
        step *= 2.0;
    }
    let mut lo = match dead_best {
        Some(d) => means[d],
        None => {
            let mut lo = mmin - smax;
            let mut step = smax;
            while waterline_mass(lo, means, sds, None) < 1.0 {
                lo -= step;
                step *= 2.0;
            }
            lo
        }
    };
    let mut iters = 0;
    while iters < 400 {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if waterline_mass(mid, means, sds, None) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = waterline_mass(0.5 * (lo + hi), means, sds, Some(&mut p));
    p.iter_mut().for_each(|x| *x /= s);
    (p, iters)
}

fn mirror_ascent<B: Belief>(arms: &[B], cfg: &SolverConfig) -> (Vec<f64>, bool, usize) {
    let a = arms.len();
    let w = cfg.explore_weight;
    let floor = cfg.interior_floor;
    let eval = |p: &[f64]| -> f64 {
        arms.iter()
            .zip(p)
            .map(|(arm, &pj)| {
                if pj <= 0.0 {
                    0.0
                } else {
                    pj * (arm.mean() + w * arm.rate_bonus(budget(pj)).radius)
                }
            })
            .sum()
    };
    let clamp = |p: &mut Vec<f64>| {
        p.iter_mut().for_each(|x| *x = x.max(floor));
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    };
    let mut p = vec![1.0 / a as f64; a];
    let mut f = eval(&p);
    let mut eta = 1.0;
    for k in 0..cfg.max_iters {
        let g = gradient_unchecked(arms, &p, w);
        let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = gmax - p.iter().zip(&g).map(|(pi, gi)| pi * gi).sum::<f64>();
        if gap <= cfg.tolerance {
            return (p, true, k);
        }
        loop {
            let mut q: Vec<f64> = p
                .iter()
                .zip(&g)
                .map(|(pi, gi)| pi * (eta * (gi - gmax)).exp())
                .collect();
            let s: f64 = q.iter().sum();
            q.iter_mut().for_each(|x| *x /= s);
            clamp(&mut q);
            let fq = eval(&q);
            if fq >= f {
                let moved = q.iter().zip(&p).any(|(x, y)| x != y);
                p = q;
                f = fq;
                eta *= 1.5;
                if !moved {
                    return (p, gap <= 10.0 * cfg.tolerance, k);
                }
                break;
            }
            eta *= 0.5;
            if eta < 1e-30 {
                return (p, false, k);
            }
        }
    }
    (p, false, cfg.max_iters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KLearningSolution {
    pub policy: Policy,
    pub tau: f64,
    /// `min_τ τ log Σ exp(m_i/τ + Ψ_i(1/τ))`.
    pub objective: f64,
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !zmax.is_finite() {
        return zmax;
    }
    zmax + z.iter().map(|x| (x - zmax).exp()).sum::<f64>().ln()
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
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
    0.5 * (a + b)
}

/// Minimizes a function of `τ > 0` that is unimodal in `log τ`, starting
/// from the bracket `[1e-8, 1e8]` and widening it upward while the minimum
/// sits on the upper edge. A minimum on the lower edge is the greedy limit
/// and is returned as is.
pub(crate) fn minimize_temperature(f: impl Fn(f64) -> f64) -> f64 {
    let h = |s: f64| f(s.exp());
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e8f64.ln());
    loop {
        let n = 64;
        let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&s| h(s)).collect();
        let mut best = 0;
        for k in 1..=n {
            if vals[k] < vals[best] {
                best = k;
            }
        }
        if best == n && hi < 700.0 {
            lo = grid[n - 1];
            hi += 2.0 * (hi - lo).max(10.0);
            continue;
        }
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(n)];
        return golden_section(h, a, b, 1e-12).exp();
    }
}

/// K-learning: `π_i ∝ exp(m_i/τ* + Ψ_i(1/τ*))` at the minimizing temperature.
pub fn klearning_policy<B: Belief>(arms: &[B], cfg: &SolverConfig) -> Result<KLearningSolution> {
    if arms.is_empty() {
        return Err(Error::InvalidInput("no arms".into()));
    }
    cfg.validate(arms.len())?;
    let logits = |tau: f64| -> Vec<f64> {
        arms.iter()
            .map(|a| a.mean() / tau + a.cgf(1.0 / tau))
            .collect()
    };
    let objective = |tau: f64| tau * log_sum_exp(&logits(tau));
    let tau = minimize_temperature(objective);
    let z = logits(tau);
    let lse = log_sum_exp(&z);
    if !lse.is_finite() {
        return Err(Error::Domain("K-learning objective is not finite".into()));
    }
    let policy = Policy::new(z.iter().map(|x| (x - lse).exp()).collect::<Vec<_>>())
        .or_else(|_| Policy::from_weights(z.iter().map(|x| (x - lse).exp()).collect()))?;
    Ok(KLearningSolution {
        policy,
        tau,
        objective: tau * lse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

pub(crate) fn mean_and_stderr(xs: impl Iterator<Item = f64>) -> McEstimate {
    // Welford
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
    }
}

/// Monte Carlo estimate of `E max_i μ_i` over independent posterior draws.
pub fn expected_max_mc<B: Belief>(arms: &[B], rng: &mut RngStream, n_samples: usize) -> McEstimate {
    let mut draw = vec![0.0; arms.len()];
    mean_and_stderr((0..n_samples).map(|_| {
        for (d, a) in draw.iter_mut().zip(arms) {
            *d = a.sample(rng);
        }
        draw.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }))
}

/// Empirical probability-of-optimality policy (the TS policy).
pub fn ts_policy_mc<B: Belief>(arms: &[B], rng: &mut RngStream, n_samples: usize) -> Policy {
    let mut counts = vec![0usize; arms.len()];
    let mut draw = vec![0.0; arms.len()];
    for _ in 0..n_samples {
        for (d, a) in draw.iter_mut().zip(arms) {
            *d = a.sample(rng);
        }
        counts[argmax(&draw)] += 1;
    }
    Policy {
        probs: counts.iter().map(|&c| c as f64 / n_samples as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `G(π) − Ê max`.
    pub margin: f64,
    pub std_error: f64,
}

impl Membership {
    pub(crate) fn from_margin(margin: f64, std_error: f64) -> Self {
        Self {
            member: margin >= -3.0 * std_error,
            margin,
            std_error,
        }
    }
}

/// Statistical test of `E max_i μ_i ≤ G(π)` at three standard errors.
pub fn in_optimistic_set<B: Belief>(
    arms: &[B],
    pi: &Policy,
    rng: &mut RngStream,
    cfg: &SolverConfig,
) -> Result<Membership> {
    let g = optimism_map(arms, pi)?.value;
    let e = expected_max_mc(arms, rng, cfg.mc_samples);
    Ok(Membership::from_margin(g - e.estimate, e.std_error))
}

pub fn entropy(pi: &Policy) -> f64 {
    -pi.probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posteriors::{GaussianPosterior, TwoPointPosterior};

    fn gauss(mean: f64, var: f64) -> GaussianPosterior {
        GaussianPosterior::new(mean, var, 1.0).unwrap()
    }

    fn iid(a: usize) -> Vec<GaussianPosterior> {
        vec![gauss(0.0, 1.0); a]
    }

    #[test]
    fn policy_validation() {
        assert!(Policy::new(vec![0.5, 0.5]).is_ok());
        assert!(Policy::new(vec![0.5, 0.6]).is_err());
        assert!(Policy::new(vec![1.5, -0.5]).is_err());
        assert!(Policy::new(vec![]).is_err());
    }

    #[test]
    fn single_arm_map_is_mean() {
        let e = optimism_map(&[gauss(0.7, 3.0)], &Policy::uniform(1)).unwrap();
        assert_eq!(e.value, 0.7);
        assert_eq!(e.explore, 0.0);
    }

    #[test]
    fn uniform_iid_map() {
        let e = optimism_map(&iid(3), &Policy::uniform(3)).unwrap();
        assert!((e.value - (2.0 * 3f64.ln()).sqrt()).abs() < 1e-12);
        assert!((e.value - 1.4823).abs() < 1e-4);
        assert!((e.value - e.exploit - e.explore).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_arm_contributes_nothing() {
        let arms = [gauss(1.0, 1.0), gauss(-1.0, 1.0)];
        let e = optimism_map(&arms, &Policy::point_mass(2, 0)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.per_arm_bonus, vec![0.0, 0.0]);
    }

    #[test]
    fn map_length_mismatch() {
        assert!(matches!(
            optimism_map(&iid(2), &Policy::uniform(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_shift_and_symmetry() {
        let cfg = SolverConfig::default();
        let g = optimism_gradient(&iid(2), &Policy::uniform(2), &cfg).unwrap();
        assert_eq!(g[0], g[1]);
        let arms = [gauss(0.3, 1.0), gauss(0.0, 1.0)];
        let g = optimism_gradient(&arms, &Policy::uniform(2), &cfg).unwrap();
        assert!((g[0] - g[1] - 0.3).abs() < 1e-12);
        // Gaussian closed form
        let y = 2f64.ln();
        let expected = (2.0 * y).sqrt() - 1.0 / (2.0 * y).sqrt();
        assert!((g[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn gradient_rejects_boundary() {
        let cfg = SolverConfig::default();
        let r = optimism_gradient(&iid(2), &Policy::point_mass(2, 0), &cfg);
        assert!(matches!(r, Err(Error::NotInterior { index: 0, .. })));
    }

    #[test]
    fn vbos_examples() {
        let cfg = SolverConfig::default();
        let s = vbos_policy(&[gauss(2.0, 1.0)], &cfg).unwrap();
        assert_eq!(s.policy.probs(), &[1.0]);

        let s = vbos_policy(&iid(3), &cfg).unwrap();
        for &p in s.policy.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-6);
        }
        assert!((s.value - (2.0 * 3f64.ln()).sqrt()).abs() < 1e-6);

        let arms = [gauss(5.0, 1e-30), gauss(0.0, 1e-30)];
        let s = vbos_policy(&arms, &cfg).unwrap();
        assert!((s.policy.probs()[0] - (1.0 - 1e-12)).abs() < 1e-15);
        assert!((s.policy.probs()[1] - 1e-12).abs() < 1e-15);
    }

    #[test]
    fn water_fill_mixed_degenerate_arm() {
        // a sure arm worth 0.5 next to an uncertain arm at 0
        let arms = [gauss(0.5, 1e-30), gauss(0.0, 1.0)];
        let s = vbos_policy(&arms, &SolverConfig::default()).unwrap();
        // uncertain arm's stationarity: σ(u − 1/u) = 0.5
        let u = (0.5 + (0.25f64 + 4.0).sqrt()) / 2.0;
        let p1 = (-0.5 * u * u).exp();
        assert!((s.policy.probs()[1] - p1).abs() < 1e-12);
    }

    #[test]
    fn mirror_ascent_matches_water_filling() {
        // Two-point arms that are not Gaussian force the iterative path;
        // compare against a dense grid search on A = 2.
        let arms = [
            TwoPointPosterior::new(-1.0, 1.0, 0.5, 1.0).unwrap(),
            TwoPointPosterior::new(-0.2, 0.8, 0.3, 1.0).unwrap(),
        ];
        let cfg = SolverConfig::default();
        let s = vbos_policy(&arms, &cfg).unwrap();
        let mut best = f64::NEG_INFINITY;
        for k in 0..=200_000 {
            let p = k as f64 / 200_000.0;
            let v = optimism_map(&arms, &Policy::new(vec![p, 1.0 - p]).unwrap())
                .unwrap()
                .value;
            best = best.max(v);
        }
        assert!(s.value >= best - 1e-7, "{} vs {}", s.value, best);
    }

    #[test]
    fn klearning_examples() {
        let cfg = SolverConfig::default();
        let k = klearning_policy(&iid(3), &cfg).unwrap();
        for &p in k.policy.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((k.tau - 1.0 / (2.0 * 3f64.ln()).sqrt()).abs() < 1e-6);
        assert!((k.objective - (2.0 * 3f64.ln()).sqrt()).abs() < 1e-9);

        let arms = [gauss(5.0, 1e-30), gauss(0.0, 1e-30)];
        let k = klearning_policy(&arms, &cfg).unwrap();
        assert!(k.policy.probs()[0] > 1.0 - 1e-12);
    }

    #[test]
    fn expected_max_examples() {
        let mut rng = RngStream::new(11);
        let e = expected_max_mc(&iid(2), &mut rng, 200_000);
        let truth = 1.0 / std::f64::consts::PI.sqrt();
        assert!((e.estimate - truth).abs() < 3.0 * e.std_error + 1e-3);
        let e = expected_max_mc(&iid(3), &mut rng, 200_000);
        let truth = 1.5 / std::f64::consts::PI.sqrt();
        assert!((e.estimate - truth).abs() < 3.0 * e.std_error + 1e-3);
        assert!(e.estimate <= (2.0 * 3f64.ln()).sqrt());
    }

    #[test]
    fn ts_policy_examples() {
        let mut rng = RngStream::new(5);
        let n = 20_000;
        let p = ts_policy_mc(&iid(2), &mut rng, n);
        let se = (0.25 / n as f64).sqrt();
        assert!((p.probs()[0] - 0.5).abs() < 3.0 * se);
        let p = ts_policy_mc(&[gauss(10.0, 1.0), gauss(0.0, 1.0)], &mut rng, n);
        assert!(p.probs()[0] >= 0.999);
        let p = ts_policy_mc(&iid(1), &mut rng, 1000);
        assert_eq!(p.probs(), &[1.0]);
    }

    #[test]
    fn near_point_mass_is_not_optimistic() {
        let mut rng = RngStream::new(9);
        let pi = Policy::new(vec![1.0 - 1e-9, 1e-9]).unwrap();
        let m = in_optimistic_set(&iid(2), &pi, &mut rng, &SolverConfig::default()).unwrap();
        assert!(!m.member, "{m:?}");
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&Policy::uniform(4)) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&Policy::point_mass(3, 1)), 0.0);
        let h = entropy(&Policy::new(vec![0.75, 0.25]).unwrap());
        assert!((h - 0.5623).abs() < 1e-4);
    }
}
