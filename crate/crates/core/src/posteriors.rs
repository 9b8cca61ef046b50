//! Conjugate posterior bookkeeping and the CGF / rate-function calculus.
//!
//! Everything downstream talks to posteriors through the [`Belief`] trait:
//! a mean, the cumulant generating function of the centered variable, and
//! the inverse rate function `(Ψ*)⁻¹(y) = inf_{τ≥0} τΨ(1/τ) + τy` together
//! with the minimizing temperature `τ*`, which is also `d(Ψ*)⁻¹/dy`.
//!
//! Gaussian posteriors with known noise variance are the workhorse. A
//! two-point law is also provided; it carries the ±r prior of the 2×2 game
//! counter-example, where the exact law (not a Gaussian surrogate) is what
//! produces the reference values.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Variances below this are treated as point masses.
pub const DEGENERATE_VAR: f64 = 1e-15;

/// The inverse rate at some budget `y`, and the temperature attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBonus {
    /// `(Ψ*)⁻¹(y)`.
    pub radius: f64,
    /// Minimizing `τ` in `τΨ(1/τ) + τy`; infinite at `y = 0` for
    /// non-degenerate laws, zero for point masses.
    pub tau: f64,
}

impl RateBonus {
    pub const ZERO: RateBonus = RateBonus {
        radius: 0.0,
        tau: 0.0,
    };
}

/// A scalar random variable described through its centered CGF.
pub trait Belief {
    fn mean(&self) -> f64;

    /// `Ψ(β) = log E exp(β(X − EX))`.
    fn cgf(&self, beta: f64) -> f64;

    /// Inverse rate and optimal temperature. `y` must be non-negative.
    fn rate_bonus(&self, y: f64) -> RateBonus;

    /// `Some(var)` when the law is Gaussian (or a point mass).
    fn gaussian_variance(&self) -> Option<f64>;

    fn sample(&self, rng: &mut RngStream) -> f64;

    fn inverse_rate(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("inverse rate needs y >= 0, got {y}")));
        }
        Ok(self.rate_bonus(y).radius)
    }

    fn is_degenerate(&self) -> bool {
        matches!(self.gaussian_variance(), Some(v) if v < DEGENERATE_VAR)
    }
}

fn gaussian_bonus(var: f64, y: f64) -> RateBonus {
    if var < DEGENERATE_VAR {
        return RateBonus::ZERO;
    }
    if y <= 0.0 {
        return RateBonus {
            radius: 0.0,
            tau: f64::INFINITY,
        };
    }
    RateBonus {
        radius: (2.0 * var * y).sqrt(),
        tau: (var / (2.0 * y)).sqrt(),
    }
}

/// Gaussian posterior over an unknown mean with known noise variance.
///
/// Stores the prior and sufficient statistics (count and running sum) so
/// that updates are exact and independent of observation order. A prior
/// variance of zero is a point mass that ignores data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPosterior {
    pub prior_mean: f64,
    pub prior_var: f64,
    pub noise_var: f64,
    pub n_obs: u64,
    pub sum_obs: f64,
}

impl GaussianPosterior {
    pub fn new(prior_mean: f64, prior_var: f64, noise_var: f64) -> Result<Self> {
        if !prior_mean.is_finite() {
            return Err(Error::InvalidInput(format!("prior mean {prior_mean}")));
        }
        if !(prior_var >= 0.0 && prior_var.is_finite()) {
            return Err(Error::InvalidInput(format!("prior variance {prior_var}")));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidInput(format!("noise variance {noise_var}")));
        }
        Ok(Self {
            prior_mean,
            prior_var,
            noise_var,
            n_obs: 0,
            sum_obs: 0.0,
        })
    }

    /// Unit-variance prior and noise.
    pub fn standard(prior_mean: f64) -> Self {
        Self::new(prior_mean, 1.0, 1.0).expect("finite prior mean")
    }

    pub fn point_mass(value: f64) -> Self {
        Self::new(value, 0.0, 1.0).expect("finite point mass")
    }

    pub fn posterior_var(&self) -> f64 {
        if self.prior_var == 0.0 {
            return 0.0;
        }
        1.0 / (1.0 / self.prior_var + self.n_obs as f64 / self.noise_var)
    }

    pub fn posterior_mean(&self) -> f64 {
        if self.prior_var == 0.0 {
            return self.prior_mean;
        }
        self.posterior_var() * (self.prior_mean / self.prior_var + self.sum_obs / self.noise_var)
    }

    pub fn update(&self, observation: f64) -> Result<Self> {
        if !observation.is_finite() {
            return Err(Error::InvalidInput(format!("observation {observation}")));
        }
        Ok(Self {
            n_obs: self.n_obs + 1,
            sum_obs: self.sum_obs + observation,
            ..*self
        })
    }
}

impl Belief for GaussianPosterior {
    fn mean(&self) -> f64 {
        self.posterior_mean()
    }

    fn cgf(&self, beta: f64) -> f64 {
        0.5 * self.posterior_var() * beta * beta
    }

    fn rate_bonus(&self, y: f64) -> RateBonus {
        gaussian_bonus(self.posterior_var(), y)
    }

    fn gaussian_variance(&self) -> Option<f64> {
        Some(self.posterior_var())
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        let var = self.posterior_var();
        if var < DEGENERATE_VAR {
            return self.posterior_mean();
        }
        self.posterior_mean() + var.sqrt() * rng.standard_normal()
    }
}

/// Law of a variable taking `low` or `high`, `high` with probability `p_high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointLaw {
    pub low: f64,
    pub high: f64,
    pub p_high: f64,
}

impl TwoPointLaw {
    /// Canonical form with `low <= high`; used after scaling by a possibly
    /// negative coefficient.
    pub fn scaled(&self, c: f64) -> TwoPointLaw {
        let (a, b) = (c * self.low, c * self.high);
        if a <= b {
            TwoPointLaw {
                low: a,
                high: b,
                p_high: self.p_high,
            }
        } else {
            TwoPointLaw {
                low: b,
                high: a,
                p_high: 1.0 - self.p_high,
            }
        }
    }

    fn width(&self) -> f64 {
        self.high - self.low
    }

    fn degenerate(&self) -> bool {
        self.width() <= 0.0 || self.p_high <= 0.0 || self.p_high >= 1.0
    }

    pub fn mean(&self) -> f64 {
        self.low + self.p_high * self.width()
    }

    pub fn cgf(&self, beta: f64) -> f64 {
        if self.degenerate() {
            return 0.0;
        }
        let p = self.p_high;
        let w = self.width();
        let bw = beta * w;
        // log(1 − p + p e^{βw}) − βpw, arranged to avoid overflow
        let log_mgf_shift = if bw > 0.0 {
            bw + (p + (1.0 - p) * (-bw).exp()).ln()
        } else {
            (1.0 - p + p * bw.exp()).ln()
        };
        log_mgf_shift - beta * p * w
    }

    /// Derivative of the centered CGF.
    pub fn cgf_derivative(&self, beta: f64) -> f64 {
        if self.degenerate() {
            return 0.0;
        }
        let p = self.p_high;
        let w = self.width();
        let bw = beta * w;
        // E_tilted[X] − EX with tilted weight of `high` = p e^{βw}/(1 − p + p e^{βw})
        let q = if bw > 0.0 {
            p / (p + (1.0 - p) * (-bw).exp())
        } else {
            p * bw.exp() / (1.0 - p + p * bw.exp())
        };
        (q - p) * w
    }

    fn kl(q: f64, p: f64) -> f64 {
        let a = if q > 0.0 { q * (q / p).ln() } else { 0.0 };
        let b = if q < 1.0 {
            (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln()
        } else {
            0.0
        };
        a + b
    }

    /// Upper-deviation inverse rate, by inverting the Bernoulli relative
    /// entropy. Saturates at `high − mean` once `y ≥ −log p_high`.
    pub fn rate_bonus(&self, y: f64) -> RateBonus {
        if self.degenerate() {
            return RateBonus::ZERO;
        }
        let p = self.p_high;
        let w = self.width();
        if y <= 0.0 {
            return RateBonus {
                radius: 0.0,
                tau: f64::INFINITY,
            };
        }
        if y >= -p.ln() {
            return RateBonus {
                radius: (1.0 - p) * w,
                tau: 0.0,
            };
        }
        let (mut lo, mut hi) = (p, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if Self::kl(mid, p) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        let q = 0.5 * (lo + hi);
        let slope = ((q / p).ln() - ((1.0 - q) / (1.0 - p)).ln()) / w;
        RateBonus {
            radius: (q - p) * w,
            tau: if slope > 0.0 { 1.0 / slope } else { f64::INFINITY },
        }
    }
}

/// Posterior over a two-point law with Gaussian observation noise. The
/// support is known; only the weight on `high` is learned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointPosterior {
    pub low: f64,
    pub high: f64,
    /// `log(p_high / (1 − p_high))`.
    pub log_odds: f64,
    pub noise_var: f64,
    pub n_obs: u64,
}

impl TwoPointPosterior {
    pub fn new(low: f64, high: f64, p_high: f64, noise_var: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::InvalidInput(format!("support ({low}, {high})")));
        }
        if !(0.0..=1.0).contains(&p_high) {
            return Err(Error::InvalidInput(format!("p_high {p_high}")));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidInput(format!("noise variance {noise_var}")));
        }
        Ok(Self {
            low,
            high,
            log_odds: (p_high / (1.0 - p_high)).ln(),
            noise_var,
            n_obs: 0,
        })
    }

    /// `±1` with probability one half each.
    pub fn symmetric_sign(noise_var: f64) -> Self {
        Self::new(-1.0, 1.0, 0.5, noise_var).expect("valid symmetric law")
    }

    pub fn p_high(&self) -> f64 {
        1.0 / (1.0 + (-self.log_odds).exp())
    }

    pub fn law(&self) -> TwoPointLaw {
        TwoPointLaw {
            low: self.low,
            high: self.high,
            p_high: self.p_high(),
        }
    }

    pub fn update(&self, observation: f64) -> Result<Self> {
        if !observation.is_finite() {
            return Err(Error::InvalidInput(format!("observation {observation}")));
        }
        let w = self.high - self.low;
        let shift = w * (2.0 * observation - self.high - self.low) / (2.0 * self.noise_var);
        Ok(Self {
            log_odds: self.log_odds + shift,
            n_obs: self.n_obs + 1,
            ..*self
        })
    }
}

impl Belief for TwoPointPosterior {
    fn mean(&self) -> f64 {
        self.law().mean()
    }

    fn cgf(&self, beta: f64) -> f64 {
        self.law().cgf(beta)
    }

    fn rate_bonus(&self, y: f64) -> RateBonus {
        self.law().rate_bonus(y)
    }

    fn gaussian_variance(&self) -> Option<f64> {
        let law = self.law();
        if law.degenerate() {
            Some(0.0)
        } else {
            None
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        if rng.uniform() < self.p_high() {
            self.high
        } else {
            self.low
        }
    }
}

/// One cell of a posterior matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellPosterior {
    Gaussian(GaussianPosterior),
    TwoPoint(TwoPointPosterior),
}

impl CellPosterior {
    pub fn update(&self, observation: f64) -> Result<Self> {
        Ok(match self {
            CellPosterior::Gaussian(g) => CellPosterior::Gaussian(g.update(observation)?),
            CellPosterior::TwoPoint(t) => CellPosterior::TwoPoint(t.update(observation)?),
        })
    }

    pub fn n_obs(&self) -> u64 {
        match self {
            CellPosterior::Gaussian(g) => g.n_obs,
            CellPosterior::TwoPoint(t) => t.n_obs,
        }
    }

    /// `Ψ'(β)`. Infinite `β` gives the one-sided limit (the essential
    /// supremum or infimum of the centered variable).
    pub fn cgf_derivative(&self, beta: f64) -> f64 {
        match self {
            CellPosterior::Gaussian(g) => {
                let v = g.posterior_var();
                if v < DEGENERATE_VAR || beta == 0.0 {
                    0.0
                } else {
                    v * beta
                }
            }
            CellPosterior::TwoPoint(t) => t.law().cgf_derivative(beta),
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianPosterior> {
        match self {
            CellPosterior::Gaussian(g) => Some(g),
            CellPosterior::TwoPoint(_) => None,
        }
    }
}

impl From<GaussianPosterior> for CellPosterior {
    fn from(g: GaussianPosterior) -> Self {
        CellPosterior::Gaussian(g)
    }
}

impl From<TwoPointPosterior> for CellPosterior {
    fn from(t: TwoPointPosterior) -> Self {
        CellPosterior::TwoPoint(t)
    }
}

impl Belief for CellPosterior {
    fn mean(&self) -> f64 {
        match self {
            CellPosterior::Gaussian(g) => g.mean(),
            CellPosterior::TwoPoint(t) => t.mean(),
        }
    }

    fn cgf(&self, beta: f64) -> f64 {
        match self {
            CellPosterior::Gaussian(g) => g.cgf(beta),
            CellPosterior::TwoPoint(t) => t.cgf(beta),
        }
    }

    fn rate_bonus(&self, y: f64) -> RateBonus {
        match self {
            CellPosterior::Gaussian(g) => g.rate_bonus(y),
            CellPosterior::TwoPoint(t) => t.rate_bonus(y),
        }
    }

    fn gaussian_variance(&self) -> Option<f64> {
        match self {
            CellPosterior::Gaussian(g) => g.gaussian_variance(),
            CellPosterior::TwoPoint(t) => t.gaussian_variance(),
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            CellPosterior::Gaussian(g) => g.sample(rng),
            CellPosterior::TwoPoint(t) => t.sample(rng),
        }
    }
}

/// Law of a linear combination `λᵀX` of independent cells: a Gaussian part
/// plus independent two-point parts.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarLaw {
    Gaussian { mean: f64, var: f64 },
    Mixed {
        mean: f64,
        var: f64,
        parts: Vec<TwoPointLaw>,
    },
}

impl ScalarLaw {
    pub fn gaussian(mean: f64, var: f64) -> Self {
        ScalarLaw::Gaussian { mean, var }
    }

    /// Combination `Σ_i coef_i X_i` of independent cells.
    pub fn combine<'a>(terms: impl IntoIterator<Item = (f64, &'a CellPosterior)>) -> Self {
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut parts = Vec::new();
        for (c, cell) in terms {
            mean += c * cell.mean();
            match cell {
                CellPosterior::Gaussian(g) => var += c * c * g.posterior_var(),
                CellPosterior::TwoPoint(t) => {
                    let law = t.law().scaled(c);
                    if !law.degenerate() {
                        parts.push(law);
                    }
                }
            }
        }
        if parts.is_empty() {
            ScalarLaw::Gaussian { mean, var }
        } else {
            ScalarLaw::Mixed { mean, var, parts }
        }
    }

    /// Variance of the Gaussian component.
    pub fn gaussian_part_var(&self) -> f64 {
        match self {
            ScalarLaw::Gaussian { var, .. } | ScalarLaw::Mixed { var, .. } => *var,
        }
    }

    pub fn two_point_parts(&self) -> &[TwoPointLaw] {
        match self {
            ScalarLaw::Gaussian { .. } => &[],
            ScalarLaw::Mixed { parts, .. } => parts,
        }
    }

    fn numeric_bonus(&self, y: f64) -> RateBonus {
        // inf_{s>0} (Ψ(s) + y)/s, unimodal in log s
        let f = |ls: f64| {
            let s = ls.exp();
            (self.cgf(s) + y) / s
        };
        let (mut a, mut b) = (-40.0_f64, 40.0_f64);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..300 {
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
            if b - a < 1e-13 {
                break;
            }
        }
        let ls = 0.5 * (a + b);
        let radius = f(ls).max(0.0);
        let tau = if ls >= 39.9 { 0.0 } else { (-ls).exp() };
        RateBonus { radius, tau }
    }
}

impl Belief for ScalarLaw {
    fn mean(&self) -> f64 {
        match self {
            ScalarLaw::Gaussian { mean, .. } | ScalarLaw::Mixed { mean, .. } => *mean,
        }
    }

    fn cgf(&self, beta: f64) -> f64 {
        match self {
            ScalarLaw::Gaussian { var, .. } => 0.5 * var * beta * beta,
            ScalarLaw::Mixed { var, parts, .. } => {
                0.5 * var * beta * beta + parts.iter().map(|p| p.cgf(beta)).sum::<f64>()
            }
        }
    }

    fn rate_bonus(&self, y: f64) -> RateBonus {
        match self {
            ScalarLaw::Gaussian { var, .. } => gaussian_bonus(*var, y),
            ScalarLaw::Mixed { var, parts, .. } => {
                if y <= 0.0 {
                    return RateBonus {
                        radius: 0.0,
                        tau: f64::INFINITY,
                    };
                }
                if *var < DEGENERATE_VAR && parts.len() == 1 {
                    parts[0].rate_bonus(y)
                } else {
                    self.numeric_bonus(y)
                }
            }
        }
    }

    fn gaussian_variance(&self) -> Option<f64> {
        match self {
            ScalarLaw::Gaussian { var, .. } => Some(*var),
            ScalarLaw::Mixed { .. } => None,
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            ScalarLaw::Gaussian { mean, var } => {
                if *var < DEGENERATE_VAR {
                    *mean
                } else {
                    mean + var.sqrt() * rng.standard_normal()
                }
            }
            ScalarLaw::Mixed { mean, var, parts } => {
                let mut x = *mean;
                if *var >= DEGENERATE_VAR {
                    x += var.sqrt() * rng.standard_normal();
                }
                for p in parts {
                    let v = if rng.uniform() < p.p_high { p.high } else { p.low };
                    x += v - p.mean();
                }
                x
            }
        }
    }
}

/// `m × A` grid of independent cell posteriors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<CellPosterior>,
}

impl PosteriorMatrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<CellPosterior>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("posterior matrix needs positive dimensions".into()));
        }
        crate::error::check_len(rows * cols, cells.len())?;
        Ok(Self { rows, cols, cells })
    }

    pub fn filled(rows: usize, cols: usize, cell: CellPosterior) -> Result<Self> {
        Self::new(rows, cols, vec![cell; rows * cols])
    }

    /// A single-row matrix from bandit arm posteriors.
    pub fn from_arms(arms: &[GaussianPosterior]) -> Result<Self> {
        Self::new(1, arms.len(), arms.iter().map(|&g| g.into()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CellPosterior {
        &self.cells[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, cell: CellPosterior) {
        self.cells[i * self.cols + j] = cell;
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &CellPosterior> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    pub fn cells(&self) -> &[CellPosterior] {
        &self.cells
    }

    pub fn update_cell(&mut self, i: usize, j: usize, observation: f64) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::InvalidInput(format!("cell ({i}, {j}) out of range")));
        }
        let k = i * self.cols + j;
        self.cells[k] = self.cells[k].update(observation)?;
        Ok(())
    }

    /// Law of `λᵀR_j` for column `j`.
    pub fn column_law(&self, j: usize, lam: &[f64]) -> ScalarLaw {
        ScalarLaw::combine(lam.iter().copied().zip(self.column(j)))
    }

    pub fn all_gaussian(&self) -> bool {
        self.cells.iter().all(|c| c.as_gaussian().is_some())
    }

    pub fn all_degenerate(&self) -> bool {
        self.cells.iter().all(|c| c.is_degenerate())
    }

    pub fn mean_matrix(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.mean()).collect()
    }

    /// Per-cell posterior variances; `None` if any cell is non-Gaussian.
    pub fn variance_matrix(&self) -> Option<Vec<f64>> {
        self.cells.iter().map(|c| c.gaussian_variance()).collect()
    }

    /// One joint draw of the matrix, row-major.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        self.cells.iter().map(|c| c.sample(rng)).collect()
    }

    /// Column CGF `Σ_i Ψ_ij(β_i)`.
    pub fn cgf_vector(&self, j: usize, beta: &[f64]) -> Result<f64> {
        crate::error::check_len(self.rows, beta.len())?;
        Ok(self.column(j).zip(beta).map(|(c, &b)| c.cgf(b)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Grid posterior for a N(0,1) prior and unit-noise likelihood.
    fn grid_bayes(observations: &[f64]) -> (f64, f64) {
        let n = 400_001;
        let (lo, hi) = (-12.0, 12.0);
        let h = (hi - lo) / (n - 1) as f64;
        let mut w = Vec::with_capacity(n);
        let mut z = 0.0;
        for k in 0..n {
            let x = lo + k as f64 * h;
            let mut lp = -0.5 * x * x;
            for &o in observations {
                lp -= 0.5 * (o - x) * (o - x);
            }
            let v = lp.exp();
            z += v;
            w.push((x, v));
        }
        let mean = w.iter().map(|(x, v)| x * v).sum::<f64>() / z;
        let var = w.iter().map(|(x, v)| (x - mean) * (x - mean) * v).sum::<f64>() / z;
        (mean, var)
    }

    #[test]
    fn update_single_observation_matches_grid() {
        let post = GaussianPosterior::standard(0.0).update(2.0).unwrap();
        let (gm, gv) = grid_bayes(&[2.0]);
        assert!(close(gm, 1.0, 1e-6) && close(gv, 0.5, 1e-6));
        assert!(close(post.posterior_mean(), 1.0, 1e-12));
        assert!(close(post.posterior_var(), 0.5, 1e-12));
    }

    #[test]
    fn no_data_is_prior() {
        let post = GaussianPosterior::standard(0.0);
        assert_eq!(post.posterior_mean(), 0.0);
        assert_eq!(post.posterior_var(), 1.0);
    }

    #[test]
    fn ten_zero_observations() {
        let mut post = GaussianPosterior::standard(0.0);
        for _ in 0..10 {
            post = post.update(0.0).unwrap();
        }
        let (gm, gv) = grid_bayes(&[0.0; 10]);
        assert!(close(gm, 0.0, 1e-9) && close(gv, 1.0 / 11.0, 1e-6));
        assert!(close(post.posterior_var(), 1.0 / 11.0, 1e-15));
        assert_eq!(post.posterior_mean(), 0.0);
    }

    #[test]
    fn non_finite_observation_rejected() {
        let post = GaussianPosterior::standard(0.0);
        assert!(matches!(post.update(f64::NAN), Err(Error::InvalidInput(_))));
        assert!(post.update(f64::INFINITY).is_err());
    }

    #[test]
    fn cgf_closed_forms() {
        let unit = GaussianPosterior::standard(0.0);
        assert_eq!(unit.cgf(2.0), 2.0);
        assert_eq!(unit.cgf(0.0), 0.0);
        let half = GaussianPosterior::new(0.0, 0.5, 1.0).unwrap();
        assert!(close(half.cgf(2.0), 1.0, 1e-15));
    }

    #[test]
    fn cgf_matches_monte_carlo() {
        let post = GaussianPosterior::new(0.0, 0.5, 1.0).unwrap();
        let mut rng = RngStream::new(11);
        let n = 1_000_000;
        let beta = 2.0;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += (beta * post.sample(&mut rng)).exp();
        }
        let mc = (acc / n as f64).ln();
        assert!(close(mc, post.cgf(beta), 1e-2), "mc {mc}");
    }

    #[test]
    fn inverse_rate_examples() {
        let unit = GaussianPosterior::standard(0.0);
        assert!(close(unit.inverse_rate(2.0).unwrap(), 2.0, 1e-15));
        assert_eq!(unit.inverse_rate(0.0).unwrap(), 0.0);
        let q = GaussianPosterior::new(0.0, 0.25, 1.0).unwrap();
        assert!(close(q.inverse_rate(2.0).unwrap(), 1.0, 1e-15));
        assert!(matches!(unit.inverse_rate(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_posterior_is_point_mass() {
        let post = GaussianPosterior::new(3.0, 1e-30, 1.0).unwrap();
        assert_eq!(post.inverse_rate(5.0).unwrap(), 0.0);
        let mut rng = RngStream::new(1);
        assert!(close(post.sample(&mut rng), 3.0, 1e-10));
        let pm = GaussianPosterior::point_mass(-1.0).update(4.0).unwrap();
        assert_eq!(pm.posterior_mean(), -1.0);
        assert_eq!(pm.posterior_var(), 0.0);
    }

    #[test]
    fn sample_is_reproducible_and_moments_match() {
        let post = GaussianPosterior::standard(0.0);
        let a = post.sample(&mut RngStream::new(5));
        let b = post.sample(&mut RngStream::new(5));
        assert_eq!(a.to_bits(), b.to_bits());
        let mut rng = RngStream::new(9);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| post.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        assert!(m.abs() < 0.02 && (v - 1.0).abs() < 0.05);
    }

    #[test]
    fn cgf_vector_examples() {
        let pm = PosteriorMatrix::from_arms(&[GaussianPosterior::standard(0.0)]).unwrap();
        assert_eq!(pm.cgf_vector(0, &[0.0]).unwrap(), 0.0);
        let cells = vec![
            GaussianPosterior::standard(0.0).into(),
            GaussianPosterior::new(0.0, 0.25, 1.0).unwrap().into(),
        ];
        let m = PosteriorMatrix::new(2, 1, cells).unwrap();
        assert!(close(m.cgf_vector(0, &[1.0, 1.0]).unwrap(), 0.625, 1e-15));
        assert!(close(m.cgf_vector(0, &[2.0, 2.0]).unwrap(), 2.5, 1e-15));
        assert!(m.cgf_vector(0, &[1.0]).is_err());
        let unit = PosteriorMatrix::filled(2, 1, GaussianPosterior::standard(0.0).into()).unwrap();
        assert!(close(unit.cgf_vector(0, &[1.0, 1.0]).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn two_point_cgf_is_log_cosh() {
        let r = TwoPointPosterior::symmetric_sign(1.0);
        for &b in &[-3.0, -0.5, 0.0, 0.7, 2.0, 40.0] {
            let lc = (b as f64).cosh().ln();
            assert!(close(r.cgf(b), lc, 1e-12), "beta {b}");
        }
        assert_eq!(r.mean(), 0.0);
    }

    #[test]
    fn two_point_inverse_rate_at_log_two_is_one() {
        let r = TwoPointPosterior::symmetric_sign(1.0);
        let b = r.rate_bonus(std::f64::consts::LN_2);
        assert!(close(b.radius, 1.0, 1e-12));
        let b = r.rate_bonus(3.0);
        assert_eq!(b.radius, 1.0);
        assert_eq!(b.tau, 0.0);
    }

    #[test]
    fn two_point_update_moves_toward_observation() {
        let r = TwoPointPosterior::symmetric_sign(1.0);
        let up = r.update(1.0).unwrap();
        // likelihood ratio exp(2) for +1
        let expected = 2f64.exp() / (1.0 + 2f64.exp());
        assert!(close(up.p_high(), expected, 1e-12));
    }

    #[test]
    fn mixed_law_numeric_bonus_matches_closed_forms() {
        let cell: CellPosterior = TwoPointPosterior::symmetric_sign(1.0).into();
        let tiny: CellPosterior = GaussianPosterior::new(0.0, 1e-14, 1.0).unwrap().into();
        let law = ScalarLaw::combine([(1.0, &cell), (1.0, &tiny)]);
        let exact = TwoPointPosterior::symmetric_sign(1.0).rate_bonus(0.3);
        let num = law.rate_bonus(0.3);
        assert!(close(num.radius, exact.radius, 1e-6), "{num:?} vs {exact:?}");
    }
}
