//! Probability that a `P_m` element is at least as accurate as a `P_k`
//! element (`k < m`) at mesh size `h`.
//!
//! The errors are modelled as random variables supported on
//! `[0, C_k h^k]` and `[0, C_m h^m]`, which cross at
//! `h* = (C_k/C_m)^{1/(m-k)}`. Two laws follow:
//!
//! * the step law, `1` below `h*` and `0` above it;
//! * the sigmoid law, obtained for independent uniform errors:
//!   `1 - ½ (h/h*)^{m-k}` for `h <= h*` and `½ (h*/h)^{m-k}` for `h >= h*`.
//!
//! Both laws only depend on `h/h*`. They are evaluated from `ln(h/h*)`, so
//! large exponents never overflow.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::accuracy_constants::{self, DomainData, EllipticityData, SeminormProvider};
use crate::error::{Error, Result};
use crate::table::{Cell, Table};

/// Samples drawn per independently seeded chunk in [`monte_carlo_prob`].
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Fewest samples [`monte_carlo_prob`] accepts.
pub const MIN_SAMPLES: usize = 100;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite and positive, got {x}")));
    }
    Ok(())
}

/// One `P_k` versus `P_m` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawParameters {
    k: usize,
    m: usize,
    c_k: f64,
    c_m: f64,
    h_star: f64,
}

impl LawParameters {
    pub fn new(k: usize, m: usize, c_k: f64, c_m: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        let h_star = accuracy_constants::h_star(c_k, c_m, k, m)?;
        Ok(Self {
            k,
            m,
            c_k,
            c_m,
            h_star,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    pub fn h_star(&self) -> f64 {
        self.h_star
    }

    /// `m - k`.
    pub fn q(&self) -> usize {
        self.m - self.k
    }

    /// Error supports `(C_k h^k, C_m h^m)`.
    pub fn supports(&self, h: f64) -> (f64, f64) {
        (
            self.c_k * h.powi(self.k as i32),
            self.c_m * h.powi(self.m as i32),
        )
    }

    pub fn step(&self, h: f64) -> Result<f64> {
        step_law(h, self.h_star)
    }

    pub fn sigmoid(&self, h: f64) -> Result<f64> {
        sigmoid_law(h, self.h_star, self.q())
    }
}

/// Step law; `½` at `h = h*`.
pub fn step_law(h: f64, h_star: f64) -> Result<f64> {
    check_positive("h", h)?;
    check_positive("h*", h_star)?;
    Ok(if h < h_star {
        1.0
    } else if h > h_star {
        0.0
    } else {
        0.5
    })
}

/// Sigmoid law evaluated from `ln(h/h*)`.
pub fn sigmoid_from_log_ratio(log_ratio: f64, q: usize) -> f64 {
    let t = q as f64 * log_ratio;
    if log_ratio <= 0.0 {
        1.0 - 0.5 * t.exp()
    } else {
        0.5 * (-t).exp()
    }
}

/// Sigmoid law for exponent `q = m - k`.
pub fn sigmoid_law(h: f64, h_star: f64, q: usize) -> Result<f64> {
    check_positive("h", h)?;
    check_positive("h*", h_star)?;
    if q == 0 {
        return Err(Error::Domain("q = m - k must be >= 1".into()));
    }
    Ok(sigmoid_from_log_ratio(h.ln() - h_star.ln(), q))
}

/// `Prob{Y <= X}` for independent `X ~ U[0, a]`, `Y ~ U[0, b]`.
pub fn analytic_uniform_prob(a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Ok(if b <= a { 1.0 - b / (2.0 * a) } else { a / (2.0 * b) })
}

/// Outcome of a Monte Carlo run, including the chunk plan that makes it reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub estimate: f64,
    /// `sqrt(estimate (1 - estimate) / samples)`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub chunks: usize,
}

/// Monte Carlo estimate of [`analytic_uniform_prob`] with the default chunk plan.
pub fn monte_carlo_prob(a: f64, b: f64, samples: usize, seed: u64) -> Result<MonteCarloResult> {
    monte_carlo_prob_chunked(a, b, samples, seed, DEFAULT_CHUNK_SIZE)
}

/// Monte Carlo estimate with an explicit chunk size.
///
/// Chunk `c` draws from a ChaCha8 stream keyed by `(seed, c)`, so the result
/// depends on `(seed, samples, chunk_size)` only, not on how many threads
/// run the chunks.
pub fn monte_carlo_prob_chunked(
    a: f64,
    b: f64,
    samples: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<MonteCarloResult> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if chunk_size == 0 {
        return Err(Error::Domain("chunk size must be >= 1".into()));
    }
    let chunks = samples.div_ceil(chunk_size);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = chunk_size.min(samples - c * chunk_size);
            let mut count = 0u64;
            for _ in 0..len {
                let x = a * rng.random::<f64>();
                let y = b * rng.random::<f64>();
                count += u64::from(y <= x);
            }
            count
        })
        .sum();
    let estimate = hits as f64 / samples as f64;
    Ok(MonteCarloResult {
        estimate,
        stderr: (estimate * (1.0 - estimate) / samples as f64).sqrt(),
        samples,
        seed,
        chunk_size,
        chunks,
    })
}

/// `𝒫_q(h)`: sigmoid law for `P_k` against `P_{k+q}` with the critical size `h*_q`.
pub fn law_sequence_eval(
    k: usize,
    q: usize,
    h: f64,
    e: &EllipticityData,
    d: &DomainData,
    s: &dyn SeminormProvider,
) -> Result<f64> {
    check_positive("h", h)?;
    let log_hstar = accuracy_constants::log_h_star_q(k, q, e, d, s)?;
    Ok(sigmoid_from_log_ratio(h.ln() - log_hstar, q))
}

/// A mesh size on `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSize {
    Finite(f64),
    Infinity,
}

/// Pointwise limit `𝒫_0` of `𝒫_q` as `q → ∞`: `1` for finite `h`, `½` at `+∞`.
pub fn pointwise_limit(h: MeshSize) -> Result<f64> {
    match h {
        MeshSize::Finite(x) if x >= 0.0 && x.is_finite() => Ok(1.0),
        MeshSize::Finite(x) => Err(Error::Domain(format!(
            "finite mesh size must be >= 0, got {x}"
        ))),
        MeshSize::Infinity => Ok(0.5),
    }
}

/// `steps` equispaced points from `h_min` to `h_max` inclusive.
pub fn linear_grid(h_min: f64, h_max: f64, steps: usize) -> Result<Vec<f64>> {
    check_grid(h_min, h_max, steps)?;
    if steps == 1 {
        return Ok(vec![h_min]);
    }
    let dh = (h_max - h_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { h_max } else { h_min + i as f64 * dh })
        .collect())
}

/// `steps` log-equispaced points from `h_min` to `h_max` inclusive.
pub fn log_grid(h_min: f64, h_max: f64, steps: usize) -> Result<Vec<f64>> {
    check_grid(h_min, h_max, steps)?;
    let (lo, hi) = (h_min.ln(), h_max.ln());
    if steps == 1 {
        return Ok(vec![h_min]);
    }
    let d = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| match i {
            0 => h_min,
            _ if i + 1 == steps => h_max,
            _ => (lo + i as f64 * d).exp(),
        })
        .collect())
}

fn check_grid(h_min: f64, h_max: f64, steps: usize) -> Result<()> {
    check_positive("h_min", h_min)?;
    check_positive("h_max", h_max)?;
    if h_max < h_min {
        return Err(Error::Domain(format!("h_max = {h_max} < h_min = {h_min}")));
    }
    if steps == 0 {
        return Err(Error::Domain("steps must be >= 1".into()));
    }
    Ok(())
}

/// Makes sure a sorted grid contains `value` when it lies in the grid's range.
///
/// The endpoints are kept; otherwise the interior point nearest to `value`
/// is moved onto it, which preserves the ordering.
pub fn snap_to(grid: &mut [f64], value: f64) {
    let len = grid.len();
    if grid.contains(&value) || len < 3 || value < grid[0] || value > grid[len - 1] {
        return;
    }
    if let Some(nearest) = grid[1..len - 1]
        .iter_mut()
        .min_by(|a, b| (**a - value).abs().total_cmp(&(**b - value).abs()))
    {
        *nearest = value;
    }
}

/// Monte Carlo companion of a curve row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveMonteCarlo {
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub h: f64,
    pub p_step: f64,
    pub p_sigmoid: f64,
    pub monte_carlo: Option<CurveMonteCarlo>,
}

/// Sampled `(h, probability)` pairs of the step and sigmoid laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityCurve {
    pub h_star: f64,
    pub q: usize,
    pub rows: Vec<CurveRow>,
}

/// Seed used for row `i` of a curve whose base seed is `seed`.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    // SplitMix64 increment keeps row seeds distinct and well spread.
    seed.wrapping_add((row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

impl ProbabilityCurve {
    pub fn new(h_star: f64, q: usize, grid: &[f64]) -> Result<Self> {
        let rows = grid
            .iter()
            .map(|&h| {
                Ok(CurveRow {
                    h,
                    p_step: step_law(h, h_star)?,
                    p_sigmoid: sigmoid_law(h, h_star, q)?,
                    monte_carlo: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h_star, q, rows })
    }

    /// Adds Monte Carlo estimates. Without `params` the supports are the
    /// normalised pair `(1, (h/h*)^q)`, which has the same law.
    pub fn with_monte_carlo(
        mut self,
        params: Option<&LawParameters>,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        for (i, row) in self.rows.iter_mut().enumerate() {
            let (a, b) = match params {
                Some(p) => p.supports(row.h),
                None => (1.0, (self.q as f64 * (row.h.ln() - self.h_star.ln())).exp()),
            };
            let mc = monte_carlo_prob(a, b, samples, row_seed(seed, i))?;
            row.monte_carlo = Some(CurveMonteCarlo {
                estimate: mc.estimate,
                stderr: mc.stderr,
            });
        }
        Ok(self)
    }

    pub fn has_monte_carlo(&self) -> bool {
        self.rows.iter().any(|r| r.monte_carlo.is_some())
    }

    /// Columns `h, p_step, p_sigmoid[, p_montecarlo, stderr]`.
    pub fn to_table(&self) -> Table {
        let mc = self.has_monte_carlo();
        let mut header = vec!["h", "p_step", "p_sigmoid"];
        if mc {
            header.extend(["p_montecarlo", "stderr"]);
        }
        let mut table = Table::new(header);
        for r in &self.rows {
            let mut row: Vec<Cell> = vec![r.h.into(), r.p_step.into(), r.p_sigmoid.into()];
            if mc {
                let m = r.monte_carlo.unwrap_or(CurveMonteCarlo {
                    estimate: f64::NAN,
                    stderr: f64::NAN,
                });
                row.extend([Cell::from(m.estimate), Cell::from(m.stderr)]);
            }
            table.push(row);
        }
        table
    }
}
