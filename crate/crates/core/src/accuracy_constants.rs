//! Error-estimate constants and critical mesh sizes.
//!
//! For a Pk element with `k > n/2` the H¹ error constant is bounded by
//!
//! ```text
//! 𝒞*_k = (M C / α) (k+n)ⁿ k^{n+2} / ((k-1)! (k - n/2)),
//! C    = 1 + 2 diam(Ω) + σ n(n+1) Λ
//! ```
//!
//! and comparing `P_k` with `P_{k+q}` yields the critical mesh size
//! `h*_q = (𝒞*_k |u|_{k+1} / (𝒞*_{k+q} |u|_{k+q+1}))^{1/q}`. When the
//! semi-norm ratio `|u|_{r+1}/|u|_r` tends to `l`, `h*_q` grows like
//! `q / (e l)`.
//!
//! Anything raised to a power of `q` is evaluated in the log domain, with
//! log-gamma standing in for factorials.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Continuity `M` and ellipticity `α` of the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityData {
    continuity: f64,
    ellipticity: f64,
}

impl EllipticityData {
    pub fn new(continuity: f64, ellipticity: f64) -> Result<Self> {
        if !(ellipticity > 0.0) || !continuity.is_finite() || !(continuity >= ellipticity) {
            return Err(Error::Domain(format!(
                "need M >= alpha > 0, got M = {continuity}, alpha = {ellipticity}"
            )));
        }
        Ok(Self {
            continuity,
            ellipticity,
        })
    }

    pub fn continuity(&self) -> f64 {
        self.continuity
    }

    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }
}

impl Default for EllipticityData {
    fn default() -> Self {
        Self {
            continuity: 1.0,
            ellipticity: 1.0,
        }
    }
}

/// Domain diameter, mesh shape bound σ, barycentric gradient bound Λ and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainData {
    diameter: f64,
    shape_ratio: f64,
    lambda_max: f64,
    dimension: usize,
}

impl DomainData {
    pub fn new(diameter: f64, shape_ratio: f64, lambda_max: f64, dimension: usize) -> Result<Self> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(diameter) || !positive(lambda_max) {
            return Err(Error::Domain(format!(
                "diameter and Lambda must be positive, got {diameter} and {lambda_max}"
            )));
        }
        if !(shape_ratio >= 1.0) || !shape_ratio.is_finite() {
            return Err(Error::Domain(format!("sigma must be >= 1, got {shape_ratio}")));
        }
        if dimension == 0 {
            return Err(Error::Domain("dimension n must be >= 1".into()));
        }
        Ok(Self {
            diameter,
            shape_ratio,
            lambda_max,
            dimension,
        })
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn shape_ratio(&self) -> f64 {
        self.shape_ratio
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Source of Sobolev semi-norms `|u|_{r,Ω}` of the exact solution.
pub trait SeminormProvider: Send + Sync {
    fn label(&self) -> String;

    /// `ln |u|_{r,Ω}`.
    fn log_seminorm(&self, r: usize) -> Result<f64>;

    fn seminorm(&self, r: usize) -> Result<f64> {
        Ok(self.log_seminorm(r)?.exp())
    }

    /// `lim |u|_{r+1}/|u|_r` when known in closed form.
    fn ratio_limit(&self) -> Option<f64> {
        None
    }
}

/// `u = sin(πx) cos(πy)` on the unit square.
///
/// Semi-norms use the multinomially weighted convention
/// `|u|²_r = Σ_{|α|=r} (r!/α!) ‖D^α u‖²`, under which
/// `|u|_r = (√2)^{r-2} π^r`. The consecutive ratio is therefore the
/// constant `√2 π`; its reciprocal `1/(√2 π)` is sometimes quoted as the
/// limit but does not follow from the closed form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModelSine;

impl SeminormProvider for ModelSine {
    fn label(&self) -> String {
        "builtin-sine".into()
    }

    fn log_seminorm(&self, r: usize) -> Result<f64> {
        Ok(log_model_seminorm(r))
    }

    fn ratio_limit(&self) -> Option<f64> {
        Some(2f64.sqrt() * PI)
    }
}

/// `ln |u|_r` for the model solution.
pub fn log_model_seminorm(r: usize) -> f64 {
    (r as f64 - 2.0) * 0.5 * LN_2 + r as f64 * PI.ln()
}

/// `|u|_r = (√2)^{r-2} π^r` for the model solution (weighted convention).
pub fn model_seminorm(r: usize) -> f64 {
    log_model_seminorm(r).exp()
}

/// `|u|_r = c ρ^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricSeminorm {
    c: f64,
    rho: f64,
}

impl GeometricSeminorm {
    pub fn new(c: f64, rho: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && rho > 0.0 && rho.is_finite()) {
            return Err(Error::Provider(format!(
                "geometric provider needs c > 0 and rho > 0, got c = {c}, rho = {rho}"
            )));
        }
        Ok(Self { c, rho })
    }
}

impl SeminormProvider for GeometricSeminorm {
    fn label(&self) -> String {
        format!("geometric(c={}, rho={})", self.c, self.rho)
    }

    fn log_seminorm(&self, r: usize) -> Result<f64> {
        Ok(self.c.ln() + r as f64 * self.rho.ln())
    }

    fn ratio_limit(&self) -> Option<f64> {
        Some(self.rho)
    }
}

/// Tabulated semi-norms: `values[r] = |u|_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSeminorm {
    values: Vec<f64>,
}

impl TableSeminorm {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((r, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Provider(format!(
                "table entry for order {r} must be finite and positive, got {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SeminormProvider for TableSeminorm {
    fn label(&self) -> String {
        format!("table({} orders)", self.values.len())
    }

    fn log_seminorm(&self, r: usize) -> Result<f64> {
        self.values.get(r).map(|v| v.ln()).ok_or_else(|| {
            Error::Provider(format!(
                "table has no semi-norm of order {r} (last order is {})",
                self.values.len() as isize - 1
            ))
        })
    }
}

/// JSON description of a synthetic provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProviderSpec {
    Geometric { c: f64, rho: f64 },
    Table { values: Vec<f64> },
}

impl ProviderSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Box<dyn SeminormProvider>> {
        Ok(match self {
            ProviderSpec::Geometric { c, rho } => Box::new(GeometricSeminorm::new(*c, *rho)?),
            ProviderSpec::Table { values } => Box::new(TableSeminorm::new(values.clone())?),
        })
    }
}

/// `C(Ω, σ, Λ, n) = 1 + 2 diam(Ω) + σ n(n+1) Λ`.
pub fn domain_constant(d: &DomainData) -> f64 {
    let n = d.dimension as f64;
    1.0 + 2.0 * d.diameter + d.shape_ratio * n * (n + 1.0) * d.lambda_max
}

fn check_hypothesis(k: usize, n: usize) -> Result<()> {
    if 2 * k <= n {
        return Err(Error::Hypothesis(format!("k > n/2 (k = {k}, n = {n})")));
    }
    Ok(())
}

/// `ln[(k+n)ⁿ k^{n+2} / ((k-1)! (k - n/2))]`, the k-dependent part of `𝒞*_k`.
pub fn log_order_factor(k: usize, n: usize) -> Result<f64> {
    check_hypothesis(k, n)?;
    let (kf, nf) = (k as f64, n as f64);
    Ok(nf * (kf + nf).ln() + (nf + 2.0) * kf.ln() - ln_gamma(kf) - (kf - nf / 2.0).ln())
}

/// `𝒞*_k` evaluated directly with an explicit factorial product.
///
/// Overflows to infinity (or underflows to zero) once the factorial leaves
/// double range; use [`log_ck_star`] for large `k`.
pub fn ck_star(k: usize, e: &EllipticityData, d: &DomainData) -> Result<f64> {
    let n = d.dimension;
    check_hypothesis(k, n)?;
    let (kf, nf) = (k as f64, n as f64);
    let factorial: f64 = (1..k).map(|j| j as f64).product();
    let order = (kf + nf).powi(n as i32) * kf.powi(n as i32 + 2) / (factorial * (kf - nf / 2.0));
    Ok(e.continuity * domain_constant(d) / e.ellipticity * order)
}

/// `ln 𝒞*_k`, finite for `k` far beyond the range of [`ck_star`].
pub fn log_ck_star(k: usize, e: &EllipticityData, d: &DomainData) -> Result<f64> {
    Ok((e.continuity * domain_constant(d) / e.ellipticity).ln() + log_order_factor(k, d.dimension)?)
}

fn check_bound_args(h: f64, seminorm_u: f64) -> Result<()> {
    if !(h >= 0.0) || !h.is_finite() || !(seminorm_u >= 0.0) || !seminorm_u.is_finite() {
        return Err(Error::Domain(format!(
            "mesh size and semi-norm must be finite and >= 0, got h = {h}, |u| = {seminorm_u}"
        )));
    }
    Ok(())
}

/// Upper bound on `|u - Π_K u|_{0,K}`:
/// `[1 + (k+n)ⁿ k^{n+1}] / (k! (k+1-n/2)) |u|_{k+1,K} h_K^{k+1}`.
pub fn interpolation_bound_l2(k: usize, n: usize, h_k: f64, seminorm_u: f64) -> Result<f64> {
    check_hypothesis(k, n)?;
    check_bound_args(h_k, seminorm_u)?;
    let (kf, nf) = (k as f64, n as f64);
    let factorial: f64 = (1..=k).map(|j| j as f64).product();
    let bracket = (1.0 + (kf + nf).powi(n as i32) * kf.powi(n as i32 + 1))
        / (factorial * (kf + 1.0 - nf / 2.0));
    Ok(bracket * seminorm_u * h_k.powi(k as i32 + 1))
}

/// Upper bound on `|u - Π_K u|_{1,K}`:
/// `[1 + σ n(n+1) Λ (k+n)ⁿ k^{n+2}] / ((k-1)! (k-n/2)) |u|_{k+1,K} h_K^k`.
pub fn interpolation_bound_h1(
    k: usize,
    n: usize,
    h_k: f64,
    shape_ratio: f64,
    lambda_max: f64,
    seminorm_u: f64,
) -> Result<f64> {
    check_hypothesis(k, n)?;
    check_bound_args(h_k, seminorm_u)?;
    if !(shape_ratio >= 1.0) || !(lambda_max > 0.0) {
        return Err(Error::Domain(format!(
            "need sigma >= 1 and Lambda > 0, got {shape_ratio} and {lambda_max}"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    let factorial: f64 = (1..k).map(|j| j as f64).product();
    let bracket = (1.0
        + shape_ratio * nf * (nf + 1.0) * lambda_max * (kf + nf).powi(n as i32) * kf.powi(n as i32 + 2))
        / (factorial * (kf - nf / 2.0));
    Ok(bracket * seminorm_u * h_k.powi(k as i32))
}

/// Critical mesh size `h* = (C_k / C_m)^{1/(m-k)}`.
pub fn h_star(c_k: f64, c_m: f64, k: usize, m: usize) -> Result<f64> {
    if m <= k {
        return Err(Error::Domain(format!("need m > k, got k = {k}, m = {m}")));
    }
    if !(c_k > 0.0 && c_m > 0.0) || !c_k.is_finite() || !c_m.is_finite() {
        return Err(Error::Domain(format!(
            "constants must be finite and positive, got C_k = {c_k}, C_m = {c_m}"
        )));
    }
    Ok(((c_k.ln() - c_m.ln()) / (m - k) as f64).exp())
}

/// `ln h*_q` for `P_k` against `P_{k+q}`, using `C*_j = 𝒞*_j |u|_{j+1}`.
///
/// `M/α` and the domain constant cancel in the ratio, but the arguments are
/// still validated.
pub fn log_h_star_q(
    k: usize,
    q: usize,
    e: &EllipticityData,
    d: &DomainData,
    s: &dyn SeminormProvider,
) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let m = k
        .checked_add(q)
        .ok_or_else(|| Error::Range(format!("k + q overflows for k = {k}, q = {q}")))?;
    let lower = log_ck_star(k, e, d)? + s.log_seminorm(k + 1)?;
    let upper = log_ck_star(m, e, d)? + s.log_seminorm(m + 1)?;
    Ok((lower - upper) / q as f64)
}

/// `h*_q`, computed in the log domain.
pub fn h_star_q(
    k: usize,
    q: usize,
    e: &EllipticityData,
    d: &DomainData,
    s: &dyn SeminormProvider,
) -> Result<f64> {
    Ok(log_h_star_q(k, q, e, d, s)?.exp())
}

/// `ln Θ` with `Θ = √(2π) (k+n)ⁿ k^{n+2} / ((k-1)! (k-n/2))`.
pub fn log_stirling_theta(k: usize, n: usize) -> Result<f64> {
    Ok(0.5 * (2.0 * PI).ln() + log_order_factor(k, n)?)
}

/// `ln[Θ e^{-(q+k)} (q+k)^{q+k-2n-3/2}]`, the large-`q` equivalent of
/// `ln[(h*_q)^q |u|_{k+q+1} / |u|_{k+1}]`.
pub fn stirling_factor(k: usize, n: usize, q: usize) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let s = (q + k) as f64;
    Ok(log_stirling_theta(k, n)? - s + (s - 2.0 * n as f64 - 1.5) * s.ln())
}

/// Asymptote `q / (e l)` of `h*_q`.
pub fn h_star_q_asymptote(q: usize, l: f64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!("ratio limit l must be positive, got {l}")));
    }
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    Ok(q as f64 / (std::f64::consts::E * l))
}

/// Ratios `|u|_{k+q+2} / |u|_{k+q+1}` for `q = 0..=q_max`.
pub fn seminorm_ratio_sequence(s: &dyn SeminormProvider, k: usize, q_max: usize) -> Result<Vec<f64>> {
    if q_max == 0 {
        return Err(Error::Domain("q_max must be >= 1".into()));
    }
    (0..=q_max)
        .map(|q| Ok((s.log_seminorm(k + q + 2)? - s.log_seminorm(k + q + 1)?).exp()))
        .collect()
}

/// Per-`q` data of the high-order comparison of `P_k` against `P_{k+q}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub k: usize,
    pub q_values: Vec<usize>,
    pub log_hstar_q: Vec<f64>,
    /// `q / (e l)`.
    pub asymptote: Vec<f64>,
    pub ratio_limit: f64,
}

impl AsymptoticModel {
    pub fn build(
        k: usize,
        q_values: &[usize],
        e: &EllipticityData,
        d: &DomainData,
        s: &dyn SeminormProvider,
        ratio_limit: f64,
    ) -> Result<Self> {
        let mut log_hstar_q = Vec::with_capacity(q_values.len());
        let mut asymptote = Vec::with_capacity(q_values.len());
        for &q in q_values {
            log_hstar_q.push(log_h_star_q(k, q, e, d, s)?);
            asymptote.push(h_star_q_asymptote(q, ratio_limit)?);
        }
        Ok(Self {
            k,
            q_values: q_values.to_vec(),
            log_hstar_q,
            asymptote,
            ratio_limit,
        })
    }

    /// `h*_q / (q/(e l))`, evaluated through logs.
    pub fn ratios(&self) -> Vec<f64> {
        self.log_hstar_q
            .iter()
            .zip(&self.asymptote)
            .map(|(lh, a)| (lh - a.ln()).exp())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn unit_domain(n: usize) -> DomainData {
        DomainData::new(1.0, 1.0, 1.0, n).unwrap()
    }

    #[test]
    fn domain_constant_examples() {
        assert_eq!(domain_constant(&unit_domain(1)), 5.0);
        let d = DomainData::new(2f64.sqrt(), 1.0, 1.0, 2).unwrap();
        assert!((domain_constant(&d) - (7.0 + 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let bigger = DomainData::new(2.0, 1.5, 1.2, 2).unwrap();
        assert!(domain_constant(&bigger) > domain_constant(&d));
    }

    #[test]
    fn data_validation() {
        assert!(EllipticityData::new(0.5, 1.0).is_err());
        assert!(EllipticityData::new(1.0, 0.0).is_err());
        assert!(EllipticityData::new(2.0, 1.0).is_ok());
        assert!(DomainData::new(1.0, 0.9, 1.0, 2).is_err());
        assert!(DomainData::new(-1.0, 1.0, 1.0, 2).is_err());
        assert!(DomainData::new(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn ck_star_examples() {
        let e = EllipticityData::default();
        let v = ck_star(1, &e, &unit_domain(1)).unwrap();
        assert!((v - 20.0).abs() < 1e-12);
        let d = unit_domain(2);
        for k in 2..=20 {
            let direct = ck_star(k, &e, &d).unwrap();
            let via_log = log_ck_star(k, &e, &d).unwrap().exp();
            assert!(rel(via_log, direct) < 1e-12, "k = {k}");
        }
        assert!(ck_star(20, &e, &d).unwrap() < ck_star(10, &e, &d).unwrap());
        assert!(log_ck_star(10_000, &e, &d).unwrap().is_finite());
    }

    #[test]
    fn hypothesis_is_enforced() {
        let e = EllipticityData::default();
        let err = ck_star(1, &e, &unit_domain(2)).unwrap_err();
        assert!(matches!(&err, Error::Hypothesis(m) if m.contains("k > n/2")));
        assert!(log_ck_star(1, &e, &unit_domain(3)).is_err());
        assert!(interpolation_bound_l2(1, 2, 0.1, 1.0).is_err());
        assert!(interpolation_bound_h1(1, 3, 0.1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn interpolation_bounds() {
        assert_eq!(interpolation_bound_l2(2, 2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(interpolation_bound_h1(2, 2, 0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);

        // Independent re-derivation for k = 2, n = 2, h = 0.1.
        // L²: [1 + 4² · 2³] / (2! · 2) = 129/4, times h³.
        let l2 = interpolation_bound_l2(2, 2, 0.1, 1.0).unwrap();
        assert!(rel(l2, 129.0 / 4.0 * 1e-3) < 1e-14);
        // H¹: [1 + 1·6·1·4²·2⁴] / (1! · 1) = 1537, times h².
        let h1 = interpolation_bound_h1(2, 2, 0.1, 1.0, 1.0, 1.0).unwrap();
        assert!(rel(h1, 1537.0 * 1e-2) < 1e-14);

        for k in 2..6 {
            let a = interpolation_bound_h1(k, 2, 0.05, 1.3, 2.0, 0.7).unwrap();
            let b = interpolation_bound_h1(k, 2, 0.1, 1.3, 2.0, 0.7).unwrap();
            assert!(rel(b / a, 2f64.powi(k as i32)) < 1e-13);
        }
    }

    #[test]
    fn h_star_examples() {
        assert!((h_star(1.0, 1.0, 1, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_star(4.0, 1.0, 1, 3).unwrap() - 2.0).abs() < 1e-15);
        let a = h_star(3.0, 0.2, 2, 5).unwrap();
        let b = h_star(3.0 * 17.5, 0.2 * 17.5, 2, 5).unwrap();
        assert!(rel(a, b) < 1e-14);
        assert!(h_star(1.0, 1.0, 3, 3).is_err());
        assert!(h_star(0.0, 1.0, 1, 2).is_err());
    }

    #[test]
    fn h_star_q_consistency_with_h_star() {
        let e = EllipticityData::new(3.0, 1.5).unwrap();
        let d = DomainData::new(2f64.sqrt(), 1.0, 1.0, 2).unwrap();
        let s = ModelSine;
        for q in 1..=20 {
            let ck = ck_star(2, &e, &d).unwrap() * s.seminorm(3).unwrap();
            let cm = ck_star(2 + q, &e, &d).unwrap() * s.seminorm(3 + q).unwrap();
            let direct = h_star(ck, cm, 2, 2 + q).unwrap();
            let logd = h_star_q(2, q, &e, &d, &s).unwrap();
            assert!(rel(logd, direct) < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn h_star_q_unit_ratio_with_synthetic_table() {
        // Choose |u|_{k+q+1} so that C*_k = C*_{k+q}.
        let e = EllipticityData::default();
        let d = unit_domain(2);
        let (k, q) = (2, 3);
        let mut values = vec![1.0; k + q + 2];
        values[k + q + 1] = (log_ck_star(k, &e, &d).unwrap() - log_ck_star(k + q, &e, &d).unwrap()).exp();
        let s = TableSeminorm::new(values).unwrap();
        assert!((h_star_q(k, q, &e, &d, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_star_q_invariant_under_provider_scaling() {
        let e = EllipticityData::default();
        let d = unit_domain(2);
        let a = GeometricSeminorm::new(1.0, 3.0).unwrap();
        let b = GeometricSeminorm::new(250.0, 3.0).unwrap();
        for q in [1, 5, 40, 900] {
            let ha = log_h_star_q(2, q, &e, &d, &a).unwrap();
            let hb = log_h_star_q(2, q, &e, &d, &b).unwrap();
            assert!((ha - hb).abs() < 1e-12);
        }
    }

    #[test]
    fn h_star_q_grows_for_model() {
        let e = EllipticityData::default();
        let d = DomainData::new(2f64.sqrt(), 1.0, 1.0, 2).unwrap();
        let h: Vec<f64> = [50, 100, 200]
            .iter()
            .map(|&q| h_star_q(2, q, &e, &d, &ModelSine).unwrap())
            .collect();
        assert!(h[0] < h[1] && h[1] < h[2]);
        assert!(h_star_q(2, 10_000, &e, &d, &ModelSine).unwrap().is_finite());
    }

    #[test]
    fn stirling_theta_plug_in() {
        // k = 2, n = 1: √(2π) · 3 · 2³ / (1! · 1.5) = 16 √(2π).
        let theta = log_stirling_theta(2, 1).unwrap().exp();
        assert!(rel(theta, 16.0 * (2.0 * PI).sqrt()) < 1e-14);
    }

    #[test]
    fn stirling_factor_tracks_exact_expression() {
        let (k, n) = (2, 2);
        let exact = |q: usize| log_order_factor(k, n).unwrap() - log_order_factor(k + q, n).unwrap();
        let gap = |q: usize| (exact(q) - stirling_factor(k, n, q).unwrap()).abs();
        assert!(gap(2000) < 0.01);
        assert!(gap(2000) < gap(200) && gap(200) < gap(20));
    }

    #[test]
    fn asymptote_examples() {
        assert!((h_star_q_asymptote(1, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(h_star_q_asymptote(3, 0.0).is_err());
        let a = h_star_q_asymptote(7, 2.5).unwrap();
        let b = h_star_q_asymptote(14, 2.5).unwrap();
        assert!(rel(b, 2.0 * a) < 1e-15);
    }

    #[test]
    fn model_seminorm_values() {
        assert!((model_seminorm(0) - 0.5).abs() < 1e-15);
        assert!(rel(model_seminorm(1), PI / 2f64.sqrt()) < 1e-15);
        assert!(rel(model_seminorm(2), PI * PI) < 1e-15);
        assert!(log_model_seminorm(100_000).is_finite());
    }

    #[test]
    fn ratio_sequences() {
        let r = seminorm_ratio_sequence(&ModelSine, 2, 50).unwrap();
        assert_eq!(r.len(), 51);
        assert!(r.iter().all(|x| (x - 2f64.sqrt() * PI).abs() < 1e-12));

        let g = GeometricSeminorm::new(0.3, 1.7).unwrap();
        let r = seminorm_ratio_sequence(&g, 1, 10).unwrap();
        assert!(r.iter().all(|x| (x - 1.7).abs() < 1e-12));
        assert!(seminorm_ratio_sequence(&g, 1, 0).is_err());
    }

    #[test]
    fn geometric_mean_limit_of_converging_ratio() {
        // Ratios 1.5 (1 + 1/(r+1)²) tend to l = 1.5, so (1/q) ln|u|_{k+q+1} -> ln 1.5.
        let mut values = vec![1.0];
        for r in 0..1005 {
            let last: f64 = *values.last().unwrap();
            values.push(last * 1.5 * (1.0 + 1.0 / ((r as f64 + 1.0) * (r as f64 + 1.0))));
        }
        let s = TableSeminorm::new(values).unwrap();
        let (k, q) = (2, 1000);
        let ratios = seminorm_ratio_sequence(&s, k, q).unwrap();
        assert!(rel(ratios[q], 1.5) < 1e-3);
        let mean = s.log_seminorm(k + q + 1).unwrap() / q as f64;
        assert!(rel(mean, 1.5f64.ln()) < 0.01);
    }

    #[test]
    fn provider_json() {
        let s = ProviderSpec::from_json(r#"{"type":"geometric","c":2.0,"rho":3.0}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(rel(s.seminorm(2).unwrap(), 18.0) < 1e-14);

        let t = ProviderSpec::from_json(r#"{"type":"table","values":[1,2,4]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(rel(t.seminorm(2).unwrap(), 4.0) < 1e-15);
        let err = t.seminorm(3).unwrap_err();
        assert!(matches!(&err, Error::Provider(m) if m.contains("order 3")));

        assert!(ProviderSpec::from_json(r#"{"type":"table","values":[1,-2]}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(ProviderSpec::from_json(r#"{"type":"spline"}"#).is_err());
    }

    #[test]
    fn asymptotic_model_ratios() {
        let e = EllipticityData::default();
        let d = DomainData::new(2f64.sqrt(), 1.0, 1.0, 2).unwrap();
        let l = ModelSine.ratio_limit().unwrap();
        let m = AsymptoticModel::build(2, &[100, 1000], &e, &d, &ModelSine, l).unwrap();
        let r = m.ratios();
        assert!((r[1] - 1.0).abs() < (r[0] - 1.0).abs());
    }
}
