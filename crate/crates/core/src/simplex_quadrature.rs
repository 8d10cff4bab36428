//! Simplex geometry, quadrature on simplexes, and the L²/H¹ semi-norms of
//! the Pk basis functions.
//!
//! Quadrature rules are collapsed (conical) products of Gauss–Legendre
//! rules. Every rule is checked against the Dirichlet moment formula
//! `∫ λ^β = n! β! / (n + |β|)!` (normalised to unit reference measure)
//! before it is returned.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pk_basis::{
    basis_eval, basis_gradient_barycentric, BarycentricPoint, MultiIndex, PkBasis,
};

/// Highest total degree [`quadrature_rule`] will build.
pub const MAX_QUADRATURE_DEGREE: usize = 40;

/// Absolute tolerance of the exactness check run on every new rule.
pub const EXACTNESS_TOL: f64 = 1e-12;

/// Affine n-simplex with the quantities that enter the basis estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexGeometry {
    vertices: Vec<Vec<f64>>,
    measure: f64,
    diameter: f64,
    inscribed_diameter: f64,
    /// Row `l` is the (constant) gradient of `λ_l`.
    bary_gradients: Vec<Vec<f64>>,
    lambda_max: f64,
}

/// JSON document `{"vertices": [[x, y, ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerticesDocument {
    pub vertices: Vec<Vec<f64>>,
}

impl VerticesDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn geometry(&self) -> Result<SimplexGeometry> {
        simplex_geometry(&self.vertices)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Measure of the simplex spanned by `points` inside its own affine hull,
/// via the Gram determinant of the edge vectors.
fn hull_measure(points: &[&[f64]]) -> f64 {
    let d = points.len() - 1;
    if d == 0 {
        return 1.0;
    }
    let dim = points[0].len();
    let edges = DMatrix::from_fn(dim, d, |r, c| points[c + 1][r] - points[0][r]);
    let gram = edges.transpose() * &edges;
    gram.determinant().max(0.0).sqrt() / factorial(d)
}

/// Builds the geometry of the simplex with the given `n+1` vertices in `ℝⁿ`.
pub fn simplex_geometry(vertices: &[Vec<f64>]) -> Result<SimplexGeometry> {
    if vertices.len() < 2 {
        return Err(Error::Geometry(format!(
            "a simplex needs at least 2 vertices, got {}",
            vertices.len()
        )));
    }
    let n = vertices.len() - 1;
    if n > 3 {
        return Err(Error::Geometry(format!("dimension {n} > 3 is not supported")));
    }
    if let Some(v) = vertices.iter().find(|v| v.len() != n) {
        return Err(Error::Geometry(format!(
            "{} vertices need {n} coordinates each, found a vertex with {}",
            n + 1,
            v.len()
        )));
    }
    if vertices.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Geometry("vertex coordinates must be finite".into()));
    }

    let mut diameter = 0.0f64;
    for a in 0..=n {
        for b in a + 1..=n {
            let d2: f64 = vertices[a]
                .iter()
                .zip(&vertices[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            diameter = diameter.max(d2.sqrt());
        }
    }

    // Columns are the edges v_m - v_0, m = 1..n.
    let jac = DMatrix::from_fn(n, n, |r, c| vertices[c + 1][r] - vertices[0][r]);
    let measure = jac.determinant().abs() / factorial(n);
    if !(measure >= 1e-14 * diameter.powi(n as i32)) || diameter == 0.0 {
        return Err(Error::Geometry(format!(
            "degenerate simplex: measure {measure:e} with diameter {diameter:e}"
        )));
    }

    // λ_{m+1} = (J^{-1}(x - v_0))_m for m = 1..n, λ_1 = 1 - Σ; the gradients
    // are rows of J^{-1}.
    let inv = jac
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Geometry("edge matrix is singular".into()))?;
    let mut bary_gradients = Vec::with_capacity(n + 1);
    let first: Vec<f64> = (0..n).map(|j| -inv.column(j).sum()).collect();
    bary_gradients.push(first);
    for m in 0..n {
        bary_gradients.push(inv.row(m).iter().copied().collect());
    }
    let lambda_max = bary_gradients
        .iter()
        .flatten()
        .fold(0.0f64, |acc, g| acc.max(g.abs()));

    let surface: f64 = (0..=n)
        .map(|skip| {
            let facet: Vec<&[f64]> = (0..=n)
                .filter(|&m| m != skip)
                .map(|m| vertices[m].as_slice())
                .collect();
            hull_measure(&facet)
        })
        .sum();
    let inscribed_diameter = 2.0 * n as f64 * measure / surface;

    Ok(SimplexGeometry {
        vertices: vertices.to_vec(),
        measure,
        diameter,
        inscribed_diameter,
        bary_gradients,
        lambda_max,
    })
}

/// The reference simplex with vertices `0, e_1, ..., e_n`.
pub fn reference_simplex(n: usize) -> Result<SimplexGeometry> {
    let mut vertices = vec![vec![0.0; n]];
    for m in 0..n {
        let mut v = vec![0.0; n];
        v[m] = 1.0;
        vertices.push(v);
    }
    simplex_geometry(&vertices)
}

impl SimplexGeometry {
    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Lebesgue measure `mes(K)`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Longest edge `h_K`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Insphere diameter `ρ_K`; the segment length when `n = 1`.
    pub fn inscribed_diameter(&self) -> f64 {
        self.inscribed_diameter
    }

    pub fn bary_gradients(&self) -> &[Vec<f64>] {
        &self.bary_gradients
    }

    /// `Λ = max_{l,j} |∂λ_l/∂x^j|`.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Shape ratio `h_K / ρ_K`.
    pub fn shape_ratio(&self) -> f64 {
        self.diameter / self.inscribed_diameter
    }

    /// Cartesian point with the given barycentric coordinates.
    pub fn to_cartesian(&self, point: &BarycentricPoint) -> Vec<f64> {
        let n = self.dimension();
        let mut x = vec![0.0; n];
        for (l, v) in point.lambdas().iter().zip(&self.vertices) {
            for j in 0..n {
                x[j] += l * v[j];
            }
        }
        x
    }

    /// Barycentric coordinates of a Cartesian point (not necessarily inside).
    pub fn barycentric(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        let mut lambdas = vec![0.0; n + 1];
        let v0 = &self.vertices[0];
        for (l, grad) in self.bary_gradients.iter().enumerate().skip(1) {
            lambdas[l] = (0..n).map(|j| grad[j] * (x[j] - v0[j])).sum();
        }
        lambdas[0] = 1.0 - lambdas[1..].iter().sum::<f64>();
        lambdas
    }

    /// Uniformly scaled copy (about the origin).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let vertices: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * factor).collect())
            .collect();
        simplex_geometry(&vertices)
    }
}

/// Quadrature rule on the reference simplex, weights normalised to sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<BarycentricPoint>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[BarycentricPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mean value of `f` over the simplex (i.e. `∫ f / mes`).
    pub fn average<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&BarycentricPoint) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(node)?;
        }
        Ok(acc)
    }

    /// `∫_K f dx` for `f` given as a function of barycentric coordinates.
    pub fn integrate<F>(&self, geometry: &SimplexGeometry, f: F) -> Result<f64>
    where
        F: FnMut(&BarycentricPoint) -> Result<f64>,
    {
        Ok(geometry.measure() * self.average(f)?)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let m = points;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Builds a rule on the reference n-simplex exact for total degree `degree`.
pub fn quadrature_rule(n: usize, degree: usize) -> Result<QuadratureRule> {
    if !(1..=3).contains(&n) || !(1..=MAX_QUADRATURE_DEGREE).contains(&degree) {
        return Err(Error::Capability(format!(
            "quadrature available for n in 1..=3 and degree in 1..={MAX_QUADRATURE_DEGREE}, requested n = {n}, degree = {degree}"
        )));
    }
    // The collapse Jacobian adds up to n-1 to the degree in the first variable.
    let m = (degree + n).div_ceil(2);
    let (gx, gw) = gauss_legendre(m);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let scale = factorial(n);
    match n {
        1 => {
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(vec![1.0 - x, *x]);
                weights.push(*w);
            }
        }
        2 => {
            for (u, wu) in gx.iter().zip(&gw) {
                for (v, wv) in gx.iter().zip(&gw) {
                    let x1 = *u;
                    let x2 = (1.0 - u) * v;
                    nodes.push(vec![1.0 - x1 - x2, x1, x2]);
                    weights.push(scale * wu * wv * (1.0 - u));
                }
            }
        }
        _ => {
            for (u, wu) in gx.iter().zip(&gw) {
                for (v, wv) in gx.iter().zip(&gw) {
                    for (w, ww) in gx.iter().zip(&gw) {
                        let x1 = *u;
                        let x2 = (1.0 - u) * v;
                        let x3 = (1.0 - u) * (1.0 - v) * w;
                        nodes.push(vec![1.0 - x1 - x2 - x3, x1, x2, x3]);
                        weights.push(scale * wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
    }
    let nodes = nodes
        .into_iter()
        .map(BarycentricPoint::new)
        .collect::<Result<Vec<_>>>()?;
    let rule = QuadratureRule {
        nodes,
        weights,
        exact_degree: degree,
    };
    validate_exactness(&rule, n)?;
    Ok(rule)
}

/// Exponent vectors `β ∈ ℕⁿ` with `|β| <= degree`.
fn exponents(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(pos + 1, n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, degree, &mut Vec::new(), &mut out);
    out
}

/// Normalised Dirichlet moment `n! Π β_j! / (n + |β|)!`.
pub fn dirichlet_moment(exponents: &[usize]) -> f64 {
    let n = exponents.len();
    let total: usize = exponents.iter().sum();
    // Accumulate as a product of ratios to stay in range.
    let mut num: Vec<f64> = exponents.iter().flat_map(|&b| (1..=b).map(|i| i as f64)).collect();
    num.extend((1..=n).map(|i| i as f64));
    let den: Vec<f64> = (1..=n + total).map(|i| i as f64).collect();
    let mut acc = 1.0;
    let mut ni = num.iter();
    for d in &den {
        acc /= d;
        if let Some(x) = ni.next() {
            acc *= x;
        }
    }
    for x in ni {
        acc *= x;
    }
    acc
}

fn validate_exactness(rule: &QuadratureRule, n: usize) -> Result<()> {
    let degree = rule.exact_degree;
    // powers[node][coord][e] = λ_{coord+1}^e, skipping λ_1 which is implied.
    let powers: Vec<Vec<Vec<f64>>> = rule
        .nodes
        .iter()
        .map(|p| {
            p.lambdas()[1..]
                .iter()
                .map(|&l| {
                    let mut v = Vec::with_capacity(degree + 1);
                    let mut acc = 1.0;
                    for _ in 0..=degree {
                        v.push(acc);
                        acc *= l;
                    }
                    v
                })
                .collect()
        })
        .collect();
    for beta in exponents(n, degree) {
        let approx: f64 = powers
            .iter()
            .zip(&rule.weights)
            .map(|(pw, w)| w * beta.iter().enumerate().map(|(j, &b)| pw[j][b]).product::<f64>())
            .sum();
        let exact = dirichlet_moment(&beta);
        if (approx - exact).abs() > EXACTNESS_TOL {
            return Err(Error::Capability(format!(
                "rule of degree {degree} in dimension {n} failed exactness on exponent {beta:?}: {approx} vs {exact}"
            )));
        }
    }
    Ok(())
}

/// Default quadrature degree `2k + 2` used for semi-norms of Pk functions.
pub fn default_degree(k: usize) -> usize {
    2 * k + 2
}

/// Cartesian gradient `∂p/∂x^j = Σ_l Λ^{(l)}_j ∂p/∂λ_l`.
pub fn cartesian_gradient(
    index: &MultiIndex,
    point: &BarycentricPoint,
    geometry: &SimplexGeometry,
) -> Result<Vec<f64>> {
    let dp = basis_gradient_barycentric(index, point)?;
    let n = geometry.dimension();
    Ok((0..n)
        .map(|j| {
            dp.iter()
                .zip(geometry.bary_gradients())
                .map(|(d, g)| d * g[j])
                .sum()
        })
        .collect())
}

fn check_match(index: &MultiIndex, geometry: &SimplexGeometry) -> Result<()> {
    if index.dimension() != geometry.dimension() {
        return Err(Error::Usage(format!(
            "basis function of dimension {} on a simplex of dimension {}",
            index.dimension(),
            geometry.dimension()
        )));
    }
    Ok(())
}

/// `|p_i|_{0,2,K}` using the rule `rule`.
pub fn seminorm_l2_with(index: &MultiIndex, geometry: &SimplexGeometry, rule: &QuadratureRule) -> Result<f64> {
    check_match(index, geometry)?;
    let sq = rule.integrate(geometry, |p| {
        let v = basis_eval(index, p)?;
        Ok(v * v)
    })?;
    Ok(sq.max(0.0).sqrt())
}

/// `|p_i|_{1,2,K}` using the rule `rule`.
pub fn seminorm_h1_with(index: &MultiIndex, geometry: &SimplexGeometry, rule: &QuadratureRule) -> Result<f64> {
    check_match(index, geometry)?;
    let sq = rule.integrate(geometry, |p| {
        Ok(cartesian_gradient(index, p, geometry)?
            .iter()
            .map(|g| g * g)
            .sum())
    })?;
    Ok(sq.max(0.0).sqrt())
}

/// `|p_i|_{0,2,K} = (∫_K p_i²)^{1/2}` with the default quadrature degree.
pub fn seminorm_l2(index: &MultiIndex, geometry: &SimplexGeometry) -> Result<f64> {
    let rule = quadrature_rule(geometry.dimension(), default_degree(index.order()))?;
    seminorm_l2_with(index, geometry, &rule)
}

/// `|p_i|_{1,2,K} = (Σ_j ∫_K (∂p_i/∂x^j)²)^{1/2}` with the default quadrature degree.
pub fn seminorm_h1(index: &MultiIndex, geometry: &SimplexGeometry) -> Result<f64> {
    let rule = quadrature_rule(geometry.dimension(), default_degree(index.order()))?;
    seminorm_h1_with(index, geometry, &rule)
}

/// Per-basis-function semi-norms together with the summed bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormSums {
    pub n: usize,
    pub k: usize,
    /// `|p_i|_{0,2,K}` in node order.
    pub l2: Vec<f64>,
    /// `|p_i|_{1,2,K}` in node order.
    pub h1: Vec<f64>,
    pub sum_l2: f64,
    pub sum_h1: f64,
    /// `√mes(K) (k+n)ⁿ k^{n+1}`.
    pub bound_l2: f64,
    /// `√mes(K) n(n+1) Λ/ρ_K (k+n)ⁿ k^{n+2}`.
    pub bound_h1: f64,
    pub l2_ok: bool,
    pub h1_ok: bool,
    /// False when `k <= n/2`, outside the hypothesis under which the H¹ bound is stated.
    pub within_hypothesis: bool,
}

impl SeminormSums {
    pub fn passed(&self) -> bool {
        self.l2_ok && self.h1_ok
    }
}

/// Sums of the basis semi-norms over all `N` functions, compared with the explicit bounds.
pub fn seminorm_sums(n: usize, k: usize, geometry: &SimplexGeometry) -> Result<SeminormSums> {
    if geometry.dimension() != n {
        return Err(Error::Usage(format!(
            "n = {n} but the simplex has dimension {}",
            geometry.dimension()
        )));
    }
    let basis = PkBasis::new(n, k)?;
    let rule = quadrature_rule(n, default_degree(k))?;
    let mut l2 = Vec::with_capacity(basis.len());
    let mut h1 = Vec::with_capacity(basis.len());
    for node in basis.nodes() {
        l2.push(seminorm_l2_with(node.index(), geometry, &rule)?);
        h1.push(seminorm_h1_with(node.index(), geometry, &rule)?);
    }
    let sum_l2: f64 = l2.iter().sum();
    let sum_h1: f64 = h1.iter().sum();
    let (nf, kf) = (n as f64, k as f64);
    let common = geometry.measure().sqrt() * (kf + nf).powi(n as i32);
    let bound_l2 = common * kf.powi(n as i32 + 1);
    let bound_h1 = common * nf * (nf + 1.0) * geometry.lambda_max() / geometry.inscribed_diameter()
        * kf.powi(n as i32 + 2);
    Ok(SeminormSums {
        n,
        k,
        l2,
        h1,
        sum_l2,
        sum_h1,
        bound_l2,
        bound_h1,
        l2_ok: sum_l2 <= bound_l2,
        h1_ok: sum_h1 <= bound_h1,
        within_hypothesis: 2 * k > n,
    })
}
