//! Canonical Pk Lagrange basis on the reference n-simplex.
//!
//! Basis functions are indexed by multi-indices `(i_1, ..., i_{n+1})` with
//! `i_1 + ... + i_{n+1} = k`. Each one is a product of univariate auxiliary
//! polynomials in the barycentric coordinates,
//!
//! ```text
//! p_i(λ) = Π_j P_{i_j}(λ_j),   P_0 = 1,   P_m(λ) = Π_{c=1..m} (kλ - c + 1) / c
//! ```
//!
//! and takes the value 1 at its own lattice node `(i_1/k, ..., i_{n+1}/k)`
//! and 0 at every other node.
//!
//! The single-index numbering used everywhere in the crate is the
//! lexicographically descending order of multi-indices, as produced by
//! [`lattice_points`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `Σ λ_j = 1` accepted by [`BarycentricPoint::new`].
pub const BARYCENTRIC_SUM_TOL: f64 = 1e-12;

/// Multi-index `(i_1, ..., i_{n+1})` of one basis function / lattice node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndex {
    entries: Vec<usize>,
    order: usize,
}

impl MultiIndex {
    /// Builds a multi-index; the order `k` is the sum of the entries.
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Domain(format!(
                "a multi-index needs n+1 >= 2 entries, got {}",
                entries.len()
            )));
        }
        let order = entries
            .iter()
            .try_fold(0usize, |acc, &e| acc.checked_add(e))
            .ok_or_else(|| Error::Range("multi-index order overflows".into()))?;
        if order == 0 {
            return Err(Error::Domain("multi-index order k must be >= 1".into()));
        }
        Ok(Self { entries, order })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Polynomial order `k`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Space dimension `n` (one less than the number of entries).
    pub fn dimension(&self) -> usize {
        self.entries.len() - 1
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (j, e) in self.entries.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A point given by its `n+1` barycentric coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarycentricPoint {
    lambdas: Vec<f64>,
}

impl BarycentricPoint {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::Usage(format!(
                "barycentric point needs n+1 >= 2 coordinates, got {}",
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::Domain("barycentric coordinates must be finite".into()));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > BARYCENTRIC_SUM_TOL {
            return Err(Error::Domain(format!(
                "barycentric coordinates sum to {sum}, expected 1"
            )));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dimension(&self) -> usize {
        self.lambdas.len() - 1
    }

    /// True iff every coordinate lies in `[0, 1]`.
    pub fn is_inside(&self) -> bool {
        self.lambdas.iter().all(|&l| (0.0..=1.0).contains(&l))
    }
}

/// Lattice node `M_i` with coordinates `i_j / k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeNode {
    index: MultiIndex,
    point: BarycentricPoint,
}

impl LatticeNode {
    pub fn new(index: MultiIndex) -> Self {
        let k = index.order() as f64;
        let lambdas = index.entries().iter().map(|&e| e as f64 / k).collect();
        Self {
            index,
            point: BarycentricPoint { lambdas },
        }
    }

    pub fn index(&self) -> &MultiIndex {
        &self.index
    }

    pub fn point(&self) -> &BarycentricPoint {
        &self.point
    }

    /// Coordinates as exact rationals `i_j / k`.
    pub fn exact_coords(&self) -> Vec<BigRational> {
        let k = BigInt::from(self.index.order());
        self.index
            .entries()
            .iter()
            .map(|&e| BigRational::new(BigInt::from(e), k.clone()))
            .collect()
    }
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("space dimension n must be >= 1".into()));
    }
    if k == 0 {
        return Err(Error::Domain("polynomial order k must be >= 1".into()));
    }
    Ok(())
}

/// Dimension `N = (n+k)! / (n! k!)` of Pk on an n-simplex.
pub fn pk_dimension(n: usize, k: usize) -> Result<usize> {
    check_order(n, k)?;
    let overflow = || Error::Range(format!("pk_dimension({n}, {k}) does not fit in usize"));
    let total = n.checked_add(k).ok_or_else(overflow)? as u128;
    let s = n.min(k) as u128;
    let mut acc: u128 = 1;
    for i in 1..=s {
        // acc * (total - s + i) is divisible by i: it is C(total - s + i, i) * i.
        acc = acc.checked_mul(total - s + i).ok_or_else(overflow)? / i;
    }
    usize::try_from(acc).map_err(|_| overflow())
}

/// All multi-indices of order `k` in dimension `n`, lexicographically descending.
pub fn multi_indices(n: usize, k: usize) -> Result<Vec<MultiIndex>> {
    let count = pk_dimension(n, k)?;
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0usize; n + 1];
    fill_indices(0, k, &mut current, &mut out);
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn fill_indices(pos: usize, remaining: usize, current: &mut [usize], out: &mut Vec<MultiIndex>) {
    let last = current.len() - 1;
    if pos == last {
        current[pos] = remaining;
        let order = current.iter().sum();
        out.push(MultiIndex {
            entries: current.to_vec(),
            order,
        });
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_indices(pos + 1, remaining - e, current, out);
    }
}

/// The `N` equispaced lattice nodes of Pk, in the crate's single-index order.
pub fn lattice_points(n: usize, k: usize) -> Result<Vec<LatticeNode>> {
    Ok(multi_indices(n, k)?
        .into_iter()
        .map(LatticeNode::new)
        .collect())
}

fn check_aux(i: usize, k: usize) -> Result<()> {
    if i > k {
        return Err(Error::Domain(format!(
            "auxiliary polynomial order {i} exceeds basis order {k}"
        )));
    }
    Ok(())
}

/// Auxiliary polynomial `P_i(λ) = Π_{c=1..i} (kλ - c + 1)/c`, with `P_0 = 1`.
pub fn aux_poly_eval(i: usize, k: usize, lambda: f64) -> Result<f64> {
    check_aux(i, k)?;
    Ok(aux_value(i, k as f64, lambda))
}

fn aux_value(i: usize, k: f64, lambda: f64) -> f64 {
    let x = k * lambda;
    (1..=i).fold(1.0, |acc, c| {
        let c = c as f64;
        acc * (x - (c - 1.0)) / c
    })
}

/// Derivative of [`aux_poly_eval`] with respect to `λ`, by the product rule.
pub fn aux_poly_derivative(i: usize, k: usize, lambda: f64) -> Result<f64> {
    check_aux(i, k)?;
    Ok(aux_derivative(i, k as f64, lambda))
}

fn aux_derivative(i: usize, k: f64, lambda: f64) -> f64 {
    let x = k * lambda;
    let mut sum = 0.0;
    for d in 1..=i {
        let mut term = k / d as f64;
        for c in (1..=i).filter(|&c| c != d) {
            let c = c as f64;
            term *= (x - (c - 1.0)) / c;
        }
        sum += term;
    }
    sum
}

/// Exact rational evaluation of the auxiliary polynomial.
pub fn aux_poly_eval_exact(i: usize, k: usize, lambda: &BigRational) -> Result<BigRational> {
    check_aux(i, k)?;
    let x = lambda * BigRational::from_integer(BigInt::from(k));
    let mut acc = BigRational::one();
    for c in 1..=i {
        let c = BigRational::from_integer(BigInt::from(c));
        let factor = (&x - &c + BigRational::one()) / &c;
        if factor.is_zero() {
            return Ok(BigRational::zero());
        }
        acc *= factor;
    }
    Ok(acc)
}

fn check_dims(index: &MultiIndex, len: usize) -> Result<()> {
    if index.entries.len() != len {
        return Err(Error::Usage(format!(
            "multi-index has {} entries but the point has {} coordinates",
            index.entries.len(),
            len
        )));
    }
    Ok(())
}

/// Value of the basis function `p_index` at a barycentric point.
pub fn basis_eval(index: &MultiIndex, point: &BarycentricPoint) -> Result<f64> {
    basis_eval_raw(index, point.lambdas())
}

/// Product formula evaluated at arbitrary coordinates.
///
/// Unlike [`basis_eval`] the coordinates are not required to sum to one,
/// which is what finite-difference checks of single partials need.
pub fn basis_eval_raw(index: &MultiIndex, lambdas: &[f64]) -> Result<f64> {
    check_dims(index, lambdas.len())?;
    let k = index.order as f64;
    Ok(index
        .entries
        .iter()
        .zip(lambdas)
        .map(|(&i, &l)| aux_value(i, k, l))
        .product())
}

/// Exact rational value of `p_index` at rational coordinates.
pub fn basis_eval_exact(index: &MultiIndex, lambdas: &[BigRational]) -> Result<BigRational> {
    check_dims(index, lambdas.len())?;
    let mut acc = BigRational::one();
    for (&i, l) in index.entries.iter().zip(lambdas) {
        let v = aux_poly_eval_exact(i, index.order, l)?;
        if v.is_zero() {
            return Ok(v);
        }
        acc *= v;
    }
    Ok(acc)
}

/// Partials `∂p_index/∂λ_l` for `l = 1..n+1`, treating the λ as independent.
pub fn basis_gradient_barycentric(index: &MultiIndex, point: &BarycentricPoint) -> Result<Vec<f64>> {
    basis_gradient_raw(index, point.lambdas())
}

pub fn basis_gradient_raw(index: &MultiIndex, lambdas: &[f64]) -> Result<Vec<f64>> {
    check_dims(index, lambdas.len())?;
    let k = index.order as f64;
    let values: Vec<f64> = index
        .entries
        .iter()
        .zip(lambdas)
        .map(|(&i, &l)| aux_value(i, k, l))
        .collect();
    let grad = (0..lambdas.len())
        .map(|l| {
            let mut g = aux_derivative(index.entries[l], k, lambdas[l]);
            for (j, v) in values.iter().enumerate() {
                if j != l {
                    g *= v;
                }
            }
            g
        })
        .collect();
    Ok(grad)
}

/// The full Pk basis for a fixed `(n, k)`.
#[derive(Debug, Clone)]
pub struct PkBasis {
    n: usize,
    k: usize,
    nodes: Vec<LatticeNode>,
}

impl PkBasis {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Ok(Self {
            n,
            k,
            nodes: lattice_points(n, k)?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[LatticeNode] {
        &self.nodes
    }

    /// Values of every basis function at `point`, in node order.
    pub fn eval_all(&self, point: &BarycentricPoint) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .map(|node| basis_eval(node.index(), point))
            .collect()
    }

    /// `Σ_i φ_i p_i(point)` for nodal values `φ` given in node order.
    pub fn interpolate(&self, values: &[f64], point: &BarycentricPoint) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::Usage(format!(
                "expected {} nodal values for P{} in dimension {}, got {}",
                self.nodes.len(),
                self.k,
                self.n,
                values.len()
            )));
        }
        if point.lambdas().len() != self.n + 1 {
            return Err(Error::Usage(format!(
                "point has {} coordinates, expected {}",
                point.lambdas().len(),
                self.n + 1
            )));
        }
        let basis = self.eval_all(point)?;
        Ok(values.iter().zip(&basis).map(|(v, p)| v * p).sum())
    }
}

/// Interpolates nodal values of the Pk element at `point`; `n` is taken from the point.
pub fn interpolate(k: usize, values: &[f64], point: &BarycentricPoint) -> Result<f64> {
    PkBasis::new(point.dimension(), k)?.interpolate(values, point)
}

/// `Π(x) = Π_{j=0..Np} (x - x_j)` on the equispaced grid `x_j = a + j (b-a)/Np`.
pub fn lagrange_numerator_product(np: usize, a: f64, b: f64, x: f64) -> Result<f64> {
    check_interval(np, a, b)?;
    if !(a..=b).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [{a}, {b}]")));
    }
    let step = (b - a) / np as f64;
    Ok((0..=np).map(|j| x - (a + j as f64 * step)).product())
}

/// The bound `(Np+1)! h^(Np+1)` on `|Π|` over `[a, b]`.
pub fn lagrange_numerator_bound(np: usize, a: f64, b: f64) -> Result<f64> {
    check_interval(np, a, b)?;
    let step = (b - a) / np as f64;
    Ok((1..=np + 1).map(|j| j as f64 * step).product())
}

fn check_interval(np: usize, a: f64, b: f64) -> Result<()> {
    if np == 0 {
        return Err(Error::Domain("Np must be >= 1".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    Ok(())
}

/// Draws a point uniformly from the standard simplex (Dirichlet(1, ..., 1)).
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BarycentricPoint {
    let mut draws: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.iter_mut().for_each(|d| *d /= total);
    BarycentricPoint { lambdas: draws }
}

/// Empirical check of the pointwise bounds `|p_i| <= k^(n+1)` and `|∂p_i/∂λ_l| <= k^(n+2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalBoundsReport {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// Random samples plus every lattice node.
    pub points_evaluated: usize,
    pub basis_functions: usize,
    pub max_value: f64,
    pub max_derivative: f64,
    pub value_bound: f64,
    pub derivative_bound: f64,
    pub value_ok: bool,
    pub derivative_ok: bool,
}

impl LocalBoundsReport {
    pub fn passed(&self) -> bool {
        self.value_ok && self.derivative_ok
    }
}

/// Evaluates every basis function and its barycentric partials at `samples`
/// uniform random points of the closed simplex, plus the lattice nodes.
pub fn verify_local_bounds(n: usize, k: usize, samples: usize, seed: u64) -> Result<LocalBoundsReport> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let basis = PkBasis::new(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_value = 0.0f64;
    let mut max_derivative = 0.0f64;

    let mut visit = |point: &BarycentricPoint| -> Result<()> {
        for node in basis.nodes() {
            let v = basis_eval(node.index(), point)?;
            max_value = max_value.max(v.abs());
            for g in basis_gradient_barycentric(node.index(), point)? {
                max_derivative = max_derivative.max(g.abs());
            }
        }
        Ok(())
    };

    for _ in 0..samples {
        visit(&sample_simplex(n, &mut rng))?;
    }
    for node in basis.nodes() {
        visit(node.point())?;
    }

    let value_bound = (k as f64).powi((n + 1) as i32);
    let derivative_bound = (k as f64).powi((n + 2) as i32);
    Ok(LocalBoundsReport {
        n,
        k,
        samples,
        seed,
        points_evaluated: samples + basis.len(),
        basis_functions: basis.len(),
        max_value,
        max_derivative,
        value_bound,
        derivative_bound,
        value_ok: max_value <= value_bound,
        derivative_ok: max_derivative <= derivative_bound,
    })
}
