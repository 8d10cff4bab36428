//! Acceptance suite.
//!
//! Runs every acceptance criterion at its stated tolerance and time budget,
//! prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fe_accuracy::accuracy_constants::{self, AsymptoticModel, DomainData, EllipticityData, ModelSine};
use fe_accuracy::pk_basis::{self, PkBasis};
use fe_accuracy::probability_laws::{self, LawParameters, MeshSize};
use fe_accuracy::simplex_quadrature::{self, quadrature_rule, simplex_geometry, SimplexGeometry};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn c1_kronecker() -> Check {
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for n in 1..=3 {
        for k in 1..=6 {
            let basis = PkBasis::new(n, k).map_err(|e| e.to_string())?;
            for (i, node) in basis.nodes().iter().enumerate() {
                let row = basis.eval_all(node.point()).map_err(|e| e.to_string())?;
                let exact_coords = node.exact_coords();
                for (j, other) in basis.nodes().iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((row[j] - target).abs());
                    let exact = pk_basis::basis_eval_exact(other.index(), &exact_coords)
                        .map_err(|e| e.to_string())?;
                    let ok = if i == j { exact.is_one() } else { exact.is_zero() };
                    if !ok {
                        return Err(format!("n={n} k={k}: exact entry ({i},{j}) = {exact}"));
                    }
                    pairs += 1;
                }
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max |M - I| = {worst:e} > 1e-10"));
    }
    Ok(format!("{pairs} entries exact, max float deviation {worst:e}"))
}

fn c2_nodal_product() -> Check {
    let points = 10_000;
    let mut worst_ratio = 0.0f64;
    for np in 1..=10 {
        let bound = pk_basis::lagrange_numerator_bound(np, 0.0, 1.0).map_err(|e| e.to_string())?;
        let mut max = 0.0f64;
        for i in 0..points {
            let x = i as f64 / (points - 1) as f64;
            let v = pk_basis::lagrange_numerator_product(np, 0.0, 1.0, x).map_err(|e| e.to_string())?;
            max = max.max(v.abs());
        }
        if max > bound {
            return Err(format!("Np={np}: max {max:e} > bound {bound:e}"));
        }
        worst_ratio = worst_ratio.max(max / bound);
    }
    Ok(format!("Np = 1..10, largest max/bound = {worst_ratio:.3e}"))
}

fn c3_local_bounds() -> Check {
    let mut tight_value = 0.0f64;
    let mut tight_derivative = 0.0f64;
    for n in 1..=3 {
        for k in 1..=8 {
            let seed = 1000 + 10 * n as u64 + k as u64;
            let r = pk_basis::verify_local_bounds(n, k, 10_000, seed).map_err(|e| e.to_string())?;
            if !r.passed() {
                return Err(format!(
                    "n={n} k={k}: max|p| {} (bound {}), max|dp| {} (bound {})",
                    r.max_value, r.value_bound, r.max_derivative, r.derivative_bound
                ));
            }
            tight_value = tight_value.max(r.max_value / r.value_bound);
            tight_derivative = tight_derivative.max(r.max_derivative / r.derivative_bound);
        }
    }
    Ok(format!(
        "24 cases, 0 violations; largest max/bound {tight_value:.3} (values), {tight_derivative:.3} (derivatives)"
    ))
}

/// Random simplex with vertices in the unit cube and shape ratio at most `max_shape`.
fn random_simplex(n: usize, rng: &mut ChaCha8Rng, max_shape: f64) -> SimplexGeometry {
    loop {
        let vertices: Vec<Vec<f64>> = (0..=n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        if let Ok(g) = simplex_geometry(&vertices) {
            if g.shape_ratio() <= max_shape {
                return g;
            }
        }
    }
}

fn c4_seminorm_sums() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0;
    let mut worst_quad = 0.0f64;
    let mut tight_l2 = 0.0f64;
    let mut tight_h1 = 0.0f64;
    for n in 1..=3 {
        let mut simplexes = vec![simplex_quadrature::reference_simplex(n).map_err(|e| e.to_string())?];
        simplexes.extend((0..10).map(|_| random_simplex(n, &mut rng, 4.0 * n as f64)));
        for k in (n.div_ceil(2) + 1)..=6 {
            let basis = PkBasis::new(n, k).map_err(|e| e.to_string())?;
            let finer = quadrature_rule(n, simplex_quadrature::default_degree(k) + 6).map_err(|e| e.to_string())?;
            for (s, g) in simplexes.iter().enumerate() {
                let sums = simplex_quadrature::seminorm_sums(n, k, g).map_err(|e| e.to_string())?;
                for (i, node) in basis.nodes().iter().enumerate() {
                    let l2 = simplex_quadrature::seminorm_l2_with(node.index(), g, &finer).map_err(|e| e.to_string())?;
                    let h1 = simplex_quadrature::seminorm_h1_with(node.index(), g, &finer).map_err(|e| e.to_string())?;
                    worst_quad = worst_quad.max((l2 - sums.l2[i]).abs()).max((h1 - sums.h1[i]).abs());
                }
                if !sums.passed() {
                    return Err(format!(
                        "n={n} k={k} simplex {s}: sum_l2 {:e} vs {:e}, sum_h1 {:e} vs {:e}",
                        sums.sum_l2, sums.bound_l2, sums.sum_h1, sums.bound_h1
                    ));
                }
                tight_l2 = tight_l2.max(sums.sum_l2 / sums.bound_l2);
                tight_h1 = tight_h1.max(sums.sum_h1 / sums.bound_h1);
                cases += 1;
            }
        }
    }
    if worst_quad > 1e-8 {
        return Err(format!("quadrature discrepancy {worst_quad:e} > 1e-8"));
    }
    Ok(format!(
        "{cases} (n, k, simplex) cases; largest sum/bound {tight_l2:.3e} (L2), {tight_h1:.3e} (H1); quadrature discrepancy {worst_quad:.1e}"
    ))
}

fn binomial(r: usize, a: usize) -> f64 {
    (1..=a).fold(1.0, |acc, j| acc * (r - a + j) as f64 / j as f64)
}

/// `|u|_r` of `sin(πx)cos(πy)` on the unit square by tensor Gauss–Legendre quadrature.
fn quadrature_model_seminorm(r: usize, points: usize) -> f64 {
    use std::f64::consts::PI;
    let (x, w) = simplex_quadrature::gauss_legendre(points);
    let shift = |a: usize| a as f64 * PI / 2.0;
    let mut total = 0.0;
    for a in 0..=r {
        let b = r - a;
        let mut integral = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let dx = PI.powi(a as i32) * (PI * xi + shift(a)).sin();
            for (yj, wj) in x.iter().zip(&w) {
                let dy = PI.powi(b as i32) * (PI * yj + shift(b)).cos();
                integral += wi * wj * (dx * dy).powi(2);
            }
        }
        total += binomial(r, a) * integral;
    }
    total.sqrt()
}

fn c5_model_problem() -> Check {
    let mut worst = 0.0f64;
    for r in 0..=4 {
        // 24 points per direction: exact to degree 47 >= 2r + 2.
        let q = quadrature_model_seminorm(r, 24);
        let m = accuracy_constants::model_seminorm(r);
        let rel = (q - m).abs() / m;
        if rel > 1e-6 {
            return Err(format!("r={r}: quadrature {q} vs closed form {m}"));
        }
        worst = worst.max(rel);
    }
    let target = std::f64::consts::SQRT_2 * std::f64::consts::PI;
    let ratios = accuracy_constants::seminorm_ratio_sequence(&ModelSine, 0, 50).map_err(|e| e.to_string())?;
    let spread = ratios.iter().map(|r| (r - target).abs()).fold(0.0, f64::max);
    if spread > 1e-12 {
        return Err(format!("ratio sequence departs from sqrt(2)*pi by {spread:e}"));
    }
    Ok(format!(
        "r = 0..4 max relative error {worst:.1e}; ratio = sqrt(2)*pi within {spread:.1e} (reciprocal value not asserted)"
    ))
}

fn c6_sigmoid_triangle() -> Check {
    let grid = probability_laws::log_grid(0.05, 20.0, 50).map_err(|e| e.to_string())?;
    let seeds = [1u64, 2, 3];
    let samples = 1_000_000;
    let mut worst_closed = 0.0f64;
    let mut violations = Vec::new();
    let mut degenerate = 0usize;
    let mut checked = 0usize;
    for q in [1usize, 2, 5, 10] {
        // k = 1, m = 1 + q, C_k = C_m = 1 puts h* at 1.
        let params = LawParameters::new(1, 1 + q, 1.0, 1.0).map_err(|e| e.to_string())?;
        for (i, &h) in grid.iter().enumerate() {
            let (a, b) = params.supports(h);
            let sigmoid = params.sigmoid(h).map_err(|e| e.to_string())?;
            let analytic = probability_laws::analytic_uniform_prob(a, b).map_err(|e| e.to_string())?;
            worst_closed = worst_closed.max((sigmoid - analytic).abs());
            for &seed in &seeds {
                let mc = probability_laws::monte_carlo_prob(a, b, samples, seed * 1_000_003 + (q * 100 + i) as u64)
                    .map_err(|e| e.to_string())?;
                checked += 1;
                if (mc.estimate - sigmoid).abs() > 3.0 * mc.stderr {
                    degenerate += usize::from(mc.stderr == 0.0);
                    violations.push(format!(
                        "q={q} h/h*={h:.4} seed={seed}: est {} p {sigmoid:.3e} stderr {:.1e}",
                        mc.estimate, mc.stderr
                    ));
                }
            }
        }
    }
    if worst_closed > 1e-12 {
        return Err(format!("sigmoid vs analytic differ by {worst_closed:e}"));
    }
    if !violations.is_empty() {
        let shown: Vec<_> = violations.iter().take(4).cloned().collect();
        return Err(format!(
            "sigmoid = analytic within {worst_closed:.1e}; Monte Carlo outside 3*stderr at {}/{checked} points \
             ({degenerate} with estimate 0 or 1 and stderr 0), e.g. {}",
            violations.len(),
            shown.join("; ")
        ));
    }
    Ok(format!("sigmoid = analytic within {worst_closed:.1e}; {checked} Monte Carlo runs within 3*stderr"))
}

fn c7_asymptote() -> Check {
    let e = EllipticityData::new(1.0, 1.0).map_err(|e| e.to_string())?;
    let d = DomainData::new(std::f64::consts::SQRT_2, 1.0, 1.0, 2).map_err(|e| e.to_string())?;
    let l = std::f64::consts::SQRT_2 * std::f64::consts::PI;
    let qs: Vec<usize> = (1..=2000).collect();
    let model = AsymptoticModel::build(2, &qs, &e, &d, &ModelSine, l).map_err(|e| e.to_string())?;
    if let Some(i) = model.log_hstar_q.iter().position(|v| !v.is_finite()) {
        return Err(format!("log h*_q not finite at q = {}", qs[i]));
    }
    let last_drop = model
        .log_hstar_q
        .windows(2)
        .rposition(|w| w[1] <= w[0])
        .map(|i| qs[i + 1]);
    if last_drop.is_some_and(|q| q > 1000) {
        return Err(format!("h*_q not increasing near q = {}", last_drop.unwrap()));
    }
    let ratios = model.ratios();
    let checkpoints = [100usize, 200, 500, 1000, 2000];
    let dev: Vec<f64> = checkpoints.iter().map(|&q| (ratios[q - 1] - 1.0).abs()).collect();
    if dev.windows(2).any(|w| w[1] >= w[0]) {
        return Err(format!("|ratio - 1| not decreasing: {dev:?}"));
    }
    if dev[4] >= 0.25 {
        return Err(format!("|ratio - 1| = {} at q = 2000", dev[4]));
    }
    Ok(format!(
        "finite for q <= 2000, strictly increasing from q = {}; |ratio - 1| at {:?} = {}",
        last_drop.map_or(1, |q| q + 1),
        checkpoints,
        dev.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", ")
    ))
}

fn c8_pointwise_limit() -> Check {
    let e = EllipticityData::default();
    let d = DomainData::new(std::f64::consts::SQRT_2, 1.0, 1.0, 2).map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for h in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let limit = probability_laws::pointwise_limit(MeshSize::Finite(h)).map_err(|e| e.to_string())?;
        let hit = (1..=5000).find(|&q| {
            probability_laws::law_sequence_eval(2, q, h, &e, &d, &ModelSine)
                .map(|p| (p - limit).abs() < 1e-3)
                .unwrap_or(false)
        });
        match hit {
            Some(q) => found.push(format!("h={h}: q={q}")),
            None => return Err(format!("h={h}: no q <= 5000 with |P_q(h) - 1| < 1e-3")),
        }
    }
    Ok(found.join(", "))
}

fn c9_step_consistency() -> Check {
    let mut worst = 0.0f64;
    for h in [0.5, 0.9, 1.1, 2.0] {
        let s = probability_laws::sigmoid_law(h, 1.0, 500).map_err(|e| e.to_string())?;
        let t = probability_laws::step_law(h, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max((s - t).abs());
    }
    if worst >= 1e-3 {
        return Err(format!("max difference {worst:e}"));
    }
    Ok(format!("max |sigmoid - step| = {worst:.1e}"))
}

fn c10_determinism() -> Check {
    let invocations: [&[&str]; 6] = [
        &["basis", "--n", "3", "--k", "3", "--nodes"],
        &["bounds", "--n", "2", "--k", "4", "--samples", "5000", "--seed", "17"],
        &["seminorms", "--n", "3", "--k", "3"],
        &["hstar", "--k", "2", "--q-max", "300"],
        &[
            "laws", "--hstar", "1", "--q", "2", "--h-min", "0.1", "--h-max", "3", "--steps", "100",
            "--montecarlo", "100000", "--seed", "42",
        ],
        &[
            "laws", "--ck", "3", "--cm", "0.5", "--k", "2", "--m", "4", "--h-min", "0.2", "--h-max", "9",
            "--steps", "40", "--grid", "log", "--montecarlo", "20000", "--seed", "7", "--format", "json",
        ],
    ];
    for args in invocations {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_fe-accuracy"))
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        if !a.status.success() {
            return Err(format!("{args:?} exited with {}", a.status));
        }
        if a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("{args:?} produced different output"));
        }
    }
    Ok(format!("{} invocations byte-identical", invocations.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "Kronecker property and unisolvence", budget: Some(Duration::from_secs(5)), run: c1_kronecker },
        Criterion { id: 2, title: "nodal polynomial bound", budget: Some(Duration::from_secs(1)), run: c2_nodal_product },
        Criterion { id: 3, title: "pointwise basis and derivative bounds", budget: Some(Duration::from_secs(30)), run: c3_local_bounds },
        Criterion { id: 4, title: "summed L2 and H1 semi-norm bounds", budget: Some(Duration::from_secs(60)), run: c4_seminorm_sums },
        Criterion { id: 5, title: "model problem semi-norms", budget: None, run: c5_model_problem },
        Criterion { id: 6, title: "sigmoid, analytic and Monte Carlo agreement", budget: Some(Duration::from_secs(120)), run: c6_sigmoid_triangle },
        Criterion { id: 7, title: "divergence of h*_q and its asymptote", budget: Some(Duration::from_secs(5)), run: c7_asymptote },
        Criterion { id: 8, title: "pointwise limit on finite mesh sizes", budget: Some(Duration::from_secs(10)), run: c8_pointwise_limit },
        Criterion { id: 9, title: "step law as the limit of the sigmoid", budget: Some(Duration::from_secs(1)), run: c9_step_consistency },
        Criterion { id: 10, title: "byte-identical CLI output", budget: None, run: c10_determinism },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {:.2} s, budget {} s", elapsed.as_secs_f64(), b.as_secs())),
            (r, _) => r,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} [{:.2} s] {}: {detail}",
            c.id,
            elapsed.as_secs_f64(),
            c.title
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
