use std::fs;

use fe_accuracy::accuracy_constants::{
    self, AsymptoticModel, DomainData, EllipticityData, ModelSine, ProviderSpec, SeminormProvider,
};
use fe_accuracy::pk_basis::{self, BarycentricPoint, PkBasis};
use fe_accuracy::probability_laws::{self, LawParameters, ProbabilityCurve};
use fe_accuracy::simplex_quadrature::{self, VerticesDocument};
use fe_accuracy::table::{Cell, Table};
use num_traits::{One, Zero};
use serde_json::json;

use crate::{BasisArgs, BoundsArgs, CliError, Format, Grid, HstarArgs, LawsArgs, Report, SeminormsArgs};

/// Grid points per interval for the nodal polynomial check.
const LAGRANGE_GRID: usize = 10_000;
/// Largest `Np` in the nodal polynomial check.
const LAGRANGE_MAX_NP: usize = 10;

fn parse_lambdas(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("malformed coordinate {s:?} in --eval")))
        })
        .collect()
}

pub fn basis(a: &BasisArgs) -> Result<Report, CliError> {
    let basis = PkBasis::new(a.n, a.k)?;
    match &a.eval {
        Some(text) => basis_eval(&basis, text),
        None => basis_nodes(&basis),
    }
}

fn basis_eval(basis: &PkBasis, text: &str) -> Result<Report, CliError> {
    let lambdas = parse_lambdas(text)?;
    if lambdas.len() != basis.dimension() + 1 {
        return Err(CliError::Usage(format!(
            "--eval needs n+1 = {} coordinates, got {}",
            basis.dimension() + 1,
            lambdas.len()
        )));
    }
    let point = BarycentricPoint::new(lambdas)?;
    let values = basis.eval_all(&point)?;
    let mut table = Table::new(["i", "index", "value"]);
    for (i, (node, v)) in basis.nodes().iter().zip(&values).enumerate() {
        table.push(vec![i.into(), Cell::Text(node.index().to_string()), (*v).into()]);
    }
    let json = json!({
        "n": basis.dimension(),
        "k": basis.order(),
        "point": point.lambdas(),
        "indices": basis.nodes().iter().map(|n| n.index().entries().to_vec()).collect::<Vec<_>>(),
        "values": values,
    });
    Ok(Report {
        table,
        json,
        summary: None,
        passed: true,
        default_format: Format::Json,
    })
}

fn basis_nodes(basis: &PkBasis) -> Result<Report, CliError> {
    let n = basis.dimension();
    let mut header = vec!["i".to_string(), "index".to_string()];
    header.extend((1..=n + 1).map(|j| format!("lambda_{j}")));
    header.extend(["max_offdiag".to_string(), "exact_ok".to_string()]);
    let mut table = Table::new(header);

    let mut rows = Vec::with_capacity(basis.len());
    let mut worst = 0.0f64;
    let mut all_exact = true;
    for (i, node) in basis.nodes().iter().enumerate() {
        let exact_coords = node.exact_coords();
        let mut max_dev = 0.0f64;
        let mut exact_ok = true;
        for (j, other) in basis.nodes().iter().enumerate() {
            let float = pk_basis::basis_eval(other.index(), node.point())?;
            let target = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((float - target).abs());
            let exact = pk_basis::basis_eval_exact(other.index(), &exact_coords)?;
            exact_ok &= if i == j { exact.is_one() } else { exact.is_zero() };
        }
        worst = worst.max(max_dev);
        all_exact &= exact_ok;
        let mut row = vec![i.into(), Cell::Text(node.index().to_string())];
        row.extend(node.point().lambdas().iter().map(|&l| Cell::from(l)));
        row.extend([max_dev.into(), exact_ok.into()]);
        table.push(row);
        rows.push(json!({
            "i": i,
            "index": node.index().entries(),
            "lambdas": node.point().lambdas(),
            "max_deviation": max_dev,
            "exact_ok": exact_ok,
        }));
    }
    let json = json!({
        "n": n,
        "k": basis.order(),
        "dimension": basis.len(),
        "nodes": rows,
        "kronecker": { "max_deviation": worst, "exact": all_exact },
    });
    Ok(Report {
        table,
        json,
        summary: Some(format!(
            "kronecker: {} nodes, max deviation {worst:e}, exact {all_exact}",
            basis.len()
        )),
        passed: all_exact,
        default_format: Format::Json,
    })
}

/// Largest `|Π|` over an equispaced grid of `[0, 1]` together with the bound.
pub fn lagrange_check(np: usize, points: usize) -> Result<(f64, f64), CliError> {
    let bound = pk_basis::lagrange_numerator_bound(np, 0.0, 1.0)?;
    let mut max = 0.0f64;
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        max = max.max(pk_basis::lagrange_numerator_product(np, 0.0, 1.0, x)?.abs());
    }
    Ok((max, bound))
}

pub fn bounds(a: &BoundsArgs) -> Result<Report, CliError> {
    let local = pk_basis::verify_local_bounds(a.n, a.k, a.samples, a.seed)?;
    let mut table = Table::new(["check", "max", "bound", "ok"]);
    table.push(vec![
        "basis_value".into(),
        local.max_value.into(),
        local.value_bound.into(),
        local.value_ok.into(),
    ]);
    table.push(vec![
        "basis_derivative".into(),
        local.max_derivative.into(),
        local.derivative_bound.into(),
        local.derivative_ok.into(),
    ]);
    let mut lagrange = Vec::new();
    let mut lagrange_ok = true;
    for np in 1..=LAGRANGE_MAX_NP {
        let (max, bound) = lagrange_check(np, LAGRANGE_GRID)?;
        let ok = max <= bound;
        lagrange_ok &= ok;
        table.push(vec![Cell::Text(format!("nodal_product_np{np}")), max.into(), bound.into(), ok.into()]);
        lagrange.push(json!({ "np": np, "max": max, "bound": bound, "ok": ok }));
    }
    let passed = local.passed() && lagrange_ok;
    let json = json!({
        "local": local,
        "nodal_product": { "grid_points": LAGRANGE_GRID, "checks": lagrange },
        "passed": passed,
    });
    Ok(Report {
        table,
        json,
        summary: None,
        passed,
        default_format: Format::Json,
    })
}

pub fn seminorms(a: &SeminormsArgs) -> Result<Report, CliError> {
    let geometry = match &a.vertices {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            VerticesDocument::from_json(&text)?.geometry()?
        }
        None => simplex_quadrature::reference_simplex(a.n)?,
    };
    let sums = simplex_quadrature::seminorm_sums(a.n, a.k, &geometry)?;
    let mut table = Table::new(["i", "l2", "h1"]);
    for (i, (l2, h1)) in sums.l2.iter().zip(&sums.h1).enumerate() {
        table.push(vec![i.into(), (*l2).into(), (*h1).into()]);
    }
    let summary = format!(
        "sum_l2 {:e} <= {:e}: {}; sum_h1 {:e} <= {:e}: {}{}",
        sums.sum_l2,
        sums.bound_l2,
        sums.l2_ok,
        sums.sum_h1,
        sums.bound_h1,
        sums.h1_ok,
        if sums.within_hypothesis { "" } else { " (k <= n/2)" }
    );
    let json = json!({
        "measure": geometry.measure(),
        "diameter": geometry.diameter(),
        "inscribed_diameter": geometry.inscribed_diameter(),
        "lambda_max": geometry.lambda_max(),
        "sums": sums,
        "passed": sums.passed(),
    });
    Ok(Report {
        table,
        json,
        summary: Some(summary),
        passed: sums.passed(),
        default_format: Format::Csv,
    })
}

fn provider(model: &str) -> Result<Box<dyn SeminormProvider>, CliError> {
    if model == "builtin-sine" {
        return Ok(Box::new(ModelSine));
    }
    let text = fs::read_to_string(model)
        .map_err(|e| CliError::Usage(format!("--model is neither builtin-sine nor a readable file: {e}")))?;
    Ok(ProviderSpec::from_json(&text)?.build()?)
}

fn ratio_limit(model: &str, s: &dyn SeminormProvider, l: Option<f64>) -> Result<f64, CliError> {
    if let Some(l) = l {
        return Ok(l);
    }
    if let Some(l) = s.ratio_limit() {
        return Ok(l);
    }
    // A table provider falls back on its last consecutive ratio.
    if let Ok(ProviderSpec::Table { values }) = fs::read_to_string(model)
        .map_err(|e| e.to_string())
        .and_then(|t| ProviderSpec::from_json(&t).map_err(|e| e.to_string()))
    {
        if let [.., a, b] = values.as_slice() {
            return Ok(b / a);
        }
    }
    Err(CliError::Usage("cannot infer the ratio limit; pass --l".into()))
}

pub fn hstar(a: &HstarArgs) -> Result<Report, CliError> {
    let e = EllipticityData::new(a.continuity, a.alpha)?;
    let d = DomainData::new(a.diam, a.sigma, a.lambda, a.n)?;
    let s = provider(&a.model)?;
    let l = ratio_limit(&a.model, s.as_ref(), a.l)?;
    let q_values: Vec<usize> = (1..=a.q_max).collect();
    let model = AsymptoticModel::build(a.k, &q_values, &e, &d, s.as_ref(), l)?;
    let ratios = model.ratios();

    let mut table = Table::new(["q", "log_hstar_q", "hstar_q", "asymptote", "ratio"]);
    for (i, &q) in q_values.iter().enumerate() {
        let log_h = model.log_hstar_q[i];
        // exp overflows to +inf, which the table writes as the "inf" sentinel.
        let h = log_h.exp();
        table.push(vec![q.into(), log_h.into(), h.into(), model.asymptote[i].into(), ratios[i].into()]);
    }
    let json = json!({
        "k": a.k,
        "n": a.n,
        "provider": s.label(),
        "ratio_limit": l,
        "ck_star": accuracy_constants::ck_star(a.k, &e, &d).ok(),
        "rows": table.to_json(),
    });
    Ok(Report {
        table,
        json,
        summary: None,
        passed: true,
        default_format: Format::Csv,
    })
}

pub fn laws(a: &LawsArgs) -> Result<Report, CliError> {
    let params = match (a.ck, a.cm, a.k, a.m) {
        (Some(ck), Some(cm), Some(k), Some(m)) => Some(LawParameters::new(k, m, ck, cm)?),
        _ => None,
    };
    let (h_star, q) = match (&params, a.hstar, a.q) {
        (Some(p), hstar, q) => {
            if hstar.is_some() {
                return Err(CliError::Usage("--hstar is derived from --ck/--cm/--k/--m; omit it".into()));
            }
            if q.is_some_and(|q| q != p.q()) {
                return Err(CliError::Usage(format!("--q must equal m - k = {}", p.q())));
            }
            (p.h_star(), p.q())
        }
        (None, Some(h), Some(q)) => (h, q),
        (None, _, _) => {
            return Err(CliError::Usage(
                "give --hstar and --q, or --ck, --cm, --k and --m".into(),
            ))
        }
    };
    if a.h_max < a.h_min {
        return Err(CliError::Usage(format!("--h-max {} < --h-min {}", a.h_max, a.h_min)));
    }
    let mut grid = match a.grid {
        Grid::Linear => probability_laws::linear_grid(a.h_min, a.h_max, a.steps)?,
        Grid::Log => probability_laws::log_grid(a.h_min, a.h_max, a.steps)?,
    };
    probability_laws::snap_to(&mut grid, h_star);
    let mut curve = ProbabilityCurve::new(h_star, q, &grid)?;
    if let Some(samples) = a.montecarlo {
        if samples < probability_laws::MIN_SAMPLES {
            return Err(CliError::Usage(format!(
                "--montecarlo needs at least {} samples",
                probability_laws::MIN_SAMPLES
            )));
        }
        curve = curve.with_monte_carlo(params.as_ref(), samples, a.seed)?;
    }
    let table = curve.to_table();
    let json = json!({
        "h_star": h_star,
        "q": q,
        "seed": a.montecarlo.map(|_| a.seed),
        "rows": table.to_json(),
    });
    Ok(Report {
        table,
        json,
        summary: None,
        passed: true,
        default_format: Format::Csv,
    })
}
