//! One function per subcommand, each producing a [`Report`].

use evcop_core::estimation::{ev_test_kendall, project, DEFAULT_GRID_POINTS};
use evcop_core::pickands::DEFAULT_TOL;
use evcop_core::simulation::doa_gap_husler_reiss;
use evcop_core::{
    archimedean_attractor_theta, block_maxima, doa_gap, estimate, fit_pseudo_ml, sample_base,
    uniform_grid, ArchimedeanGenerator, AttractorMode, BaseCopula, BlockMaximaConfig,
    DependenceReport, EstimatorKind, EvCopula, FamilyParams, FitFamily, MarginMode, PickandsFn,
    Projection, RngSeed,
};
use serde_json::{json, Value};

use crate::args::{
    CoeffsArgs, DoaArgs, EstimateArgs, EvalArgs, EvtestArgs, FamilyArgs, FitArgs, SampleArgs,
};
use crate::data::{read_curve, read_sample};
use crate::error::{usage, CliResult};
use crate::output::{num, to_value, Table};
use crate::plot::{pickands_svg, Series};

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_BOOTSTRAP: usize = 500;
pub const DEFAULT_DOA_NS: [u64; 3] = [100, 1000, 10_000];

/// What a command hands back for emission.
pub struct Report {
    /// Resolved settings, echoed into the document.
    pub config: Value,
    pub result: Value,
    /// Flat form used for `--format csv`.
    pub table: Table,
    pub svg: Option<String>,
}

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

fn need(v: Option<f64>, flag: &str, family: &str) -> CliResult<f64> {
    v.ok_or_else(|| usage(format!("{family} needs --{flag}")))
}

/// The family selected by `--family` and its parameter flags.
pub fn family_params(a: &FamilyArgs) -> CliResult<Option<FamilyParams>> {
    let Some(name) = a.family.as_deref() else {
        return Ok(None);
    };
    let p = match normalize(name).as_str() {
        "logistic" | "gumbel" => FamilyParams::logistic(need(a.theta, "theta", "logistic")?)?,
        "galambos" => FamilyParams::galambos(need(a.theta, "theta", "galambos")?)?,
        "husler_reiss" | "hr" => FamilyParams::husler_reiss(need(a.lambda, "lambda", "husler_reiss")?)?,
        "t_ev" => FamilyParams::t_ev(need(a.nu, "nu", "t_ev")?, need(a.rho, "rho", "t_ev")?)?,
        "independence" => FamilyParams::logistic(1.0)?,
        "comonotone" => FamilyParams::logistic(f64::INFINITY)?,
        other => return Err(usage(format!("unknown family {other:?}"))),
    };
    Ok(Some(p))
}

fn grid_of(points: Option<usize>) -> CliResult<Vec<f64>> {
    let n = points.unwrap_or(DEFAULT_GRID_POINTS);
    if n < 2 {
        return Err(usage(format!("--grid must be at least 2, got {n}")));
    }
    Ok(uniform_grid(n))
}

fn margins_of(name: Option<&str>) -> CliResult<MarginMode> {
    match name.map(normalize).as_deref() {
        None | Some("ranks") => Ok(MarginMode::Ranks),
        Some("known_uniform" | "known" | "uniform") => Ok(MarginMode::KnownUniform),
        Some(other) => Err(usage(format!("unknown margin mode {other:?}; use ranks or known-uniform"))),
    }
}

fn input_of(p: &Option<std::path::PathBuf>) -> CliResult<&std::path::Path> {
    p.as_deref().ok_or_else(|| usage("--input is required"))
}

pub fn eval(args: &EvalArgs) -> CliResult<Report> {
    let params = family_params(&args.family)?.ok_or_else(|| usage("eval needs --family"))?;
    let grid = grid_of(args.grid)?;
    let c = EvCopula::family(params, 2)?;
    let a = PickandsFn::Parametric(params);
    let mut table = Table::new(&["t", "A", "ell", "C"]);
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let at = a.eval(t);
        values.push(at);
        // l(1, t) and the diagonal C(t, t)
        let ell = c.ell().eval(&[1.0, t])?;
        table.push(vec![num(t), num(at), num(ell), num(c.cdf2(t, t))]);
    }
    let title = format!("{} Pickands function", params.name());
    let svg = pickands_svg(
        &title,
        &[Series { label: "A(t)", t: &grid, a: &values, color: "#1f77b4", dashed: false }],
    );
    Ok(Report {
        config: json!({ "family": to_value(&params)?, "grid": grid.len() }),
        result: json!({
            "family": to_value(&params)?,
            "columns": "t, A(t), l(1, t), C(t, t)",
            "table": table.to_columns(),
        }),
        table,
        svg: Some(svg),
    })
}

fn base_of(name: &str, fam: &FamilyArgs, alpha: Option<f64>) -> CliResult<BaseCopula> {
    Ok(match normalize(name).as_str() {
        "gaussian" | "normal" => BaseCopula::gaussian(need(fam.rho, "rho", "gaussian")?)?,
        "student_t" | "t" => {
            BaseCopula::student_t(need(fam.nu, "nu", "student_t")?, need(fam.rho, "rho", "student_t")?)?
        }
        "gumbel" => BaseCopula::Archimedean {
            generator: ArchimedeanGenerator::gumbel(need(fam.theta, "theta", "gumbel")?)?,
        },
        "clayton" => BaseCopula::Archimedean {
            generator: ArchimedeanGenerator::clayton(need(alpha, "alpha", "clayton")?)?,
        },
        "independence" => BaseCopula::Archimedean { generator: ArchimedeanGenerator::Independence },
        other => return Err(usage(format!("unknown base copula {other:?}"))),
    })
}

pub fn sample(args: &SampleArgs, seed: RngSeed) -> CliResult<Report> {
    let base = match (&args.base, family_params(&args.family)?) {
        (Some(_), Some(_)) => return Err(usage("give either --base or --family, not both")),
        (Some(b), None) => base_of(b, &args.family, args.alpha)?,
        (None, Some(p)) => BaseCopula::ev(p)?,
        (None, None) => return Err(usage("sample needs --family or --base")),
    };
    let n = args.n.unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err(usage("-n must be at least 1"));
    }
    let pairs = match args.block_size {
        Some(k) => block_maxima(&base, &BlockMaximaConfig::new(k, n, seed)?)?,
        None => sample_base(&base, n, seed)?,
    };
    let mut table = Table::new(&["u", "v"]);
    for &(u, v) in &pairs {
        table.push(vec![num(u), num(v)]);
    }
    Ok(Report {
        config: json!({
            "source": to_value(&base)?,
            "n": n,
            "block_size": args.block_size,
            "seed": seed.seed,
        }),
        result: json!({ "n": pairs.len(), "pairs": table.to_columns() }),
        table,
        svg: None,
    })
}

pub fn estimate_cmd(args: &EstimateArgs) -> CliResult<Report> {
    let input = input_of(&args.input)?;
    let margins = margins_of(args.margins.as_deref())?;
    let kind_name = args.estimator.as_deref().unwrap_or("cfg");
    let kind = EstimatorKind::parse(kind_name)
        .ok_or_else(|| usage(format!("unknown estimator {kind_name:?}")))?;
    let proj_name = args.projection.as_deref().unwrap_or("none");
    let proj = Projection::parse(proj_name)
        .ok_or_else(|| usage(format!("unknown projection {proj_name:?}; use none, gcm or l2")))?;
    let grid = grid_of(args.grid)?;
    let truth = family_params(&args.truth)?;

    let sample = read_sample(input, margins)?;
    let curve = project(&estimate(&sample, &grid, kind)?, proj)?;
    let validity = curve.to_pickands()?.validate(DEFAULT_TOL);
    let mut result = json!({
        "n": sample.len(),
        "curve": to_value(&curve)?,
        "valid": validity.passed(),
    });
    if let Some(w) = validity.worst() {
        result["worst_violation"] = to_value(w)?;
    }
    let truth_values: Option<Vec<f64>> = truth.map(|p| grid.iter().map(|&t| p.pickands(t)).collect());
    if let Some(p) = truth {
        let a = PickandsFn::Parametric(p);
        result["truth"] = to_value(&p)?;
        result["mean_abs_error"] = num(curve.mean_abs_error(&a));
        result["sup_error"] = num(curve.sup_error(&a));
    }
    let mut table = Table::new(&["t", "A"]);
    for (&t, &v) in curve.grid.iter().zip(&curve.values) {
        table.push(vec![num(t), num(v)]);
    }
    let label = format!("{} ({})", kind.name(), proj.name());
    let mut series = vec![Series { label: &label, t: &grid, a: &curve.values, color: "#1f77b4", dashed: false }];
    if let Some(tv) = &truth_values {
        series.push(Series { label: "truth", t: &grid, a: tv, color: "#d62728", dashed: true });
    }
    let svg = pickands_svg("Pickands function estimate", &series);
    Ok(Report {
        config: json!({
            "input": input.display().to_string(),
            "estimator": kind.name(),
            "margins": to_value(&margins)?,
            "projection": proj.name(),
            "grid": grid.len(),
            "truth": truth.map(|p| to_value(&p)).transpose()?,
        }),
        result,
        table,
        svg: Some(svg),
    })
}

pub fn fit(args: &FitArgs) -> CliResult<Report> {
    let input = input_of(&args.input)?;
    let margins = margins_of(args.margins.as_deref())?;
    let fam_name = normalize(args.family.as_deref().unwrap_or("logistic"));
    let family = FitFamily::parse(&fam_name).ok_or_else(|| usage(format!("cannot fit family {fam_name:?}")))?;
    let sample = read_sample(input, margins)?;
    let fit = fit_pseudo_ml(&sample, family)?;
    let mut result = to_value(&fit)?;
    result["n"] = json!(sample.len());
    Ok(Report {
        config: json!({
            "input": input.display().to_string(),
            "family": family.name(),
            "margins": to_value(&margins)?,
        }),
        table: Table::from_object(&result),
        result,
        svg: None,
    })
}

pub fn coeffs(args: &CoeffsArgs) -> CliResult<Report> {
    let (a, source) = match (&args.curve, family_params(&args.family)?) {
        (Some(path), None) => {
            let curve = read_curve(path)?;
            (curve.to_pickands()?, json!({ "curve": path.display().to_string() }))
        }
        (None, Some(p)) => (PickandsFn::Parametric(p), json!({ "family": to_value(&p)? })),
        _ => return Err(usage("coeffs needs exactly one of --family or --curve")),
    };
    let report = DependenceReport::from_pickands(&a)?;
    let result = to_value(&report)?;
    Ok(Report {
        config: source,
        table: Table::from_object(&result),
        result,
        svg: None,
    })
}

pub fn evtest(args: &EvtestArgs, seed: RngSeed) -> CliResult<Report> {
    let input = input_of(&args.input)?;
    let b = args.bootstrap.unwrap_or(DEFAULT_BOOTSTRAP);
    let sample = read_sample(input, MarginMode::Ranks)?;
    let res = ev_test_kendall(&sample, b, seed)?;
    let mut result = to_value(&res)?;
    result["seed"] = json!(seed.seed);
    Ok(Report {
        config: json!({ "input": input.display().to_string(), "bootstrap": b, "seed": seed.seed }),
        table: Table::from_object(&result),
        result,
        svg: None,
    })
}

fn target_of(name: &str, param: Option<f64>) -> CliResult<EvCopula> {
    let p = match normalize(name).as_str() {
        "independence" => FamilyParams::logistic(1.0)?,
        "comonotone" => FamilyParams::logistic(f64::INFINITY)?,
        "logistic" | "gumbel" => FamilyParams::logistic(need(param, "target-param", "logistic")?)?,
        "galambos" => FamilyParams::galambos(need(param, "target-param", "galambos")?)?,
        "husler_reiss" | "hr" => FamilyParams::husler_reiss(need(param, "target-param", "husler_reiss")?)?,
        other => return Err(usage(format!("unsupported target family {other:?}"))),
    };
    Ok(EvCopula::family(p, 2)?)
}

pub fn doa(args: &DoaArgs) -> CliResult<Report> {
    let ns = args.n_values.clone().unwrap_or_else(|| DEFAULT_DOA_NS.to_vec());
    if ns.is_empty() {
        return Err(usage("--n-values must not be empty"));
    }
    let grid = args.grid.unwrap_or(evcop_core::simulation::DOA_GRID);
    if grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let mut table = Table::new(&["n", "gap"]);
    let mut gaps = Vec::with_capacity(ns.len());
    let mut config = if args.triangular {
        if args.base.is_some() || args.target.is_some() {
            return Err(usage("--triangular fixes both the base and the target"));
        }
        let lambda = args.lambda.ok_or_else(|| usage("--triangular needs --lambda"))?;
        for &n in &ns {
            gaps.push(doa_gap_husler_reiss(lambda, n, grid)?);
        }
        json!({
            "mode": "triangular",
            "base": "gaussian with rho_n = 1 - lambda^2 / log n",
            "target": to_value(&FamilyParams::husler_reiss(lambda)?)?,
            "grid": grid,
        })
    } else {
        let name = args.base.as_deref().ok_or_else(|| usage("doa needs --base or --triangular"))?;
        let fam = FamilyArgs { rho: args.rho, theta: args.theta, ..Default::default() };
        let base = base_of(name, &fam, args.alpha)?;
        let target = match (&args.target, &base) {
            (Some(t), _) => target_of(t, args.target_param)?,
            (None, BaseCopula::Gaussian { .. }) => EvCopula::independence(2)?,
            (None, BaseCopula::Archimedean { generator }) => {
                let est = archimedean_attractor_theta(generator, AttractorMode::Copula)?;
                let p = est
                    .family()
                    .ok_or_else(|| usage("attractor limit is unstable; give --target"))?;
                EvCopula::family(p, 2)?
            }
            (None, _) => return Err(usage("give --target for this base")),
        };
        for &n in &ns {
            gaps.push(doa_gap(&base, &target, n, grid)?);
        }
        json!({
            "mode": "fixed",
            "base": to_value(&base)?,
            "target": to_value(target.ell())?,
            "grid": grid,
        })
    };
    for (&n, &g) in ns.iter().zip(&gaps) {
        table.push(vec![json!(n), num(g)]);
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    config["n_values"] = json!(ns);
    Ok(Report {
        config,
        result: json!({ "table": table.to_columns(), "strictly_decreasing": decreasing }),
        table,
        svg: None,
    })
}
