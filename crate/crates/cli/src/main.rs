use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bernstein_core::constructions::{build_wrong_mse_solution, holomorphic_map, HolomorphicKind};
use bernstein_core::fields::{catalog, catalog_by_name, CatalogId, Point2, ScalarField2, Solves};
use bernstein_core::knowledge::{
    bernstein_verdict, knowledge_table, BernsteinQuery, BernsteinVerdict, Regularity,
};
use bernstein_core::operators::{
    ellipticity, l_residual, mss_residual, EllipticityReport, OperatorParams,
};
use bernstein_core::solver::{
    residual_grid, solve_dirichlet_on, GridFunction, GridSpec, NewtonOptions, ResidualReport,
};
use bernstein_core::variational::{nitsche_verdict, NitscheReport};

#[derive(Parser)]
#[command(
    name = "bernstein",
    version,
    about = "Explore the Bernstein property of the L(gamma, epsilon) family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: f64,
}

impl ParamArgs {
    fn params(self) -> Result<OperatorParams> {
        Ok(OperatorParams::new(self.gamma, self.epsilon)?)
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum RegularityArg {
    C2,
    C4,
}

#[derive(Subcommand)]
enum Command {
    /// Ellipticity, Bernstein verdict and Nitsche report for one parameter pair.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 2)]
        dim: u32,
        #[arg(long, value_enum, default_value = "c2")]
        regularity: RegularityArg,
        #[arg(long)]
        gradient_bound: Option<f64>,
        #[arg(long, default_value_t = 1)]
        codimension: u32,
    },
    /// Residual of a catalog or constructed solution on a grid of points.
    Residual {
        /// Catalog id, `separable:C` or `affine:A,B,C`.
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        params: ParamArgs,
        /// `x0,x1,y0,y1,nx,ny`
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
    },
    /// Nitsche divergence verdict with quadrature evidence.
    Nitsche {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Samples the separable wrong-minimal-surface solution to CSV.
    Construct {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        range: f64,
        #[arg(long, default_value_t = 101)]
        nodes: usize,
    },
    /// Newton solve of a Dirichlet problem.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Catalog id, `separable:C`, `affine:A,B,C`, or a CSV grid file.
        #[arg(long)]
        boundary: String,
        /// Required unless the boundary is a CSV file.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_iterations: usize,
    },
    /// Runs the residual suite over every catalog entry and construction.
    CatalogVerify,
    /// Exports the knowledge table.
    Report,
}

#[derive(Serialize)]
struct ClassifyReport {
    params: OperatorParams,
    elliptic: bool,
    ellipticity: EllipticityReport,
    bernstein: BernsteinVerdict,
    nitsche: Option<NitscheReport>,
    nitsche_unavailable: Option<String>,
}

#[derive(Serialize)]
struct ResidualOutput {
    solution: String,
    params: OperatorParams,
    grid: GridSpec,
    /// Largest residual of the analytic jets over all nodes.
    max_abs: f64,
    worst_point: Point2,
    /// Finite-difference residual of the sampled values.
    finite_difference: ResidualReport,
}

#[derive(Serialize)]
struct ConstructOutput {
    c: f64,
    out: PathBuf,
    grid: GridSpec,
    g_second_derivative_at_0: f64,
    max_wrong_mse_residual: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    params: OperatorParams,
    boundary: String,
    out: PathBuf,
    grid: GridSpec,
    iterations: usize,
    residual: ResidualReport,
    residual_history: Vec<f64>,
    warnings: Vec<String>,
    /// Largest deviation from the boundary's own closed form, when it has one.
    max_error_vs_exact: Option<f64>,
}

#[derive(Serialize)]
struct Check {
    name: String,
    params: Option<OperatorParams>,
    max_abs_residual: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    passed: bool,
    checks: Vec<Check>,
}

fn parse_field(id: &str) -> Result<ScalarField2> {
    if let Some(c) = id.strip_prefix("separable:") {
        let c: f64 = c
            .parse()
            .with_context(|| format!("bad constant in `{id}`"))?;
        return Ok(build_wrong_mse_solution(c)?);
    }
    if let Some(rest) = id.strip_prefix("affine:") {
        let v: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad coefficients in `{id}`"))?;
        let [a, b, c] = v[..] else {
            bail!("`{id}` needs three coefficients")
        };
        return Ok(ScalarField2::affine(a, b, c));
    }
    Ok(catalog_by_name(id)?.field)
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_csv(u: &GridFunction, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    u.write_csv(BufWriter::new(f))?;
    Ok(())
}

fn classify(
    params: OperatorParams,
    dim: u32,
    regularity: RegularityArg,
    gradient_bound: Option<f64>,
    codimension: u32,
) -> Result<()> {
    let mut q = BernsteinQuery::plane(params)
        .with_dim(dim)
        .with_codimension(codimension)
        .with_regularity(match regularity {
            RegularityArg::C2 => Regularity::C2,
            RegularityArg::C4 => Regularity::C4,
        });
    if let Some(b) = gradient_bound {
        q = q.with_gradient_bound(b);
    }
    let bernstein = bernstein_verdict(&q)?;
    let ell = ellipticity(params);
    let (nitsche, nitsche_unavailable) = match nitsche_verdict(params) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    emit(&ClassifyReport {
        params,
        elliptic: ell.elliptic,
        ellipticity: ell,
        bernstein,
        nitsche,
        nitsche_unavailable,
    })
}

fn residual(solution: &str, params: OperatorParams, grid: GridSpec) -> Result<()> {
    let field = parse_field(solution)?;
    let mut worst = (0.0f64, grid.point(0, 0));
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.point(i, j);
            let r = l_residual(params, &field.jet(p)?).abs();
            if r > worst.0 {
                worst = (r, p);
            }
        }
    }
    let sampled = GridFunction::from_field(grid, &field)?;
    emit(&ResidualOutput {
        solution: solution.to_string(),
        params,
        grid,
        max_abs: worst.0,
        worst_point: worst.1,
        finite_difference: residual_grid(params, &sampled),
    })
}

fn construct(c: f64, out: &Path, range: f64, nodes: usize) -> Result<()> {
    let field = build_wrong_mse_solution(c)?;
    let grid = GridSpec::square(range, nodes)?;
    let u = GridFunction::from_field(grid, &field)?;
    let wrong_mse = OperatorParams::new(1.0, 1.0)?;
    let mut max_res = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            // the family member is twice the wrong minimal surface operator
            max_res = max_res.max(0.5 * l_residual(wrong_mse, &field.jet(grid.point(i, j))?).abs());
        }
    }
    write_csv(&u, out)?;
    eprintln!("wrote {} ({} x {} nodes)", out.display(), nodes, nodes);
    emit(&ConstructOutput {
        c,
        out: out.to_path_buf(),
        grid,
        g_second_derivative_at_0: field.jet(Point2::new(0.0, 0.0))?.uxx,
        max_wrong_mse_residual: max_res,
    })
}

fn solve(
    params: OperatorParams,
    boundary: &str,
    grid: Option<GridSpec>,
    out: &Path,
    max_iterations: usize,
) -> Result<()> {
    let opts = NewtonOptions {
        max_iterations,
        ..Default::default()
    };
    let path = Path::new(boundary);
    let (sol, exact) = if path.extension().is_some_and(|e| e == "csv") || path.is_file() {
        let f = File::open(path).with_context(|| format!("opening {boundary}"))?;
        let data = GridFunction::read_csv(BufReader::new(f))?;
        if let Some(g) = grid {
            if g != data.grid {
                bail!(
                    "--grid {g} disagrees with the grid in {boundary} ({})",
                    data.grid
                );
            }
        }
        (solve_dirichlet_on(params, &data, &opts), None)
    } else {
        let grid = grid.ok_or_else(|| anyhow!("--grid is required for analytic boundary data"))?;
        let field = parse_field(boundary)?;
        let data = GridFunction::from_field(grid, &field)?;
        (solve_dirichlet_on(params, &data, &opts), Some(field))
    };
    let sol = sol?;
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("converged in {} iterations", sol.iterations);
    let max_error_vs_exact = exact.map(|f| sol.u.max_deviation(|p| f.value(p).unwrap_or(f64::NAN)));
    write_csv(&sol.u, out)?;
    emit(&SolveOutput {
        params,
        boundary: boundary.to_string(),
        out: out.to_path_buf(),
        grid: sol.u.grid,
        iterations: sol.iterations,
        residual: sol.residual,
        residual_history: sol.residual_history,
        warnings: sol.warnings,
        max_error_vs_exact,
    })
}

fn verify_points() -> Vec<Point2> {
    (0..10)
        .flat_map(|i| {
            (0..10)
                .map(move |j| Point2::new(-1.0 + i as f64 * 2.0 / 9.0, -1.0 + j as f64 * 2.0 / 9.0))
        })
        .collect()
}

fn catalog_verify() -> Result<bool> {
    const TOL: f64 = 1e-10;
    let pts = verify_points();
    let mut checks = Vec::new();
    let mut push = |name: String, params: Option<OperatorParams>, r: f64, tol: f64| {
        checks.push(Check {
            name,
            params,
            max_abs_residual: r,
            tolerance: tol,
            passed: r <= tol,
        });
    };
    let field_max = |field: &ScalarField2, p: OperatorParams| -> Result<f64> {
        let mut m = 0.0f64;
        for pt in &pts {
            m = m.max(l_residual(p, &field.jet(*pt)?).abs());
        }
        Ok(m)
    };
    let sweep = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for id in CatalogId::ALL {
        let entry = catalog(id);
        let params: Vec<OperatorParams> = match entry.solves {
            Solves::Params(p) => vec![p],
            Solves::Every => sweep
                .iter()
                .flat_map(|&g| {
                    sweep
                        .iter()
                        .map(move |&e| OperatorParams::new_unchecked(g, e))
                })
                .collect(),
        };
        for p in params {
            push(id.to_string(), Some(p), field_max(&entry.field, p)?, TOL);
        }
    }
    let wrong_mse = OperatorParams::new(1.0, 1.0)?;
    for c in [0.5, 1.0, 3.0] {
        let f = build_wrong_mse_solution(c)?;
        push(
            format!("separable:{c}"),
            Some(wrong_mse),
            field_max(&f, wrong_mse)?,
            1e-8,
        );
    }
    for kind in HolomorphicKind::CATALOG {
        let mut m = 0.0f64;
        for pt in &pts {
            m = mss_residual(&holomorphic_map(kind, *pt)?)
                .iter()
                .fold(m, |m, r| m.max(r.abs()));
        }
        push(format!("holomorphic-{kind}"), None, m, 1e-11);
    }
    let passed = checks.iter().all(|c| c.passed);
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAILED {}: {:e} > {:e}",
            c.name, c.max_abs_residual, c.tolerance
        );
    }
    emit(&VerifyOutput { passed, checks })?;
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify {
            params,
            dim,
            regularity,
            gradient_bound,
            codimension,
        } => classify(
            params.params()?,
            dim,
            regularity,
            gradient_bound,
            codimension,
        )?,
        Command::Residual {
            solution,
            params,
            grid,
        } => residual(&solution, params.params()?, grid)?,
        Command::Nitsche { params } => emit(&nitsche_verdict(params.params()?)?)?,
        Command::Construct {
            c,
            out,
            range,
            nodes,
        } => construct(c, &out, range, nodes)?,
        Command::Solve {
            params,
            boundary,
            grid,
            out,
            max_iterations,
        } => solve(params.params()?, &boundary, grid, &out, max_iterations)?,
        Command::CatalogVerify => return catalog_verify(),
        Command::Report => emit(&knowledge_table())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
