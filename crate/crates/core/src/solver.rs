//! Finite-difference Newton solver for Dirichlet problems `L_{gamma,eps}[u] = 0`
//! on rectangles.
//!
//! Interior nodes use second-order central differences, with the standard
//! four-point stencil for `u_xy`. The Jacobian is assembled analytically
//! from the quasilinear coefficients and factored as a band matrix.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{BandError, BandMatrix};
use crate::exec::Execution;
use crate::fields::{Jet2, Point2, ScalarField2};
use crate::operators::{ellipticity, l_residual, OperatorParams};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("boundary value at node ({i}, {j}) is not finite")]
    NonFiniteBoundary { i: usize, j: usize },
    #[error("grid function has {got} values, expected {expected}")]
    ValueCount { got: usize, expected: usize },
    #[error("initial guess is not usable: {0}")]
    InitialGuess(String),
    #[error("Newton did not converge in {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("line search failed at iteration {iteration} (max residual {residual:e})")]
    LineSearch { iteration: usize, residual: f64 },
    #[error("singular Newton system at iteration {iteration}: {source}")]
    Singular {
        iteration: usize,
        #[source]
        source: BandError,
    },
    #[error("CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform tensor grid on `[x0, x1] x [y0, y1]` with `nx * ny` nodes.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, SolverError> {
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(SolverError::InvalidGrid("bounds must be finite".into()));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(SolverError::InvalidGrid(format!(
                "empty rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(SolverError::InvalidGrid(format!(
                "need at least 3 nodes per side, got {nx} x {ny}"
            )));
        }
        Ok(GridSpec {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
        })
    }

    /// `[-r, r]^2` with `n` nodes per side.
    pub fn square(r: f64, n: usize) -> Result<Self, SolverError> {
        GridSpec::new(-r, r, -r, r, n, n)
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, `x` fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        // hit the far edge exactly
        let x = if i == self.nx - 1 {
            self.x1
        } else {
            self.x0 + i as f64 * self.hx()
        };
        let y = if j == self.ny - 1 {
            self.y1
        } else {
            self.y0 + j as f64 * self.hy()
        };
        Point2::new(x, y)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    fn interior_nx(&self) -> usize {
        self.nx - 2
    }

    fn interior_len(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.x0, self.x1, self.y0, self.y1, self.nx, self.ny
        )
    }
}

/// Parses `x0,x1,y0,y1,nx,ny`.
impl FromStr for GridSpec {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(SolverError::InvalidGrid(format!(
                "expected x0,x1,y0,y1,nx,ny, got `{s}`"
            )));
        }
        let f = |k: usize| {
            parts[k]
                .parse::<f64>()
                .map_err(|e| SolverError::InvalidGrid(format!("`{}`: {e}", parts[k])))
        };
        let n = |k: usize| {
            parts[k]
                .parse::<usize>()
                .map_err(|e| SolverError::InvalidGrid(format!("`{}`: {e}", parts[k])))
        };
        GridSpec::new(f(0)?, f(1)?, f(2)?, f(3)?, n(4)?, n(5)?)
    }
}

/// Values at every grid node, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::ValueCount {
                got: values.len(),
                expected: grid.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Csv(format!("value {k} is not finite")));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn sample<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(Point2) -> f64,
    {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.point(i, j)));
            }
        }
        GridFunction { grid, values }
    }

    /// Samples a field's exact values.
    pub fn from_field(grid: GridSpec, field: &ScalarField2) -> Result<Self, SolverError> {
        let g = GridFunction::sample(grid, |p| field.value(p).unwrap_or(f64::NAN));
        GridFunction::new(grid, g.values)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Largest `|self - f|` over all nodes.
    pub fn max_deviation<F: Fn(Point2) -> f64>(&self, f: F) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                worst = worst.max((self.at(i, j) - f(self.grid.point(i, j))).abs());
            }
        }
        worst
    }

    /// Writes the header line `nx,ny,x0,x1,y0,y1` followed by one value per
    /// line in row-major order. Numbers use the shortest representation that
    /// parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SolverError> {
        let g = &self.grid;
        writeln!(out, "{},{},{},{},{},{}", g.nx, g.ny, g.x0, g.x1, g.y0, g.y1)?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, SolverError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| SolverError::Csv("empty input".into()))??;
        let h: Vec<&str> = header.split(',').map(str::trim).collect();
        if h.len() != 6 {
            return Err(SolverError::Csv(format!(
                "header must have 6 fields, got `{header}`"
            )));
        }
        let int = |k: usize| {
            h[k].parse::<usize>()
                .map_err(|e| SolverError::Csv(format!("header `{}`: {e}", h[k])))
        };
        let real = |k: usize| {
            h[k].parse::<f64>()
                .map_err(|e| SolverError::Csv(format!("header `{}`: {e}", h[k])))
        };
        let grid = GridSpec::new(real(2)?, real(3)?, real(4)?, real(5)?, int(0)?, int(1)?)?;
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(
                t.parse::<f64>()
                    .map_err(|e| SolverError::Csv(format!("line {}: `{t}`: {e}", k + 2)))?,
            );
        }
        GridFunction::new(grid, values)
    }
}

/// Starting iterate for Newton.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// Transfinite (Coons) blend of the four boundary edges; reproduces
    /// bilinear data exactly.
    BoundaryBlend,
    Zeros,
    /// Full-grid values; boundary entries are overwritten by the data.
    Supplied(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Target for the largest interior residual.
    pub tolerance: f64,
    /// Smallest damping factor tried by the halving line search.
    pub min_step: f64,
    pub initial_guess: InitialGuess,
    /// Pivots below this magnitude (relative to the largest Jacobian entry)
    /// count as singular.
    pub pivot_floor: f64,
    pub exec: Execution,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 20,
            tolerance: 1e-10,
            min_step: 1.0 / 1024.0,
            initial_guess: InitialGuess::BoundaryBlend,
            pivot_floor: 1e-14,
            exec: Execution::default(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub rms: f64,
    /// `(i, j)` of the largest residual.
    pub worst_node: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletSolution {
    pub u: GridFunction,
    /// Newton steps taken.
    pub iterations: usize,
    pub residual: ResidualReport,
    /// Euclidean norm of the interior residual before each step and after
    /// the last one.
    pub residual_history: Vec<f64>,
    /// Damping factor of each accepted step.
    pub step_sizes: Vec<f64>,
    pub warnings: Vec<String>,
}

// Finite-difference jet at interior node (i, j).
#[inline]
fn fd_jet(v: &[f64], g: &GridSpec, i: usize, j: usize) -> Jet2 {
    let nx = g.nx;
    let (hx, hy) = (g.hx(), g.hy());
    let k = j * nx + i;
    let c = v[k];
    let (e, w) = (v[k + 1], v[k - 1]);
    let (n, s) = (v[k + nx], v[k - nx]);
    let (ne, nw) = (v[k + nx + 1], v[k + nx - 1]);
    let (se, sw) = (v[k - nx + 1], v[k - nx - 1]);
    Jet2 {
        value: c,
        ux: (e - w) / (2.0 * hx),
        uy: (n - s) / (2.0 * hy),
        uxx: (e - 2.0 * c + w) / (hx * hx),
        uxy: (ne - nw - se + sw) / (4.0 * hx * hy),
        uyy: (n - 2.0 * c + s) / (hy * hy),
    }
}

fn interior_residuals(exec: Execution, params: OperatorParams, u: &GridFunction) -> Vec<f64> {
    let g = u.grid;
    let m = g.interior_nx();
    exec.map_indexed(g.interior_len(), |k| {
        let (i, j) = (k % m + 1, k / m + 1);
        l_residual(params, &fd_jet(&u.values, &g, i, j))
    })
}

fn summarize(res: &[f64], m: usize) -> ResidualReport {
    let mut worst = (0usize, 0.0f64);
    let mut sq = 0.0;
    for (k, r) in res.iter().enumerate() {
        sq += r * r;
        if r.abs() > worst.1 {
            worst = (k, r.abs());
        }
    }
    ResidualReport {
        max_abs: worst.1,
        rms: if res.is_empty() {
            0.0
        } else {
            (sq / res.len() as f64).sqrt()
        },
        worst_node: (worst.0 % m + 1, worst.0 / m + 1),
    }
}

fn l2(res: &[f64]) -> f64 {
    res.iter().map(|r| r * r).sum::<f64>().sqrt()
}

/// Finite-difference residual of `L_params` at all interior nodes.
pub fn residual_grid(params: OperatorParams, u: &GridFunction) -> ResidualReport {
    residual_grid_with(Execution::default(), params, u)
}

pub fn residual_grid_with(
    exec: Execution,
    params: OperatorParams,
    u: &GridFunction,
) -> ResidualReport {
    let res = interior_residuals(exec, params, u);
    summarize(&res, u.grid.interior_nx())
}

// Nine (column, value) Jacobian entries for interior unknown k; columns that
// refer to boundary nodes are marked usize::MAX.
fn jacobian_row(params: OperatorParams, u: &GridFunction, k: usize) -> [(usize, f64); 9] {
    let g = &u.grid;
    let m = g.interior_nx();
    let (i, j) = (k % m + 1, k / m + 1);
    let jet = fd_jet(&u.values, g, i, j);
    let (a, b, c) = params.coefficients(jet.ux, jet.uy);
    let gp = params.gamma + 1.0;
    let gm = params.gamma - 1.0;
    let dr_dux = 2.0 * gp * jet.ux * jet.uxx + 4.0 * jet.uy * jet.uxy + 2.0 * gm * jet.ux * jet.uyy;
    let dr_duy = 2.0 * gm * jet.uy * jet.uxx + 4.0 * jet.ux * jet.uxy + 2.0 * gp * jet.uy * jet.uyy;
    let (hx, hy) = (g.hx(), g.hy());
    let (ihx2, ihy2) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let cross = b / (4.0 * hx * hy);

    let unknown = |di: isize, dj: isize| -> usize {
        let (ii, jj) = ((i as isize + di) as usize, (j as isize + dj) as usize);
        if g.is_boundary(ii, jj) {
            usize::MAX
        } else {
            (jj - 1) * m + (ii - 1)
        }
    };
    [
        (unknown(0, 0), -2.0 * a * ihx2 - 2.0 * c * ihy2),
        (unknown(1, 0), dr_dux / (2.0 * hx) + a * ihx2),
        (unknown(-1, 0), -dr_dux / (2.0 * hx) + a * ihx2),
        (unknown(0, 1), dr_duy / (2.0 * hy) + c * ihy2),
        (unknown(0, -1), -dr_duy / (2.0 * hy) + c * ihy2),
        (unknown(1, 1), cross),
        (unknown(-1, 1), -cross),
        (unknown(1, -1), -cross),
        (unknown(-1, -1), cross),
    ]
}

/// Analytic Jacobian of the interior residual with respect to interior
/// values, in band form (half-bandwidth `nx - 1`).
pub fn assemble_jacobian(exec: Execution, params: OperatorParams, u: &GridFunction) -> BandMatrix {
    let g = u.grid;
    let n = g.interior_len();
    let bw = g.interior_nx() + 1;
    let rows = exec.map_indexed(n, |k| jacobian_row(params, u, k));
    let mut band = BandMatrix::zeros(n, bw, bw);
    for (k, row) in rows.iter().enumerate() {
        for &(col, v) in row {
            if col != usize::MAX {
                band.add(k, col, v);
            }
        }
    }
    band
}

fn coons_blend(u: &mut GridFunction) {
    let g = u.grid;
    let (nx, ny) = (g.nx, g.ny);
    let c00 = u.at(0, 0);
    let c10 = u.at(nx - 1, 0);
    let c01 = u.at(0, ny - 1);
    let c11 = u.at(nx - 1, ny - 1);
    for j in 1..ny - 1 {
        let t = j as f64 / (ny - 1) as f64;
        let (l, r) = (u.at(0, j), u.at(nx - 1, j));
        for i in 1..nx - 1 {
            let s = i as f64 / (nx - 1) as f64;
            let (b, top) = (u.at(i, 0), u.at(i, ny - 1));
            let v = (1.0 - t) * b + t * top + (1.0 - s) * l + s * r
                - ((1.0 - s) * (1.0 - t) * c00
                    + s * (1.0 - t) * c10
                    + (1.0 - s) * t * c01
                    + s * t * c11);
            let k = g.index(i, j);
            u.values[k] = v;
        }
    }
}

fn initial_iterate(
    grid: GridSpec,
    boundary: &dyn Fn(usize, usize) -> f64,
    guess: &InitialGuess,
) -> Result<GridFunction, SolverError> {
    let mut u = GridFunction {
        grid,
        values: vec![0.0; grid.len()],
    };
    if let InitialGuess::Supplied(v) = guess {
        if v.len() != grid.len() {
            return Err(SolverError::InitialGuess(format!(
                "{} values for {} nodes",
                v.len(),
                grid.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(SolverError::InitialGuess("non-finite value".into()));
        }
        u.values.copy_from_slice(v);
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_boundary(i, j) {
                let b = boundary(i, j);
                if !b.is_finite() {
                    return Err(SolverError::NonFiniteBoundary { i, j });
                }
                u.values[grid.index(i, j)] = b;
            }
        }
    }
    if *guess == InitialGuess::BoundaryBlend {
        coons_blend(&mut u);
    }
    Ok(u)
}

/// Solves `L_params[u] = 0` with `u = boundary` on the edge of `grid`.
pub fn solve_dirichlet<B>(
    params: OperatorParams,
    grid: GridSpec,
    boundary: B,
    opts: &NewtonOptions,
) -> Result<DirichletSolution, SolverError>
where
    B: Fn(Point2) -> f64,
{
    let data = |i: usize, j: usize| boundary(grid.point(i, j));
    let u = initial_iterate(grid, &data, &opts.initial_guess)?;
    newton(params, u, opts)
}

/// Like [`solve_dirichlet`], taking boundary data from the edge nodes of
/// `data`.
pub fn solve_dirichlet_on(
    params: OperatorParams,
    data: &GridFunction,
    opts: &NewtonOptions,
) -> Result<DirichletSolution, SolverError> {
    let lookup = |i: usize, j: usize| data.at(i, j);
    let u = initial_iterate(data.grid, &lookup, &opts.initial_guess)?;
    newton(params, u, opts)
}

fn newton(
    params: OperatorParams,
    mut u: GridFunction,
    opts: &NewtonOptions,
) -> Result<DirichletSolution, SolverError> {
    let g = u.grid;
    let m = g.interior_nx();
    let exec = opts.exec;
    let mut warnings = Vec::new();
    let ell = ellipticity(params);
    if !ell.elliptic {
        warnings.push(format!(
            "{params} is not elliptic (min sampled discriminant {:e}); Newton may fail",
            ell.sampled_min_discriminant
        ));
    }

    let mut res = interior_residuals(exec, params, &u);
    let mut history = vec![l2(&res)];
    let mut steps = Vec::new();
    let mut iterations = 0;
    loop {
        let report = summarize(&res, m);
        if report.max_abs <= opts.tolerance {
            return Ok(DirichletSolution {
                u,
                iterations,
                residual: report,
                residual_history: history,
                step_sizes: steps,
                warnings,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(SolverError::NonConvergence {
                iterations,
                residual: report.max_abs,
            });
        }
        iterations += 1;

        let jac = assemble_jacobian(exec, params, &u);
        let scale = (0..jac.dim())
            .map(|k| jac.get(k, k).abs())
            .fold(0.0, f64::max);
        let lu = jac
            .factor(opts.pivot_floor * scale.max(f64::MIN_POSITIVE))
            .map_err(|source| SolverError::Singular {
                iteration: iterations,
                source,
            })?;
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = lu.solve(&rhs).map_err(|source| SolverError::Singular {
            iteration: iterations,
            source,
        })?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(SolverError::Singular {
                iteration: iterations,
                source: BandError::Singular { column: 0 },
            });
        }

        let current = *history.last().unwrap();
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (k, d) in delta.iter().enumerate() {
                let idx = g.index(k % m + 1, k / m + 1);
                trial.values[idx] += t * d;
            }
            let trial_res = interior_residuals(exec, params, &trial);
            let norm = l2(&trial_res);
            if norm.is_finite() && norm < current {
                u = trial;
                res = trial_res;
                history.push(norm);
                steps.push(t);
                break;
            }
            t *= 0.5;
            if t < opts.min_step {
                return Err(SolverError::LineSearch {
                    iteration: iterations,
                    residual: report.max_abs,
                });
            }
        }
    }
}
