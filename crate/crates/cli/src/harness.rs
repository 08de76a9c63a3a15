//! Experiment drivers behind the CLI subcommands.
//!
//! Every driver computes its results first (sweep cells may run in parallel)
//! and then renders them into an [`Artifacts`] bundle: file names with their
//! bytes plus a human-readable summary. Rendering is single-threaded and
//! ordered, so repeated runs produce identical bytes.

use dynkin_core::regions::{band_gaps, DEFAULT_TOL};
use dynkin_core::{
    brute_force_value, classify, crr_game_price, crr_solve, make_discounted, seller_boundary, solve, solve_with,
    strategy_enumeration_value, BinomialParams, BoundaryFrame, DiscountedPayoffs, GameOptionSpec, GridParams,
    OptionKind, Retention, SolveOptions, StoppingRegion, ValueGrid, VolatilityInterval,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, fmt_opt, region_svg, Csv, Curve};

/// Named output files plus a text summary for stdout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

impl Artifacts {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Comparator {
    #[default]
    Robust,
    BlackScholes,
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("--threads: {e}")))
}

/// Runs `job` over every `(spot, n)` cell, spots outer, `n` ascending.
fn sweep<T, F>(cfg: &RunConfig, threads: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, usize) -> Result<T> + Sync,
{
    let cells: Vec<(f64, usize)> = cfg.spots.iter().flat_map(|&s| cfg.ns().into_iter().map(move |n| (s, n))).collect();
    pool(threads)?.install(|| cells.par_iter().map(|&(s, n)| job(s, n)).collect())
}

fn robust_value(
    cfg: &RunConfig,
    payoffs: &DiscountedPayoffs,
    iv: &VolatilityInterval,
    spot: f64,
    n: usize,
) -> Result<f64> {
    let grid = cfg.grid(n, spot)?;
    solve(&grid, payoffs, iv).map(|g| g.root()).map_err(|e| CliError::at("solve", e))
}

fn binomial_value(cfg: &RunConfig, payoffs: &DiscountedPayoffs, spot: f64, n: usize) -> Result<f64> {
    let bp = BinomialParams::new(cfg.sigma_high, cfg.grid(n, spot)?).map_err(|e| CliError::at("sigma_high", e))?;
    crr_game_price(&bp, payoffs).map(|v| v.value).map_err(|e| CliError::at("binomial", e))
}

// ---------------------------------------------------------------- price

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRow {
    pub spot: f64,
    pub n: usize,
    pub value: f64,
}

pub fn run_price(cfg: &RunConfig, threads: usize) -> Result<Vec<PriceRow>> {
    cfg.validate_order()?;
    let payoffs = cfg.payoffs()?;
    let iv = cfg.interval()?;
    sweep(cfg, threads, |spot, n| Ok(PriceRow { spot, n, value: robust_value(cfg, &payoffs, &iv, spot, n)? }))
}

pub fn grid_csv(grid: &ValueGrid, payoffs: &DiscountedPayoffs) -> Csv {
    let mut csv = Csv::new(["k", "t_k", "z", "price", "J", "f", "g", "continuation"]);
    for k in 0..=grid.n() {
        let t = grid.time(k);
        let values = grid.layer(k).expect("full grid");
        let cont = grid.continuation_layer(k);
        for (i, z) in grid.z_range(k).enumerate() {
            let x = grid.price(z);
            csv.push(vec![
                k.to_string(),
                fmt_f64(t),
                z.to_string(),
                fmt_f64(x),
                fmt_f64(values[i]),
                fmt_f64(payoffs.f(t, x)),
                fmt_f64(payoffs.g(t, x)),
                fmt_opt(cont.map(|c| c[i])),
            ]);
        }
    }
    csv
}

pub fn price_artifacts(cfg: &RunConfig, threads: usize) -> Result<Artifacts> {
    let rows = run_price(cfg, threads)?;
    let mut csv = Csv::new(["spot", "n", "value"]);
    let mut summary = format!("{:>10} {:>6} {:>12}\n", "S0", "n", "value");
    for r in &rows {
        csv.push(vec![fmt_f64(r.spot), r.n.to_string(), fmt_f64(r.value)]);
        summary.push_str(&format!("{:>10} {:>6} {:>12.4}\n", r.spot, r.n, r.value));
    }
    let mut files = vec![(cfg.outputs.csv.clone().unwrap_or_else(|| "price.csv".into()), csv.to_bytes()?)];

    if cfg.outputs.grid_export {
        let payoffs = cfg.payoffs()?;
        let iv = cfg.interval()?;
        let opts = SolveOptions { retention: Retention::Full, p_scan: None };
        let grids = sweep(cfg, threads, |spot, n| {
            let grid = solve_with(&cfg.grid(n, spot)?, &payoffs, &iv, opts).map_err(|e| CliError::at("solve", e))?;
            Ok((spot, n, grid_csv(&grid, &payoffs).to_bytes()?))
        })?;
        for (spot, n, bytes) in grids {
            files.push((format!("grid_s{}_n{n}.csv", fmt_f64(spot)), bytes));
        }
    }
    Ok(Artifacts { files, summary })
}

// ---------------------------------------------------------------- table

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub spots: Vec<f64>,
    pub ns: Vec<usize>,
    /// `robust[i][j]` is the value for `spots[i]`, `ns[j]`.
    pub robust: Vec<Vec<f64>>,
    /// Binomial single-volatility panel at `σ = sigma_high`.
    pub black_scholes: Option<Vec<Vec<f64>>>,
}

impl Table {
    pub fn cell(&self, spot: f64, n: usize) -> Option<f64> {
        let i = self.spots.iter().position(|&s| s == spot)?;
        let j = self.ns.iter().position(|&m| m == n)?;
        Some(self.robust[i][j])
    }

    pub fn bs_cell(&self, spot: f64, n: usize) -> Option<f64> {
        let i = self.spots.iter().position(|&s| s == spot)?;
        let j = self.ns.iter().position(|&m| m == n)?;
        Some(self.black_scholes.as_ref()?[i][j])
    }
}

pub fn run_table(cfg: &RunConfig, comparator: Comparator, threads: usize) -> Result<Table> {
    let ns = cfg.ns();
    if ns.is_empty() {
        return Err(CliError::Validation("n_list: empty".into()));
    }
    cfg.validate_order()?;
    let payoffs = cfg.payoffs()?;
    let iv = cfg.interval()?;
    let with_bs = comparator == Comparator::BlackScholes;
    let cells = sweep(cfg, threads, |spot, n| {
        let r = robust_value(cfg, &payoffs, &iv, spot, n)?;
        let b = if with_bs { Some(binomial_value(cfg, &payoffs, spot, n)?) } else { None };
        Ok((r, b))
    })?;
    let width = ns.len();
    let robust = cells.chunks(width).map(|row| row.iter().map(|c| c.0).collect()).collect();
    let black_scholes = with_bs.then(|| {
        cells.chunks(width).map(|row| row.iter().map(|c| c.1.expect("comparator computed")).collect()).collect()
    });
    Ok(Table { spots: cfg.spots.clone(), ns, robust, black_scholes })
}

fn render_panel(title: &str, spots: &[f64], ns: &[usize], values: &[Vec<f64>], out: &mut String) {
    out.push_str(title);
    out.push('\n');
    out.push_str(&format!("{:>8}", "S0"));
    for n in ns {
        out.push_str(&format!(" {:>10}", format!("n = {n}")));
    }
    out.push('\n');
    for (s, row) in spots.iter().zip(values) {
        out.push_str(&format!("{s:>8}"));
        for v in row {
            out.push_str(&format!(" {v:>10.4}"));
        }
        out.push('\n');
    }
}

pub fn table_artifacts(cfg: &RunConfig, comparator: Comparator, threads: usize) -> Result<Artifacts> {
    let table = run_table(cfg, comparator, threads)?;
    let mut header = vec!["panel".to_string(), "spot".to_string()];
    header.extend(table.ns.iter().map(|n| format!("n={n}")));
    let mut csv = Csv::new(header);
    let mut summary = String::new();
    let mut panels = vec![("robust", &table.robust)];
    if let Some(bs) = &table.black_scholes {
        panels.push(("black_scholes", bs));
    }
    for (name, values) in panels {
        for (s, row) in table.spots.iter().zip(values.iter()) {
            let mut rec = vec![name.to_string(), fmt_f64(*s)];
            rec.extend(row.iter().map(|v| fmt_f64(*v)));
            csv.push(rec);
        }
        let title = match name {
            "robust" => format!("Values under volatility uncertainty [{}, {}]", cfg.sigma_low, cfg.sigma_high),
            _ => format!("Binomial values, sigma = {}", cfg.sigma_high),
        };
        render_panel(&title, &table.spots, &table.ns, values, &mut summary);
    }
    let name = cfg.outputs.csv.clone().unwrap_or_else(|| "table.csv".into());
    Ok(Artifacts { files: vec![(name, csv.to_bytes()?)], summary })
}

// ---------------------------------------------------------------- converge

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub spot: f64,
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    /// `|V_{n_i} - V_{n_{i-1}}|`, one shorter than `values`.
    pub successive: Vec<f64>,
    /// `|V_{n_i} - V_{n_max}|` for every `n_i < n_max`.
    pub to_reference: Vec<f64>,
    /// Fitted order `α` in `|V_n - V_ref| ≈ C·n^{-α}`; `None` when fewer than
    /// two nonzero differences exist.
    pub alpha: Option<f64>,
    /// RMS residual of the log-log fit.
    pub residual: Option<f64>,
    /// `max - min` over all values.
    pub spread: f64,
}

impl ConvergenceReport {
    pub fn from_values(spot: f64, ns: Vec<usize>, values: Vec<f64>) -> Self {
        let successive = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let reference = *values.last().expect("nonempty");
        let to_reference: Vec<f64> = values[..values.len() - 1].iter().map(|v| (v - reference).abs()).collect();
        let pts: Vec<(f64, f64)> =
            ns.iter().zip(&to_reference).filter(|(_, d)| **d > 0.0).map(|(&n, &d)| ((n as f64).ln(), d.ln())).collect();
        let (alpha, residual) = if pts.len() >= 2 {
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = sxy / sxx;
            let icpt = my - slope * mx;
            let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
            (Some(-slope), Some((rss / m).sqrt()))
        } else {
            (None, None)
        };
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        Self { spot, ns, values, successive, to_reference, alpha, residual, spread: max - min }
    }

    /// True when the last `tail` differences to the reference strictly decrease.
    pub fn eventually_decreasing(&self, tail: usize) -> bool {
        let d = &self.to_reference;
        d.len() >= tail && d[d.len() - tail..].windows(2).all(|w| w[1] < w[0])
    }
}

pub fn run_converge(cfg: &RunConfig, threads: usize) -> Result<Vec<ConvergenceReport>> {
    let ns = cfg.ns();
    if ns.len() < 3 {
        return Err(CliError::Validation(format!("n_list: convergence needs >= 3 step counts, got {}", ns.len())));
    }
    let rows = run_price(cfg, threads)?;
    Ok(rows
        .chunks(ns.len())
        .map(|c| ConvergenceReport::from_values(c[0].spot, ns.clone(), c.iter().map(|r| r.value).collect()))
        .collect())
}

pub fn converge_artifacts(cfg: &RunConfig, threads: usize) -> Result<Artifacts> {
    let reports = run_converge(cfg, threads)?;
    let mut csv = Csv::new(["spot", "n", "value", "diff_prev", "diff_ref"]);
    let mut summary = String::new();
    for r in &reports {
        for (i, (&n, &v)) in r.ns.iter().zip(&r.values).enumerate() {
            let prev = if i == 0 { None } else { Some(r.successive[i - 1]) };
            csv.push(vec![
                fmt_f64(r.spot),
                n.to_string(),
                fmt_f64(v),
                fmt_opt(prev),
                fmt_opt(r.to_reference.get(i).copied()),
            ]);
        }
        let alpha = match (r.alpha, r.residual) {
            (Some(a), Some(res)) => format!("{a:.4} (rms residual {res:.4})"),
            _ => "undefined (fewer than two nonzero differences)".into(),
        };
        summary.push_str(&format!(
            "S0 = {}: spread {:.4}, fitted order {alpha}, reference n = {}\n",
            r.spot,
            r.spread,
            r.ns.last().unwrap()
        ));
    }
    let name = cfg.outputs.csv.clone().unwrap_or_else(|| "converge.csv".into());
    Ok(Artifacts { files: vec![(name, csv.to_bytes()?)], summary })
}

// ---------------------------------------------------------------- region

#[derive(Debug, Clone)]
pub struct RegionRun {
    pub robust_grid: ValueGrid,
    pub robust: StoppingRegion,
    pub bs_grid: ValueGrid,
    pub black_scholes: StoppingRegion,
}

impl RegionRun {
    /// Layers where both boundaries are defined, as `(t, robust b, binomial b)`.
    pub fn shared_boundary(&self) -> Vec<(f64, f64, f64)> {
        self.robust
            .boundary
            .iter()
            .zip(&self.black_scholes.boundary)
            .filter_map(|(&(t, r), &(_, b))| Some((t, r?, b?)))
            .collect()
    }
}

fn region_inputs(cfg: &RunConfig) -> Result<(GameOptionSpec, GridParams)> {
    let spec = cfg.spec()?.ok_or_else(|| CliError::Validation("kind: region needs a put or call".into()))?;
    if cfg.spots.len() != 1 {
        return Err(CliError::Validation(format!("spots: region needs exactly one spot, got {}", cfg.spots.len())));
    }
    let ns = cfg.ns();
    if ns.len() != 1 {
        return Err(CliError::Validation(format!("n_list: region needs exactly one n, got {}", ns.len())));
    }
    Ok((spec, cfg.grid(ns[0], cfg.spots[0])?))
}

pub fn run_region(cfg: &RunConfig, threads: usize) -> Result<RegionRun> {
    let (spec, grid) = region_inputs(cfg)?;
    cfg.validate_order()?;
    let payoffs = make_discounted(&spec);
    let iv = cfg.interval()?;
    let frame = BoundaryFrame { strike: spec.strike, rate: spec.rate };
    let full = SolveOptions { retention: Retention::Full, p_scan: None };
    let bp = BinomialParams::new(cfg.sigma_high, grid).map_err(|e| CliError::at("sigma_high", e))?;

    let (robust, bs) = pool(threads)?.install(|| {
        rayon::join(|| solve_with(&grid, &payoffs, &iv, full), || crr_solve(&bp, &payoffs, Retention::Full))
    });
    let robust_grid = robust.map_err(|e| CliError::at("solve", e))?;
    let bs_grid = bs.map_err(|e| CliError::at("binomial", e))?;
    let region = |g: &ValueGrid| -> Result<StoppingRegion> {
        let flags = classify(g, &payoffs, DEFAULT_TOL).map_err(|e| CliError::at("classify", e))?;
        Ok(seller_boundary(&flags, g, &frame))
    };
    Ok(RegionRun { robust: region(&robust_grid)?, black_scholes: region(&bs_grid)?, robust_grid, bs_grid })
}

/// Seller-stop nodes (`S` or `SB`) of layers `k < n`.
pub fn region_csv(region: &StoppingRegion, grid: &ValueGrid) -> Csv {
    let mut csv = Csv::new(["k", "t_k", "z", "price", "flag"]);
    for (k, layer) in region.flags.layers.iter().enumerate().take(grid.n()) {
        for (z, flag) in grid.z_range(k).zip(layer) {
            if flag.seller_stops() {
                csv.push(vec![
                    k.to_string(),
                    fmt_f64(grid.time(k)),
                    z.to_string(),
                    fmt_f64(grid.price(z)),
                    flag.code().to_string(),
                ]);
            }
        }
    }
    csv
}

pub fn boundary_csv(region: &StoppingRegion) -> Csv {
    let mut csv = Csv::new(["t_k", "b"]);
    for (t, b) in region.boundary_points() {
        csv.push(vec![fmt_f64(t), fmt_f64(b)]);
    }
    csv
}

pub fn region_artifacts(cfg: &RunConfig, threads: usize) -> Result<Artifacts> {
    let run = run_region(cfg, threads)?;
    let mut files = vec![
        ("region_robust.csv".to_string(), region_csv(&run.robust, &run.robust_grid).to_bytes()?),
        ("boundary_robust.csv".to_string(), boundary_csv(&run.robust).to_bytes()?),
        ("region_bs.csv".to_string(), region_csv(&run.black_scholes, &run.bs_grid).to_bytes()?),
        ("boundary_bs.csv".to_string(), boundary_csv(&run.black_scholes).to_bytes()?),
    ];
    if cfg.outputs.grid_export {
        let payoffs = cfg.payoffs()?;
        files.push(("grid_robust.csv".into(), grid_csv(&run.robust_grid, &payoffs).to_bytes()?));
        files.push(("grid_bs.csv".into(), grid_csv(&run.bs_grid, &payoffs).to_bytes()?));
    }
    let strike = cfg.strike.expect("validated");
    if let Some(svg) = &cfg.outputs.svg {
        let curves = [
            Curve {
                label: format!("uncertainty [{}, {}]", cfg.sigma_low, cfg.sigma_high),
                color: "blue",
                points: run.robust.boundary_points(),
            },
            Curve {
                label: format!("binomial sigma = {}", cfg.sigma_high),
                color: "green",
                points: run.black_scholes.boundary_points(),
            },
        ];
        files.push((svg.clone(), region_svg(&curves, strike, cfg.t0, cfg.maturity).into_bytes()));
    }

    let mut summary = String::new();
    for (name, r, g) in [("robust", &run.robust, &run.robust_grid), ("binomial", &run.black_scholes, &run.bs_grid)] {
        let gaps = band_gaps(r, g);
        summary.push_str(&format!(
            "{name:>9}: T1 = {}, T2 = {}, seller band gaps in {} layer(s)\n",
            r.t1.map_or("-".into(), |t| format!("{t:.4}")),
            r.t2.map_or("-".into(), |t| format!("{t:.4}")),
            gaps.len()
        ));
    }
    Ok(Artifacts { files, summary })
}

// ---------------------------------------------------------------- oracle check

/// One randomized oracle instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleInstance {
    pub spec: GameOptionSpec,
    pub interval: VolatilityInterval,
    pub grid: GridParams,
}

/// Instances drawn from `K ∈ [50,150]`, `δ ∈ [0.5,20]`, `r ∈ [0,0.1]`,
/// `σ̄ ∈ [0.1,0.6]`, `σ̲ ∈ [0,σ̄]`, `S0 ∈ [50,150]`, `n ∈ 1..=max_n`,
/// puts and calls alternating.
pub fn oracle_instances(count: usize, max_n: usize, seed: u64) -> Vec<OracleInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { OptionKind::Put } else { OptionKind::Call };
            let spec = GameOptionSpec::new(
                kind,
                rng.gen_range(50.0..=150.0),
                rng.gen_range(0.5..=20.0),
                1.0,
                rng.gen_range(0.0..=0.1),
            )
            .expect("ranges are valid");
            let hi = rng.gen_range(0.1..=0.6);
            let interval = VolatilityInterval::new(rng.gen_range(0.0..=hi), hi).expect("lo <= hi");
            let grid =
                GridParams::new(0.0, rng.gen_range(0.25..=2.0), rng.gen_range(1..=max_n), rng.gen_range(50.0..=150.0))
                    .expect("valid grid");
            OracleInstance { spec, interval, grid }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDiff {
    pub solver: f64,
    pub tree: f64,
    pub enumeration: Option<f64>,
}

impl OracleDiff {
    pub fn tree_error(&self) -> f64 {
        (self.solver - self.tree).abs()
    }

    pub fn enumeration_error(&self) -> Option<f64> {
        self.enumeration.map(|e| (self.solver - e).abs())
    }
}

pub fn check_instance(grid: &GridParams, payoffs: &DiscountedPayoffs, iv: &VolatilityInterval) -> Result<OracleDiff> {
    let solver = solve(grid, payoffs, iv).map_err(|e| CliError::at("solve", e))?.root();
    let tree = brute_force_value(grid, payoffs, iv, 101).map_err(|e| CliError::at("oracle", e))?.value;
    let enumeration = if grid.n <= 2 {
        Some(strategy_enumeration_value(grid, payoffs, iv, 2).map_err(|e| CliError::at("oracle", e))?.value)
    } else {
        None
    };
    Ok(OracleDiff { solver, tree, enumeration })
}

pub fn oracle_artifacts(cfg: &RunConfig, random: Option<usize>, seed: u64) -> Result<Artifacts> {
    let mut csv = Csv::new(["case", "spot", "n", "solver", "tree", "enumeration"]);
    let mut worst_tree: f64 = 0.0;
    let mut worst_enum: f64 = 0.0;
    let mut record = |case: String, g: &GridParams, d: OracleDiff, csv: &mut Csv| {
        worst_tree = worst_tree.max(d.tree_error());
        worst_enum = worst_enum.max(d.enumeration_error().unwrap_or(0.0));
        csv.push(vec![
            case,
            fmt_f64(g.spot),
            g.n.to_string(),
            fmt_f64(d.solver),
            fmt_f64(d.tree),
            fmt_opt(d.enumeration),
        ]);
    };

    cfg.validate_order()?;
    let payoffs = cfg.payoffs()?;
    let iv = cfg.interval()?;
    for &s in &cfg.spots {
        for n in cfg.ns() {
            let g = cfg.grid(n, s)?;
            let d = check_instance(&g, &payoffs, &iv)?;
            record("config".into(), &g, d, &mut csv);
        }
    }
    if let Some(count) = random {
        for (i, inst) in oracle_instances(count, 4, seed).into_iter().enumerate() {
            let d = check_instance(&inst.grid, &make_discounted(&inst.spec), &inst.interval)?;
            record(format!("random{i}"), &inst.grid, d, &mut csv);
        }
    }
    let summary = format!(
        "{} case(s): max |solver - tree| = {worst_tree:e}, max |solver - enumeration| = {worst_enum:e}\n",
        csv.rows.len()
    );
    Ok(Artifacts { files: vec![("oracle.csv".into(), csv.to_bytes()?)], summary })
}
