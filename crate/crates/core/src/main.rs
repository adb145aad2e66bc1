//! Command-line entry point: fit the quantile map, price contracts, build
//! convergence tables, simulate paths, calibrate speeds, and compare against
//! the 3/2 benchmark. Results go to stdout (JSON or CSV), diagnostics to
//! stderr; reruns with identical inputs produce byte-identical output.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use vixmodel::calibrate::{calibrate_32, calibrate_k, CalibrationProblem};
use vixmodel::diffusion::{simulate_path, DiffusionParams};
use vixmodel::empirical_map::{ecdf, fit_quantile_polynomial, h_eval, h_inverse, QuantileMap};
use vixmodel::error::{Error, Result};
use vixmodel::market_data::{load_observations, load_vix_csv};
use vixmodel::pricer::{
    price_call, price_futures, price_put, project_call, project_futures, project_put,
    truncation_report, PricingParams,
};
use vixmodel::three_halves::{price_call_32, ThreeHalvesParams};

#[derive(Parser)]
#[command(
    name = "vixmodel",
    version,
    about = "Volatility-index modeling toolkit: empirical quantile map, spectral pricing, calibration, 3/2 benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Instrument {
    Futures,
    Call,
    Put,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a polynomial quantile map from a daily index-level CSV
    Fit {
        /// Input CSV of daily closes: date,level (level as decimal or index points)
        #[arg(long)]
        data: PathBuf,
        /// Polynomial degree of the fitted quantile function (dimensionless)
        #[arg(long, default_value_t = 30)]
        degree: usize,
        /// Output path for the fitted map JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Price one futures, call, or put contract
    Price {
        /// Fitted quantile map JSON
        #[arg(long, visible_alias = "model")]
        model_file: PathBuf,
        /// Contract type
        #[arg(long, value_enum)]
        instrument: Instrument,
        /// Current index level, decimal units (e.g. 0.20 for 20 points)
        #[arg(long)]
        vix: f64,
        /// Mean-reversion speed k (1/years)
        #[arg(long)]
        k: f64,
        /// Risk-free rate (1/years, continuous compounding)
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        /// Maturity T (ACT/365 decimal years)
        #[arg(long = "T")]
        maturity: f64,
        /// Valuation time t (years, 0 ≤ t ≤ T)
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Strike (decimal units; required for call/put)
        #[arg(long = "K")]
        strike: Option<f64>,
        /// Series truncation: number of coefficients (orders 0..terms−1)
        #[arg(long, default_value_t = 31)]
        terms: usize,
    },
    /// Emit futures and call convergence tables across truncation orders (CSV)
    Tables {
        /// Fitted quantile map JSON
        #[arg(long, visible_alias = "model")]
        model_file: PathBuf,
        /// Mean-reversion speed k (1/years)
        #[arg(long)]
        k: f64,
        /// Risk-free rate (1/years)
        #[arg(long)]
        r: f64,
        /// Valuation time t (years)
        #[arg(long)]
        t: f64,
        /// Maturity T (years)
        #[arg(long = "T")]
        maturity: f64,
        /// Strike for the call table (decimal units)
        #[arg(long = "K")]
        strike: f64,
        /// Index levels for table rows (decimal units, comma-separated)
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.3, 0.5, 0.7])]
        levels: Vec<f64>,
        /// Truncation column counts (comma-separated)
        #[arg(long, value_delimiter = ',', default_values_t = vec![6, 11, 21, 31])]
        terms: Vec<usize>,
    },
    /// Simulate one factor path (CSV: time, x and, with a map, the mapped level)
    Simulate {
        /// Mean-reversion speed k (1/years)
        #[arg(long)]
        k: f64,
        /// Initial state x0 in (−1, 1) (dimensionless)
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Horizon (years)
        #[arg(long)]
        years: f64,
        /// Euler step (years); default is one tenth of a trading day
        #[arg(long, default_value_t = 1.0 / 2520.0)]
        dt: f64,
        /// RNG seed (paths are deterministic per seed)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional fitted map JSON; adds a mapped-level column
        #[arg(long, visible_alias = "model")]
        model_file: Option<PathBuf>,
    },
    /// Calibrate the mean-reversion speed to observed call prices
    Calibrate {
        /// Fitted quantile map JSON
        #[arg(long, visible_alias = "model")]
        model_file: PathBuf,
        /// Observations CSV: t,vix,call_price,tau (years/decimal units)
        #[arg(long)]
        observations: PathBuf,
        /// Strike shared by the observations (decimal units)
        #[arg(long = "K")]
        strike: f64,
        /// Risk-free rate (1/years)
        #[arg(long)]
        r: f64,
        /// Lower speed bound (1/years)
        #[arg(long, default_value_t = 1e-3)]
        k_lo: f64,
        /// Upper speed bound (1/years)
        #[arg(long, default_value_t = 50.0)]
        k_hi: f64,
    },
    /// Fit the 3/2 benchmark drift pair (alpha, beta) at fixed k32
    Calibrate32 {
        /// Observations CSV: t,vix,call_price,tau (years/decimal units)
        #[arg(long)]
        observations: PathBuf,
        /// 3/2 volatility-of-volatility coefficient (fixed during the fit)
        #[arg(long)]
        k32: f64,
        /// Strike shared by the observations (decimal units)
        #[arg(long = "K")]
        strike: f64,
        /// Risk-free rate (1/years)
        #[arg(long)]
        r: f64,
    },
    /// Compare empirical-model and 3/2 call prices across index levels (CSV)
    Compare32 {
        /// Fitted quantile map JSON (empirical-model side)
        #[arg(long, visible_alias = "model")]
        model_file: PathBuf,
        /// Empirical-model mean-reversion speed k (1/years)
        #[arg(long)]
        k: f64,
        /// 3/2 drift level alpha (1/years)
        #[arg(long)]
        alpha: f64,
        /// 3/2 quadratic drift beta (must be negative)
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// 3/2 volatility-of-volatility coefficient
        #[arg(long)]
        k32: f64,
        /// Strike (decimal units)
        #[arg(long = "K")]
        strike: f64,
        /// Risk-free rate (1/years)
        #[arg(long)]
        r: f64,
        /// Maturity T (years)
        #[arg(long = "T")]
        maturity: f64,
        /// Valuation time t (years)
        #[arg(long)]
        t: f64,
        /// Index levels to price (decimal units, comma-separated)
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])]
        levels: Vec<f64>,
        /// Quadrature points for the 3/2 integral (≥ 64)
        #[arg(long, default_value_t = 256)]
        quad_points: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Fit { data, degree, out } => cmd_fit(&data, degree, &out),
        Command::Price {
            model_file,
            instrument,
            vix,
            k,
            r,
            maturity,
            t,
            strike,
            terms,
        } => cmd_price(&model_file, instrument, vix, k, r, maturity, t, strike, terms),
        Command::Tables {
            model_file,
            k,
            r,
            t,
            maturity,
            strike,
            levels,
            terms,
        } => cmd_tables(&model_file, k, r, t, maturity, strike, &levels, &terms),
        Command::Simulate {
            k,
            x0,
            years,
            dt,
            seed,
            model_file,
        } => cmd_simulate(k, x0, years, dt, seed, model_file.as_deref()),
        Command::Calibrate {
            model_file,
            observations,
            strike,
            r,
            k_lo,
            k_hi,
        } => cmd_calibrate(&model_file, &observations, strike, r, k_lo, k_hi),
        Command::Calibrate32 {
            observations,
            k32,
            strike,
            r,
        } => cmd_calibrate32(&observations, k32, strike, r),
        Command::Compare32 {
            model_file,
            k,
            alpha,
            beta,
            k32,
            strike,
            r,
            maturity,
            t,
            levels,
            quad_points,
        } => cmd_compare32(
            &model_file,
            k,
            alpha,
            beta,
            k32,
            strike,
            r,
            maturity,
            t,
            &levels,
            quad_points,
        ),
    }
}

fn cmd_fit(data: &std::path::Path, degree: usize, out: &std::path::Path) -> Result<i32> {
    let series = load_vix_csv(data)?;
    let cdf = ecdf(&series)?;
    let map = fit_quantile_polynomial(&cdf, degree)?;
    // diagnostics: worst adjacent-grid decrease of the fitted curve
    let mut worst = 0.0f64;
    let mut prev = h_eval(&map, 0.0)?;
    let grid = vixmodel::empirical_map::FIT_GRID_POINTS;
    for i in 1..grid {
        let v = h_eval(&map, i as f64 / (grid - 1) as f64)?;
        worst = worst.min(v - prev);
        prev = v;
    }
    eprintln!(
        "fit: {} samples, degree {}, range [{:.5}, {:.5}], worst grid decrease {:.3e}",
        series.len(),
        map.degree,
        map.h_min,
        map.h_max,
        worst
    );
    map.save_json(out)?;
    let summary = serde_json::json!({
        "out": out.display().to_string(),
        "degree": map.degree,
        "coefficients": map.coeffs.len(),
        "h_min": map.h_min,
        "h_max": map.h_max,
        "source_hash": map.source_hash,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_price(
    model_file: &std::path::Path,
    instrument: Instrument,
    vix: f64,
    k: f64,
    r: f64,
    maturity: f64,
    t: f64,
    strike: Option<f64>,
    terms: usize,
) -> Result<i32> {
    let map = QuantileMap::load_json(model_file)?;
    let x = h_inverse(&map, vix)?;
    let params = PricingParams::new(k, r, maturity, strike)?;
    let price = match instrument {
        Instrument::Futures => {
            let coeffs = project_futures(&map, terms)?;
            price_futures(t, x, &coeffs, &params)?
        }
        Instrument::Call => {
            let strike =
                strike.ok_or_else(|| Error::Invalid("--K is required for calls".into()))?;
            let coeffs = project_call(&map, strike, terms)?;
            price_call(t, x, &coeffs, &params)?
        }
        Instrument::Put => {
            let strike =
                strike.ok_or_else(|| Error::Invalid("--K is required for puts".into()))?;
            let coeffs = project_put(&map, strike, terms)?;
            price_put(t, x, &coeffs, &params)?
        }
    };
    let out = serde_json::json!({ "price": price, "x": x, "terms": terms });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_tables(
    model_file: &std::path::Path,
    k: f64,
    r: f64,
    t: f64,
    maturity: f64,
    strike: f64,
    levels: &[f64],
    terms: &[usize],
) -> Result<i32> {
    let map = QuantileMap::load_json(model_file)?;
    let params = PricingParams::new(k, r, maturity, Some(strike))?;
    let report = truncation_report(&map, levels, terms, t, &params)?;
    let mut header = String::from("instrument,vix");
    for n in terms {
        header.push_str(&format!(",terms_{n}"));
    }
    println!("{header}");
    for (instrument, matrix) in [("futures", &report.futures), ("call", &report.calls)] {
        for (row, vix) in matrix.iter().zip(&report.vix_levels) {
            let mut line = format!("{instrument},{vix}");
            for price in row {
                line.push_str(&format!(",{price:.4}"));
            }
            println!("{line}");
        }
    }
    Ok(0)
}

fn cmd_simulate(
    k: f64,
    x0: f64,
    years: f64,
    dt: f64,
    seed: u64,
    model_file: Option<&std::path::Path>,
) -> Result<i32> {
    let params = DiffusionParams::new(k, x0)?;
    let path = simulate_path(&params, years, dt, seed)?;
    let map = model_file.map(QuantileMap::load_json).transpose()?;
    match &map {
        Some(map) => {
            println!("time,x,vix");
            for (t, x) in path.times.iter().zip(&path.states) {
                let vix = h_eval(map, (x + 1.0) / 2.0)?;
                println!("{t},{x},{vix}");
            }
        }
        None => {
            println!("time,x");
            for (t, x) in path.times.iter().zip(&path.states) {
                println!("{t},{x}");
            }
        }
    }
    Ok(0)
}

fn cmd_calibrate(
    model_file: &std::path::Path,
    observations: &std::path::Path,
    strike: f64,
    r: f64,
    k_lo: f64,
    k_hi: f64,
) -> Result<i32> {
    let map = QuantileMap::load_json(model_file)?;
    let obs = load_observations(observations)?;
    let problem = CalibrationProblem::new(&obs, &map, r, strike, (k_lo, k_hi))?;
    let report = calibrate_k(&problem)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("json")
    );
    if report.at_bound {
        eprintln!(
            "warning: calibrated speed {:.6} sits on a search bound [{k_lo}, {k_hi}]",
            report.k_hat
        );
        return Ok(4);
    }
    Ok(0)
}

fn cmd_calibrate32(
    observations: &std::path::Path,
    k32: f64,
    strike: f64,
    r: f64,
) -> Result<i32> {
    let obs = load_observations(observations)?;
    let fit = calibrate_32(&obs, k32, strike, r)?;
    println!("{}", serde_json::to_string_pretty(&fit).expect("json"));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare32(
    model_file: &std::path::Path,
    k: f64,
    alpha: f64,
    beta: f64,
    k32: f64,
    strike: f64,
    r: f64,
    maturity: f64,
    t: f64,
    levels: &[f64],
    quad_points: usize,
) -> Result<i32> {
    let map = QuantileMap::load_json(model_file)?;
    let params = PricingParams::new(k, r, maturity, Some(strike))?;
    let coeffs = project_call(&map, strike, vixmodel::pricer::DEFAULT_TERMS)?;
    let tparams = ThreeHalvesParams::new(alpha, beta, k32, r, strike, maturity, t)?;
    println!("vix,empirical_call,three_halves_call");
    for &v in levels {
        let empirical = if v >= map.h_min && v <= map.h_max {
            let x = h_inverse(&map, v)?;
            format!("{:.6}", price_call(t, x, &coeffs, &params)?)
        } else {
            // outside the fitted support the empirical model has no price
            String::new()
        };
        let bench = price_call_32(v, &tparams, quad_points)?;
        println!("{v},{empirical},{bench:.6}");
    }
    Ok(0)
}
