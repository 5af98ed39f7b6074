//! Subcommand definitions and their implementations. Each command
//! validates its parameters (exit 2 on failure), computes through
//! qiopa-core (exit 3 on failure), and emits one artifact.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qiopa_core::channel::{
    lossy_density_from_pure, lossy_density_from_pure_single, photon_distribution, LossChannel,
};
use qiopa_core::decoherence::css_lossy_density;
use qiopa_core::fock::{
    build_collinear_macrostate, build_hv_macrostate, build_single_mode_macrostate, tensor_product,
    CollinearSeed, CssParams, CssSign, CutoffSpec, GainParams, HvSeed,
};
use qiopa_core::metrology::{
    css_bures_analytic, macroqubit_bures, macroqubit_mean_photons, ofilter_success_probability,
    MacroBasis, OFilterConfig,
};
use qiopa_core::wigner::{
    collinear_slice, negativity_at_origin, noncollinear_slice, quadrature_uncertainty, w_collinear,
    w_css, w_noncollinear, w_single_mode, WitnessFamily,
};
use qiopa_core::C64;

use crate::artifact::{write_output, Artifact, Axis, Cell, ParamValue};
use crate::sweep::{IntArg, NumArg, SweepSpec};

/// Reasons a run stops, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// The request itself is invalid (exit 2).
    Config(String),
    /// The computation failed (exit 3).
    Numeric(String),
    /// The output could not be written (exit 3).
    Io(String),
}

fn config_err(e: qiopa_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl From<qiopa_core::Error> for CliError {
    /// Rejected inputs are configuration mistakes even when the library
    /// detects them mid-computation; everything else is numerical.
    fn from(e: qiopa_core::Error) -> Self {
        match e {
            qiopa_core::Error::Domain(_) | qiopa_core::Error::Unsupported(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Deterministic CSV/JSON data behind amplified-macrostate and
/// coherent-superposition figures.
#[derive(Parser, Debug)]
#[command(name = "qiopa", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a Wigner function on a rectangular phase-space grid.
    Wigner(WignerArgs),
    /// Sweep the origin/trough negativity witness over loss.
    Negativity(NegativityArgs),
    /// Bures-distance decoherence curves versus mean lost particles.
    Bures(BuresArgs),
    /// Photon-number distribution of a lossy state.
    Distribution(DistributionArgs),
    /// Quadrature uncertainties of the lossy single-mode state.
    Uncertainty(UncertaintyArgs),
    /// Orthogonality-filter success probability versus threshold.
    Ofilter(OfilterArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Single,
    Collinear,
    Noncollinear,
    Css,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Single => "single",
            Family::Collinear => "collinear",
            Family::Noncollinear => "noncollinear",
            Family::Css => "css",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl SignArg {
    fn to_core(self) -> CssSign {
        match self {
            SignArg::Plus => CssSign::Plus,
            SignArg::Minus => CssSign::Minus,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SignArg::Plus => "plus",
            SignArg::Minus => "minus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuresFam {
    Css,
    Equatorial,
    Hv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistFamily {
    Single,
    Collinear,
    Hv,
    Css,
}

impl DistFamily {
    fn name(self) -> &'static str {
        match self {
            DistFamily::Single => "single",
            DistFamily::Collinear => "collinear",
            DistFamily::Hv => "hv",
            DistFamily::Css => "css",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Dx,
    Dy,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    /// State family to sample.
    #[arg(long, value_enum)]
    pub family: Family,
    /// Seed photon number (single family).
    #[arg(long, default_value_t = 1)]
    pub seed: usize,
    /// Seed photons in the first pair mode (collinear, noncollinear).
    #[arg(long, default_value_t = 1)]
    pub seed_n: usize,
    /// Seed photons in the second pair mode (collinear, noncollinear).
    #[arg(long, default_value_t = 0)]
    pub seed_m: usize,
    /// Amplifier gain (amplified families).
    #[arg(long)]
    pub g: Option<f64>,
    /// Loss reflectivity.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: f64,
    /// Coherent amplitude (css family).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Superposition half-angle (css), injection phase (noncollinear),
    /// or planar-section angle (collinear).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
    /// Superposition sign (css family).
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Grid for both quadrature axes, start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: SweepSpec,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct NegativityArgs {
    /// State family to witness.
    #[arg(long, value_enum)]
    pub family: Family,
    /// Amplifier gain (amplified families).
    #[arg(long)]
    pub g: Option<f64>,
    /// Coherent amplitude (css family).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Superposition half-angle (css family).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
    /// Superposition sign (css family).
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Loss reflectivity, one value or a sweep start:stop:step.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: NumArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BuresArgs {
    /// Distance-curve family.
    #[arg(long, value_enum)]
    pub family: BuresFam,
    /// Amplifier gain (equatorial, hv).
    #[arg(long)]
    pub g: Option<f64>,
    /// Coherent amplitude (css).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Superposition half-angle (css).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
    /// Conclusive-filter threshold (equatorial, hv).
    #[arg(long)]
    pub k: Option<usize>,
    /// Mean lost particles, one value or a sweep start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub x: NumArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DistributionArgs {
    /// State family; collinear uses the plus seed, hv the H seed.
    #[arg(long, value_enum)]
    pub family: DistFamily,
    /// Seed photon number (single family).
    #[arg(long, default_value_t = 1)]
    pub seed: u32,
    /// Amplifier gain (amplified families).
    #[arg(long)]
    pub g: Option<f64>,
    /// Coherent amplitude (css family).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Superposition half-angle (css family).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
    /// Superposition sign (css family).
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Loss reflectivity.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct UncertaintyArgs {
    /// Seed photon number (0 or 1).
    #[arg(long, default_value_t = 1)]
    pub seed: usize,
    /// Amplifier gain.
    #[arg(long)]
    pub g: f64,
    /// Loss reflectivity, one value or a sweep start:stop:step.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: NumArg,
    /// Which quantity to tabulate.
    #[arg(long, value_enum, default_value_t = Quantity::Product)]
    pub quantity: Quantity,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OfilterArgs {
    /// Amplifier gain.
    #[arg(long)]
    pub g: f64,
    /// Loss reflectivity applied before filtering.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: f64,
    /// Filter threshold, one value or a range start:stop:step.
    #[arg(long)]
    pub k: IntArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Runs one parsed invocation end to end.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let (artifact, output) = match cli.command {
        Command::Wigner(args) => (wigner(&args)?, args.output),
        Command::Negativity(args) => (negativity(&args)?, args.output),
        Command::Bures(args) => (bures(&args)?, args.output),
        Command::Distribution(args) => (distribution(&args)?, args.output),
        Command::Uncertainty(args) => (uncertainty(&args)?, args.output),
        Command::Ofilter(args) => (ofilter(&args)?, args.output),
    };
    let content = match output.format {
        Format::Csv => artifact.to_csv(),
        Format::Json => artifact.to_json(),
    };
    write_output(output.out.as_deref(), &content)
        .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn require_gain(g: Option<f64>) -> Result<GainParams, CliError> {
    let g = g.ok_or_else(|| CliError::Config("this family needs --g".into()))?;
    GainParams::new(g).map_err(config_err)
}

fn require_css(alpha: Option<f64>, phi: f64, sign: SignArg) -> Result<CssParams, CliError> {
    let alpha = alpha.ok_or_else(|| CliError::Config("the css family needs --alpha".into()))?;
    let params = CssParams {
        alpha,
        phi,
        sign: sign.to_core(),
    };
    params.norm_sq_factor().map_err(config_err)?;
    Ok(params)
}

fn channel(r: f64) -> Result<LossChannel, CliError> {
    LossChannel::new(r).map_err(config_err)
}

/// Snaps sweep points onto [0, 1] so an endpoint reached with
/// floating-point overshoot still maps to a valid reflectivity.
fn reflectivity_points(arg: NumArg) -> Result<Vec<f64>, CliError> {
    arg.points()
        .into_iter()
        .map(|p| {
            if !(-1e-9..=1.0 + 1e-9).contains(&p) {
                return Err(CliError::Config(format!(
                    "reflectivity {p} is outside [0, 1]"
                )));
            }
            Ok(p.clamp(0.0, 1.0))
        })
        .collect()
}

fn sweep_axis(name: &str, points: &[f64]) -> Axis {
    Axis {
        name: name.into(),
        start: *points.first().unwrap_or(&0.0),
        stop: *points.last().unwrap_or(&0.0),
        count: points.len(),
    }
}

fn wigner(args: &WignerArgs) -> Result<Artifact, CliError> {
    let ch = channel(args.r)?;
    let xs = args.grid.points();
    let ys = xs.clone();
    let mut params: Vec<(&'static str, ParamValue)> =
        vec![("family", ParamValue::Text(args.family.name().into()))];
    let mut columns = vec!["X", "Y", "W"];

    enum Eval {
        Single(usize, GainParams),
        Collinear(usize, usize, GainParams, f64),
        Noncollinear(usize, usize, GainParams, f64),
        Css(CssParams),
    }

    let eval = match args.family {
        Family::Single => {
            let gain = require_gain(args.g)?;
            if args.r > 0.0 && args.seed > 2 {
                return Err(CliError::Config(
                    "lossy single-mode closed form covers --seed 0..=2".into(),
                ));
            }
            params.push(("seed", ParamValue::Int(args.seed as u64)));
            params.push(("g", ParamValue::Num(gain.g)));
            Eval::Single(args.seed, gain)
        }
        Family::Collinear => {
            let gain = require_gain(args.g)?;
            let ok = matches!((args.seed_n, args.seed_m), (0, 0) | (1, 0) | (0, 1));
            if args.r > 0.0 && !ok {
                return Err(CliError::Config(
                    "lossy collinear closed form covers seed pairs (0,0), (1,0), (0,1)".into(),
                ));
            }
            columns = vec!["X1", "Y1", "X2", "Y2", "W"];
            params.push(("seed_n", ParamValue::Int(args.seed_n as u64)));
            params.push(("seed_m", ParamValue::Int(args.seed_m as u64)));
            params.push(("g", ParamValue::Num(gain.g)));
            params.push(("phi", ParamValue::Num(args.phi)));
            Eval::Collinear(args.seed_n, args.seed_m, gain, args.phi)
        }
        Family::Noncollinear => {
            let gain = require_gain(args.g)?;
            let ok = matches!((args.seed_n, args.seed_m), (0, 0) | (1, 0));
            if args.r > 0.0 && !ok {
                return Err(CliError::Config(
                    "lossy non-collinear closed form covers seed pairs (0,0) and (1,0)".into(),
                ));
            }
            params.push(("seed_n", ParamValue::Int(args.seed_n as u64)));
            params.push(("seed_m", ParamValue::Int(args.seed_m as u64)));
            params.push(("g", ParamValue::Num(gain.g)));
            params.push(("phi", ParamValue::Num(args.phi)));
            Eval::Noncollinear(args.seed_n, args.seed_m, gain, args.phi)
        }
        Family::Css => {
            let css = require_css(args.alpha, args.phi, args.sign)?;
            params.push(("alpha", ParamValue::Num(css.alpha)));
            params.push(("phi", ParamValue::Num(css.phi)));
            params.push(("sign", ParamValue::Text(args.sign.name().into())));
            Eval::Css(css)
        }
    };
    params.push(("R", ParamValue::Num(ch.r)));
    params.push(("grid", ParamValue::Text(args.grid.to_string())));

    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let (head, w) = match &eval {
                Eval::Single(seed, gain) => {
                    let w = w_single_mode(*seed, *gain, ch, C64::new(x, y))?;
                    (vec![Cell::Num(x), Cell::Num(y)], w)
                }
                Eval::Collinear(n, m, gain, phi) => {
                    let (alpha, beta) = collinear_slice(x, y, *phi);
                    let w = w_collinear(*n, *m, *gain, ch, alpha, beta)?;
                    (
                        vec![
                            Cell::Num(alpha.re),
                            Cell::Num(alpha.im),
                            Cell::Num(beta.re),
                            Cell::Num(beta.im),
                        ],
                        w,
                    )
                }
                Eval::Noncollinear(n, m, gain, phi) => {
                    let pt = noncollinear_slice(x, y, *phi);
                    let w = w_noncollinear(*n, *m, *gain, *phi, ch, pt)?;
                    (vec![Cell::Num(x), Cell::Num(y)], w)
                }
                Eval::Css(css) => {
                    let w = w_css(*css, ch, x, y)?;
                    (vec![Cell::Num(x), Cell::Num(y)], w)
                }
            };
            let mut row = head;
            row.push(Cell::Num(w));
            rows.push(row);
            values.push(w);
        }
    }

    Ok(Artifact {
        command: "wigner",
        params,
        grid: vec![sweep_axis("X", &xs), sweep_axis("Y", &ys)],
        columns,
        rows,
        values,
        truncation_deficit: 0.0,
    })
}

fn negativity(args: &NegativityArgs) -> Result<Artifact, CliError> {
    let mut params: Vec<(&'static str, ParamValue)> =
        vec![("family", ParamValue::Text(args.family.name().into()))];
    let witness = match args.family {
        Family::Single => WitnessFamily::SingleMode(require_gain(args.g)?),
        Family::Collinear => WitnessFamily::Collinear(require_gain(args.g)?),
        Family::Noncollinear => WitnessFamily::Noncollinear(require_gain(args.g)?),
        Family::Css => WitnessFamily::Css(require_css(args.alpha, args.phi, args.sign)?),
    };
    match witness {
        WitnessFamily::SingleMode(gain)
        | WitnessFamily::Collinear(gain)
        | WitnessFamily::Noncollinear(gain) => {
            params.push(("g", ParamValue::Num(gain.g)));
        }
        WitnessFamily::Css(css) => {
            params.push(("alpha", ParamValue::Num(css.alpha)));
            params.push(("phi", ParamValue::Num(css.phi)));
            params.push(("sign", ParamValue::Text(args.sign.name().into())));
        }
    }
    params.push(("R", ParamValue::Text(args.r.to_string())));

    let rs = reflectivity_points(args.r)?;
    let mut rows = Vec::with_capacity(rs.len());
    let mut values = Vec::with_capacity(rs.len());
    for &r in &rs {
        let w = negativity_at_origin(witness, channel(r)?)?;
        rows.push(vec![Cell::Num(r), Cell::Num(w)]);
        values.push(w);
    }

    Ok(Artifact {
        command: "negativity",
        params,
        grid: vec![sweep_axis("R", &rs)],
        columns: vec!["R", "value"],
        rows,
        values,
        truncation_deficit: 0.0,
    })
}

fn bures(args: &BuresArgs) -> Result<Artifact, CliError> {
    let xs = args.x.points();
    let mut params: Vec<(&'static str, ParamValue)> = Vec::new();
    let mut rows = Vec::with_capacity(xs.len());
    let mut values = Vec::with_capacity(xs.len());
    let mut deficit: f64 = 0.0;

    match args.family {
        BuresFam::Css => {
            if args.k.is_some() {
                return Err(CliError::Config(
                    "--k applies to the equatorial and hv families".into(),
                ));
            }
            let css = require_css(args.alpha, args.phi, SignArg::Plus)?;
            let base = css.alpha * css.alpha * css.phi.sin() * css.phi.sin();
            if base <= 0.0 {
                return Err(CliError::Config(
                    "the css distance curve needs |alpha|^2 sin^2(phi) > 0".into(),
                ));
            }
            params.push(("family", ParamValue::Text("css".into())));
            params.push(("alpha", ParamValue::Num(css.alpha)));
            params.push(("phi", ParamValue::Num(css.phi)));
            for &x in &xs {
                let r = x / base;
                if !(-1e-9..=1.0 + 1e-9).contains(&r) {
                    return Err(CliError::Config(format!(
                        "x = {x} needs a reflectivity outside [0, 1] (max x = {base})"
                    )));
                }
                let d = css_bures_analytic(css.alpha, css.phi, channel(r.clamp(0.0, 1.0))?)
                    .superpositions;
                rows.push(vec![Cell::Num(x), Cell::Num(d)]);
                values.push(d);
            }
        }
        BuresFam::Equatorial | BuresFam::Hv => {
            let gain = require_gain(args.g)?;
            let (basis, name) = match args.family {
                BuresFam::Equatorial => (MacroBasis::Equatorial, "equatorial"),
                _ => (MacroBasis::Hv, "hv"),
            };
            let mean = macroqubit_mean_photons(gain);
            params.push(("family", ParamValue::Text(name.into())));
            params.push(("g", ParamValue::Num(gain.g)));
            if let Some(k) = args.k {
                params.push(("k", ParamValue::Int(k as u64)));
            }
            let filter = args.k.map(|k| OFilterConfig { k });
            for &x in &xs {
                let r = x / mean;
                if !(-1e-9..=1.0 + 1e-9).contains(&r) {
                    return Err(CliError::Config(format!(
                        "x = {x} needs a reflectivity outside [0, 1] (max x = {mean})"
                    )));
                }
                let point = macroqubit_bures(gain, channel(r.clamp(0.0, 1.0))?, basis, filter)?;
                deficit = deficit.max(point.truncation_deficit);
                rows.push(vec![Cell::Num(point.x), Cell::Num(point.d)]);
                values.push(point.d);
            }
        }
    }
    params.push(("x", ParamValue::Text(args.x.to_string())));

    Ok(Artifact {
        command: "bures",
        params,
        grid: vec![sweep_axis("x", &xs)],
        columns: vec!["x", "D"],
        rows,
        values,
        truncation_deficit: deficit,
    })
}

const DISTRIBUTION_DEFICIT: f64 = 1e-8;

fn distribution(args: &DistributionArgs) -> Result<Artifact, CliError> {
    let ch = channel(args.r)?;
    let cutoff = CutoffSpec::Auto {
        deficit: DISTRIBUTION_DEFICIT,
    };
    let mut params: Vec<(&'static str, ParamValue)> =
        vec![("family", ParamValue::Text(args.family.name().into()))];

    let rho = match args.family {
        DistFamily::Single => {
            let gain = require_gain(args.g)?;
            params.push(("seed", ParamValue::Int(args.seed as u64)));
            params.push(("g", ParamValue::Num(gain.g)));
            let psi = build_single_mode_macrostate(gain, args.seed, cutoff).map_err(config_err)?;
            lossy_density_from_pure_single(&psi, ch, None)?
        }
        DistFamily::Css => {
            let css = require_css(args.alpha, args.phi, args.sign)?;
            params.push(("alpha", ParamValue::Num(css.alpha)));
            params.push(("phi", ParamValue::Num(css.phi)));
            params.push(("sign", ParamValue::Text(args.sign.name().into())));
            css_lossy_density(css, ch, cutoff)?.rho
        }
        DistFamily::Collinear => {
            let gain = require_gain(args.g)?;
            params.push(("g", ParamValue::Num(gain.g)));
            let psi = build_collinear_macrostate(gain, CollinearSeed::Plus, cutoff)
                .map_err(config_err)?;
            lossy_density_from_pure(&psi, ch, ch, None)?
        }
        DistFamily::Hv => {
            let gain = require_gain(args.g)?;
            params.push(("g", ParamValue::Num(gain.g)));
            let psi = build_hv_macrostate(gain, HvSeed::H, cutoff).map_err(config_err)?;
            lossy_density_from_pure(&psi, ch, ch, None)?
        }
    };
    params.push(("R", ParamValue::Num(ch.r)));

    let (da, db) = rho.dims();
    params.push(("dim_a", ParamValue::Int(da as u64)));
    params.push(("dim_b", ParamValue::Int(db as u64)));
    let probs = photon_distribution(&rho);
    let mut rows = Vec::with_capacity(probs.len());
    for n in 0..da {
        for m in 0..db {
            rows.push(vec![
                Cell::Int(n as i64),
                Cell::Int(m as i64),
                Cell::Num(probs[n * db + m]),
            ]);
        }
    }

    Ok(Artifact {
        command: "distribution",
        params,
        grid: vec![
            Axis {
                name: "n".into(),
                start: 0.0,
                stop: (da - 1) as f64,
                count: da,
            },
            Axis {
                name: "m".into(),
                start: 0.0,
                stop: (db - 1) as f64,
                count: db,
            },
        ],
        columns: vec!["n", "m", "p"],
        rows,
        values: probs,
        truncation_deficit: rho.trace_deficit,
    })
}

fn uncertainty(args: &UncertaintyArgs) -> Result<Artifact, CliError> {
    if args.seed > 1 {
        return Err(CliError::Config(
            "the uncertainty closed form covers --seed 0 and 1".into(),
        ));
    }
    let gain = GainParams::new(args.g).map_err(config_err)?;
    let quantity = match args.quantity {
        Quantity::Dx => "dx",
        Quantity::Dy => "dy",
        Quantity::Product => "product",
    };
    let params: Vec<(&'static str, ParamValue)> = vec![
        ("seed", ParamValue::Int(args.seed as u64)),
        ("g", ParamValue::Num(gain.g)),
        ("quantity", ParamValue::Text(quantity.into())),
        ("R", ParamValue::Text(args.r.to_string())),
    ];

    let rs = reflectivity_points(args.r)?;
    let mut rows = Vec::with_capacity(rs.len());
    let mut values = Vec::with_capacity(rs.len());
    for &r in &rs {
        let (dx, dy) = quadrature_uncertainty(args.seed, gain, channel(r)?)?;
        let v = match args.quantity {
            Quantity::Dx => dx,
            Quantity::Dy => dy,
            Quantity::Product => dx * dy,
        };
        rows.push(vec![Cell::Num(r), Cell::Num(v)]);
        values.push(v);
    }

    Ok(Artifact {
        command: "uncertainty",
        params,
        grid: vec![sweep_axis("R", &rs)],
        columns: vec!["R", "value"],
        rows,
        values,
        truncation_deficit: 0.0,
    })
}

fn ofilter(args: &OfilterArgs) -> Result<Artifact, CliError> {
    let gain = GainParams::new(args.g).map_err(config_err)?;
    let ch = channel(args.r)?;
    let params: Vec<(&'static str, ParamValue)> = vec![
        ("g", ParamValue::Num(gain.g)),
        ("R", ParamValue::Num(ch.r)),
        ("k", ParamValue::Text(args.k.to_string())),
    ];

    // The filtered state is the product of the lossy one-photon and
    // vacuum amplified seeds at a shared cutoff, mirroring the
    // macro-qubit distance construction.
    let seeded = build_single_mode_macrostate(gain, 1, CutoffSpec::Auto { deficit: 1e-10 })
        .map_err(config_err)?;
    let spontaneous = build_single_mode_macrostate(gain, 0, CutoffSpec::Fixed(seeded.dim() - 1))
        .map_err(config_err)?;
    let rho1 = lossy_density_from_pure_single(&seeded, ch, None)?;
    let rho0 = lossy_density_from_pure_single(&spontaneous, ch, None)?;
    let product = tensor_product(&rho1, &rho0)?;

    let ks = args.k.points();
    let mut rows = Vec::with_capacity(ks.len());
    let mut values = Vec::with_capacity(ks.len());
    for &k in &ks {
        let p = ofilter_success_probability(&product, OFilterConfig { k })?;
        rows.push(vec![Cell::Int(k as i64), Cell::Num(p)]);
        values.push(p);
    }

    Ok(Artifact {
        command: "ofilter",
        params,
        grid: vec![Axis {
            name: "k".into(),
            start: *ks.first().unwrap_or(&0) as f64,
            stop: *ks.last().unwrap_or(&0) as f64,
            count: ks.len(),
        }],
        columns: vec!["k", "p"],
        rows,
        values,
        truncation_deficit: product.trace_deficit,
    })
}
