use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cobweb_core::codec::AmplitudeDocument;
use cobweb_core::measures::{measure_report, scaling_curve, scaling_ratio};
use cobweb_core::protocol::{derive_seed, normalization_constants, Transcript};
use cobweb_core::session::{run_session, DeliveryOrder};
use cobweb_core::zsa::validate_zsa;
use cobweb_core::{run_protocol, BellOutcome, Error, OutcomeSelection, UnknownQubit, ZsaAmplitudes, C64};

mod claims;

#[derive(Parser)]
#[command(name = "cobweb", version, about = "Teleport an unknown qubit into a cobweb state over a ZSA resource")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the amplitudes form a ZSA state.
    Validate(SourceArgs),
    /// Run protocol trials, one JSON line (or CSV row) per trial.
    Run(RunArgs),
    /// Entanglement measures with closed forms next to numerical oracles.
    Measures(MeasuresArgs),
    /// E(N) = H2(1/N) for the Nth-roots family.
    Scaling(ScalingArgs),
    /// Reported values against recomputed ones.
    Claims(FormatArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON file with {"coeffs": [[re, im], ...]}.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Named generator: cube, epr or roots:N.
    #[arg(long)]
    gen: Option<String>,
}

#[derive(Args)]
struct SourceArgs {
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
struct Angles {
    /// Polar angle in radians.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "theta_deg")]
    theta: Option<f64>,
    /// Polar angle in degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta_deg: Option<f64>,
    /// Azimuth in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
}

impl Angles {
    fn qubit(&self) -> Result<UnknownQubit, CliError> {
        let theta = match (self.theta, self.theta_deg) {
            (Some(t), _) => t,
            (None, Some(d)) => d.to_radians(),
            (None, None) => std::f64::consts::FRAC_PI_2,
        };
        Ok(UnknownQubit::new(theta, self.phi)?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FormatArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    angles: Angles,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Force a Bell outcome instead of sampling.
    #[arg(long, conflicts_with = "session")]
    outcome: Option<BellOutcome>,
    /// Drive each trial as parties exchanging messages.
    #[arg(long)]
    session: bool,
    #[command(flatten)]
    out: FormatArgs,
}

#[derive(Args)]
struct MeasuresArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    angles: Angles,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, default_value_t = 64)]
    n_max: usize,
    #[command(flatten)]
    out: FormatArgs,
}

#[derive(Debug)]
enum CliError {
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Domain(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Self::Io(m),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(&a.source),
        Command::Run(a) => cmd_run(&a),
        Command::Measures(a) => cmd_measures(&a),
        Command::Scaling(a) => cmd_scaling(&a),
        Command::Claims(a) => cmd_claims(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Domain(m) | CliError::Io(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}

fn raw_coeffs(source: &Source) -> Result<Vec<C64>, CliError> {
    if let Some(path) = &source.file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(AmplitudeDocument::parse(&text)?.complex());
    }
    let name = source.gen.as_deref().expect("clap enforces one source");
    let z = match name {
        "cube" => ZsaAmplitudes::cube_roots(),
        "epr" => ZsaAmplitudes::epr(),
        other => match other.strip_prefix("roots:").map(str::parse::<usize>) {
            Some(Ok(n)) => ZsaAmplitudes::roots_of_unity(n)?,
            _ => return Err(CliError::Io(format!("unknown generator {other:?}; expected cube, epr or roots:N"))),
        },
    };
    Ok(z.coeffs().to_vec())
}

fn load(source: &Source) -> Result<ZsaAmplitudes, CliError> {
    Ok(validate_zsa(&raw_coeffs(source)?)?)
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct ValidationReport {
    valid: bool,
    num_parties: usize,
    sum_residual: f64,
    norm_residual: f64,
    error: Option<String>,
}

fn cmd_validate(source: &Source) -> Result<(), CliError> {
    let coeffs = raw_coeffs(source)?;
    let sum: C64 = coeffs.iter().sum();
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let verdict = validate_zsa(&coeffs);
    let report = ValidationReport {
        valid: verdict.is_ok(),
        num_parties: coeffs.len(),
        sum_residual: sum.norm(),
        norm_residual: (norm - 1.0).abs(),
        error: verdict.as_ref().err().map(|e| format!("{e:?}")),
    };
    println!("{}", serde_json::to_string(&report).expect("plain report"));
    verdict.map(|_| ()).map_err(CliError::from)
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    seed: Option<u64>,
    outcome: BellOutcome,
    probability: f64,
    cbits: u32,
    parties_notified: usize,
    reference_bit: u8,
    norm_constant: f64,
    product: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ebits_consumed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    messages: Option<usize>,
    amplitudes: Vec<[f64; 2]>,
}

impl TrialRow {
    fn new(trial: u64, t: &Transcript) -> Self {
        let r = t.record();
        Self {
            trial,
            seed: t.seed,
            outcome: r.outcome,
            probability: r.probability,
            cbits: r.cbits,
            parties_notified: r.parties_notified,
            reference_bit: r.reference_bit,
            norm_constant: r.norm_constant,
            product: r.product,
            ebits_consumed: None,
            messages: None,
            amplitudes: r.amplitudes,
        }
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["trial", "seed", "outcome", "probability", "cbits", "parties_notified", "reference_bit", "norm_constant", "product"]
            .map(String::from)
            .to_vec();
        if self.ebits_consumed.is_some() {
            h.extend(["ebits_consumed".to_string(), "messages".to_string()]);
        }
        for i in 0..self.amplitudes.len() {
            h.push(format!("re_{i}"));
            h.push(format!("im_{i}"));
        }
        h
    }

    fn csv_record(&self) -> Vec<String> {
        let mut r = vec![
            self.trial.to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.outcome.to_string(),
            self.probability.to_string(),
            self.cbits.to_string(),
            self.parties_notified.to_string(),
            self.reference_bit.to_string(),
            self.norm_constant.to_string(),
            self.product.to_string(),
        ];
        if let (Some(e), Some(m)) = (self.ebits_consumed, self.messages) {
            r.extend([e.to_string(), m.to_string()]);
        }
        for [re, im] in &self.amplitudes {
            r.push(re.to_string());
            r.push(im.to_string());
        }
        r
    }
}

#[derive(Serialize)]
struct OutcomeTally {
    outcome: BellOutcome,
    count: u64,
    frequency: f64,
    probability: f64,
    sigma: f64,
    within_3sigma: bool,
}

#[derive(Serialize)]
struct RunSummary {
    trials: u64,
    seed: u64,
    forced: Option<BellOutcome>,
    outcomes: Vec<OutcomeTally>,
    all_within_3sigma: bool,
}

fn summarize(args: &RunArgs, probabilities: [f64; 4], counts: [u64; 4]) -> RunSummary {
    let t = args.trials as f64;
    let outcomes: Vec<OutcomeTally> = BellOutcome::ALL
        .iter()
        .map(|&o| {
            let i = o.index();
            let p = match args.outcome {
                Some(f) => f64::from(u8::from(f == o)),
                None => probabilities[i],
            };
            let sigma = (t * p * (1.0 - p)).sqrt();
            let count = counts[i];
            OutcomeTally {
                outcome: o,
                count,
                frequency: count as f64 / t,
                probability: p,
                sigma,
                within_3sigma: (count as f64 - t * p).abs() <= 3.0 * sigma + 1e-9,
            }
        })
        .collect();
    RunSummary {
        trials: args.trials,
        seed: args.seed,
        forced: args.outcome,
        all_within_3sigma: outcomes.iter().all(|o| o.within_3sigma),
        outcomes,
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let z = load(&args.source)?;
    let q = args.angles.qubit()?;
    let probabilities = normalization_constants(&q, &z)?.branch_probabilities();

    let mut rows = Vec::with_capacity(args.trials as usize);
    let mut counts = [0u64; 4];
    for trial in 0..args.trials {
        let seed = derive_seed(args.seed, trial);
        let row = if args.session {
            let s = run_session(&q, &z, seed, &DeliveryOrder::Sequential)?;
            let mut row = TrialRow::new(trial, &s.transcript);
            row.ebits_consumed = Some(s.ledger.ebits_consumed);
            row.messages = Some(s.log.entries().len());
            row
        } else {
            let selection = match args.outcome {
                Some(o) => OutcomeSelection::Forced(o),
                None => OutcomeSelection::Sampled { seed },
            };
            TrialRow::new(trial, &run_protocol(&q, &z, selection)?)
        };
        counts[row.outcome.index()] += 1;
        rows.push(row);
    }
    let summary = summarize(args, probabilities, counts);

    let mut out = sink(&args.out.output)?;
    match args.out.format {
        Format::Json => {
            for row in &rows {
                writeln!(out, "{}", serde_json::to_string(row).expect("plain row"))?;
            }
            writeln!(out, "{}", serde_json::json!({ "summary": summary }))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(rows[0].csv_header())?;
            for row in &rows {
                w.write_record(row.csv_record())?;
            }
            w.flush()?;
            eprintln!("{}", serde_json::json!({ "summary": summary }));
        }
    }
    Ok(())
}

fn cmd_measures(args: &MeasuresArgs) -> Result<(), CliError> {
    let z = load(&args.source)?;
    let q = args.angles.qubit()?;
    let report = measure_report(&q, &z)?;
    let mut out = sink(&args.output)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("plain report"))?;
    Ok(())
}

#[derive(Serialize)]
struct ScalingRow {
    n: usize,
    entropy: f64,
    ratio: f64,
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), CliError> {
    let rows: Vec<ScalingRow> = scaling_curve(args.n_max)?
        .into_iter()
        .map(|(n, entropy)| ScalingRow { n, entropy, ratio: scaling_ratio(n) })
        .collect();
    let mut out = sink(&args.out.output)?;
    match args.out.format {
        Format::Json => {
            for row in &rows {
                writeln!(out, "{}", serde_json::to_string(row).expect("plain row"))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_claims(args: &FormatArgs) -> Result<(), CliError> {
    let rows = claims::table()?;
    let mut out = sink(&args.output)?;
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("plain rows"))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
