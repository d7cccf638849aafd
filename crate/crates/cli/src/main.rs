mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{BoundArgs, Cli, CoeffsArgs, Command, Format, OutputArgs, ScalingArgs, SweepArgs, VerifyArgs};
use phasebound::clock::linspace;
use phasebound::{
    entanglement_witness, gain_scaling, run_verification, ClockModel, SpinLength, SweepRecord, VerifyConfig,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
    VerificationFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::VerificationFailed => 1,
            Self::Usage(_) | Self::Io(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<phasebound::Error> for CliError {
    fn from(e: phasebound::Error) -> Self {
        match e {
            phasebound::Error::InvalidArgument(_) | phasebound::Error::DimensionMismatch { .. } => {
                Self::Usage(e.to_string())
            }
            phasebound::Error::NumericalConsistency(_) | phasebound::Error::Internal(_) => {
                Self::Numerical(e.to_string())
            }
        }
    }
}

#[derive(Serialize)]
struct BoundRecord {
    j: f64,
    #[serde(rename = "N")]
    n: u32,
    tau: f64,
    tau_scaled: f64,
    theta: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "FplusE")]
    fplus_e: f64,
    #[serde(rename = "Fq")]
    fq: f64,
    #[serde(rename = "chiSqz")]
    chi_sqz: f64,
    #[serde(rename = "F_resc")]
    f_resc: f64,
    #[serde(rename = "E_resc")]
    e_resc: f64,
    #[serde(rename = "FplusE_resc")]
    fplus_e_resc: f64,
    #[serde(rename = "Fq_resc")]
    fq_resc: f64,
    #[serde(rename = "chiSqz_resc")]
    chi_sqz_resc: f64,
    a: f64,
    b: f64,
    #[serde(rename = "witness_F")]
    witness_f: u32,
    #[serde(rename = "witness_FE")]
    witness_fe: u32,
}

#[derive(Serialize)]
struct CoeffRecord {
    j: f64,
    tau_scaled: f64,
    m_y: f64,
    c_opt: f64,
    c_opt0: f64,
    #[serde(rename = "cH_opt")]
    c_h_opt: f64,
    #[serde(rename = "cH_opt0")]
    c_h_opt0: f64,
}

#[derive(Serialize)]
struct CheckRecord {
    check: &'static str,
    passed: usize,
    total: usize,
    worst: f64,
    tolerance: f64,
    ok: bool,
}

fn emit<C: Serialize, R: Serialize>(
    out: &OutputArgs,
    command: &str,
    config: &C,
    records: &[R],
) -> Result<(), CliError> {
    let format = out.format.unwrap_or(Format::Csv);
    if format == Format::Text {
        return Err(CliError::Usage(format!("format text is only available for verify, not {command}")));
    }
    let mut sink = output::open(out.output.as_deref())?;
    match format {
        Format::Json => output::write_json(&mut *sink, command, config, records)?,
        _ => output::write_csv(&mut *sink, records)?,
    }
    output::io_result(sink.flush())
}

fn model(j: f64) -> Result<ClockModel, CliError> {
    Ok(ClockModel::new(SpinLength::new(j)?))
}

fn check_finite(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be finite, got {value}")))
    }
}

fn check_tau_scaled(value: f64) -> Result<(), CliError> {
    check_finite("tau-scaled", value)?;
    if value < 0.0 {
        return Err(CliError::Usage(format!("--tau-scaled must be nonnegative, got {value}")));
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let m = model(args.j)?;
    check_finite("theta", args.theta)?;
    check_finite("tau-min", args.tau_min)?;
    check_finite("tau-max", args.tau_max)?;
    if args.tau_min < 0.0 || args.tau_max < args.tau_min {
        return Err(CliError::Usage(format!(
            "need 0 <= --tau-min <= --tau-max, got {} and {}",
            args.tau_min, args.tau_max
        )));
    }
    if args.tau_points == 0 {
        return Err(CliError::Usage("--tau-points must be positive".into()));
    }
    let taus: Vec<f64> =
        linspace(args.tau_min, args.tau_max, args.tau_points).iter().map(|&s| m.scaled_to_tau(s)).collect();
    let records = m.sweep(&taus, args.theta)?;
    emit(&args.out, "sweep", args, &records)
}

fn scaling(args: &ScalingArgs) -> Result<(), CliError> {
    check_finite("theta", args.theta)?;
    if args.j_list.is_empty() {
        return Err(CliError::Usage("--j-list is empty".into()));
    }
    for &j in &args.j_list {
        SpinLength::new(j)?;
    }
    let records = gain_scaling(&args.j_list, args.theta)?;
    emit(&args.out, "scaling", args, &records)
}

fn coeffs(args: &CoeffsArgs) -> Result<(), CliError> {
    let m = model(args.j)?;
    check_finite("theta", args.theta)?;
    if let Some(s) = args.tau_scaled {
        check_tau_scaled(s)?;
    }
    let tau = match args.tau_scaled {
        Some(s) => m.scaled_to_tau(s),
        None => m.find_tau_opt(args.theta)?.tau,
    };
    let tau_scaled = tau * args.j.sqrt();
    let profile = m.coefficient_profile(tau, args.theta)?;
    let records: Vec<CoeffRecord> = profile
        .rows
        .iter()
        .map(|r| CoeffRecord {
            j: args.j,
            tau_scaled,
            m_y: r.m_y,
            c_opt: r.c_opt,
            c_opt0: r.c_opt0,
            c_h_opt: r.c_h_opt,
            c_h_opt0: r.c_h_opt0,
        })
        .collect();
    emit(&args.out, "coeffs", args, &records)
}

fn bound(args: &BoundArgs) -> Result<(), CliError> {
    let m = model(args.j)?;
    check_finite("theta", args.theta)?;
    check_tau_scaled(args.tau_scaled)?;
    let tau = m.scaled_to_tau(args.tau_scaled);
    let b = m.breakdown(tau, args.theta)?;
    let r = SweepRecord::from_breakdown(m.j(), tau, args.theta, &b);
    let n = m.j().particles();
    let record = BoundRecord {
        j: r.j,
        n,
        tau,
        tau_scaled: r.tau_scaled,
        theta: args.theta,
        f: r.f,
        e: r.e,
        fplus_e: r.fplus_e,
        fq: r.fq,
        chi_sqz: r.chi_sqz,
        f_resc: r.f_resc,
        e_resc: r.e_resc,
        fplus_e_resc: r.fplus_e_resc,
        fq_resc: r.fq_resc,
        chi_sqz_resc: r.chi_sqz_resc,
        a: b.a,
        b: b.b,
        witness_f: entanglement_witness(b.fisher, n)?,
        witness_fe: entanglement_witness(b.enhanced, n)?,
    };
    emit(&args.out, "bound", args, &[record])
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let config = if args.quick { VerifyConfig::quick(args.seed) } else { VerifyConfig::new(args.seed) };
    let report = run_verification(&config);
    match args.out.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut sink = output::open(args.out.output.as_deref())?;
            output::io_result(sink.write_all(report.render().as_bytes()).and_then(|_| sink.flush()))?;
        }
        _ => {
            let records: Vec<CheckRecord> = report
                .checks
                .iter()
                .map(|c| CheckRecord {
                    check: c.name,
                    passed: c.passed,
                    total: c.total,
                    worst: c.worst,
                    tolerance: c.tolerance,
                    ok: c.ok(),
                })
                .collect();
            emit(&args.out, "verify", &config, &records)?;
        }
    }
    for (index, message) in &report.errors {
        eprintln!("instance {index}: {message}");
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Scaling(a) => scaling(a),
        Command::Coeffs(a) => coeffs(a),
        Command::Verify(a) => verify(a),
        Command::Bound(a) => bound(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical error: {m}"),
                CliError::Io(m) => eprintln!("output error: {m}"),
                CliError::VerificationFailed => eprintln!("verification failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
