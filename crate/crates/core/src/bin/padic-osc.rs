use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use padic_oscillator::adelic::{
    discreteness_profile, length_scale, vacuum_check, vacuum_check_kernel, AdelicState,
    RealFactor, VacuumMethod,
};
use padic_oscillator::classical::{
    convergence_certificate, solve_amplitude_phase, EndpointData, Endpoints, FrequencyProfile,
    ModelSummary, OscillatorModel, Preset,
};
use padic_oscillator::exact::{format_rational, parse_rational, Rational};
use padic_oscillator::gauss::{gauss_brute_force, gauss_closed_form, local_constancy_depth, GaussIntegralSpec};
use padic_oscillator::propagator::{
    compose_oracle, kernel_report, ComposeGrid, Dynamics, QuadraticKernel,
};
use padic_oscillator::suites::{run_suite, SuiteOptions, SUITE_NAMES};
use padic_oscillator::{Error, Place};

const SCHEMA: &str = "padic-oscillator/1";
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "padic-osc", version, about = "Oscillator with time-dependent frequency over R, Q_p and the adeles")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gauss integral over |x|_p <= p^nu, closed form and optional coset-sum oracle
    Gauss(GaussArgs),
    /// Two-point trajectory, momenta and action
    Classical(ClassicalArgs),
    /// Propagator kernel at one place
    Propagator(PropagatorArgs),
    /// Omega-vacuum check at each prime
    Vacuum(VacuumArgs),
    /// |Psi|^2 times the product of Omega over primes up to the cutoff
    Discreteness(DiscretenessArgs),
    /// Run a named property suite (or `all`)
    Suite(SuiteArgs),
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn place(s: &str) -> Result<Place, String> {
    Place::parse(s).map_err(|e| e.to_string())
}

fn prime(s: &str) -> Result<u64, String> {
    place(s)?.prime().ok_or_else(|| "expected a prime".to_string())
}

#[derive(Args, Debug)]
struct GaussArgs {
    #[arg(short, long)]
    p: u64,
    #[arg(short, long, value_parser = rational, allow_hyphen_values = true)]
    alpha: Rational,
    #[arg(short, long, value_parser = rational, allow_hyphen_values = true, default_value = "0")]
    beta: Rational,
    #[arg(short, long, allow_hyphen_values = true, default_value_t = 0)]
    nu: i64,
    /// Coset depth of the brute-force sum
    #[arg(long, allow_hyphen_values = true)]
    oracle_depth: Option<i64>,
    /// Run the brute-force sum at the automatic depth
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// example1(a,b), example2(a,b), constant(w0), free, or an inline JSON profile
    #[arg(long, default_value = "free")]
    profile: String,
    #[arg(long, value_parser = rational, default_value = "1")]
    mass: Rational,
    /// Series truncation order
    #[arg(long, default_value_t = 24)]
    order: usize,
}

impl ModelArgs {
    fn model(&self) -> padic_oscillator::Result<OscillatorModel> {
        OscillatorModel::new(self.mass.clone(), FrequencyProfile::parse(&self.profile)?)
    }
}

#[derive(Args, Debug)]
struct TimeArgs {
    #[arg(long = "t-prime", value_parser = rational, allow_hyphen_values = true)]
    t_prime: Rational,
    #[arg(long = "t-dprime", value_parser = rational, allow_hyphen_values = true)]
    t_dprime: Rational,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    times: TimeArgs,
    #[arg(long = "x-prime", value_parser = rational, allow_hyphen_values = true)]
    x_prime: Rational,
    #[arg(long = "x-dprime", value_parser = rational, allow_hyphen_values = true)]
    x_dprime: Rational,
    /// Places at which evaluation is certified (inf and/or primes)
    #[arg(long, value_parser = place, value_delimiter = ',', default_value = "inf")]
    places: Vec<Place>,
}

#[derive(Args, Debug)]
struct PropagatorArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    times: TimeArgs,
    #[arg(long, value_parser = place)]
    place: Place,
    #[arg(long, value_parser = rational, default_value = "1")]
    h: Rational,
    /// Use the closed-form kernel of a constant-frequency profile instead of the series
    #[arg(long)]
    closed_form: bool,
    /// Positions x'' and x' are sampled from this list
    #[arg(long, value_parser = rational, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1")]
    xs: Vec<Rational>,
    /// Intermediate time for the composition oracle
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    compose: Option<Rational>,
    /// Integration ball exponent for the composition oracle (requires --depth)
    #[arg(long, allow_hyphen_values = true, requires = "depth")]
    nu: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires = "nu")]
    depth: Option<i64>,
}

#[derive(Args, Debug)]
struct VacuumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    times: TimeArgs,
    #[arg(long, value_parser = prime, value_delimiter = ',', default_value = "3,5,7")]
    primes: Vec<u64>,
    #[arg(long, value_parser = rational, default_value = "1")]
    h: Rational,
    #[arg(long, default_value = "both", value_parser = ["closed-form", "brute-force", "both"])]
    method: String,
    /// Use the closed-form kernel of a constant-frequency profile instead of the series
    #[arg(long)]
    closed_form: bool,
}

#[derive(Args, Debug)]
struct DiscretenessArgs {
    /// Positions in units of the length scale
    #[arg(long, value_parser = rational, value_delimiter = ',', allow_hyphen_values = true)]
    xs: Vec<Rational>,
    #[arg(long, default_value_t = 100)]
    cutoff: u64,
    /// Mean of the real Gaussian factor
    #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "0")]
    mean: Rational,
    /// Variance of the real Gaussian factor
    #[arg(long, value_parser = rational, default_value = "4")]
    variance: Rational,
    /// Treat the state as mixed
    #[arg(long)]
    mixed: bool,
    /// Constant-frequency profile whose length scale is reported
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_parser = rational, default_value = "1")]
    mass: Rational,
    #[arg(long, value_parser = rational, default_value = "1")]
    h: Rational,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    name: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long, default_value_t = 24)]
    order: usize,
}

enum Failure {
    Usage(String),
    Lib(Error),
    SuiteFailed(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<Output, Failure>;

enum Output {
    Json(Value),
    Csv(Vec<Vec<String>>),
}

fn envelope(command: &str, body: impl Serialize) -> Value {
    let mut v = serde_json::to_value(body).expect("report serializes");
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(SCHEMA));
        map.insert("command".into(), json!(command));
    }
    v
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::IndeterminateBranch { .. } => 2,
        Error::DepthTooSmall { .. } => 3,
        Error::Caustic => 4,
        Error::Divergence { .. } => 5,
        Error::Precision { .. } => 6,
        Error::NotPrime(_) | Error::ParseRational(_) | Error::InvalidInput(_) => EXIT_USAGE,
        _ => 1,
    }
}

fn csv_only(fmt: Format, command: &str) -> Result<(), Failure> {
    if fmt == Format::Csv {
        return Err(Failure::Usage(format!("{command} has no CSV output")));
    }
    Ok(())
}

fn cmd_gauss(a: &GaussArgs, fmt: Format) -> CmdResult {
    csv_only(fmt, "gauss")?;
    padic_oscillator::exact::check_prime(a.p)?;
    let spec = GaussIntegralSpec::new(a.p, a.alpha.clone(), a.beta.clone(), a.nu);
    let closed = gauss_closed_form(&spec)?;
    let value = closed.value();
    let mut body = json!({
        "p": a.p,
        "alpha": format_rational(&a.alpha),
        "beta": format_rational(&a.beta),
        "nu": a.nu,
        "branch": closed.branch,
        "magnitude": closed.amplitude.magnitude,
        "phase": closed.amplitude.phase,
        "lambda": padic_oscillator::exact::ComplexJson::from(closed.amplitude.lambda_factor),
        "closed_form": padic_oscillator::exact::ComplexJson::from(value),
    });
    let depth = match (a.oracle_depth, a.oracle) {
        (Some(d), _) => Some(d),
        (None, true) => Some(local_constancy_depth(&spec)),
        (None, false) => None,
    };
    if let Some(depth) = depth {
        let brute = gauss_brute_force(&spec, depth)?;
        body["oracle"] = json!({
            "depth": depth,
            "value": padic_oscillator::exact::ComplexJson::from(brute),
            "deviation": (brute - value).norm(),
        });
    }
    Ok(Output::Json(envelope("gauss", body)))
}

fn cmd_classical(a: &ClassicalArgs, fmt: Format) -> CmdResult {
    csv_only(fmt, "classical")?;
    let model = a.model.model()?;
    let ap = solve_amplitude_phase(&model, a.model.order)?;
    let ep = Endpoints {
        t_prime: a.times.t_prime.clone(),
        x_prime: a.x_prime.clone(),
        t_dprime: a.times.t_dprime.clone(),
        x_dprime: a.x_dprime.clone(),
    };
    let data = EndpointData::evaluate(&ap, &ep, &a.places)?;
    let primes: Vec<u64> = a.places.iter().filter_map(|p| p.prime()).collect();
    let certificates: Vec<Value> = [&ep.t_prime, &ep.t_dprime]
        .into_iter()
        .map(|t| {
            Ok(json!({
                "t": format_rational(t),
                "G": convergence_certificate(&ap.g, &primes, t)?,
                "gamma": convergence_certificate(&ap.gamma, &primes, t)?,
            }))
        })
        .collect::<padic_oscillator::Result<_>>()?;
    let trajectory = data.trajectory_series(&ap)?;
    let action = data.action(&model.mass);
    let quadratic = action.value(&ep.x_dprime, &ep.x_prime);
    let boundary = data.action_boundary(&ap, &model.mass)?;
    let k_prime = data.momentum(&ap, &model.mass, &ep.t_prime)?;
    let k_dprime = data.momentum(&ap, &model.mass, &ep.t_dprime)?;
    let fmt_all = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
    let body = json!({
        "model": ModelSummary::from(&model),
        "order": a.model.order,
        "places": a.places,
        "endpoints": ep,
        "certificates": certificates,
        "theta": format_rational(&data.theta),
        "trajectory_coeffs": fmt_all(trajectory.coeffs()),
        "momentum": {
            "t_prime": format_rational(&k_prime),
            "t_dprime": format_rational(&k_dprime),
        },
        "action": {
            "coefficients": action,
            "quadratic": format_rational(&quadratic),
            "boundary": format_rational(&boundary),
            "delta": format_rational(&(&quadratic - &boundary)),
        },
    });
    Ok(Output::Json(envelope("classical", body)))
}

fn build_kernel(
    place: Place,
    model: &OscillatorModel,
    dynamics: Option<&Dynamics>,
    closed_form: bool,
    order: usize,
    (t_prime, t_dprime): (&Rational, &Rational),
    h: &Rational,
) -> padic_oscillator::Result<QuadraticKernel> {
    if closed_form {
        let Preset::Constant { w0 } = &model.profile.preset else {
            return Err(Error::InvalidInput(
                "closed-form kernels exist for constant(w0) and free profiles only".into(),
            ));
        };
        let duration = t_dprime - t_prime;
        return QuadraticKernel::constant_frequency(place, &model.mass, h, w0, &duration, order);
    }
    let dynamics = dynamics.expect("series kernels need the solved dynamics");
    QuadraticKernel::from_action(place, dynamics, t_prime, t_dprime, h)
}

fn cmd_propagator(a: &PropagatorArgs, fmt: Format) -> CmdResult {
    let model = a.model.model()?;
    let order = a.model.order;
    let dynamics = if a.closed_form {
        None
    } else {
        Some(Dynamics::solve(&model, order)?)
    };
    let (tp, td) = (&a.times.t_prime, &a.times.t_dprime);
    let kernel = |t0: &Rational, t1: &Rational| {
        build_kernel(a.place, &model, dynamics.as_ref(), a.closed_form, order, (t0, t1), &a.h)
    };
    let k = kernel(tp, td)?;
    let xs: Vec<Rational> = a.xs.clone();
    let samples: Vec<(Rational, Rational)> = xs
        .iter()
        .flat_map(|xd| xs.iter().map(move |xp| (xd.clone(), xp.clone())))
        .collect();
    let report = kernel_report(&k, &samples)?;
    if fmt == Format::Csv {
        let mut rows = vec![vec!["x_dprime".into(), "x_prime".into(), "re".into(), "im".into()]];
        for s in &report.sample_values {
            rows.push(vec![
                format_rational(&s.x_dprime),
                format_rational(&s.x_prime),
                s.value.re.to_string(),
                s.value.im.to_string(),
            ]);
        }
        return Ok(Output::Csv(rows));
    }
    let mut body = json!({
        "model": ModelSummary::from(&model),
        "t_prime": format_rational(tp),
        "t_dprime": format_rational(td),
        "kernel": report,
    });
    if let Some(mid) = &a.compose {
        let grid = a.nu.zip(a.depth).map(|(nu, depth)| ComposeGrid { nu, depth });
        let later = kernel(mid, td)?;
        let earlier = kernel(tp, mid)?;
        let rep = compose_oracle(&later, &earlier, &k, &samples, grid)?;
        body["composition"] = serde_json::to_value(rep).expect("report serializes");
    }
    Ok(Output::Json(envelope("propagator", body)))
}

fn cmd_vacuum(a: &VacuumArgs, fmt: Format) -> CmdResult {
    csv_only(fmt, "vacuum")?;
    let model = a.model.model()?;
    let method = VacuumMethod::parse(&a.method)?;
    let order = a.model.order;
    let dynamics = if a.closed_form {
        None
    } else {
        Some(Dynamics::solve(&model, order)?)
    };
    let (tp, td) = (&a.times.t_prime, &a.times.t_dprime);
    let primes: Vec<u64> = a.primes.clone();
    let mut reports = Vec::new();
    for p in primes {
        let rep = match &dynamics {
            Some(d) => vacuum_check(p, d, tp, td, &a.h, method)?,
            None => {
                let place = Place::Finite(p);
                let k = build_kernel(place, &model, None, true, order, (tp, td), &a.h)
                    .map_err(|e| e.at(place))?;
                vacuum_check_kernel(&k, method)?
            }
        };
        reports.push(rep);
    }
    let body = json!({
        "model": ModelSummary::from(&model),
        "t_prime": format_rational(tp),
        "t_dprime": format_rational(td),
        "h": format_rational(&a.h),
        "reports": reports,
    });
    Ok(Output::Json(envelope("vacuum", body)))
}

fn cmd_discreteness(a: &DiscretenessArgs, fmt: Format) -> CmdResult {
    let mut state = AdelicState::vacuum(RealFactor::Gaussian {
        mean: a.mean.clone(),
        variance: a.variance.clone(),
    });
    state.mixed = a.mixed;
    let xs: Vec<Rational> = a.xs.clone();
    let profile = discreteness_profile(&state, &xs, a.cutoff)?;
    if fmt == Format::Csv {
        let mut rows = vec![vec!["x".to_string(), "value".to_string()]];
        for r in &profile.rows {
            rows.push(vec![format_rational(&r.x), r.value.to_string()]);
        }
        return Ok(Output::Csv(rows));
    }
    let mut body = json!({ "state": state, "profile": profile });
    if let Some(p) = &a.profile {
        let prof = FrequencyProfile::parse(p)?;
        body["length_scale"] = serde_json::to_value(length_scale(&prof.preset, &a.mass, &a.h)?)
            .expect("report serializes");
    }
    Ok(Output::Json(envelope("discreteness", body)))
}

fn cmd_suite(a: &SuiteArgs, fmt: Format) -> CmdResult {
    if a.name != "all" && !SUITE_NAMES.contains(&a.name.as_str()) {
        return Err(Failure::Usage(format!(
            "unknown suite {:?}; expected one of {} or all",
            a.name,
            SUITE_NAMES.join(", ")
        )));
    }
    let opts = SuiteOptions {
        seed: a.seed,
        cases: a.cases,
        order: a.order,
    };
    let reports = run_suite(&a.name, &opts)?;
    let passed = reports.iter().all(|r| r.passed);
    if fmt == Format::Csv {
        let mut rows = vec![vec!["suite".into(), "cases".into(), "passed".into()]];
        for r in &reports {
            rows.push(vec![r.name.clone(), r.cases.to_string(), r.passed.to_string()]);
        }
        return if passed {
            Ok(Output::Csv(rows))
        } else {
            Err(Failure::SuiteFailed(json!(rows)))
        };
    }
    let body = envelope(
        "suite",
        json!({ "name": a.name, "seed": a.seed, "passed": passed, "suites": reports }),
    );
    if passed {
        Ok(Output::Json(body))
    } else {
        Err(Failure::SuiteFailed(body))
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PADIC_OSC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PADIC_OSC_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn write_output(out: &Output) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match out {
        Output::Json(v) => {
            serde_json::to_writer_pretty(&mut lock, v)?;
            writeln!(lock)
        }
        Output::Csv(rows) => {
            let mut w = csv::Writer::from_writer(lock);
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let fmt = cli.format;
    let result = match &cli.command {
        Command::Gauss(a) => cmd_gauss(a, fmt),
        Command::Classical(a) => cmd_classical(a, fmt),
        Command::Propagator(a) => cmd_propagator(a, fmt),
        Command::Vacuum(a) => cmd_vacuum(a, fmt),
        Command::Discreteness(a) => cmd_discreteness(a, fmt),
        Command::Suite(a) => cmd_suite(a, fmt),
    };
    match result {
        Ok(out) => match write_output(&out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::SuiteFailed(body)) => {
            let _ = write_output(&Output::Json(body));
            eprintln!("error: suite failed");
            ExitCode::FAILURE
        }
    }
}
