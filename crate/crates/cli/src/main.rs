use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rank1_spectral::direct::solve_direct_detailed;
use rank1_spectral::gallery::{self, GalleryReport};
use rank1_spectral::inverse::{solve_inverse, solve_inverse_with_phi, InverseSolution};
use rank1_spectral::io::{parse_base, parse_coefficients, parse_fixed_phi, parse_target, to_canonical_json};
use rank1_spectral::model::{Index, ValidBase, ValidCoefficients, ValidTarget};
use rank1_spectral::oracle::{compare_values, oracle_report};
use rank1_spectral::{DirectOptions, Error, PerturbedSpectrum};

#[derive(Parser, Debug)]
#[command(name = "rank1", version, about = "Spectra of rank-one perturbations A + <., phi> psi")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct SolverArgs {
    /// Radius of the explicit summation window of F.
    #[arg(long, default_value_t = 2000)]
    trunc: Index,
    /// Residual tolerance of the Newton refinement.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Initial number of quadrature nodes per contour (doubled up to 4096).
    #[arg(long, default_value_t = 256)]
    quad: usize,
    /// Lower bound on the radius of the reported window.
    #[arg(long)]
    window: Option<Index>,
}

impl SolverArgs {
    fn options(&self) -> DirectOptions {
        DirectOptions {
            n_trunc: self.trunc,
            tol: self.tol,
            quad: self.quad,
            max_quad: 4096.max(self.quad),
            window: self.window,
            ..DirectOptions::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the perturbed operator.
    Direct {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the spectrum here and print a table instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficients realizing a target spectrum.
    Inverse {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Coefficients of phi to keep fixed; only psi is solved for.
        #[arg(long)]
        fixed_phi: Option<PathBuf>,
        /// Write the coefficients here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the certificate here (default: standard output).
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Inverse, then direct, then compare with the target.
    Roundtrip {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Largest accepted matched deviation.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Dense eigenvalues of a finite section.
    Oracle {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        /// Window radius of the section.
        #[arg(long)]
        n: Index,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in examples.
    Gallery {
        #[arg(long, value_enum)]
        example: Example,
        /// Exponent of a_n = b_n = |n|^(-beta) in ex52.
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        window: Index,
        /// Run the example and print its checks.
        #[arg(long)]
        report: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Example {
    Periodic,
    Ex51,
    Ex52,
}

/// Failure of a subcommand: either an input problem (exit 1) or a solver
/// result that could not be certified (exit 2).
#[derive(Debug)]
enum Failure {
    Input(String),
    Uncertified(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Uncertified(e.to_string())
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_base(path: &Path) -> Result<ValidBase, Failure> {
    Ok(parse_base(&read(path)?)?.validate()?)
}

fn load_coeffs(path: &Path, base: &ValidBase) -> Result<ValidCoefficients, Failure> {
    Ok(parse_coefficients(&read(path)?)?.validate(base)?)
}

fn load_target(path: &Path, base: &ValidBase) -> Result<ValidTarget, Failure> {
    Ok(parse_target(&read(path)?)?.validate(base)?)
}

/// Writes through a temporary file in the destination directory so that a
/// failed run leaves no partial output.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_canonical_json(value)?;
    match out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_table(spectrum: &PerturbedSpectrum) {
    println!("{:>8}  {:>24}  {:>24}  {:>4}  origin", "index", "re(mu)", "im(mu)", "mult");
    for e in &spectrum.entries {
        let origin = serde_json::to_value(e.origin).ok();
        let origin = origin.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
        println!(
            "{:>8}  {:>24}  {:>24}  {:>4}  {origin}",
            e.paired_index, e.mu.re, e.mu.im, e.mult
        );
    }
    println!(
        "offset sum {}  tail bound {}  certified {}",
        spectrum.offset_sum, spectrum.tail_bound, spectrum.certified
    );
}

fn direct(spec: &Path, coeffs: &Path, solver: &SolverArgs, out: Option<&Path>) -> Outcome {
    let base = load_base(spec)?;
    let coeffs = load_coeffs(coeffs, &base)?;
    let solution = solve_direct_detailed(&base, &coeffs, &solver.options())?;
    emit(&solution.spectrum, out)?;
    if out.is_some() {
        print_table(&solution.spectrum);
    }
    Ok(solution.spectrum.certified)
}

fn run_inverse(target: &ValidTarget, fixed_phi: Option<&Path>) -> Result<InverseSolution, Failure> {
    Ok(match fixed_phi {
        Some(path) => solve_inverse_with_phi(target, &parse_fixed_phi(&read(path)?)?)?,
        None => solve_inverse(target)?,
    })
}

fn inverse(spec: &Path, target: &Path, fixed_phi: Option<&Path>, out: Option<&Path>, certificate: Option<&Path>) -> Outcome {
    let base = load_base(spec)?;
    let target = load_target(target, &base)?;
    let solution = run_inverse(&target, fixed_phi)?;
    let cert = solution.certificate();
    match out {
        Some(path) => {
            // certificate first: a failure leaves no coefficients behind
            emit(&cert, certificate)?;
            write_atomic(path, &to_canonical_json(&solution.coefficients)?)?;
        }
        None => {
            #[derive(Serialize)]
            struct Both<'a> {
                coefficients: &'a rank1_spectral::model::PerturbationCoefficients,
                certificate: &'a rank1_spectral::inverse::Certificate,
            }
            let both = Both {
                coefficients: &solution.coefficients,
                certificate: &cert,
            };
            match certificate {
                Some(path) => {
                    write_atomic(path, &to_canonical_json(&cert)?)?;
                    emit(&solution.coefficients, None)?;
                }
                None => emit(&both, None)?,
            }
        }
    }
    Ok(solution.discrepancy.within_bounds)
}

#[derive(Serialize)]
struct RoundtripReport {
    max_deviation: f64,
    tol: f64,
    certified: bool,
    pass: bool,
}

fn roundtrip(spec: &Path, target: &Path, tol: f64) -> Outcome {
    let base = load_base(spec)?;
    let target = load_target(target, &base)?;
    let solution = solve_inverse(&target)?;
    let coeffs = solution.coefficients.validate(&base)?;
    let spectrum = solve_direct_detailed(&base, &coeffs, &DirectOptions::default())?.spectrum;
    let expected: Vec<_> = spectrum.entries.iter().map(|e| target.nu(e.paired_index)).collect();
    let cmp = compare_values(&spectrum.eigenvalues(), &expected, tol)?;
    let report = RoundtripReport {
        max_deviation: cmp.max_distance,
        tol,
        certified: spectrum.certified,
        pass: cmp.pass && spectrum.certified,
    };
    emit(&report, None)?;
    if !cmp.pass {
        return Err(Failure::Uncertified(format!(
            "max matched deviation {:e} exceeds {tol:e}",
            cmp.max_distance
        )));
    }
    Ok(report.pass)
}

fn oracle(spec: &Path, coeffs: &Path, n: Index, out: Option<&Path>) -> Outcome {
    let base = load_base(spec)?;
    let coeffs = load_coeffs(coeffs, &base)?;
    emit(&oracle_report(&base, &coeffs, n)?, out)?;
    Ok(true)
}

#[derive(Serialize)]
struct GalleryDocument {
    spec: rank1_spectral::model::BaseSpectrum,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<rank1_spectral::model::PerturbationCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<GalleryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<PerturbedSpectrum>,
}

fn gallery(example: Example, beta: f64, window: Index, report: bool, out: Option<&Path>) -> Outcome {
    let opts = DirectOptions::default();
    let spec = gallery::example_periodic_base();
    let coefficients = match example {
        Example::Periodic => None,
        Example::Ex51 => Some(gallery::example_51(window)?.coefficients),
        Example::Ex52 => Some(gallery::example_52(beta)?),
    };
    let mut doc = GalleryDocument {
        spec,
        coefficients,
        report: None,
        spectrum: None,
    };
    if !report {
        emit(&doc, out)?;
        return Ok(true);
    }
    let (spectrum, result) = match example {
        Example::Periodic => (None, gallery::report_periodic()?),
        Example::Ex51 => {
            let (s, r) = gallery::report_51(window, &opts)?;
            (Some(s), r)
        }
        Example::Ex52 => {
            let (s, r) = gallery::report_52(beta, window, &opts)?;
            (Some(s), r)
        }
    };
    for check in &result.checks {
        println!("{}", check.line());
    }
    let passed = result.passed();
    if let Some(path) = out {
        doc.report = Some(result);
        doc.spectrum = spectrum;
        emit(&doc, Some(path))?;
    }
    Ok(passed)
}

fn configure_threads() {
    if let Some(n) = std::env::var("RANK1_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let outcome = match &cli.command {
        Command::Direct {
            spec,
            coeffs,
            solver,
            out,
        } => direct(spec, coeffs, solver, out.as_deref()),
        Command::Inverse {
            spec,
            target,
            fixed_phi,
            out,
            certificate,
        } => inverse(spec, target, fixed_phi.as_deref(), out.as_deref(), certificate.as_deref()),
        Command::Roundtrip { spec, target, tol } => roundtrip(spec, target, *tol),
        Command::Oracle { spec, coeffs, n, out } => oracle(spec, coeffs, *n, out.as_deref()),
        Command::Gallery {
            example,
            beta,
            window,
            report,
            out,
        } => gallery(*example, *beta, *window, *report, out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("NotCertified: result could not be certified");
            ExitCode::from(2)
        }
        Err(Failure::Uncertified(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
