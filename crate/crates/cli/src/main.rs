mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use admissible::bridge::{decomp_to_isometry, domain_defect, gram_matrix, isometry_to_decomp};
use admissible::carpenter::{carpenter_decompose, CarpenterConfig, ProjectionStream};
use admissible::checkers::sum_of_projections_check;
use admissible::io::{self, Entry};
use admissible::operators::{eigenvalues_desc, frame_operator, residual_norm, CMatrix};
use admissible::seqkit::{kadison_check, majorizes};
use admissible::{Error, Scalar, Seq64};
use clap::{Parser, Subcommand};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use report::{ext, CaseSummary, CertSummary, InputDigest, RunReport};

#[derive(Parser)]
#[command(name = "admissible", version, about = "Rank-one decompositions with prescribed weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a weight sequence against the Kadison condition.
    CheckKadison {
        seq: PathBuf,
        #[arg(long, default_value = "0.5")]
        alpha: String,
        /// Use exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Test whether XI is majorized by ETA (finite sequences).
    CheckMajorize {
        xi: PathBuf,
        eta: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Decompose the stream operator against a weight sequence.
    Decompose {
        seq: PathBuf,
        stream: PathBuf,
        #[arg(long, default_value_t = 10)]
        stages: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        extend_limit: usize,
        /// Seed for random streams that do not carry their own.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the decomposition.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the operator the decomposition realizes.
        #[arg(long)]
        operator_out: Option<PathBuf>,
    },
    /// Recompute the frame operator of a decomposition and compare it with an operator.
    Verify {
        decomp: PathBuf,
        operator: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Decide whether a positive matrix is a finite sum of projections.
    CheckSums {
        operator: PathBuf,
        /// Write rank-one projections summing to the operator here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Convert a decomposition to a partial isometry, or back with --operator and --isometry.
    Bridge {
        decomp: Option<PathBuf>,
        #[arg(long, requires = "isometry", conflicts_with = "decomp")]
        operator: Option<PathBuf>,
        #[arg(long, requires = "operator")]
        isometry: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

enum Fail {
    Math(Error),
    Io(&'static str, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(msg) => Fail::Io("parse", msg),
            e => Fail::Math(e),
        }
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn read(report: &mut RunReport, path: &Path) -> Res<String> {
    let bytes = fs::read(path).map_err(|e| Fail::Io("io", format!("{}: {e}", path.display())))?;
    report.inputs.push(InputDigest::new(path, &bytes));
    String::from_utf8(bytes).map_err(|e| Fail::Io("parse", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Fail::Io("io", format!("{}: {e}", path.display())))
}

fn parse_alpha<S: Scalar>(s: &str) -> Res<S> {
    S::parse_decimal(s).ok_or_else(|| Fail::Io("parse", format!("bad --alpha {s:?}")))
}

fn kadison<S: Scalar>(report: &mut RunReport, text: &str, alpha: &str) -> Res<()> {
    let seq = io::parse_sequence::<S>(text)?;
    let r = kadison_check(&seq, &parse_alpha::<S>(alpha)?)?;
    report.verdict("kind", seq.kind().name());
    report.verdict("a", ext(&r.a));
    report.verdict("b", ext(&r.b));
    report.verdict("integer_gap", r.integer_gap);
    report.check("satisfied", r.satisfied);
    Ok(())
}

fn majorize<S: Scalar>(report: &mut RunReport, xi: &str, eta: &str) -> Res<()> {
    let v = majorizes(&io::parse_sequence::<S>(xi)?, &io::parse_sequence::<S>(eta)?)?;
    report.verdict("failing_index", v.failing_index);
    report.verdict("sum_gap", serde_json::to_value(io::Num::of(&v.sum_gap)).expect("number"));
    report.check("holds", v.holds);
    Ok(())
}

/// Real `V` matrix file: `{"rows", "cols", "entries"}` row-major.
#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl MatrixFile {
    fn of(m: &CMatrix<f64>) -> Self {
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: (0..m.nrows() * m.ncols())
                .map(|k| Entry::of(&m[(k / m.ncols(), k % m.ncols())]))
                .collect(),
        }
    }

    fn to_matrix(&self) -> Res<CMatrix<f64>> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Fail::Io("parse", format!("matrix needs {} entries", self.rows * self.cols)));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| self.entries[i * self.cols + j].get()))
    }
}

fn run(cmd: Command, report: &mut RunReport) -> Res<()> {
    match cmd {
        Command::CheckKadison { seq, alpha, exact } => {
            let text = read(report, &seq)?;
            report.verdict("exact", exact);
            if exact {
                kadison::<BigRational>(report, &text, &alpha)
            } else {
                kadison::<f64>(report, &text, &alpha)
            }
        }
        Command::CheckMajorize { xi, eta, exact } => {
            let (xi, eta) = (read(report, &xi)?, read(report, &eta)?);
            report.verdict("exact", exact);
            if exact {
                majorize::<BigRational>(report, &xi, &eta)
            } else {
                majorize::<f64>(report, &xi, &eta)
            }
        }
        Command::Decompose {
            seq,
            stream,
            stages,
            tol,
            extend_limit,
            seed,
            out,
            operator_out,
        } => {
            let xi: Seq64 = io::parse_sequence(&read(report, &seq)?)?;
            let stream = io::parse_stream::<f64>(&read(report, &stream)?, seed)?;
            let config = CarpenterConfig {
                stages,
                extend_limit,
                tol,
            };
            let orthonormal = matches!(stream, ProjectionStream::OrthonormalBasis);
            let output = carpenter_decompose(&xi, &stream, &config)?;
            report.case = Some(CaseSummary::from(output.case));
            report.certificates = output.certificates.iter().map(CertSummary::from).collect();
            let max = output.max_residual();
            report.max_residual = Some(max);
            report.verdict("dim", output.dim());
            report.verdict("terms", output.terms.len());
            if let Some(run) = &output.keycase {
                // the coefficient bounds are stated for orthonormal u_j only
                let ok = run.stages.iter().all(|s| s.bounds_ok);
                if orthonormal {
                    report.check("keycase_bounds", ok);
                } else {
                    report.verdict("keycase_bounds_informational", ok);
                }
            }
            report.check("remainders_ok", output.certificates.iter().all(|c| c.remainder_ok));
            report.check("residual_within_tol", max <= tol);
            if let Some(p) = out {
                write(&p, &io::decomp_to_json(&output.decomp(), Some(&output.positions())))?;
            }
            if let Some(p) = operator_out {
                write(&p, &io::operator_to_json(&output.target))?;
            }
            Ok(())
        }
        Command::Verify { decomp, operator, tol } => {
            let d = io::parse_decomp::<f64>(&read(report, &decomp)?)?;
            let a = io::parse_operator::<f64>(&read(report, &operator)?)?;
            let r = residual_norm(&a, &d).map_err(|e| match e {
                Error::DimensionMismatch { .. } => Fail::Io("dimension", e.to_string()),
                e => Fail::Math(e),
            })?;
            report.max_residual = Some(r);
            report.verdict("terms", d.len());
            report.check("residual_within_tol", r <= tol);
            Ok(())
        }
        Command::CheckSums { operator, witness } => {
            let a = io::parse_operator::<f64>(&read(report, &operator)?)?;
            let r = sum_of_projections_check(&a, witness.is_some())?;
            report.verdict("excess", r.excess);
            report.verdict("deficiency", r.deficiency);
            report.verdict("gap", r.gap);
            report.check("is_sum", r.is_sum);
            if let (Some(p), Some(w)) = (witness, &r.witness) {
                let res = residual_norm(&a, w)?;
                report.max_residual = Some(res);
                report.verdict("witness_terms", w.len());
                report.check("witness_residual_ok", res <= 1e-8);
                write(&p, &io::decomp_to_json(w, None))?;
            }
            Ok(())
        }
        Command::Bridge {
            decomp,
            operator,
            isometry,
            out,
            tol,
        } => match (decomp, operator, isometry) {
            (Some(dp), None, None) => {
                let d = io::parse_decomp::<f64>(&read(report, &dp)?)?;
                let rec = decomp_to_isometry(&d);
                let weights: Vec<f64> = d
                    .weights()
                    .into_iter()
                    .enumerate()
                    .filter(|(j, _)| !rec.dropped.contains(j))
                    .map(|(_, w)| w)
                    .collect();
                let diag_err = weights.iter().zip(&rec.diag).fold(0.0f64, |m, (w, x)| m.max((w - x).abs()));
                let defect = domain_defect(&rec);
                let g = eigenvalues_desc(&gram_matrix(&d));
                let f = eigenvalues_desc(&frame_operator(&d));
                let spectra = g.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                report.max_residual = Some(diag_err.max(defect));
                report.verdict("dropped", rec.dropped.len());
                report.verdict("diag_error", diag_err);
                report.verdict("domain_defect", defect);
                report.verdict("spectra_gap", spectra);
                report.check("diag_ok", diag_err <= tol);
                report.check("domain_ok", defect <= tol);
                report.check("spectra_ok", spectra <= tol.max(1e-9));
                if let Some(p) = out {
                    write(&p, &io::to_json(&MatrixFile::of(&rec.v.matrix)))?;
                }
                Ok(())
            }
            (None, Some(ap), Some(vp)) => {
                let a = io::parse_operator::<f64>(&read(report, &ap)?)?;
                let vf: MatrixFile =
                    serde_json::from_str(&read(report, &vp)?).map_err(|e| Fail::Io("parse", e.to_string()))?;
                let d = isometry_to_decomp(&a, &vf.to_matrix()?)?;
                let r = residual_norm(&a, &d)?;
                report.max_residual = Some(r);
                report.verdict("terms", d.len());
                report.check("residual_within_tol", r <= tol);
                if let Some(p) = out {
                    write(&p, &io::decomp_to_json(&d, None))?;
                }
                Ok(())
            }
            _ => Err(Fail::Io("usage", "give a decomposition, or both --operator and --isometry".into())),
        },
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckKadison { .. } => "check-kadison",
        Command::CheckMajorize { .. } => "check-majorize",
        Command::Decompose { .. } => "decompose",
        Command::Verify { .. } => "verify",
        Command::CheckSums { .. } => "check-sums",
        Command::Bridge { .. } => "bridge",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = RunReport::new(name(&cli.command));
    match run(cli.command, &mut report) {
        Ok(()) => {}
        Err(Fail::Math(e)) => report.refuse(&e),
        Err(Fail::Io(reason, msg)) => report.io_failure(reason, msg),
    }
    if let Some(msg) = &report.message {
        eprintln!("admissible: {msg}");
    }
    print!("{}", io::to_json(&report));
    ExitCode::from(report.exit_code as u8)
}
