//! Command-line front end: verification, cohomology tables, bundle
//! decomposition, Tate windows, stable Hom dimensions, named examples, and
//! section-level minimization, over documents in the `doc` format.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use strand_cli::doc::{emit_complex_document, parse_complex_document, parse_field};
use strand_cli::render::{fiber_outcome_string, spoly_string};
use strand_core::bgg::cohomology_table;
use strand_core::bgg::l_of_complex;
use strand_core::exactla::Field;
use strand_core::gallery::{build_example, monad_report, ExampleOutput, MonadSpec};
use strand_core::lamcomplex::{
    hom_complex_homology, is_ht, is_minimal, quotient_f, verify_complex, FreeComplex,
};
use strand_core::minimize::{decompose_bundle, minimize_complex};
use strand_core::tate::{extract_ht, is_isomorphic_minimal, tate_window, IsoOutcome};

#[derive(Parser)]
#[command(
    name = "strand",
    version,
    about = "Complexes of free modules over an exterior algebra: verification, \
             cohomology tables, Tate windows, and named bundle constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad bound '{}'", lo))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad bound '{}'", hi))?;
    if lo > hi {
        return Err(format!("empty range {}:{}", lo, hi));
    }
    Ok((lo, hi))
}

fn field_value(s: &str) -> Result<Field, String> {
    parse_field(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document and report verification, minimality, and the HT property.
    Check { file: PathBuf },
    /// Print the table h^i(E(d)) of the bundle of an HT-complex.
    Cohomology {
        file: PathBuf,
        /// Degree window lo:hi.
        #[arg(long, value_parser = parse_range, default_value = "-5:5", allow_hyphen_values = true)]
        degrees: (i64, i64),
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Split the bundle into line-bundle summands and a core of smaller rank.
    Decompose { file: PathBuf },
    /// Compute a Tate window and verify the extraction roundtrip.
    Tate {
        file: PathBuf,
        /// Position window lo:hi (default -n:n).
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        window: Option<(i64, i64)>,
        /// Random candidates tried per isomorphism search.
        #[arg(long, default_value_t = 6)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dimension of the stable Hom space from the first to the second complex.
    Stablehom { a: PathBuf, b: PathBuf },
    /// Build a named example and report its invariants.
    Example {
        /// One of: koszul, eilenberg_maclane, null_correlation, tango_vetter,
        /// horrocks_p5, horrocks_mumford_seed.
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        i: Option<i64>,
        #[arg(long, value_parser = field_value, default_value = "Q")]
        field: Field,
        /// Extra sampled points for fiber checks over Q.
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the complex as a parseable document instead of the report.
        #[arg(long)]
        emit: bool,
    },
    /// Minimize the section-level complex of a document and dump it.
    Minimize { file: PathBuf },
}

fn load(path: &Path) -> anyhow::Result<FreeComplex> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_complex_document(&text)?)
}

fn twist_lists(complex: &FreeComplex) -> serde_json::Value {
    let map: std::collections::BTreeMap<i64, Vec<i64>> = complex
        .positions()
        .into_iter()
        .map(|p| (p, complex.term(p).twists.clone()))
        .collect();
    serde_json::to_value(map).expect("twist lists serialize")
}

fn run_check(file: &Path) -> anyhow::Result<()> {
    let complex = load(file)?;
    let report = verify_complex(&complex);
    println!(
        "{}",
        json!({
            "passed": report.passed,
            "minimal": is_minimal(&complex),
            "is_ht": is_ht(&complex),
            "positions": complex.positions(),
            "terms": twist_lists(&complex),
            "failures": report.failures,
        })
    );
    Ok(())
}

fn run_cohomology(file: &Path, degrees: (i64, i64), format: Format) -> anyhow::Result<()> {
    let complex = load(file)?;
    let table = cohomology_table(&complex, degrees.0, degrees.1)?;
    match format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Md => print!("{}", table.to_markdown()),
        Format::Json => {
            let mut entries: Vec<serde_json::Value> = Vec::new();
            for i in 0..=table.n as i64 {
                for d in table.d_lo..=table.d_hi {
                    let h = table.get(i, d).unwrap_or(0);
                    if h > 0 {
                        entries.push(json!({"i": i, "d": d, "h": h}));
                    }
                }
            }
            println!(
                "{}",
                json!({
                    "n": table.n,
                    "d_lo": table.d_lo,
                    "d_hi": table.d_hi,
                    "entries": entries,
                })
            );
        }
    }
    Ok(())
}

fn decompose_value(complex: &FreeComplex) -> anyhow::Result<serde_json::Value> {
    let report = decompose_bundle(complex)?;
    let split: u64 = report.r.values().map(|&x| x as u64).sum();
    Ok(json!({
        "z0": report.z0,
        "split_rank": serde_json::to_value(&report.r)?,
        "split_rank_total": split,
        "bundle_rank": report.bundle_rank,
        "twist_profile": serde_json::to_value(&report.bundle_twist_profile)?,
    }))
}

fn run_decompose(file: &Path) -> anyhow::Result<()> {
    let complex = load(file)?;
    println!("{}", decompose_value(&complex)?);
    Ok(())
}

fn run_tate(
    file: &Path,
    window: Option<(i64, i64)>,
    samples: usize,
    seed: u64,
) -> anyhow::Result<()> {
    let complex = load(file)?;
    if !is_minimal(&complex) {
        bail!("the Tate roundtrip needs a minimal complex");
    }
    let (p_lo, p_hi) = window.unwrap_or((-(complex.n as i64), complex.n as i64));
    let win = tate_window(&complex, p_lo, p_hi)?;
    let extracted = extract_ht(&win)?;
    let target = quotient_f(&complex)?;
    let roundtrip = match is_isomorphic_minimal(&extracted, &target, samples, seed)? {
        IsoOutcome::Isomorphic(_) => "isomorphic".to_string(),
        IsoOutcome::NotIsomorphic(reason) => format!("not isomorphic: {}", reason),
        IsoOutcome::Undetermined => "undetermined".to_string(),
    };
    let middle: Vec<serde_json::Value> = win
        .middle
        .support()
        .into_iter()
        .map(|(i, d, m)| json!({"i": i, "d": d, "dim": m}))
        .collect();
    println!(
        "{}",
        json!({
            "p_lo": win.p_lo,
            "p_hi": win.p_hi,
            "regularity": win.r,
            "window_terms": twist_lists(&win.complex),
            "middle_cohomology": middle,
            "extracted_terms": twist_lists(&extracted),
            "roundtrip": roundtrip,
        })
    );
    Ok(())
}

fn run_stablehom(a: &Path, b: &Path) -> anyhow::Result<()> {
    let ka = load(a)?;
    let gb = load(b)?;
    if ka.n != gb.n || ka.field != gb.field {
        bail!("stable Hom needs both complexes over the same (n, field)");
    }
    let hom = hom_complex_homology(&ka, &gb, 0);
    println!("{}", json!({"dim": hom.dim}));
    Ok(())
}

fn monad_value(spec: &MonadSpec, samples: usize, seed: u64) -> anyhow::Result<serde_json::Value> {
    let report = monad_report(spec, samples, seed)?;
    Ok(json!({
        "rank_e": report.rank_e,
        "dim_h": report.dim_h,
        "dim_k": report.dim_k,
        "composite_zero": report.composite_zero,
        "mono": fiber_outcome_string(&report.mono),
        "epi": fiber_outcome_string(&report.epi),
        "cohomology_rank": report.cohomology_rank,
    }))
}

fn run_example(
    name: &str,
    field: Field,
    n: Option<usize>,
    i: Option<i64>,
    samples: usize,
    seed: u64,
    emit: bool,
) -> anyhow::Result<()> {
    let output = build_example(name, field, n, i)?;
    let complex = output.complex();
    if emit {
        print!("{}", emit_complex_document(complex));
        return Ok(());
    }
    let mut value = json!({
        "name": name,
        "field": strand_cli::doc::field_name(field),
        "n": complex.n,
        "is_ht": is_ht(complex),
        "terms": twist_lists(complex),
        "decompose": decompose_value(complex)?,
    });
    let object = value.as_object_mut().expect("report object");
    object.insert(
        "bundle_rank".to_string(),
        json!(decompose_bundle(complex)?.bundle_rank),
    );
    if let ExampleOutput::Monad(spec) = &output {
        object.insert("monad".to_string(), monad_value(spec, samples, seed)?);
    }
    println!("{}", value);
    Ok(())
}

fn run_minimize(file: &Path) -> anyhow::Result<()> {
    let complex = load(file)?;
    let minimal = minimize_complex(&l_of_complex(&complex));
    let terms: std::collections::BTreeMap<i64, Vec<i64>> = minimal
        .positions()
        .into_iter()
        .map(|s| (s, minimal.term(s).iter().map(|t| t.twist).collect()))
        .collect();
    let mut entries = Vec::new();
    for &s in &minimal.positions() {
        let d = minimal.diff(s);
        for (row, row_entries) in d.iter().enumerate() {
            for (col, poly) in row_entries.iter().enumerate() {
                if !poly.is_zero() {
                    entries.push(json!({
                        "position": s,
                        "row": row,
                        "col": col,
                        "poly": spoly_string(poly),
                    }));
                }
            }
        }
    }
    println!(
        "{}",
        json!({
            "positions": minimal.positions(),
            "terms": serde_json::to_value(terms)?,
            "entries": entries,
        })
    );
    Ok(())
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Check { file } => run_check(&file),
        Command::Cohomology {
            file,
            degrees,
            format,
        } => run_cohomology(&file, degrees, format),
        Command::Decompose { file } => run_decompose(&file),
        Command::Tate {
            file,
            window,
            samples,
            seed,
        } => run_tate(&file, window, samples, seed),
        Command::Stablehom { a, b } => run_stablehom(&a, &b),
        Command::Example {
            name,
            n,
            i,
            field,
            samples,
            seed,
            emit,
        } => run_example(&name, field, n, i, samples, seed, emit),
        Command::Minimize { file } => run_minimize(&file),
    }
}

fn main() -> ExitCode {
    // Restore default SIGPIPE so that piping into `head` exits quietly
    // instead of panicking on the closed descriptor.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            ExitCode::from(1)
        }
    }
}
