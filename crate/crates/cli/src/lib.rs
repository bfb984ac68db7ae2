//! The `pibase` command line.
//!
//! Exit codes: 0 success, 1 findings (load errors, contradictions, a
//! trait with no proof), 2 usage errors.

mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use pibase_core::corpus::Namespace;
use pibase_core::deduction::{assess, Assessment, Implication, Provenance};
use pibase_core::id::EntityId;
use pibase_core::logic::{display_query, parse_query, Literal};
use pibase_core::search::{search, Verdict};
use pibase_core::{Database, Propagation, ValidationReport};
use pibase_service::{ApiConfig, StartError};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pibase",
    version,
    about = "Validate, deduce over and query a topology counterexample bundle"
)]
struct Cli {
    /// Root directory of the bundle.
    #[arg(long, global = true, default_value = ".")]
    bundle: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, close and report every error and contradiction.
    Validate,
    /// Close every space; json prints the full closures.
    Deduce,
    /// Find spaces matching a conjunction such as `Discrete + ~T0`.
    Search {
        #[arg(short = 'q', long = "query")]
        query: String,
    },
    /// Explain one trait of one space.
    Prove { space: String, property: String },
    /// Check a candidate theorem against the theorems and the spaces.
    CheckTheorem {
        /// Premises as `P=bool`, comma separated.
        #[arg(long = "if", value_delimiter = ',', required = true)]
        premises: Vec<String>,
        /// Conclusion as `P=bool`.
        #[arg(long = "then")]
        conclusion: String,
    },
    /// Entity counts.
    Stats,
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Allowed CORS origin, `*` for any.
        #[arg(long, default_value = "*")]
        cors_origin: String,
    },
}

struct Output<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    format: Format,
}

impl Output<'_> {
    fn json<T: Serialize>(&mut self, value: &T) {
        let text = serde_json::to_string_pretty(value).expect("serializable");
        let _ = writeln!(self.out, "{text}");
    }

    fn text(&mut self, text: &str) {
        let _ = self.out.write_all(text.as_bytes());
    }

    fn usage(&mut self, message: impl std::fmt::Display) -> u8 {
        let _ = writeln!(self.err, "error: {message}");
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut o = Output {
        out,
        err,
        format: cli.format,
    };
    if let Command::Serve {
        port,
        bind,
        cors_origin,
    } = cli.command
    {
        return serve(&mut o, cli.bundle, SocketAddr::new(bind, port), cors_origin);
    }
    let db = match Database::load(&cli.bundle) {
        Ok(db) => db,
        Err(report) => {
            let report = ValidationReport::from(report);
            if matches!(cli.command, Command::Validate) {
                print_report(&mut o, &report, None);
            } else {
                let _ = write!(o.err, "{}", report_text(&report, None));
            }
            return EXIT_FINDINGS;
        }
    };
    match cli.command {
        Command::Validate => {
            let report = db.report();
            print_report(&mut o, &report, Some(&db));
            if report.is_clean() {
                EXIT_OK
            } else {
                EXIT_FINDINGS
            }
        }
        Command::Deduce => deduce(&mut o, &db),
        Command::Search { query } => run_search(&mut o, &db, &query),
        Command::Prove { space, property } => prove(&mut o, &db, &space, &property),
        Command::CheckTheorem {
            premises,
            conclusion,
        } => check(&mut o, &db, &premises, &conclusion),
        Command::Stats => stats(&mut o, &db),
        Command::Serve { .. } => unreachable!(),
    }
}

fn report_text(report: &ValidationReport, db: Option<&Database>) -> String {
    let mut s = String::new();
    for e in &report.errors {
        let _ = writeln!(s, "{e}");
    }
    for c in &report.contradictions {
        match db {
            Some(db) => {
                let _ = writeln!(
                    s,
                    "contradiction in {}:",
                    render::entity(&db.bundle, c.space)
                );
                render::contradiction(&mut s, &db.bundle, &c.contradiction, "asserted", "  ");
            }
            None => {
                let _ = writeln!(s, "contradiction in {}", c.space);
            }
        }
    }
    let _ = writeln!(
        s,
        "{} error(s), {} contradiction(s)",
        report.errors.len(),
        report.contradictions.len()
    );
    s
}

fn print_report(o: &mut Output, report: &ValidationReport, db: Option<&Database>) {
    match o.format {
        Format::Json => o.json(&json!({
            "valid": report.is_clean(),
            "errors": report.errors,
            "contradictions": report.contradictions,
        })),
        Format::Text if report.is_clean() => {
            let b = &db.expect("clean reports come with a database").bundle;
            o.text(&format!(
                "valid: {} properties, {} spaces, {} theorems, {} traits\n",
                b.property_count(),
                b.space_count(),
                b.theorem_count(),
                b.assertion_count()
            ));
        }
        Format::Text => o.text(&report_text(report, db)),
    }
}

fn deduce(o: &mut Output, db: &Database) -> u8 {
    match o.format {
        Format::Json => o.json(&db.closed),
        Format::Text => {
            let mut s = String::new();
            for (space, p) in &db.closed.spaces {
                let name = db.bundle.display_name(*space);
                match p {
                    Propagation::Closed(c) => {
                        let _ = writeln!(
                            s,
                            "{space}  asserted {:>3}  derived {:>3}  {name}",
                            c.asserted.len(),
                            c.derived_count()
                        );
                    }
                    Propagation::Contradiction(c) => {
                        let _ = writeln!(s, "{space}  contradiction on {}  {name}", c.property);
                    }
                }
            }
            o.text(&s);
        }
    }
    if db.closed.is_consistent() {
        EXIT_OK
    } else {
        EXIT_FINDINGS
    }
}

fn run_search(o: &mut Output, db: &Database, text: &str) -> u8 {
    let query = match parse_query(text, &db.bundle) {
        Ok(q) => q,
        Err(e) => return o.usage(e),
    };
    let result = match search(&query, &db.bundle, &db.closed, &db.engine) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(o.err, "error: {e}");
            return EXIT_FINDINGS;
        }
    };
    match o.format {
        Format::Json => o.json(&result),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "query: {}", display_query(&query, &db.bundle));
            let _ = writeln!(s, "{} match(es)", result.matches.len());
            for &m in &result.matches {
                let _ = writeln!(s, "  {}", render::entity(&db.bundle, m));
            }
            let unknown = result
                .verdicts
                .values()
                .filter(|v| matches!(v, Verdict::Unknown { .. }))
                .count();
            if unknown > 0 {
                let _ = writeln!(s, "{unknown} space(s) undecided");
            }
            if let Some(proof) = &result.impossibility {
                let _ = writeln!(s, "no space can match; the query contradicts the theorems:");
                render::contradiction(&mut s, &db.bundle, &proof.contradiction, "assumed", "  ");
            }
            o.text(&s);
        }
    }
    EXIT_OK
}

fn resolve(
    o: &mut Output,
    db: &Database,
    text: &str,
    namespace: Namespace,
) -> Result<EntityId, u8> {
    db.bundle
        .resolve_name(text, namespace)
        .map_err(|e| o.usage(e))
}

fn prove(o: &mut Output, db: &Database, space: &str, property: &str) -> u8 {
    let (space, property) = match (
        resolve(o, db, space, Namespace::Space),
        resolve(o, db, property, Namespace::Property),
    ) {
        (Ok(s), Ok(p)) => (s, p),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    let Some(closure) = db.closed.closure(space) else {
        let _ = writeln!(
            o.err,
            "error: {space} has contradictory traits; run validate"
        );
        return EXIT_FINDINGS;
    };
    let (Some(value), Some(provenance)) = (
        closure.value(property),
        Provenance::of(&db.bundle, space, closure, property),
    ) else {
        let _ = writeln!(o.err, "{property} is not determined for {space}");
        return EXIT_FINDINGS;
    };
    match o.format {
        Format::Json => o.json(&json!({
            "space": space,
            "property": property,
            "value": value,
            "provenance": provenance,
        })),
        Format::Text => {
            let mut s = format!(
                "{} ⊨ {} = {value}\n",
                render::entity(&db.bundle, space),
                render::entity(&db.bundle, property)
            );
            render::provenance(&mut s, &db.bundle, property, value, &provenance, "  ");
            o.text(&s);
        }
    }
    EXIT_OK
}

fn literal_arg(db: &Database, text: &str) -> Result<Literal, String> {
    let (name, value) = text
        .rsplit_once('=')
        .ok_or_else(|| format!("`{text}` is not of the form P=true or P=false"))?;
    let value = match value.trim().to_ascii_lowercase().as_str() {
        "true" => true,
        "false" => false,
        other => return Err(format!("`{other}` is not true or false")),
    };
    let property = db
        .bundle
        .resolve_name(name, Namespace::Property)
        .map_err(|e| e.to_string())?;
    Ok(Literal::new(property, value))
}

fn check(o: &mut Output, db: &Database, premises: &[String], conclusion: &str) -> u8 {
    let parsed: Result<Vec<Literal>, String> =
        premises.iter().map(|p| literal_arg(db, p)).collect();
    let (premises, conclusion) = match (parsed, literal_arg(db, conclusion)) {
        (Ok(p), Ok(c)) => (p, c),
        (Err(e), _) | (_, Err(e)) => return o.usage(e),
    };
    let candidate = Implication::new(premises, conclusion);
    let verdict = match assess(&candidate, &db.bundle, &db.engine, &db.closed) {
        Ok(v) => v,
        Err(e) => return o.usage(e),
    };
    match o.format {
        Format::Json => o.json(&json!({ "candidate": candidate, "verdict": verdict })),
        Format::Text => {
            let b = &db.bundle;
            let mut s = format!(
                "candidate: {}\n",
                render::implication(b, &candidate.premises, candidate.conclusion)
            );
            match &verdict {
                Assessment::Redundant { proof } => {
                    s.push_str("redundant: the theorems already prove it\n");
                    render::proof(&mut s, b, proof, "assumed", "  ");
                }
                Assessment::RefutedByTheory { proof } => {
                    s.push_str("refuted by the theorems: they prove the opposite conclusion\n");
                    render::proof(&mut s, b, proof, "assumed", "  ");
                }
                Assessment::Vacuous { contradiction } => {
                    s.push_str("vacuous: the premises contradict the theorems\n");
                    render::contradiction(&mut s, b, contradiction, "assumed", "  ");
                }
                Assessment::Refuted { counterexamples } => {
                    s.push_str("refuted by counterexample(s):\n");
                    for w in counterexamples {
                        let origin = match w.provenance {
                            Provenance::Asserted { .. } => "asserted",
                            Provenance::Derived { .. } => "derived",
                        };
                        let _ = writeln!(
                            s,
                            "  {}: {} ({origin})",
                            render::entity(b, w.space),
                            render::literal(b, w.refuting)
                        );
                    }
                }
                Assessment::NotDerivable { undecided } => {
                    s.push_str(
                        "not derivable: the theorems do not decide it and no space refutes it\n",
                    );
                    let _ = writeln!(
                        s,
                        "{} space(s) undecided on its properties",
                        undecided.len()
                    );
                    for &u in undecided {
                        let _ = writeln!(s, "  {}", render::entity(b, u));
                    }
                }
            }
            o.text(&s);
        }
    }
    EXIT_OK
}

fn stats(o: &mut Output, db: &Database) -> u8 {
    let b = &db.bundle;
    let derived: usize = db.closed.closures().map(|(_, c)| c.derived_count()).sum();
    let counts = json!({
        "properties": b.property_count(),
        "spaces": b.space_count(),
        "theorems": b.theorem_count(),
        "traits": b.assertion_count(),
        "derived_traits": derived,
        "contradictions": db.closed.contradictions().count(),
    });
    match o.format {
        Format::Json => o.json(&counts),
        Format::Text => {
            let mut s = String::new();
            for key in [
                "properties",
                "spaces",
                "theorems",
                "traits",
                "derived_traits",
                "contradictions",
            ] {
                let _ = writeln!(s, "{key:<15} {}", counts[key]);
            }
            o.text(&s);
        }
    }
    EXIT_OK
}

fn serve(o: &mut Output, bundle: PathBuf, bind: SocketAddr, cors_origin: String) -> u8 {
    let config = ApiConfig {
        bind,
        bundle,
        read_only: true,
        cors_origin,
    };
    match pibase_service::run_blocking(config) {
        Ok(()) => EXIT_OK,
        Err(StartError::Invalid(report)) => {
            let _ = write!(o.err, "{}", report_text(&report, None));
            EXIT_FINDINGS
        }
        Err(e @ StartError::Config(_)) => o.usage(e),
        Err(e) => {
            let _ = writeln!(o.err, "error: {e}");
            EXIT_FINDINGS
        }
    }
}
