//! The `pqcat` command line: argument parsing, dispatch and record output.
//!
//! Every command emits [`OutputRecord`]s as JSON lines (default) or CSV. Keys
//! are sorted and unbounded integers are decimal strings. Exit codes: 0 on
//! success, 1 on a domain error or failed verification, 2 when a resource
//! guard trips, 64 on a usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{self, Form, InequalityInstance, LogBase};
use crate::catalan;
use crate::config::{Limits, ENV_PRECISION, ENV_SIEVE_SEGMENT};
use crate::digits::{self, PrimePower};
use crate::error::{Error, Result};
use crate::exceptions::{self, ExceptionKind};
use crate::modular::Granville;
use crate::residues;
use crate::squarefree::{self, ScanOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// One line of output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub result: Value,
}

impl OutputRecord {
    fn new(command: &str, inputs: Value, result: Value) -> Self {
        let inputs = match inputs {
            Value::Object(map) => map.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        OutputRecord {
            command: command.to_string(),
            inputs,
            provenance: None,
            result,
        }
    }

    fn with_provenance(mut self, text: &str) -> Self {
        self.provenance = Some(text.to_string());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "pqcat",
    version,
    about = "Prime-power Catalan numbers: valuations, residues, exceptions, squarefree scans"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Jsonl, global = true)]
    format: Format,

    /// Working precision (bits) for the analytic commands.
    #[arg(long, env = ENV_PRECISION, global = true)]
    precision: Option<u32>,

    /// Odd-only flags per sieve segment.
    #[arg(long, env = ENV_SIEVE_SEGMENT, global = true)]
    sieve_segment: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PrimePowerArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    q: u32,
}

impl PrimePowerArgs {
    fn build(&self) -> Result<PrimePower> {
        PrimePower::new(self.p, self.q)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Base-p digits and digit sum of n.
    Digits {
        #[arg(long, value_parser = parse_big)]
        n: Integer,
        #[arg(long)]
        p: u64,
    },
    /// v_p(F(p^q, n)), or v_p(C(m, n)) with --m.
    Valuation {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_big)]
        n: Integer,
        #[arg(long, value_parser = parse_big)]
        m: Option<Integer>,
    },
    /// Exact F(s, n), or F(p^q, n) mod p^q with --p/--q.
    Catalan {
        #[arg(long, conflicts_with = "p")]
        s: Option<u64>,
        #[arg(long, requires = "q")]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, value_parser = parse_big)]
        n: Integer,
    },
    /// C(m, n) mod p^q as p^e0 times a unit, and mod p by Lucas.
    Granville {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_big)]
        m: Integer,
        #[arg(long, value_parser = parse_big)]
        n: Integer,
    },
    /// Exceptional n <= bound (p^q does not divide F(p^q, n)).
    Exceptions {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_big, required_unless_present = "count")]
        bound: Option<Integer>,
        /// Attach F(p^q, n) mod p^q to every exception.
        #[arg(long)]
        residues: bool,
        /// Count q = 2 exceptions with odd-exponent indices below this bound instead.
        #[arg(long, conflicts_with = "bound")]
        count: Option<u64>,
    },
    /// Residue set of F(p^2, n) mod p^2.
    Residues {
        #[arg(long, required_unless_present = "sequence")]
        p: Option<u64>,
        /// Residue-set sizes for s = 1..=S.
        #[arg(long, conflicts_with = "p")]
        sequence: Option<u64>,
    },
    /// Squarefree C(p^q n + 1, n) for n <= bound.
    Scan {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_big)]
        bound: Integer,
        /// Test every n.
        #[arg(long, conflicts_with = "seed_forms")]
        exhaustive: bool,
        /// Test only the exceptional n (default).
        #[arg(long)]
        seed_forms: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// The analytic inequality: a verdict at --n, or the thresholds tau0 and tau1.
    Threshold {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_big)]
        n: Option<Integer>,
        #[arg(long, value_enum, default_value_t = FormArg::General)]
        form: FormArg,
        #[arg(long, default_value = "decimal", value_parser = parse_log_base)]
        log_base: LogBase,
        #[arg(long, default_value_t = analytic::DEFAULT_EXPONENT_CAP)]
        exponent_cap: u64,
    },
    /// Cross-check the enumerator, residues and divisibility filter up to a bound.
    Verify {
        #[command(flatten)]
        pp: PrimePowerArgs,
        #[arg(long, value_parser = parse_u64_big)]
        bound: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormArg {
    General,
    Specialized,
}

/// Decimal integers or powers written `a^b`.
pub fn parse_big(text: &str) -> std::result::Result<Integer, String> {
    let text = text.trim().replace('_', "");
    if let Some((base, exp)) = text.split_once('^') {
        let base =
            Integer::from_str_radix(base.trim(), 10).map_err(|e| format!("bad base: {e}"))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|e| format!("bad exponent: {e}"))?;
        if u64::from(base.significant_bits()) * u64::from(exp) > 1 << 26 {
            return Err("power too large".into());
        }
        return Ok(base.pow(exp));
    }
    Integer::from_str_radix(&text, 10).map_err(|e| format!("not an integer: {e}"))
}

fn parse_u64_big(text: &str) -> std::result::Result<u64, String> {
    parse_big(text)?
        .to_u64()
        .ok_or_else(|| "value must fit in 64 bits".to_string())
}

fn parse_log_base(text: &str) -> std::result::Result<LogBase, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

fn s(n: &Integer) -> Value {
    Value::String(n.to_string())
}

fn kind_json(kind: &ExceptionKind) -> Value {
    serde_json::to_value(kind).expect("plain data")
}

fn dispatch(cmd: &Command, limits: &Limits) -> Result<(Vec<OutputRecord>, bool)> {
    let one = |r: OutputRecord| Ok((vec![r], true));
    match cmd {
        Command::Digits { n, p } => {
            let dv = digits::to_base_p(n, *p)?;
            one(OutputRecord::new(
                "digits",
                json!({"n": s(n), "p": p}),
                json!({
                    "digits": dv.digits(),
                    "display": dv.to_display_string(),
                    "digit_sum": dv.digit_sum(),
                    "length": dv.len(),
                }),
            ))
        }
        Command::Valuation { pp, n, m } => {
            let pp_ = pp.build()?;
            match m {
                Some(m) => {
                    let v = digits::binom_valuation(m, n, pp.p)?;
                    one(OutputRecord::new(
                        "valuation",
                        json!({"m": s(m), "n": s(n), "p": pp.p}),
                        json!({"binomial_valuation": v}),
                    ))
                }
                None => {
                    let v = catalan::catalan_valuation(&pp_, n)?;
                    one(OutputRecord::new(
                        "valuation",
                        json!({"n": s(n), "p": pp.p, "q": pp.q}),
                        json!({"valuation": v, "divisible": v >= u64::from(pp.q)}),
                    )
                    .with_provenance("digit sum of (p^q - 1) n + 1"))
                }
            }
        }
        Command::Catalan { s: Some(sv), n, .. } => {
            let n_small = n
                .to_u64()
                .ok_or_else(|| Error::guard("n (exact)", n, limits.exact_max_sn))?;
            let f = catalan::catalan_exact(*sv, n_small, limits)?;
            one(OutputRecord::new(
                "catalan",
                json!({"s": sv, "n": s(n)}),
                json!({"value": s(&f)}),
            ))
        }
        Command::Catalan {
            p: Some(p),
            q: Some(q),
            n,
            ..
        } => {
            let pp = PrimePower::new(*p, *q)?;
            let residue = catalan::catalan_residue_mod_pq(&pp, n)?;
            let v = catalan::catalan_valuation(&pp, n)?;
            one(OutputRecord::new(
                "catalan",
                json!({"p": p, "q": q, "n": s(n)}),
                json!({"residue": residue, "modulus": s(pp.modulus()), "valuation": v}),
            )
            .with_provenance("Granville congruence on C(p^q n + 1, n)"))
        }
        Command::Catalan { .. } => Err(Error::Hypothesis(
            "catalan needs --s, or --p and --q".into(),
        )),
        Command::Granville { pp, m, n } => {
            let pp_ = pp.build()?;
            let g = Granville::new(&pp_, limits)?.binom(m, n)?;
            let lucas = crate::modular::lucas_binom_mod_p(m, n, pp.p)?;
            one(OutputRecord::new(
                "granville",
                json!({"m": s(m), "n": s(n), "p": pp.p, "q": pp.q}),
                json!({"e0": g.e0, "unit_residue": g.unit_residue, "lucas_mod_p": lucas}),
            ))
        }
        Command::Exceptions {
            pp, count: Some(e), ..
        } => {
            if pp.q != 2 {
                return Err(Error::Hypothesis("--count applies to q = 2".into()));
            }
            let c = exceptions::count_exceptions_q2(pp.p, *e)?;
            one(OutputRecord::new(
                "exceptions",
                json!({"p": pp.p, "q": pp.q, "count": e}),
                json!({
                    "distinct_index_sets": s(&c.distinct_index_sets),
                    "odd_power_sums": s(&c.odd_power_sums),
                    "pure_powers": s(&c.pure_powers),
                    "total": s(&c.total()),
                }),
            )
            .with_provenance("binomial counts of exponent choices"))
        }
        Command::Exceptions {
            pp,
            bound: Some(bound),
            residues: with_residues,
            ..
        } => {
            let pp_ = pp.build()?;
            let forms = exceptions::enumerate(&pp_, bound, limits)?;
            let engine = if *with_residues {
                Some(Granville::new(&pp_, limits)?)
            } else {
                None
            };
            let mut listed = Vec::with_capacity(forms.len());
            for form in &forms {
                let mut entry = json!({
                    "n": s(&form.value),
                    "forms": form.kinds.iter().map(kind_json).collect::<Vec<_>>(),
                });
                if let Some(engine) = &engine {
                    entry["residue"] = json!(catalan::catalan_residue_with(engine, &form.value)?);
                }
                listed.push(entry);
            }
            let values: Vec<Value> = forms.iter().map(|f| s(&f.value)).collect();
            one(OutputRecord::new(
                "exceptions",
                json!({"p": pp.p, "q": pp.q, "bound": s(bound)}),
                json!({"values": values, "count": forms.len(), "exceptions": listed}),
            )
            .with_provenance("digit-sum characterization of v_p(F(p^q, n)) < q"))
        }
        Command::Exceptions { .. } => Err(Error::Hypothesis(
            "exceptions needs --bound or --count".into(),
        )),
        Command::Residues { p: Some(p), .. } => {
            let set = residues::residue_set_p2(*p)?;
            one(OutputRecord::new(
                "residues",
                json!({"p": p}),
                json!({"residues": set, "size": set.len(), "partitions": s(&residues::partition_count(*p))}),
            )
            .with_provenance("multinomials over the partitions of p, reduced mod p^2"))
        }
        Command::Residues {
            sequence: Some(max),
            ..
        } => {
            let seq = residues::residue_count_sequence(*max)?;
            let rows: Vec<Value> = seq
                .iter()
                .map(|(s, c)| json!({"s": s, "count": c}))
                .collect();
            one(OutputRecord::new(
                "residues",
                json!({"sequence": max}),
                json!({"counts": rows}),
            ))
        }
        Command::Residues { .. } => {
            Err(Error::Hypothesis("residues needs --p or --sequence".into()))
        }
        Command::Scan {
            pp,
            bound,
            exhaustive,
            jobs,
            checkpoint,
            ..
        } => {
            let pp_ = pp.build()?;
            let options = ScanOptions {
                exhaustive: *exhaustive,
                jobs: *jobs,
                checkpoint: checkpoint.clone(),
            };
            let report = squarefree::scan_candidates(&pp_, bound, &options, limits)?;
            let mut result = json!({
                "mode": if report.exhaustive { "exhaustive" } else { "seed-forms" },
                "candidates_tested": report.candidates_tested,
                "squarefree_hits": report.squarefree_hits.iter().map(s).collect::<Vec<_>>(),
                "elapsed_secs": report.elapsed_secs,
                "last_n": report.last_n.as_ref().map(s),
                "resumed_from": report.resumed_from.as_ref().map(s),
            });
            if let Some(path) = &report.checkpoint_path {
                result["checkpoint"] = json!(path.display().to_string());
            }
            one(OutputRecord::new(
                "scan",
                json!({"p": pp.p, "q": pp.q, "bound": s(bound), "jobs": jobs}),
                result,
            )
            .with_provenance("Kummer carries for every prime up to sqrt(p^q n + 1)"))
        }
        Command::Threshold {
            pp,
            n,
            form,
            log_base,
            exponent_cap,
        } => {
            let pp_ = pp.build()?;
            let form = match form {
                FormArg::General => Form::General,
                FormArg::Specialized => Form::Specialized,
            };
            let inst = InequalityInstance::new(&pp_, limits.precision)?
                .with_form(form)?
                .with_log_base(*log_base);
            let inputs = json!({
                "p": pp.p, "q": pp.q, "n": n.as_ref().map(s),
                "form": form, "log_base": log_base, "precision": limits.precision,
            });
            let result = match n {
                Some(n) => {
                    let eval = analytic::inequality_sides(&inst, n)?;
                    let crude = analytic::crude_lower_bound(&pp_, n, eval.precision);
                    json!({
                        "holds": eval.holds,
                        "precision_used": eval.precision,
                        "lhs": eval.sides.lhs.midpoint().to_string_radix(10, Some(20)),
                        "rhs": eval.sides.rhs.midpoint().to_string_radix(10, Some(20)),
                        "log2_lhs": eval.sides.lhs.log2_f64(),
                        "log2_rhs": eval.sides.rhs.log2_f64(),
                        "crude_lower_bound": crude.lo.to_string_radix(10, Some(20)),
                    })
                }
                None => {
                    let t0 = analytic::find_tau0(&inst, *exponent_cap)?;
                    let t1 = analytic::tau1(&pp_, &t0.tau0)?;
                    let (c_main, c_tail) = analytic::derived_constants(&pp_, *log_base);
                    let mut result = json!({
                        "tau0_exponent": t0.exponent,
                        "tau0": s(&t0.tau0),
                        "tau1": s(&t1.tau1),
                        "tau1_terms": {"exp": s(&t1.exp_term), "power": s(&t1.power_term), "tau0": s(&t1.tau0)},
                        "grid_points": t0.grid.len(),
                        "precision_used": t0.max_precision,
                        "derived_constants": {"c_main": c_main, "c_tail": c_tail},
                    });
                    if let Ok(sc) = analytic::specialized_constants(&pp_) {
                        result["printed_constants"] = json!({
                            "c_main": sc.c_main.to_f64(),
                            "c_tail": sc.c_tail.to_f64(),
                            "log_coefficient": sc.log_coefficient,
                        });
                    }
                    result
                }
            };
            one(OutputRecord::new("threshold", inputs, result)
                .with_provenance("outward-rounded MPFR interval evaluation"))
        }
        Command::Verify { pp, bound } => {
            let pp_ = pp.build()?;
            let checks = verify_checks(&pp_, *bound, limits)?;
            let ok = checks.values().all(|v| *v);
            Ok((
                vec![OutputRecord::new(
                    "verify",
                    json!({"p": pp.p, "q": pp.q, "bound": bound}),
                    json!({"checks": checks, "ok": ok}),
                )],
                ok,
            ))
        }
    }
}

fn verify_checks(pp: &PrimePower, bound: u64, limits: &Limits) -> Result<BTreeMap<String, bool>> {
    let mut checks = BTreeMap::new();
    let listed: BTreeSet<u64> = exceptions::enumerate(pp, &Integer::from(bound), limits)?
        .iter()
        .map(|f| f.value.to_u64().expect("at most bound"))
        .collect();
    let brute: BTreeSet<u64> = exceptions::brute_force_exceptions(pp, bound)
        .into_iter()
        .collect();
    checks.insert("enumeration_matches_brute_force".into(), listed == brute);

    if pp.q() <= 2 {
        let engine = Granville::new(pp, limits)?;
        let mut agree = true;
        for form in exceptions::enumerate(pp, &Integer::from(bound), limits)? {
            if let Ok(r) = exceptions::residue_of_exception(&form) {
                agree &= r == catalan::catalan_residue_with(&engine, &form.value)?;
            }
        }
        checks.insert("closed_form_residues".into(), agree);
    }
    if pp.q() >= 2 {
        checks.insert(
            "divisibility_filter".into(),
            squarefree::verify_divisibility_filter(pp, bound, limits)?,
        );
    }
    Ok(checks)
}

fn flatten(prefix: &str, value: &Value, row: &mut BTreeMap<String, String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, row);
            }
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            row.insert(prefix.to_string(), joined.join(";"));
        }
        Value::Array(_) => {
            row.insert(prefix.to_string(), value.to_string());
        }
        other => {
            row.insert(prefix.to_string(), scalar(other));
        }
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Writes records as JSON lines or as CSV with one flattened record per row.
pub fn emit(records: &[OutputRecord], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Jsonl => {
            for record in records {
                writeln!(out, "{}", serde_json::to_string(record)?)?;
            }
        }
        Format::Csv => {
            if records.is_empty() {
                return Ok(());
            }
            let rows: Vec<BTreeMap<String, String>> = records
                .iter()
                .map(|r| {
                    let mut row = BTreeMap::new();
                    flatten("", &serde_json::to_value(r).expect("plain data"), &mut row);
                    row
                })
                .collect();
            let header: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
            let mut writer = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
            writer
                .write_record(header.iter().map(|h| h.as_str()))
                .map_err(io)?;
            for row in &rows {
                writer
                    .write_record(
                        header
                            .iter()
                            .map(|h| row.get(*h).map(String::as_str).unwrap_or("")),
                    )
                    .map_err(io)?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            out.write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut limits = Limits::default();
    if let Some(bits) = cli.precision {
        limits.precision = bits;
    }
    if let Some(seg) = cli.sieve_segment.filter(|&s| s > 0) {
        limits.sieve_segment = seg;
    }
    let outcome = dispatch(&cli.command, &limits).and_then(|(records, ok)| {
        emit(&records, cli.format, out)?;
        Ok(ok)
    });
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_DOMAIN,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource() {
                EXIT_RESOURCE
            } else {
                EXIT_DOMAIN
            }
        }
    }
}
