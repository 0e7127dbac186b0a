//! Command-line front end: classify structures, build and verify schemes,
//! deal shares, run protocol sessions and attack batteries, and emit the
//! catalog and rate reports as text, JSON, or CSV.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::access::{catalog, AccessStructure, ClassId};
use crate::css::{
    build_scheme, build_scheme_for_structure, deal_secret, verify_perfect, BuildOptions, RngTape,
    SchemeDescriptor, VerifyMode,
};
use crate::metrics;
use crate::protocol::{
    decoy_detection_oracle, run_session, BasisChoice, EveModel, EveStrategy, SessionConfig,
};

#[derive(Parser)]
#[command(
    name = "hyperqss",
    about = "Hypercycle quantum access structures: classification, optimal-rate secret sharing, and single-qudit protocol simulation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Clone)]
pub struct SchemeArgs {
    /// Class G1..G12 (with --blocks), e.g. G9.
    #[arg(long)]
    pub class: Option<String>,
    /// Comma-separated block sizes by template position, e.g. "1,1,2,1,1,1".
    #[arg(long)]
    pub blocks: Option<String>,
    /// A concrete structure, e.g. "{1234,1267,456}"; classified first.
    #[arg(long)]
    pub structure: Option<String>,
    /// Prime modulus.
    #[arg(long, default_value_t = 11)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Build G1..G4 with the no-rate-claim fallback construction.
    #[arg(long, default_value_t = false)]
    pub hyperstar_fallback: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Classify a 3-edge structure: validity, quantum test, class, rate.
    Classify { structure: String },
    /// Build a scheme descriptor and print it.
    Build(SchemeArgs),
    /// Run the perfectness oracle on a built scheme.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Enumerate exhaustively when p^(secret+randomness) fits this.
        #[arg(long, default_value_t = 30_000_000)]
        budget: u64,
        /// Sample count otherwise.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Deal a secret and print the tagged share bundle.
    Deal {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Comma-separated field elements; random when omitted.
        #[arg(long)]
        secret: Option<String>,
    },
    /// Run one protocol session and print the transcript.
    Simulate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 3)]
        n_info: usize,
        #[arg(long, default_value_t = 10)]
        n_decoy: usize,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// none | intercept
        #[arg(long, default_value = "none")]
        eve: String,
        /// Edge index of the MAS to reconstruct; all edges when omitted.
        #[arg(long)]
        mas: Option<usize>,
    },
    /// Run many eavesdropped sessions and report detection statistics.
    Attack {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 3)]
        n_info: usize,
        #[arg(long, default_value_t = 50)]
        n_decoy: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Print the 83-row table of 7-participant structures.
    Catalog,
    /// Rate and efficiency report for a scheme.
    Rates {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 3)]
        n_info: u64,
        #[arg(long, default_value_t = 10)]
        n_decoy: u64,
    },
}

fn parse_class(s: &str) -> Result<ClassId, String> {
    let t = s.trim().trim_start_matches(['G', 'g']);
    let idx: u8 = t.parse().map_err(|_| format!("bad class {s:?}"))?;
    ClassId::new(idx).ok_or_else(|| format!("class index {idx} out of range 1..=12"))
}

fn build_from_args(args: &SchemeArgs) -> Result<SchemeDescriptor, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let opts = BuildOptions {
        allow_hyperstar_fallback: args.hyperstar_fallback,
        ..Default::default()
    };
    if let Some(st) = &args.structure {
        let structure = AccessStructure::parse(st).map_err(|e| e.to_string())?;
        let (_, desc) = build_scheme_for_structure(&structure, args.p, &mut rng, &opts)
            .map_err(|e| e.to_string())?;
        return Ok(desc);
    }
    let class = parse_class(args.class.as_deref().ok_or("need --class or --structure")?)?;
    let nblocks = class.template().block_count();
    let sizes: Vec<usize> = match &args.blocks {
        None => vec![1; nblocks],
        Some(b) => b
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad block size {t:?}")))
            .collect::<Result<_, _>>()?,
    };
    build_scheme(class, &sizes, args.p, &mut rng, &opts).map_err(|e| e.to_string())
}

fn class_rate_label(class: ClassId) -> String {
    match class.index() {
        1..=4 => "hyperstar (optimal-rate construction external)".into(),
        5 | 6 => "1".into(),
        _ => "2/3".into(),
    }
}

struct Report {
    json: Value,
    text: String,
    csv: Option<String>,
}

fn run_command(cli: &Cli) -> Result<Report, String> {
    match &cli.command {
        Command::Classify { structure } => {
            let st = AccessStructure::parse(structure).map_err(|e| e.to_string())?;
            st.validate().map_err(|e| e.to_string())?;
            let flags = st.kind_predicates();
            let quantum = st.is_quantum();
            let class = st.classify().map_err(|e| e.to_string())?;
            let text = format!(
                "structure: {st}\nvalid: yes\nquantum: {quantum}\nhyperstar: {} hypercycle: {} hyperpath: {}\nclass: {}\nblock sizes: {:?}\noptimal rate: {}",
                flags.hyperstar,
                flags.hypercycle,
                flags.hyperpath,
                class.id,
                class.block_sizes,
                class_rate_label(class.id),
            );
            Ok(Report {
                json: json!({
                    "structure": st.to_string(),
                    "valid": true,
                    "quantum": quantum,
                    "hyperstar": flags.hyperstar,
                    "hypercycle": flags.hypercycle,
                    "hyperpath": flags.hyperpath,
                    "class": class.id.to_string(),
                    "blockSizes": class.block_sizes,
                    "blocks": class.blocks,
                    "optimalRate": class_rate_label(class.id),
                }),
                text,
                csv: None,
            })
        }
        Command::Build(args) => {
            let desc = build_from_args(args)?;
            let text = format!(
                "class: {}\np: {}\nblocks: {:?}\nsecret length: {}\nmax share count: {}\nrate: {}",
                desc.class,
                desc.p,
                desc.blocks,
                desc.secret_len,
                desc.max_share_count(),
                desc.classical_rate(),
            );
            Ok(Report { json: serde_json::to_value(&desc).unwrap(), text, csv: None })
        }
        Command::Verify { scheme, budget, samples } => {
            let desc = build_from_args(scheme)?;
            let rep = verify_perfect(
                &desc,
                VerifyMode::Auto { budget: *budget, samples: *samples, seed: scheme.seed },
            )
            .map_err(|e| e.to_string())?;
            let mut text = format!(
                "mode: {}\ndeals: {}\nrecover ok: {}\nsecrecy ok: {}\nspan certificate: {}\n",
                rep.mode, rep.deals, rep.recover_ok, rep.secrecy_ok, rep.span_ok
            );
            for f in &rep.findings {
                text.push_str(&format!(
                    "  subset {:?}: secrecy {} span {}{}\n",
                    f.subset,
                    f.secrecy_ok,
                    f.span_ok,
                    f.min_p_value.map(|p| format!(" (min p = {p:.4})")).unwrap_or_default()
                ));
            }
            if !(rep.recover_ok && rep.secrecy_ok && rep.span_ok) {
                return Err(format!("verification failed:\n{text}"));
            }
            Ok(Report { json: serde_json::to_value(&rep).unwrap(), text, csv: None })
        }
        Command::Deal { scheme, secret } => {
            let desc = build_from_args(scheme)?;
            let mut rng = ChaCha20Rng::seed_from_u64(scheme.seed ^ 0x6465616c);
            let secret: Vec<u64> = match secret {
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse::<u64>().map(|v| v % desc.p))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?,
                None => {
                    use rand::Rng;
                    (0..desc.secret_len).map(|_| rng.gen_range(0..desc.p)).collect()
                }
            };
            let mut tape = RngTape { rng: &mut rng, p: desc.p };
            let (_, bundle) =
                deal_secret(&desc, &secret, &mut tape).map_err(|e| e.to_string())?;
            let mut text = format!("secret: {secret:?}\n");
            for (pt, shares) in &bundle.0 {
                let row: Vec<String> =
                    shares.iter().map(|(t, v)| format!("{t}={v}")).collect();
                text.push_str(&format!("P{pt}: {}\n", row.join(" ")));
            }
            Ok(Report {
                json: json!({"secret": secret, "bundle": bundle}),
                text,
                csv: None,
            })
        }
        Command::Simulate { scheme, n_info, n_decoy, threshold, eve, mas } => {
            let desc = build_from_args(scheme)?;
            let mut config = SessionConfig::generate(desc, *n_info, *n_decoy, scheme.seed);
            config.error_threshold = *threshold;
            let eve = match eve.as_str() {
                "none" => EveModel::none(),
                "intercept" => EveModel::intercept_all(),
                other => return Err(format!("unknown eve model {other:?}")),
            };
            let edges: Vec<usize> = mas.map(|e| vec![e]).unwrap_or_default();
            let t = run_session(&config, &eve, &edges);
            let mut text = format!(
                "class: {} p: {} seed: {}\nhops: {} (decoy errors total {:.3})\ndealt: {:?}\n",
                t.class,
                t.p,
                t.seed,
                t.hops.len(),
                t.decoy_error_total(),
                t.dealt
            );
            for m in &t.mas_results {
                text.push_str(&format!(
                    "MAS edge {} {:?}: recovered {:?} match {}\n",
                    m.edge, m.participants, m.recovered, m.matches_dealt
                ));
            }
            match &t.abort {
                Some(a) => text.push_str(&format!("ABORTED: {a}\n")),
                None => text.push_str(&format!("match: {}\n", t.match_ok)),
            }
            Ok(Report { json: serde_json::to_value(&t).unwrap(), text, csv: None })
        }
        Command::Attack { scheme, n_info, n_decoy, trials } => {
            let desc = build_from_args(scheme)?;
            let p = desc.p;
            let base = SessionConfig::generate(desc, *n_info, *n_decoy, scheme.seed);
            let eve = EveModel::intercept_all();
            let nthreads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
            let chunk = trials.div_ceil(nthreads);
            let results: Vec<(usize, f64, u64)> = std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for t0 in (0..*trials).step_by(chunk.max(1)) {
                    let base = &base;
                    let eve = &eve;
                    let hi = (t0 + chunk).min(*trials);
                    handles.push(scope.spawn(move || {
                        let mut aborts = 0usize;
                        let mut err_decoys = 0.0f64;
                        let mut seen_decoys = 0u64;
                        for trial in t0..hi {
                            let mut c = base.clone();
                            c.seed = base.seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(trial as u64 + 1));
                            let t = run_session(&c, eve, &[0]);
                            if t.abort.is_some() {
                                aborts += 1;
                            }
                            for h in &t.hops {
                                err_decoys += h.decoy_error_rate * h.n_decoy as f64;
                                seen_decoys += h.n_decoy as u64;
                            }
                        }
                        (aborts, err_decoys, seen_decoys)
                    }));
                }
                handles.into_iter().map(|h| h.join().expect("worker")).collect()
            });
            let aborts: usize = results.iter().map(|r| r.0).sum();
            let err_decoys: f64 = results.iter().map(|r| r.1).sum();
            let seen_decoys: u64 = results.iter().map(|r| r.2).sum();
            let measured = if seen_decoys == 0 { 0.0 } else { err_decoys / seen_decoys as f64 };
            let oracle =
                decoy_detection_oracle(p, BasisChoice::UniformOverProtocolBases, 20_000, 424242);
            let closed = ((p - 1) as f64 / p as f64).powi(2);
            let abort_rate = aborts as f64 / *trials as f64;
            let text = format!(
                "trials: {trials}\nabort rate: {abort_rate:.4}\nper-decoy detection measured: {measured:.4}\nmonte-carlo oracle: {oracle:.4}\nclosed form ((p-1)/p)^2: {closed:.4}\n"
            );
            Ok(Report {
                json: json!({
                    "trials": trials,
                    "abortRate": abort_rate,
                    "perDecoyDetection": measured,
                    "oracle": oracle,
                    "closedForm": closed,
                }),
                text,
                csv: None,
            })
        }
        Command::Catalog => {
            let rows = catalog::catalog();
            let mut text = String::new();
            let mut csv = String::from("serial,structure,class,rate\n");
            let mut jrows = Vec::new();
            for row in &rows {
                let rate = match row.rate {
                    catalog::RateEntry::Exact { num, den } if den == 1 => format!("{num}"),
                    catalog::RateEntry::Exact { num, den } => format!("{num}/{den}"),
                    catalog::RateEntry::Hyperstar => "hyperstar".into(),
                };
                let st = row.structure();
                text.push_str(&format!("{:>2}  {:<22} {:<4} {}\n", row.serial, st, row.class, rate));
                csv.push_str(&format!("{},\"{}\",{},{}\n", row.serial, st, row.class, rate));
                jrows.push(json!({
                    "serial": row.serial,
                    "structure": st.to_string(),
                    "class": row.class.to_string(),
                    "rate": rate,
                }));
            }
            Ok(Report { json: Value::Array(jrows), text, csv: Some(csv) })
        }
        Command::Rates { scheme, n_info, n_decoy } => {
            let desc = build_from_args(scheme)?;
            let rate = metrics::rate_report(&desc, *n_info).map_err(|e| e.to_string())?;
            let mut effs = Vec::new();
            for e in 0..3usize.min(desc.class.template().edges().len()) {
                effs.push(metrics::efficiency(&desc, e, *n_info, *n_decoy).map_err(|e| e.to_string())?);
            }
            let bound = metrics::entropy_bound_check(&desc);
            let mut text = format!(
                "class: {}\nclassical rate: {}\nidealized rate (n_info={}): {}\nentropy bound ok: {}\nper-participant particles: {:?}\n",
                rate.class, rate.classical_rate, n_info, rate.idealized_rate, bound,
                rate.per_participant_particles
            );
            let mut csv = String::from("edge,c,q_info,q_decoy,b,eta\n");
            for r in &effs {
                text.push_str(&format!(
                    "MAS edge {}: c={} qI={} qE={} b={} eta={}\n",
                    r.edge, r.c, r.q_i, r.q_e, r.b, r.eta
                ));
                csv.push_str(&format!("{},{},{},{},{},{}\n", r.edge, r.c, r.q_i, r.q_e, r.b, r.eta));
            }
            Ok(Report {
                json: json!({"rate": rate, "efficiency": effs, "entropyBoundOk": bound}),
                text,
                csv: Some(csv),
            })
        }
    }
}

/// Dispatch and write output; the returned code is the process exit code
/// (0 success, 1 domain error; clap uses 2 for usage errors).
pub fn run(cli: &Cli) -> i32 {
    match run_command(cli) {
        Ok(report) => {
            let body = match cli.format {
                Format::Text => report.text,
                Format::Json => serde_json::to_string_pretty(&report.json).unwrap(),
                Format::Csv => match report.csv {
                    Some(c) => c,
                    None => {
                        eprintln!("no csv form for this subcommand; use --format json");
                        return 2;
                    }
                },
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, body) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => println!("{body}"),
            }
            0
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

#[allow(dead_code)]
fn unused_type_holder(_: BTreeSet<u8>, _: EveStrategy) {}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("hyperqss").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn classify_row57() {
        let cli = parse(&["classify", "{1234,1267,456}"]);
        let rep = run_command(&cli).unwrap();
        assert_eq!(rep.json["class"], "G9");
        assert_eq!(rep.json["quantum"], true);
        assert_eq!(rep.json["optimalRate"], "2/3");
    }

    #[test]
    fn catalog_has_83_rows_in_csv() {
        let cli = parse(&["catalog", "--format", "csv"]);
        let rep = run_command(&cli).unwrap();
        let csv = rep.csv.unwrap();
        assert_eq!(csv.lines().count(), 84); // header + 83 rows
        assert!(csv.contains("57,\"{1234,1267,456}\",G9,2/3"));
        assert!(csv.contains("29,\"{123456,123457,567}\",G6,1"));
        assert!(csv.contains("1,\"{12345,16,17}\",G1,hyperstar"));
    }

    #[test]
    fn simulate_matches_with_seed() {
        let cli = parse(&[
            "simulate", "--class", "G9", "--p", "11", "--n-info", "3", "--n-decoy", "10",
            "--seed", "1",
        ]);
        let rep = run_command(&cli).unwrap();
        assert_eq!(rep.json["match_ok"], true);
        // Byte-identical on re-run.
        let rep2 = run_command(&cli).unwrap();
        assert_eq!(
            serde_json::to_string(&rep.json).unwrap(),
            serde_json::to_string(&rep2.json).unwrap()
        );
    }

    #[test]
    fn deal_and_rates_work() {
        let cli = parse(&["deal", "--class", "G5", "--blocks", "2,2,2", "--secret", "4"]);
        let rep = run_command(&cli).unwrap();
        assert_eq!(rep.json["secret"][0], 4);
        let cli = parse(&["rates", "--class", "G9", "--n-info", "1", "--n-decoy", "0"]);
        let rep = run_command(&cli).unwrap();
        assert_eq!(rep.json["rate"]["idealized_rate"], json!([2, 3]));
    }

    #[test]
    fn bad_class_is_domain_error() {
        let cli = parse(&["build", "--class", "G13"]);
        assert!(run_command(&cli).is_err());
        let cli = parse(&["build", "--class", "G1"]);
        assert!(run_command(&cli).is_err()); // fallback not enabled
        let cli = parse(&["build", "--class", "G1", "--hyperstar-fallback"]);
        assert!(run_command(&cli).is_ok());
    }
}
