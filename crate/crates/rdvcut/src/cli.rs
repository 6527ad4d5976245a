//! Command-line front end. [`run`] is what the binary calls; it writes the
//! report to `out` and returns the exit status, so tests can drive it
//! without spawning processes.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rdvcut_core::budget::{Clock, SearchLimits};
use rdvcut_core::cutoff::{decide, verify_certificate, Budget, Certificate, Justification, Verdict};
use rdvcut_core::evenodd::{decide_symmetric_cop, ParityClass, SymmetricVerdict};
use rdvcut_core::model::{classify, gen_exp_family, Protocol};
use rdvcut_core::petri::{net_to_protocol, protocol_to_net};
use rdvcut_core::semantics::{reachable_final, witness_table, Answer, Reachability, Trace};
use rdvcut_core::corpus;
use serde_json::json;

use crate::format::{parse_net, parse_protocol, print_net, print_protocol};
use crate::json::{answer_symbol, certificate_from_dto, certificate_to_dto, path_to_dto, trace_to_dto, CertificateDto};
use crate::random::{gen_random, RandomSpec};

/// Wall clock started when the command begins.
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// A verdict (or the requested artefact) was produced.
    Verdict = 0,
    Unknown = 1,
    InputError = 2,
}

#[derive(Debug, Parser)]
#[command(name = "rdvcut", version, about = "Cut-off analysis for rendez-vous protocols")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Largest population checked individually.
    #[arg(long, env = "RDVCUT_N_MAX", default_value_t = 12)]
    pub n_max: u32,
    /// Stored configurations per search.
    #[arg(long, env = "RDVCUT_NODE_CAP", default_value_t = 1_000_000)]
    pub node_cap: usize,
    /// Wall-time limit in seconds.
    #[arg(long, env = "RDVCUT_WALL_TIME", default_value_t = 60)]
    pub wall_time: u64,
    /// Confirmations required above a budget-qualified cut-off.
    #[arg(long, env = "RDVCUT_WINDOW", default_value_t = 5)]
    pub window: u32,
    /// Count the empty population as a candidate.
    #[arg(long, env = "RDVCUT_INCLUDE_ZERO")]
    pub include_zero: bool,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        if self.n_max == 0 || self.node_cap == 0 || self.wall_time == 0 {
            bail!("budgets must be positive");
        }
        Ok(Budget {
            n_max: self.n_max,
            node_cap: self.node_cap,
            wall_time: Duration::from_secs(self.wall_time),
            window: self.window,
            include_zero: self.include_zero,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Leaderless family with exponential cut-off (`-k`).
    Exp,
    /// Seeded random protocol.
    Random,
    Fig1,
    Fig1Variant,
    Fig6,
    /// The small net `p_i -> p_2 + p_3 -> p_f`, in the net format.
    Fig4Net,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the final configuration reachable for population n?
    Check {
        file: String,
        #[arg(long)]
        n: u32,
        #[arg(long, env = "RDVCUT_NODE_CAP", default_value_t = 1_000_000)]
        node_cap: usize,
    },
    /// Decide whether a cut-off exists and print a certificate.
    Cutoff {
        file: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also write the JSON certificate here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Structural flags.
    Classify { file: String },
    /// Protocol -> Petri net (net text format).
    EncodeNet {
        file: String,
        /// Also emit the final marking for this population.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Petri net -> protocol (protocol text format).
    DecodeNet {
        file: String,
        #[arg(long)]
        p_i: String,
        #[arg(long)]
        p_f: String,
    },
    /// Even-odd abstraction for symmetric protocols.
    EvenOdd { file: String },
    /// Print a generated protocol.
    Gen {
        family: Family,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        letters: usize,
        #[arg(long, default_value_t = 0.15)]
        density: f64,
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        leader: bool,
    },
    /// Re-check a JSON certificate against a protocol.
    Verify {
        file: String,
        cert: String,
        #[arg(long, env = "RDVCUT_NODE_CAP", default_value_t = 1_000_000)]
        node_cap: usize,
    },
    /// Per-population reachability table.
    Table {
        file: String,
        #[arg(long, env = "RDVCUT_N_MAX", default_value_t = 12)]
        n_max: u32,
        #[arg(long, env = "RDVCUT_NODE_CAP", default_value_t = 1_000_000)]
        node_cap: usize,
    },
}

fn read_source(path: &str, stdin: &mut dyn Read) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        stdin.read_to_string(&mut s).context("reading standard input")?;
    } else {
        s = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    }
    Ok(s)
}

pub fn load_protocol(path: &str, stdin: &mut dyn Read) -> Result<Protocol> {
    let text = read_source(path, stdin)?;
    let name = if path == "-" { "<stdin>" } else { path };
    parse_protocol(&text).map_err(|e| anyhow!("{name}: {e}"))
}

fn trace_lines(p: &Protocol, t: &Trace) -> String {
    let mut s = String::new();
    for st in &t.steps {
        let _ = writeln!(
            s,
            "  {}: {} -> {} | {} -> {}",
            p.letter_name(st.letter()),
            p.state_name(st.send.src),
            p.state_name(st.send.dst),
            p.state_name(st.recv.src),
            p.state_name(st.recv.dst)
        );
    }
    s
}

fn table_string(t: &[Answer], from: usize) -> String {
    t.iter()
        .enumerate()
        .skip(from)
        .map(|(n, a)| format!("{n}:{}", answer_symbol(*a)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// The human-readable report for a certificate.
pub fn render_certificate(c: &Certificate) -> String {
    let mut s = String::new();
    let how = match &c.justification {
        Justification::ParityPumping { .. } => "parity pumping",
        Justification::Composition { .. } => "composition",
        Justification::AbstractObstruction { .. } => "abstract obstruction",
        Justification::ExhaustiveWindow { .. } => "exhaustive window",
        Justification::BudgetExhausted { .. } => "budget exhausted",
    };
    match c.verdict {
        Verdict::Cutoff(b) => {
            let qual = match (c.minimal, c.exact) {
                (true, true) => "minimal",
                (true, false) => "minimal within window",
                (false, _) => "minimality not verified",
            };
            let _ = writeln!(s, "Cutoff B={b} ({qual}), justification: {how}");
        }
        Verdict::NoCutoff => {
            let _ = writeln!(s, "NoCutoff, justification: {how}");
        }
        Verdict::Unknown => {
            let _ = writeln!(s, "Unknown, justification: {how}");
        }
    }
    let _ = writeln!(
        s,
        "verdict is {}",
        if c.exact { "exact" } else { "budget-qualified" }
    );
    match &c.justification {
        Justification::ParityPumping { n_even, n_odd, .. } => {
            let _ = writeln!(s, "even witness n={n_even}, odd witness n={n_odd}");
        }
        Justification::Composition { n, bound, .. } => {
            let _ = writeln!(s, "consecutive witnesses n={n}, n={}; every n >= {bound} completes", n + 1);
        }
        Justification::AbstractObstruction { failed } => {
            let which = match failed {
                ParityClass::Even => "even",
                ParityClass::Odd => "odd",
            };
            let _ = writeln!(s, "no abstract path for {which} populations: no {which} n completes");
        }
        Justification::ExhaustiveWindow { table, window, obstruction, .. } => {
            let from = usize::from(!c.include_zero);
            let _ = writeln!(s, "table: {}", table_string(table, from));
            match obstruction {
                None => {
                    let _ = writeln!(s, "every n in [{}, {}] completes", window.0, window.1);
                }
                Some(o) => {
                    let _ = writeln!(
                        s,
                        "unreachable progression: n = {} + {}*l for l = 0..={}",
                        o.base, o.period, o.lambda_max
                    );
                }
            }
        }
        Justification::BudgetExhausted { n_max, node_cap, table } => {
            let from = usize::from(!c.include_zero);
            let _ = writeln!(s, "table: {}", table_string(table, from));
            let _ = writeln!(s, "budget: n_max={n_max}, node_cap={node_cap}");
        }
    }
    for note in &c.notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

fn exit_for(v: Verdict) -> Exit {
    match v {
        Verdict::Unknown => Exit::Unknown,
        _ => Exit::Verdict,
    }
}

/// Runs one command. `Err` means an input error (exit status 2).
pub fn run(cli: Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<Exit> {
    let clock = StdClock::start();
    let json = cli.json;
    let mut emit = |text: String| -> Result<()> {
        out.write_all(text.as_bytes()).context("writing output")
    };
    match cli.command {
        Command::Check { file, n, node_cap } => {
            let p = load_protocol(&file, stdin)?;
            let r = reachable_final(&p, n, &SearchLimits::with_node_cap(node_cap));
            if json {
                emit(format!(
                    "{}\n",
                    json!({
                        "n": n,
                        "answer": answer_symbol(r.answer()),
                        "trace": r.trace().map(|t| trace_to_dto(&p, t)),
                    })
                ))?;
            } else {
                emit(match &r {
                    Reachability::Witness(t) => format!("reachable ({} steps)\n{}", t.len(), trace_lines(&p, t)),
                    Reachability::NotReachable => "NOT reachable (exact)\n".into(),
                    Reachability::BudgetExceeded => format!("unknown (node cap {node_cap} reached)\n"),
                })?;
            }
            Ok(if r.answer() == Answer::Unknown { Exit::Unknown } else { Exit::Verdict })
        }
        Command::Cutoff { file, budget, cert_out } => {
            let p = load_protocol(&file, stdin)?;
            let b = budget.budget()?;
            let c = decide(&p, &b, &clock);
            let dto = certificate_to_dto(&p, &c);
            let pretty = serde_json::to_string_pretty(&dto)?;
            if let Some(path) = cert_out {
                std::fs::write(&path, format!("{pretty}\n")).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(if json { format!("{pretty}\n") } else { render_certificate(&c) })?;
            Ok(exit_for(c.verdict))
        }
        Command::Classify { file } => {
            let p = load_protocol(&file, stdin)?;
            let c = classify(&p);
            if json {
                emit(format!(
                    "{}\n",
                    json!({
                        "symmetric": c.symmetric,
                        "leaderless": c.leaderless,
                        "connectivity_ok": c.connectivity_ok,
                        "leader_init_is_final": c.leader_init_is_final,
                        "process_states": p.num_process_states(),
                        "leader_states": p.num_leader_states(),
                        "letters": p.num_letters(),
                        "edges": p.edges().len(),
                    })
                ))?;
            } else {
                emit(format!(
                    "symmetric: {}\nleaderless: {}\nconnectivity_ok: {}\n",
                    c.symmetric, c.leaderless, c.connectivity_ok
                ))?;
                if c.leader_init_is_final {
                    emit("note: leader initial and final states coincide\n".into())?;
                }
            }
            Ok(Exit::Verdict)
        }
        Command::EncodeNet { file, n } => {
            let p = load_protocol(&file, stdin)?;
            let e = protocol_to_net(&p);
            let fin = n.map(|n| (format!("final_{n}"), e.final_marking(n)));
            let mut marks = vec![("init", &e.m0)];
            if let Some((l, m)) = &fin {
                marks.push((l.as_str(), m));
            }
            emit(print_net(&e.net, &marks))?;
            Ok(Exit::Verdict)
        }
        Command::DecodeNet { file, p_i, p_f } => {
            let text = read_source(&file, stdin)?;
            let f = parse_net(&text).map_err(|e| anyhow!("{file}: {e}"))?;
            let place = |name: &str| f.net.place_by_name(name).ok_or_else(|| anyhow!("unknown place `{name}`"));
            let p = net_to_protocol(&f.net, place(&p_i)?, place(&p_f)?)?;
            emit(print_protocol(&p))?;
            Ok(Exit::Verdict)
        }
        Command::EvenOdd { file } => {
            let p = load_protocol(&file, stdin)?;
            match decide_symmetric_cop(&p)? {
                SymmetricVerdict::HasCutoff { even, odd } => {
                    if json {
                        emit(format!(
                            "{}\n",
                            json!({"verdict": "has_cutoff", "even": path_to_dto(&p, &even), "odd": path_to_dto(&p, &odd)})
                        ))?;
                    } else {
                        emit(format!(
                            "abstract witnesses: even path {} steps, odd path {} steps\ncut-off exists (exact)\n",
                            even.len(),
                            odd.len()
                        ))?;
                    }
                }
                SymmetricVerdict::NoCutoff { failed } => {
                    let which = if failed == ParityClass::Even { "even" } else { "odd" };
                    if json {
                        emit(format!("{}\n", json!({"verdict": "no_cutoff", "failed": which})))?;
                    } else {
                        emit(format!("no abstract path for the {which} class\nno cut-off (exact)\n"))?;
                    }
                }
            }
            Ok(Exit::Verdict)
        }
        Command::Gen {
            family,
            k,
            seed,
            states,
            letters,
            density,
            symmetric,
            leader,
        } => {
            let text = match family {
                Family::Exp => print_protocol(&gen_exp_family(k)?),
                Family::Random => print_protocol(&gen_random(&RandomSpec {
                    num_process_states: states,
                    num_letters: letters,
                    edge_density: density,
                    symmetric,
                    leaderless: !leader,
                    num_leader_states: 2,
                    seed,
                })?),
                Family::Fig1 => print_protocol(&corpus::fig1()),
                Family::Fig1Variant => print_protocol(&corpus::fig1_variant()),
                Family::Fig6 => print_protocol(&corpus::fig6()),
                Family::Fig4Net => {
                    let (net, from, to) = corpus::fig4_net();
                    print_net(&net, &[("init", &from), ("fin", &to)])
                }
            };
            emit(text)?;
            Ok(Exit::Verdict)
        }
        Command::Verify { file, cert, node_cap } => {
            let p = load_protocol(&file, stdin)?;
            let text = read_source(&cert, stdin)?;
            let dto: CertificateDto = serde_json::from_str(&text).with_context(|| format!("{cert}: malformed certificate"))?;
            let c = certificate_from_dto(&p, &dto).map_err(|e| anyhow!("{cert}: {e}"))?;
            let r = verify_certificate(&p, &c, &SearchLimits::with_node_cap(node_cap));
            if json {
                emit(format!(
                    "{}\n",
                    json!({"valid": r.is_ok(), "reason": r.as_ref().err().map(|e| e.to_string())})
                ))?;
            } else {
                emit(match &r {
                    Ok(()) => "certificate valid\n".into(),
                    Err(e) => format!("certificate INVALID: {e}\n"),
                })?;
            }
            // A rejected certificate is an input problem, not an undecided question.
            Ok(if r.is_ok() { Exit::Verdict } else { Exit::InputError })
        }
        Command::Table { file, n_max, node_cap } => {
            let p = load_protocol(&file, stdin)?;
            let t = witness_table(&p, n_max, &SearchLimits::with_node_cap(node_cap));
            let answers = t.answers();
            if json {
                let rows: Vec<_> = (0..=n_max)
                    .map(|n| {
                        json!({
                            "n": n,
                            "answer": answer_symbol(answers[n as usize]),
                            "trace": t.witness(n).map(|tr| trace_to_dto(&p, tr)),
                        })
                    })
                    .collect();
                emit(format!("{}\n", serde_json::Value::Array(rows)))?;
            } else {
                emit(format!("{}\n", table_string(&answers, 0)))?;
            }
            Ok(if answers.contains(&Answer::Unknown) { Exit::Unknown } else { Exit::Verdict })
        }
    }
}

/// Parses `args` and runs; input errors are reported on `err`.
pub fn main_with(args: impl IntoIterator<Item = String>, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { Exit::InputError as i32 } else { 0 };
        }
    };
    match run(cli, stdin, out) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            Exit::InputError as i32
        }
    }
}
