//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion with
//! its runtime, then exits non-zero if any criterion fails other than the
//! ones listed in `DOCUMENTED`, whose failure is analysed below and whose
//! corrected expectation must hold instead.

use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdvcut::cli::main_with;
use rdvcut::core::budget::{NoClock, SearchLimits};
use rdvcut::core::corpus;
use rdvcut::core::cutoff::{compose_traces, decide, reduce_reversible, reversible_check, Budget, Justification, Verdict};
use rdvcut::core::evenodd::{abstract_endpoints, concretize, decide_symmetric_cop, eo_reach, ParityClass, SymmetricVerdict};
use rdvcut::core::model::{gen_exp_family, Protocol};
use rdvcut::core::petri::{
    bounded_reach, gadget_check, net_to_protocol, protocol_to_net, CappedSearch, GadgetOutcome, LinearSet, Marking, PetriNet,
    PetriNetBuilder,
};
use rdvcut::core::semantics::{final_config, reachable_final, witness_table, Answer};
use rdvcut::random::{gen_random, RandomSpec};

/// Criterion 2 asks for "exactly the odd n >= 3"; n = 1 also completes
/// (see `c2`).
const DOCUMENTED: &[u32] = &[2];

struct Outcome {
    pass: bool,
    detail: String,
    /// For documented deviations: whether the corrected expectation holds.
    corrected: Option<bool>,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
        corrected: None,
    }
}

fn corpus_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("rdvcut".to_string()).chain(args.iter().map(|s| s.to_string()));
    let code = main_with(argv, &mut std::io::empty(), &mut out, &mut std::io::sink());
    (code, String::from_utf8(out).unwrap())
}

fn lim() -> SearchLimits<'static> {
    SearchLimits::default()
}

fn yn(a: &[Answer]) -> String {
    a.iter()
        .map(|a| match a {
            Answer::Yes => 'y',
            Answer::No => 'n',
            Answer::Unknown => '?',
        })
        .collect()
}

fn c1() -> Outcome {
    let (code, out) = cli(&["cutoff", &corpus_file("fig1.rdv")]);
    let headline = out.lines().next().unwrap_or("").to_string();
    let report_ok = code == 0 && headline == "Cutoff B=3 (minimal within window), justification: exhaustive window";
    let p = corpus::fig1();
    let t = witness_table(&p, 6, &lim());
    let table = yn(&t.answers()[1..]);
    let c = decide(&p, &Budget::default(), &NoClock);
    let replay = match &c.justification {
        Justification::ExhaustiveWindow { traces, .. } => [3, 4].iter().all(|n| {
            traces
                .iter()
                .any(|(k, tr)| k == n && tr.replay(&p).ok() == Some(final_config(&p, *n)))
        }),
        _ => false,
    };
    ok(
        report_ok && table == "ynyyyy" && replay && c.verdict == Verdict::Cutoff(3),
        format!("`{headline}`; table n=1..6 {table}; n=3,4 traces replay: {replay}"),
    )
}

/// The variant's `c` rendez-vous lets a single process finish together
/// with the leader, so n = 1 completes exactly as in the unmodified
/// protocol. The claim "for all odd n >= 3" holds; "exactly the odd
/// n >= 3" does not. Corrected expectation: exactly the odd n complete.
fn c2() -> Outcome {
    let p = corpus::fig1_variant();
    let (code, out) = cli(&["cutoff", &corpus_file("fig1_variant.rdv")]);
    let no_cutoff = code == 0 && out.starts_with("NoCutoff") && out.contains("unreachable progression");
    let answers = witness_table(&p, 9, &lim()).answers();
    let table = yn(&answers[1..]);
    let literal: String = (1..=9).map(|n| if n % 2 == 1 && n >= 3 { 'y' } else { 'n' }).collect();
    let corrected: String = (1..=9).map(|n| if n % 2 == 1 { 'y' } else { 'n' }).collect();
    Outcome {
        pass: no_cutoff && table == literal,
        detail: format!(
            "NoCutoff evidence: {no_cutoff}; table n=1..9 {table}, stated {literal}; n=1 completes via (qLi,!c,qLf)/(q_i,?c,q_f)"
        ),
        corrected: Some(no_cutoff && table == corrected),
    }
}

fn bundled() -> Vec<(String, Protocol)> {
    let (net, _, _) = corpus::fig4_net();
    let fig4 = net_to_protocol(&net, net.place_by_name("p_i").unwrap(), net.place_by_name("p_f").unwrap()).unwrap();
    vec![
        ("fig1".into(), corpus::fig1()),
        ("fig1_variant".into(), corpus::fig1_variant()),
        ("fig6".into(), corpus::fig6()),
        ("fig7_k1".into(), corpus::fig7(1)),
        ("fig7_k2".into(), corpus::fig7(2)),
        ("fig4_protocol".into(), fig4),
    ]
}

fn c3() -> Outcome {
    let mut cases = bundled();
    for seed in 0..50u64 {
        let spec = RandomSpec {
            num_process_states: 2 + (seed % 3) as usize,
            num_letters: 2,
            edge_density: 0.2,
            leaderless: seed % 2 == 0,
            num_leader_states: 2 + (seed % 2) as usize,
            seed,
            ..RandomSpec::default()
        };
        cases.push((format!("random#{seed}"), gen_random(&spec).unwrap()));
    }
    let mut mismatches = Vec::new();
    let mut checks = 0;
    for (name, p) in &cases {
        let e = protocol_to_net(p);
        for n in 0..=5u32 {
            let a = reachable_final(p, n, &lim()).answer();
            let b = bounded_reach(&e.net, &e.m0, &e.final_marking(n), n + 1, &lim()).answer();
            checks += 1;
            if a != b || a == Answer::Unknown {
                mismatches.push(format!("{name} n={n}: {a:?} vs {b:?}"));
            }
        }
    }
    ok(
        mismatches.is_empty(),
        format!("{} protocols, {checks} queries, mismatches: {:?}", cases.len(), mismatches),
    )
}

fn c4() -> Outcome {
    let mut violations = Vec::new();
    let (mut has, mut none) = (0, 0);
    for seed in 0..100u64 {
        let spec = RandomSpec {
            num_process_states: 2 + (seed % 4) as usize,
            num_letters: 2,
            edge_density: 0.12,
            symmetric: true,
            leaderless: seed % 3 == 0,
            num_leader_states: 2 + (seed % 2) as usize,
            seed: 1000 + seed,
        };
        let p = gen_random(&spec).unwrap();
        let table = witness_table(&p, 8, &lim());
        let ends = abstract_endpoints(&p);
        // (a) concrete witnesses imply abstract reachability of their class.
        for n in 1..=8u32 {
            if table.answer(n) == Some(Answer::Yes) {
                let (from, to) = ends.for_class(ParityClass::of(n));
                if eo_reach(&p, &from, &to).unwrap().is_none() {
                    violations.push(format!("seed {seed}: witness at n={n} but no abstract path"));
                }
            }
        }
        match decide_symmetric_cop(&p).unwrap() {
            SymmetricVerdict::HasCutoff { even, odd } => {
                has += 1;
                // (b) both classes concretize to replaying traces.
                for (path, class) in [(even, ParityClass::Even), (odd, ParityClass::Odd)] {
                    match concretize(&p, &path, class) {
                        Ok((n, t)) if ParityClass::of(n) == class && t.witnesses(&p) == Some(n) => {}
                        other => violations.push(format!("seed {seed}: {class:?} concretization {other:?}")),
                    }
                }
            }
            SymmetricVerdict::NoCutoff { failed } => {
                none += 1;
                // (c) no concrete witness of the failed parity.
                for n in 1..=8u32 {
                    if ParityClass::of(n) == failed && table.answer(n) == Some(Answer::Yes) {
                        violations.push(format!("seed {seed}: NoCutoff({failed:?}) but n={n} completes"));
                    }
                }
            }
        }
    }
    ok(
        violations.is_empty() && has > 0 && none > 0,
        format!("100 protocols ({has} with cut-off, {none} without); violations: {violations:?}"),
    )
}

fn c5() -> Outcome {
    let mut violations = Vec::new();
    let (mut compositions, mut pairs) = (0, 0);
    for seed in 0..100u64 {
        let spec = RandomSpec {
            num_process_states: 2 + (seed % 3) as usize,
            num_letters: 2,
            edge_density: 0.4,
            leaderless: true,
            seed: 2000 + seed,
            ..RandomSpec::default()
        };
        let p = gen_random(&spec).unwrap();
        let t = witness_table(&p, 6, &lim());
        for n in 0..=6u32 {
            for m in 0..=6u32 {
                if let (Some(a), Some(b)) = (t.witness(n), t.witness(m)) {
                    compositions += 1;
                    let c = compose_traces(&p, a, b).unwrap();
                    if c.replay(&p).ok() != Some(final_config(&p, n + m)) {
                        violations.push(format!("seed {seed}: composition {n}+{m} fails"));
                    }
                }
            }
        }
        for n in 0..=3u32 {
            if t.answer(n) == Some(Answer::Yes) && t.answer(n + 1) == Some(Answer::Yes) {
                pairs += 1;
                for k in n * n..=n * n + 5 {
                    if reachable_final(&p, k, &lim()).answer() != Answer::Yes {
                        violations.push(format!("seed {seed}: pair {n},{} but n={k} fails", n + 1));
                    }
                }
            }
        }
    }
    ok(
        violations.is_empty(),
        format!("{compositions} compositions, {pairs} consecutive pairs; violations: {violations:?}"),
    )
}

/// The merged net reaches `{q_f: 1}` from zero and back within `cap` tokens
/// iff some `N <= cap - 1` has witnesses for `N` and `N + 1`: forward
/// firings commute before reverse ones, and the peak is the `N + 1` tokens
/// collected in `q_f`.
fn c6() -> Outcome {
    const CAP: u32 = 6;
    let mut cases = vec![("fig6".to_string(), corpus::fig6())];
    for seed in 0..30u64 {
        let spec = RandomSpec {
            num_process_states: 2 + (seed % 3) as usize,
            num_letters: 2,
            edge_density: 0.4,
            leaderless: true,
            seed: 3000 + seed,
            ..RandomSpec::default()
        };
        cases.push((format!("random#{seed}"), gen_random(&spec).unwrap()));
    }
    let mut mismatches = Vec::new();
    let mut positive = 0;
    for (name, p) in &cases {
        let t = witness_table(p, CAP, &lim());
        let consecutive = (0..CAP).any(|n| t.answer(n) == Some(Answer::Yes) && t.answer(n + 1) == Some(Answer::Yes));
        let r = reduce_reversible(p).unwrap();
        let check = reversible_check(&r, CAP, &lim());
        let budget_hit = matches!(check.forward, CappedSearch::BudgetHit) || matches!(check.backward, CappedSearch::BudgetHit);
        if budget_hit || check.both_found() != consecutive {
            mismatches.push(format!("{name}: merged {} vs consecutive {consecutive}", check.both_found()));
        }
        if let CappedSearch::Found(seq) = &check.forward {
            let (fwd, back) = r.populations(seq);
            if fwd != back + 1 {
                mismatches.push(format!("{name}: t_i fired {fwd}, reversed {back}"));
            }
        }
        positive += usize::from(consecutive);
    }
    ok(
        mismatches.is_empty(),
        format!("{} protocols ({positive} with consecutive witnesses); mismatches: {mismatches:?}", cases.len()),
    )
}

fn c7() -> Outcome {
    let mut violations = Vec::new();
    let (mut with_witness, mut worst) = (0, 0.0f64);
    let mut seed = 4000u64;
    while with_witness < 100 && seed < 6000 {
        let spec = RandomSpec {
            num_process_states: 2 + (seed % 4) as usize,
            num_letters: 2,
            edge_density: 0.12,
            symmetric: true,
            leaderless: true,
            seed,
            ..RandomSpec::default()
        };
        seed += 1;
        let p = gen_random(&spec).unwrap();
        let ends = abstract_endpoints(&p);
        let Some(path) = eo_reach(&p, &ends.init_odd, &ends.fin_odd).unwrap() else { continue };
        with_witness += 1;
        let e = p.edges().len();
        worst = worst.max(path.len() as f64 / (e * e) as f64);
        if path.len() > e * e {
            violations.push(format!("seed {}: length {} > |E|^2 = {}", spec.seed, path.len(), e * e));
        }
    }
    ok(
        violations.is_empty() && with_witness == 100,
        format!("{with_witness} protocols with abstract witnesses; max length/|E|^2 = {worst:.3}; violations: {violations:?}"),
    )
}

fn c8() -> Outcome {
    let mut minima = Vec::new();
    for k in 1..=3usize {
        let p = gen_exp_family(k).unwrap();
        let min = (1..=40u32).find(|&n| reachable_final(&p, n, &lim()).answer() == Answer::Yes);
        minima.push(min);
    }
    let m: Vec<u32> = minima.iter().map(|x| x.unwrap_or(0)).collect();
    let pass = minima.iter().all(Option::is_some) && m[0] == 4 && m[1] >= 2 * m[0] && m[2] >= 2 * m[1];
    ok(pass, format!("minimal completing populations k=1,2,3: {m:?}"))
}

fn random_net(rng: &mut ChaCha8Rng) -> (PetriNet, Marking, LinearSet) {
    let np = rng.gen_range(1..=4usize);
    let names: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let mut b = PetriNetBuilder::new();
    b.places(names.iter().map(String::as_str));
    for t in 0..rng.gen_range(1..=4) {
        let side = |rng: &mut ChaCha8Rng| -> Vec<(String, u32)> {
            names.iter().filter_map(|p| {
                let k = rng.gen_range(0..=2u32);
                (k > 0 && rng.gen_bool(0.5)).then(|| (p.clone(), k))
            }).collect()
        };
        let (pre, post) = (side(rng), side(rng));
        let pre: Vec<(&str, u32)> = pre.iter().map(|(p, k)| (p.as_str(), *k)).collect();
        let post: Vec<(&str, u32)> = post.iter().map(|(p, k)| (p.as_str(), *k)).collect();
        b.transition(&format!("t{t}"), &pre, &post);
    }
    let net = b.build().unwrap();
    let vec = |rng: &mut ChaCha8Rng, hi: u32| Marking::from_counts((0..np).map(|_| rng.gen_range(0..=hi)).collect());
    let m0 = vec(rng, 2);
    let base = vec(rng, 2);
    let mut periods = vec![vec(rng, 1)];
    if rng.gen_bool(0.5) {
        periods.push(vec(rng, 2));
    }
    (net, m0, LinearSet { base, periods })
}

/// Every marking reachable from `m0` through markings of at most `cap`
/// tokens, by plain breadth-first search.
fn brute_reach(net: &PetriNet, m0: &Marking, cap: u32) -> Vec<Marking> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    if m0.total() <= cap {
        seen.insert(m0.counts().to_vec());
        queue.push_back(m0.clone());
    }
    let mut out = Vec::new();
    while let Some(m) = queue.pop_front() {
        for t in net.transitions() {
            let Some(next) = m.checked_sub(net.pre(t)).map(|r| r.plus(net.post(t))) else { continue };
            if next.total() <= cap && seen.insert(next.counts().to_vec()) {
                queue.push_back(next);
            }
        }
        out.push(m);
    }
    out
}

fn c9() -> Outcome {
    const CAP: u32 = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = Vec::new();
    let mut hits = 0;
    for i in 0..20 {
        let (net, m0, s) = random_net(&mut rng);
        let brute = brute_reach(&net, &m0, CAP).iter().any(|m| s.contains(m));
        // The gadget holds one extra control token.
        let gadget = match gadget_check(&net, &m0, &s, CAP + 1, &lim()) {
            GadgetOutcome::Intersects(_) => Some(true),
            GadgetOutcome::EmptyWithinCap => Some(false),
            GadgetOutcome::BudgetHit => None,
        };
        hits += usize::from(brute);
        if gadget != Some(brute) {
            mismatches.push(format!("net {i}: gadget {gadget:?}, brute force {brute}"));
        }
    }
    ok(mismatches.is_empty(), format!("20 nets ({hits} intersecting); mismatches: {mismatches:?}"))
}

fn c10() -> Outcome {
    let (net, _, _) = corpus::fig4_net();
    let place = |n: &PetriNet, s: &str| n.place_by_name(s).unwrap();
    let p = net_to_protocol(&net, place(&net, "p_i"), place(&net, "p_f")).unwrap();
    let table = witness_table(&p, 8, &lim()).answers();
    let first_yes = table.iter().position(|a| *a == Answer::Yes);
    let eventually = first_yes.is_some_and(|b| table[b..].iter().all(|a| *a == Answer::Yes));

    let mut b = PetriNetBuilder::new();
    b.places(["p_i", "p_2", "p_f"]).transition("t_1", &[("p_i", 1)], &[("p_2", 1)]);
    let dead = b.build().unwrap();
    let q = net_to_protocol(&dead, place(&dead, "p_i"), place(&dead, "p_f")).unwrap();
    let dead_table = witness_table(&q, 8, &lim()).answers();
    let none = dead_table.iter().all(|a| *a == Answer::No);
    ok(
        eventually && none,
        format!("small net: n=0..8 {} (all yes from {first_yes:?}); unreachable p_f: {}", yn(&table), yn(&dead_table)),
    )
}

fn main() {
    // Ignore libtest flags such as `--nocapture` that cargo passes through.
    let limits: [(u32, fn() -> Outcome, u64); 10] = [
        (1, c1, 5),
        (2, c2, 10),
        (3, c3, 120),
        (4, c4, 300),
        (5, c5, 300),
        (6, c6, 120),
        (7, c7, 60),
        (8, c8, 180),
        (9, c9, 60),
        (10, c10, 120),
    ];
    let mut unexpected = Vec::new();
    for (id, f, secs) in limits {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(secs);
        let pass = o.pass && in_time;
        println!(
            "criterion {id:>2}: {} ({:.2}s, limit {secs}s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        if !pass {
            match (DOCUMENTED.contains(&id), o.corrected) {
                (true, Some(true)) if in_time => println!("criterion {id:>2}: documented deviation; corrected expectation holds"),
                _ => unexpected.push(id),
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no undocumented failures");
    } else {
        println!("acceptance: undocumented failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
