//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use loccert::cert::{
    adversarial_prover, cert_size_bits, count_escapes, mutate_certs, run_verification, CertMap, Scheme,
};
use loccert::ef::{ef_equivalent, sample_sentence_check};
use loccert::generate::{
    connected_graphs, random_bounded_treedepth_graph, random_connected_graph, random_connected_graph_with,
};
use loccert::kernel::{end_type_consistency_check, k_reduce, type_bound, TypeBound};
use loccert::logic::corpus;
use loccert::schemes::{Depth2Scheme, ExistentialFoScheme, FoTreedepthScheme, TreedepthScheme};
use loccert::treedepth::{balanced_path_model, compute_treedepth_exact, is_valid_model, Model};
use loccert::{Graph, NodeId, Sentence};
use num_bigint::BigUint;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parse(text: &str) -> Sentence {
    Sentence::parse(text).expect("corpus sentence parses")
}

fn accepted(g: &Graph, c: &CertMap, s: &dyn Scheme) -> bool {
    run_verification(g, c, s).map(|v| v.accepted).unwrap_or(false)
}

// Treedepth by vertex removal on bitmask subsets, independent of the library solver.
struct RemovalOracle {
    nbr: Vec<u32>,
    memo: HashMap<u32, usize>,
}

impl RemovalOracle {
    fn new(g: &Graph) -> Self {
        let nbr = (0..g.len()).map(|i| g.neighbors(i).iter().fold(0u32, |m, &j| m | 1 << j)).collect();
        RemovalOracle { nbr, memo: HashMap::new() }
    }

    fn components(&self, set: u32) -> Vec<u32> {
        let mut left = set;
        let mut out = Vec::new();
        while left != 0 {
            let mut comp = left & left.wrapping_neg();
            loop {
                let grown = comp | comp.iter_bits().fold(0, |m, i| m | self.nbr[i]) & set;
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            out.push(comp);
            left &= !comp;
        }
        out
    }

    fn td(&mut self, set: u32) -> usize {
        if set.count_ones() == 1 {
            return 0;
        }
        if let Some(&v) = self.memo.get(&set) {
            return v;
        }
        let comps = self.components(set);
        let v = if comps.len() > 1 {
            comps.into_iter().map(|c| self.td(c)).max().unwrap_or(0)
        } else {
            set.iter_bits()
                .map(|v| {
                    let rest = set & !(1 << v);
                    1 + self.components(rest).into_iter().map(|c| self.td(c)).max().unwrap_or(0)
                })
                .min()
                .unwrap_or(0)
        };
        self.memo.insert(set, v);
        v
    }

    fn treedepth(g: &Graph) -> usize {
        let mut o = RemovalOracle::new(g);
        o.td((1u32 << g.len()) - 1)
    }
}

trait IterBits {
    fn iter_bits(self) -> impl Iterator<Item = usize>;
}

impl IterBits for u32 {
    fn iter_bits(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self >> i & 1 == 1)
    }
}

fn criterion_1() -> Outcome {
    let (t, m) = compute_treedepth_exact(&Graph::path(7)).map_err(|e| e.to_string())?;
    ensure(t == 2 && is_valid_model(&Graph::path(7), &m, 2).unwrap_or(false), || format!("P7 gave {t}"))?;
    for j in 1..=4u32 {
        let p = Graph::path((1 << j) - 1);
        let t = compute_treedepth_exact(&p).map_err(|e| e.to_string())?.0;
        ensure(t == j as usize - 1, || format!("P_{} gave {t}", (1 << j) - 1))?;
    }
    for n in 1..=6 {
        let k = Graph::complete(n);
        let t = compute_treedepth_exact(&k).map_err(|e| e.to_string())?.0;
        let oracle = RemovalOracle::treedepth(&k);
        ensure(t == n - 1 && oracle == n - 1, || format!("K{n}: solver {t}, oracle {oracle}"))?;
    }
    let graphs: Vec<Graph> = (1..=8).flat_map(connected_graphs).collect();
    let bad: Vec<String> = graphs
        .par_iter()
        .filter_map(|g| {
            let (t, m) = compute_treedepth_exact(g).ok()?;
            let oracle = RemovalOracle::treedepth(g);
            let ok = t == oracle && m.height() == t && is_valid_model(g, &m, t).unwrap_or(false);
            (!ok).then(|| format!("{} vertices, {} edges: solver {t}, oracle {oracle}", g.len(), g.edge_count()))
        })
        .collect();
    ensure(bad.is_empty(), || bad[0].clone())?;
    Ok(format!("{} connected graphs on up to 8 vertices agree with the removal oracle", graphs.len()))
}

const SIZE_A: usize = 5;
const SIZE_B: usize = 40;

fn id_log(g: &Graph) -> usize {
    // ceil(log2 idBound)
    let b = g.id_bound();
    (64 - (b - 1).leading_zeros()) as usize
}

fn td_max_bits(g: &Graph, m: &Model, t: usize) -> Result<usize, String> {
    let s = TreedepthScheme { t };
    let c = s.prove(g, Some(m)).map_err(|e| e.to_string())?;
    ensure(accepted(g, &c, &s), || format!("honest certificates rejected on {} vertices, t={t}", g.len()))?;
    let bits = cert_size_bits(&c).max_bits;
    let bound = SIZE_A * t * id_log(g) + SIZE_B;
    ensure(bits <= bound, || format!("{bits} bits exceed {bound} at n={}, t={t}", g.len()))?;
    Ok(bits)
}

fn criterion_2() -> Outcome {
    let results: Vec<Result<usize, String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let t = 1 + (seed % 4) as usize;
            let n = 2 + (seed.wrapping_mul(7919) % 30) as usize;
            let (g, m) = random_bounded_treedepth_graph(t, n, seed).map_err(|e| e.to_string())?;
            td_max_bits(&g, &m, t)
        })
        .collect();
    let worst = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().max().unwrap_or(0);

    // sweep t at n = 31: size grows by at most A·W per level
    let mut by_t = Vec::new();
    for t in 1..=4 {
        let mut most = 0;
        for seed in 0..10 {
            let (g, m) = random_bounded_treedepth_graph(t, 31, 1000 + seed).map_err(|e| e.to_string())?;
            most = most.max(td_max_bits(&g, &m, t)?);
        }
        by_t.push(most);
    }
    let w31 = id_log(&Graph::path(31));
    ensure(by_t.windows(2).all(|p| p[0] <= p[1] && p[1] - p[0] <= SIZE_A * w31), || format!("t sweep {by_t:?}"))?;

    // sweep n at t = 2: size over log n stays bounded
    let mut by_n = Vec::new();
    for n in [7, 15, 31, 63] {
        let mut most = 0;
        for seed in 0..10 {
            let (g, m) = random_bounded_treedepth_graph(2, n, 2000 + seed).map_err(|e| e.to_string())?;
            most = most.max(td_max_bits(&g, &m, 2)?);
        }
        by_n.push((n, most, id_log(&Graph::path(n))));
    }
    ensure(by_n.iter().all(|&(_, b, w)| b <= 2 * SIZE_A * w + SIZE_B), || format!("n sweep {by_n:?}"))?;

    // frozen sizes for paths with balanced models
    let goldens = [(7, 2, 56), (15, 3, 107), (31, 4, 168), (63, 5, 243)];
    for (n, t, want) in goldens {
        let got = td_max_bits(&Graph::path(n), &balanced_path_model(n), t)?;
        ensure(got == want, || format!("P{n}: {got} bits, golden {want}"))?;
    }
    Ok(format!(
        "200/200 accepted, worst {worst} bits; t sweep {by_t:?}; n sweep {:?}",
        by_n.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>()
    ))
}

fn criterion_3() -> Outcome {
    let mut instances = Vec::new();
    let mut seed = 0u64;
    while instances.len() < 20 {
        let n = 6 + (seed % 7) as usize;
        let g = random_connected_graph(n, 300 + seed).map_err(|e| e.to_string())?;
        seed += 1;
        let td = compute_treedepth_exact(&g).map_err(|e| e.to_string())?.0;
        if td >= 2 {
            instances.push((g, td - 1));
        }
    }
    let escapes: Vec<(usize, usize, usize)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, (g, t))| {
            let s = TreedepthScheme { t: *t };
            let attacks: Vec<CertMap> =
                adversarial_prover(g, &s, &s.strategies(), i as u64).into_iter().map(|a| a.1).collect();
            let mut escaped = count_escapes(g, &s, attacks.clone());
            let per_base = 10_000 / attacks.len().max(1);
            let mut tried = 0;
            for (j, base) in attacks.iter().enumerate() {
                let budget = if j + 1 == attacks.len() { 10_000 - tried } else { per_base };
                escaped += count_escapes(g, &s, mutate_certs(base, (i * 100 + j) as u64, budget));
                tried += budget;
            }
            (escaped, attacks.len(), tried)
        })
        .collect();
    let total: usize = escapes.iter().map(|e| e.0).sum();
    let adversaries: usize = escapes.iter().map(|e| e.1).sum();
    ensure(escapes.iter().all(|e| e.1 > 0), || "an instance produced no adversary".into())?;
    ensure(total == 0, || format!("{total} accepting assignments on no-instances"))?;
    Ok(format!("20 no-instances, {adversaries} adversaries, 10^4 mutations each, 0 escapes"))
}

/// EF verdict, structural checks and number of pruned subtrees for one reduction.
type Checked = (Result<(), String>, Result<(), String>, usize);

struct KernelCase {
    graph: Graph,
    model: Model,
    k: usize,
    t: usize,
}

fn kernel_cases() -> Result<Vec<KernelCase>, String> {
    let mut cases = Vec::new();
    for n in 1..=7 {
        for g in connected_graphs(n) {
            let (t, m) = compute_treedepth_exact(&g).map_err(|e| e.to_string())?;
            for k in 1..=2 {
                cases.push(KernelCase { graph: g.clone(), model: m.clone(), k, t });
            }
        }
    }
    for seed in 0..500u64 {
        let t = 1 + (seed % 3) as usize;
        let n = 1 + (seed.wrapping_mul(31) % 12) as usize;
        let (g, m) = random_bounded_treedepth_graph(t, n, 5000 + seed).map_err(|e| e.to_string())?;
        for k in 1..=3 {
            cases.push(KernelCase { graph: g.clone(), model: m.clone(), k, t });
        }
    }
    Ok(cases)
}

fn criteria_4_and_5() -> (Outcome, Outcome) {
    let cases = match kernel_cases() {
        Ok(c) => c,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let checked: Vec<Checked> = cases
        .par_iter()
        .map(|c| {
            let r = match k_reduce(&c.graph, &c.model, c.k) {
                Ok(r) => r,
                Err(e) => return (Err(e.to_string()), Err(e.to_string()), 0),
            };
            let ef = match ef_equivalent(&c.graph, &r.kernel, c.k) {
                Ok(true) => Ok(()),
                Ok(false) => Err(format!("kernel not {}-equivalent on {}", c.k, c.graph.to_edge_list())),
                Err(e) => Err(e.to_string()),
            };
            let structure = if !r.exactly_k_check() {
                Err(format!("exactly-k check fails for k={} on {}", c.k, c.graph.to_edge_list()))
            } else if !end_type_consistency_check(&r) {
                Err("end types inconsistent".to_string())
            } else {
                let over = r
                    .distinct_end_types_by_depth()
                    .into_iter()
                    .find(|&(d, count)| d > c.t || !type_bound(c.k, c.t, d).admits(count));
                match over {
                    Some((d, count)) => Err(format!("{count} end types at depth {d} (k={}, t={})", c.k, c.t)),
                    None => Ok(()),
                }
            };
            (ef, structure, r.prune_log.len())
        })
        .collect();
    let pruned: usize = checked.iter().map(|c| c.2).sum();
    let first_err = |sel: fn(&Checked) -> &Result<(), String>| {
        checked.iter().find_map(|c| sel(c).clone().err())
    };
    let c4 = match first_err(|c| &c.0) {
        Some(e) => Err(e),
        None => Ok(format!("{} reductions, {pruned} pruned subtrees, all EF-equivalent", checked.len())),
    };
    let base = (0..=5).all(|t| (1..=3).all(|k| type_bound(k, t, t) == TypeBound::Exact(BigUint::from(1u32) << t)));
    let c5 = match first_err(|c| &c.1) {
        Some(e) => Err(e),
        None if !base => Err("type_bound(k,t,t) differs from 2^t".to_string()),
        None => Ok(format!("{} reductions within type bounds, type_bound(k,t,t) = 2^t", checked.len())),
    };
    (c4, c5)
}

fn has_triangle(g: &Graph) -> bool {
    g.edges().any(|(a, b)| g.neighbors(a).iter().any(|c| g.adjacent(*c, b)))
}

const DEPTH_TWO: [&str; 10] = [
    corpus::DOMINATING,
    corpus::CLIQUE,
    corpus::SINGLETON,
    "forall x exists y x ~ y",
    "exists x exists y (!(x = y) & !(x ~ y))",
    "!exists x forall y (x = y | x ~ y)",
    "forall x exists y (!(x = y) & !(x ~ y))",
    "exists x forall y x ~ y",
    "(exists x exists y !(x = y)) & forall x forall y (x = y | x ~ y)",
    "exists x exists y x ~ y",
];

fn criterion_6() -> Outcome {
    let triangle = parse(corpus::TRIANGLE);
    let scheme = ExistentialFoScheme::new(&triangle).map_err(|e| e.to_string())?;
    let mut yes = Vec::new();
    let mut no = Vec::new();
    let mut seed = 0u64;
    while yes.len() < 100 || no.len() < 20 {
        let n = 3 + (seed % 10) as usize;
        let extra = if seed.is_multiple_of(2) { 0.4 } else { 0.05 };
        let g = random_connected_graph_with(n, extra, 7000 + seed).map_err(|e| e.to_string())?;
        seed += 1;
        if has_triangle(&g) {
            if yes.len() < 100 {
                yes.push(g);
            }
        } else if no.len() < 20 {
            no.push(g);
        }
    }
    for g in &yes {
        ensure(triangle.evaluate(g), || "triangle check disagrees with evaluator".into())?;
        let c = scheme.prove(g, None).map_err(|e| e.to_string())?;
        ensure(accepted(g, &c, &scheme), || format!("honest triangle certificates rejected on {}", g.to_edge_list()))?;
    }
    let escapes: usize = no
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let attacks: Vec<CertMap> =
                adversarial_prover(g, &scheme, &scheme.strategies(), i as u64).into_iter().map(|a| a.1).collect();
            let mut escaped = count_escapes(g, &scheme, attacks.clone());
            let per_base = (10_000 / attacks.len().max(1)).max(1);
            for (j, base) in attacks.iter().enumerate() {
                escaped += count_escapes(g, &scheme, mutate_certs(base, (i * 50 + j) as u64, per_base));
            }
            escaped
        })
        .sum();
    ensure(escapes == 0, || format!("{escapes} escapes on triangle-free graphs"))?;

    let sentences: Vec<(Sentence, Depth2Scheme)> = DEPTH_TWO
        .iter()
        .map(|t| {
            let s = parse(t);
            let d = Depth2Scheme::new(&s).expect("depth-2 sentence");
            (s, d)
        })
        .collect();
    let disagreements: Vec<String> = (0..1000u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let n = 1 + (seed % 12) as usize;
            let extra = [0.0, 0.1, 0.3, 0.8][(seed / 12 % 4) as usize];
            let g = random_connected_graph_with(n, extra, 9000 + seed).expect("n > 0");
            sentences
                .iter()
                .filter_map(|(s, d)| {
                    let truth = s.evaluate(&g);
                    let ok = match d.prove(&g, None) {
                        Ok(c) => truth && accepted(&g, &c, d),
                        Err(_) => !truth,
                    };
                    (!ok).then(|| format!("{} on {}", s.formula(), g.to_edge_list()))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    ensure(disagreements.is_empty(), || disagreements[0].clone())?;
    Ok(format!("100 triangle graphs accepted, 0 escapes on {} triangle-free graphs, 10000/10000 depth-2 agreements", no.len()))
}

/// Root with `m` gadgets (a child with two leaves below it) and `l` leaves.
fn gadget_graph(m: usize, l: usize) -> (Graph, Model) {
    let mut edges = Vec::new();
    let mut parent = vec![(0usize, 0usize)];
    let mut next = 1;
    for _ in 0..m {
        let a = next;
        edges.push((0, a));
        parent.push((a, 0));
        for leaf in [a + 1, a + 2] {
            edges.push((a, leaf));
            parent.push((leaf, a));
        }
        next += 3;
    }
    for leaf in next..next + l {
        edges.push((0, leaf));
        parent.push((leaf, 0));
    }
    let g = Graph::from_index_edges(next + l, &edges).expect("gadget graph");
    let parents: BTreeMap<NodeId, NodeId> = parent.iter().map(|&(v, p)| (g.id(v), g.id(p))).collect();
    (g, Model::from_parents(parents).expect("tree"))
}

const FO_SENTENCES: [&str; 5] = [
    corpus::TRIANGLE,
    corpus::DIAMETER_TWO,
    corpus::DOMINATING,
    "forall x exists y x ~ y",
    "exists x exists y (!(x = y) & !(x ~ y) & !exists z (x ~ z & z ~ y))",
];

fn criterion_7() -> Outcome {
    let sentences: Vec<Sentence> = FO_SENTENCES.iter().map(|t| parse(t)).collect();
    ensure(sentences.iter().all(|s| s.quantifier_depth() <= 3), || "sentence deeper than 3".into())?;
    let results: Vec<Result<bool, String>> = (0..50u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let t = 1 + (seed % 3) as usize;
            let n = 4 + (seed * 13 % 17) as usize;
            let (g, m) = random_bounded_treedepth_graph(t, n, 11_000 + seed).expect("generator");
            sentences
                .iter()
                .map(|f| {
                    let s = FoTreedepthScheme::new(f, t);
                    let truth = f.evaluate(&g);
                    match s.prove(&g, Some(&m)) {
                        Ok(c) if truth => {
                            ensure(accepted(&g, &c, &s), || format!("{} rejected on {}", s.name(), g.to_edge_list()))
                                .map(|_| true)
                        }
                        Ok(_) => Err(format!("{} proved a false sentence", s.name())),
                        Err(e) if truth => Err(format!("{} failed on a yes-instance: {e}", s.name())),
                        Err(_) => Ok(false),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let outcomes = results.into_iter().collect::<Result<Vec<bool>, String>>()?;
    let yes = outcomes.iter().filter(|&&b| b).count();

    let f = parse("forall x exists y x ~ y");
    let s = FoTreedepthScheme::new(&f, 2);
    let mut parts = Vec::new();
    for (m, l) in [(2, 3), (5, 4), (12, 3)] {
        let (g, model) = gadget_graph(m, l);
        let c = s.prove(&g, Some(&model)).map_err(|e| e.to_string())?;
        ensure(accepted(&g, &c, &s), || format!("gadget graph on {} vertices rejected", g.len()))?;
        let part = c.values().map(|x| x.field_bits(&loccert::schemes::KERNEL_PART_FIELDS)).max().unwrap_or(0);
        parts.push((g.len(), part, cert_size_bits(&c).max_bits));
    }
    ensure(parts.windows(2).all(|p| p[0].1 == p[1].1), || format!("kernel part varies: {parts:?}"))?;
    Ok(format!(
        "{} runs, {yes} yes-instances accepted; kernel part {} bits at n = 10, 20, 40 (totals {:?})",
        outcomes.len(),
        parts[0].1,
        parts.iter().map(|p| p.2).collect::<Vec<_>>()
    ))
}

fn criterion_8() -> Outcome {
    let corpus_graphs: Vec<Graph> = (1..=6)
        .flat_map(connected_graphs)
        .chain([Graph::path(7), Graph::cycle(7), Graph::star(6), Graph::complete(7)])
        .collect();
    for g in &corpus_graphs {
        for k in 0..=3 {
            ensure(ef_equivalent(g, g, k).map_err(|e| e.to_string())?, || {
                format!("{} not {k}-equivalent to itself", g.to_edge_list())
            })?;
        }
    }
    let (p3, p4) = (Graph::path(3), Graph::path(4));
    ensure(!ef_equivalent(&p3, &p4, 2).map_err(|e| e.to_string())?, || "P3 ≃_2 P4".into())?;
    let report = sample_sentence_check(&p3, &p4, 2, 200, 1);
    ensure(!report.is_empty(), || "no sampled sentence separates P3 and P4".into())?;
    let witness = report.distinguishing[0].0.to_string();

    let small: Vec<&Graph> = corpus_graphs.iter().filter(|g| g.len() <= 5).collect();
    let pairs: Vec<(usize, usize)> =
        (0..small.len()).flat_map(|i| (i..small.len()).map(move |j| (i, j))).collect();
    let broken: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let mut prev = true;
            for k in 0..=3 {
                let now = ef_equivalent(small[i], small[j], k).ok()?;
                if now && !prev {
                    return Some(format!("{} vs {} at k={k}", small[i].to_edge_list(), small[j].to_edge_list()));
                }
                prev = now;
            }
            None
        })
        .collect();
    ensure(broken.is_empty(), || broken[0].clone())?;
    Ok(format!(
        "{} self-checks, {} monotone pairs, witness `{witness}`",
        corpus_graphs.len() * 4,
        pairs.len()
    ))
}

fn report(n: &str, limit: Duration, start: Instant, outcome: Outcome) -> bool {
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the {}s limit", limit.as_secs())),
        Err(e) => (false, e),
    };
    println!("criterion {n}: {} ({:.1}s) {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn main() -> ExitCode {
    let min = |m: u64| Duration::from_secs(60 * m);
    let mut ok = true;
    let s = Instant::now();
    ok &= report("1", min(2), s, criterion_1());
    let s = Instant::now();
    ok &= report("2", min(5), s, criterion_2());
    let s = Instant::now();
    ok &= report("3", min(10), s, criterion_3());
    let s = Instant::now();
    let (c4, c5) = criteria_4_and_5();
    ok &= report("4", min(15), s, c4);
    ok &= report("5", min(15), s, c5);
    let s = Instant::now();
    ok &= report("6", min(5), s, criterion_6());
    let s = Instant::now();
    ok &= report("7", min(10), s, criterion_7());
    let s = Instant::now();
    ok &= report("8", min(2), s, criterion_8());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
