use std::fmt;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use loccert::cert::{
    adversarial_prover, cert_size_bits, certs_from_json, certs_to_json, count_escapes, dump_certs, mutate_certs,
    run_verification, CertMap, Scheme,
};
use loccert::ef::{ef_equivalent_with_budget, EfError, DEFAULT_BUDGET};
use loccert::generate::{random_bounded_treedepth_graph_with, random_connected_graph_with};
use loccert::kernel::k_reduce;
use loccert::schemes::{build_scheme, SchemeParams};
use loccert::treedepth::{compute_treedepth_exact, is_coherent, is_valid_model, load_model, make_coherent};
use loccert::{load_graph, Graph, Model, Sentence};
use rayon::prelude::*;

use crate::{
    CertifyArgs, EquivArgs, EvalArgs, FuzzArgs, GenArgs, GraphKind, KernelizeArgs, SchemeArgs, SchemeKind,
    StatsArgs, TdArgs, VerifyArgs,
};

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Yes,
    No,
}

impl From<Status> for std::process::ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Yes => 0.into(),
            Status::No => 1.into(),
        }
    }
}

fn status(b: bool) -> Status {
    if b {
        Status::Yes
    } else {
        Status::No
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable input.
    Usage(String),
    /// The prover refused, or a search ran out of budget.
    Undecided(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Undecided(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Undecided(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<Status, Failure>;

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn graph(path: &Path) -> Result<Graph, Failure> {
    load_graph(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn model(path: &Path) -> Result<Model, Failure> {
    load_model(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn scheme_name(kind: SchemeKind) -> String {
    kind.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn scheme(a: &SchemeArgs) -> Result<Box<dyn Scheme + Send>, Failure> {
    let p = SchemeParams { t: a.t, k: a.k, formula: a.formula.clone(), expected: a.expected, root: a.root };
    build_scheme(&scheme_name(a.scheme), &p).map_err(usage)
}

pub fn gen(a: GenArgs) -> Outcome {
    let extra = a.extra.unwrap_or(0.3);
    let (g, m) = match a.kind {
        GraphKind::Path => (Graph::path(a.n), None),
        GraphKind::Cycle => (Graph::cycle(a.n), None),
        GraphKind::Complete => (Graph::complete(a.n), None),
        GraphKind::Star => (Graph::star(a.n), None),
        GraphKind::Random => (random_connected_graph_with(a.n, extra, a.seed).map_err(usage)?, None),
        GraphKind::Td => {
            let t = a.t.ok_or_else(|| usage("--kind td needs --t"))?;
            let (g, m) = random_bounded_treedepth_graph_with(t, a.n, extra, a.seed).map_err(usage)?;
            (g, Some(m))
        }
    };
    match &a.out {
        Some(p) => write(p, &g.to_edge_list())?,
        None => print!("{}", g.to_edge_list()),
    }
    if let (Some(m), Some(p)) = (m, &a.model_out) {
        write(p, &m.to_text())?;
    }
    Ok(Status::Yes)
}

pub fn td(a: TdArgs) -> Outcome {
    let g = graph(&a.graph)?;
    if let Some(path) = &a.model {
        let m = model(path)?;
        let t = a.t.expect("clap requires --t with --model");
        let ok = is_valid_model(&g, &m, t).map_err(usage)?;
        println!("{}", if ok { "valid" } else { "invalid" });
        if ok {
            println!("coherent {}", is_coherent(&g, &m));
        }
        return Ok(status(ok));
    }
    let (td, m) = compute_treedepth_exact(&g).map_err(usage)?;
    println!("treedepth {td}");
    match &a.model_out {
        Some(p) => write(p, &m.to_text())?,
        None => print!("{}", m.to_text()),
    }
    Ok(match a.t {
        Some(t) => status(td <= t),
        None => Status::Yes,
    })
}

pub fn eval(a: EvalArgs) -> Outcome {
    let g = graph(&a.graph)?;
    let s = Sentence::parse(&a.formula).map_err(usage)?;
    let v = s.evaluate(&g);
    println!("{v}");
    Ok(status(v))
}

pub fn equiv(a: EquivArgs) -> Outcome {
    let (g, h) = (graph(&a.g)?, graph(&a.h)?);
    match ef_equivalent_with_budget(&g, &h, a.k, a.budget.unwrap_or(DEFAULT_BUDGET)) {
        Ok(v) => {
            println!("{}", if v { "equivalent" } else { "not equivalent" });
            Ok(status(v))
        }
        Err(e @ EfError::Undecided { .. }) => Err(Failure::Undecided(e.to_string())),
    }
}

pub fn kernelize(a: KernelizeArgs) -> Outcome {
    let g = graph(&a.graph)?;
    let m = match &a.model {
        Some(p) => {
            let m = model(p)?;
            if !is_valid_model(&g, &m, m.height()).map_err(usage)? {
                return Err(usage("model is not a model of the graph"));
            }
            make_coherent(&g, &m).map_err(usage)?
        }
        None => compute_treedepth_exact(&g).map_err(usage)?.1,
    };
    let r = k_reduce(&g, &m, a.k).map_err(usage)?;
    print!("{}", r.to_dump());
    if let Some(p) = &a.kernel_out {
        write(p, &r.kernel.to_edge_list())?;
    }
    Ok(Status::Yes)
}

pub fn certify(a: CertifyArgs) -> Outcome {
    let s = scheme(&a.scheme)?;
    let g = graph(&a.graph)?;
    let m = a.model.as_deref().map(model).transpose()?;
    let c = s.prove(&g, m.as_ref()).map_err(|e| Failure::Undecided(e.to_string()))?;
    let size = cert_size_bits(&c);
    print!("{}", dump_certs(&c));
    println!("# {}: max {} bits, total {} bits", s.name(), size.max_bits, size.total_bits);
    if let Some(p) = &a.out {
        write(p, &certs_to_json(&c))?;
    }
    Ok(Status::Yes)
}

fn certs(path: &Path) -> Result<CertMap, Failure> {
    certs_from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let s = scheme(&a.scheme)?;
    let g = graph(&a.graph)?;
    let c = certs(&a.certs)?;
    let v = run_verification(&g, &c, s.as_ref()).map_err(usage)?;
    if v.accepted {
        println!("accept");
    } else {
        let ids: Vec<String> = v.rejecting.iter().map(|x| x.to_string()).collect();
        println!("reject ({} of {}): {}", ids.len(), g.len(), ids.join(" "));
    }
    Ok(status(v.accepted))
}

pub fn fuzz(a: FuzzArgs) -> Outcome {
    let s = scheme(&a.scheme)?;
    let g = graph(&a.graph)?;
    if s.prove(&g, None).is_ok() {
        return Err(usage(format!("the graph is a yes-instance for {}; fuzzing needs a no-instance", s.name())));
    }
    let mut bases: Vec<(String, CertMap)> = adversarial_prover(&g, s.as_ref(), &s.strategies(), a.seed);
    if let Some(p) = &a.certs {
        bases.push(("file".into(), certs(p)?));
    }
    if bases.is_empty() {
        return Err(Failure::Undecided(format!("{} has no adversary for this graph; pass --certs", s.name())));
    }
    let direct = count_escapes(&g, s.as_ref(), bases.iter().map(|b| b.1.clone()));
    let share = a.mutations / bases.len();
    let rest = a.mutations % bases.len();
    let per_base: Vec<usize> = bases
        .par_iter()
        .enumerate()
        .map(|(i, (_, c))| {
            let budget = share + usize::from(i < rest);
            count_escapes(&g, s.as_ref(), mutate_certs(c, a.seed.wrapping_add(i as u64), budget))
        })
        .collect();
    for ((name, _), e) in bases.iter().zip(&per_base) {
        if *e > 0 {
            println!("base {name}: {e} escapes");
        }
    }
    let escapes = direct + per_base.iter().sum::<usize>();
    println!("bases {}, mutations {}, escapes {escapes}", bases.len(), a.mutations);
    Ok(status(escapes == 0))
}

pub fn stats(a: StatsArgs) -> Outcome {
    let name = scheme_name(a.scheme);
    let ks: Vec<Option<usize>> = if a.scheme == SchemeKind::Kernel { a.k.iter().copied().map(Some).collect() } else { vec![None] };
    // the fo-td scheme reduces with k = quantifier depth
    let fo_k = a.formula.as_deref().and_then(|f| Sentence::parse(f).ok()).map_or(1, |f| f.quantifier_depth().max(1));
    let mut grid = Vec::new();
    for &n in &a.n {
        for &t in &a.t {
            for &k in &ks {
                for i in 0..a.seeds {
                    grid.push((n, t, k, a.seed.wrapping_add(i)));
                }
            }
        }
    }
    let rows: Vec<Result<Vec<String>, Failure>> = grid
        .par_iter()
        .map(|&(n, t, k, seed)| {
            let p = SchemeParams { t: Some(t), k, formula: a.formula.clone(), ..Default::default() };
            let s = build_scheme(&name, &p).map_err(usage)?;
            let (g, m) = random_bounded_treedepth_graph_with(t, n, 0.3, seed).map_err(usage)?;
            let (max, total, verdict) = match s.prove(&g, Some(&m)) {
                Ok(c) => {
                    let size = cert_size_bits(&c);
                    let v = run_verification(&g, &c, s.as_ref()).map_err(usage)?;
                    (size.max_bits.to_string(), size.total_bits.to_string(), if v.accepted { "accept" } else { "reject" })
                }
                Err(_) => (String::new(), String::new(), "no-instance"),
            };
            let k = match (a.scheme, k) {
                (SchemeKind::Kernel, Some(k)) => k.to_string(),
                (SchemeKind::FoTd, _) => fo_k.to_string(),
                _ => String::new(),
            };
            Ok(vec![name.clone(), n.to_string(), t.to_string(), k, max, total, verdict.to_string(), seed.to_string()])
        })
        .collect();
    let out: Box<dyn std::io::Write> = match &a.out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| usage(e);
    w.write_record(["scheme", "n", "t", "k", "maxBits", "totalBits", "verdict", "seed"]).map_err(io)?;
    let mut all_accepted = true;
    for row in rows {
        let row = row?;
        all_accepted &= row[6] != "reject";
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(usage)?;
    Ok(status(all_accepted))
}
