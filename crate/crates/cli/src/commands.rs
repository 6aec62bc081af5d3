use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Value};

use qqlab::adversary::{
    comes_from_report, evaluate_relation_bound, grover_relation, AdversaryCounts, MultiplicityProfile, RelationSpec,
};
use qqlab::bounds::{bound_report, dichotomy_classify, grid, optimize_r, slope, GridKind};
use qqlab::inv::{disp, inv_profile, ProfileRow, PROFILE_CSV_HEADER};
use qqlab::model::{make_one_to_one, make_r_to_one};
use qqlab::probability::{bad_prob_exact, monte_carlo_bad_rate};
use qqlab::reductions::{complementary_reduce, equivalent_reduce};
use qqlab::sim::{
    acceptance_table, grover_closed_form, grover_iterations, grover_search, set_equality_cuberoot,
    set_equality_sqrt_n, Decision, Distinguisher, ExactSetComparison, Majority, SetEqualityRun, SqrtNAlgorithm,
};
use qqlab::{BadCriterion, Error, ExactRational, FunctionPair, OracleFunction, SeededRng};

use crate::config::{pick, seed_from_env, FileConfig};
use crate::report::{csv_cell, emit_report, Report};
use crate::{Alg, Cli, Command, Dist, Failure, Format, GridArg, Mode, OriginArg};

/// Resolved shared options plus access to the config file.
struct Ctx {
    file: FileConfig,
    seed: u64,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Ctx {
    fn u64(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>, Failure> {
        Ok(pick(flag, self.file.u64(key)?))
    }

    fn need(&self, flag: Option<u64>, key: &str) -> Result<u64, Failure> {
        self.u64(flag, key)?.ok_or_else(|| Failure::Usage(format!("missing --{key}")))
    }

    fn string(&self, flag: Option<String>, key: &str) -> Result<Option<String>, Failure> {
        Ok(pick(flag, self.file.string(key)?))
    }

    fn choice<E: ValueEnum>(&self, flag: Option<E>, key: &str) -> Result<Option<E>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .string(key)?
            .map(|s| E::from_str(&s, false).map_err(|_| Failure::Usage(format!("invalid {key} {s:?} in config"))))
            .transpose()
    }

    fn format(&self, allowed: &[Format], default: Format, command: &str) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return Err(Failure::Usage(format!("{command} does not support {f:?} output").to_lowercase()));
        }
        Ok(f)
    }

    fn emit(&self, report: Report) -> Result<(), Failure> {
        emit_report(&report, self.out.as_deref())
    }
}

fn to_u32(v: u64, key: &str) -> Result<u32, Failure> {
    u32::try_from(v).map_err(|_| Failure::Usage(format!("--{key} {v} is too large")))
}

fn constant(text: Option<String>) -> Result<BadCriterion, Failure> {
    match text {
        None => Ok(BadCriterion::default()),
        Some(s) => {
            let c: ExactRational = s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("--constant {s:?} is not a rational")))?;
            Ok(BadCriterion::new(c)?)
        }
    }
}

fn big(v: &BigUint) -> Result<u64, Failure> {
    u64::try_from(v).map_err(|_| Failure::Core(Error::Invariant("count exceeds 64 bits".into())))
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = match pick(cli.common.seed, file.u64("seed")?) {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    set_jobs(pick(cli.common.jobs, file.u64("jobs")?.map(|j| j as usize)))?;
    let format = match cli.common.format {
        Some(f) => Some(f),
        None => file
            .string("format")?
            .map(|s| Format::from_str(&s, false).map_err(|_| Failure::Usage(format!("invalid format {s:?}"))))
            .transpose()?,
    };
    let out = match cli.common.out {
        Some(p) => Some(p),
        None => file.string("out")?.map(PathBuf::from),
    };
    let ctx = Ctx { file, seed, format, out };
    match cli.command {
        Command::Reduce { n, r, range_size, origin, count } => reduce(&ctx, n, r, range_size, origin, count),
        Command::Inv { n, r, range_size, origin, trials, constant } => {
            inv(&ctx, n, r, range_size, origin, trials, constant)
        }
        Command::Badprob { n, r, trials, constant } => badprob(&ctx, n, r, trials, constant),
        Command::Adversary { mode, n, r, profile, relation } => adversary(&ctx, mode, n, r, profile, relation),
        Command::Simulate { alg, n, r, trials, m, k, dist } => simulate(&ctx, alg, n, r, trials, m, k, dist),
        Command::Bounds { n, grid, sweep } => bounds(&ctx, n, grid, sweep),
    }
}

fn reduce_with(f: &OracleFunction, origin: OriginArg, rng: &mut SeededRng) -> qqlab::Result<FunctionPair> {
    match origin {
        OriginArg::Complementary => complementary_reduce(f, rng),
        OriginArg::Equivalent => equivalent_reduce(f, rng),
    }
}

fn source(n: u32, r: Option<u32>, range_size: u32, rng: &mut SeededRng) -> qqlab::Result<OracleFunction> {
    match r {
        Some(r) => make_r_to_one(n, r, range_size, rng),
        None => make_one_to_one(n, range_size, rng),
    }
}

fn reduce(
    ctx: &Ctx,
    n: Option<u64>,
    r: Option<u64>,
    range_size: Option<u64>,
    origin: Option<OriginArg>,
    count: Option<u64>,
) -> Result<(), Failure> {
    ctx.format(&[Format::Json], Format::Json, "reduce")?;
    let n = ctx.need(n, "n")?;
    if n % 2 != 0 {
        return Err(Error::OddDomain.into());
    }
    let r = ctx.u64(r, "r")?.map(|r| to_u32(r, "r")).transpose()?;
    let range_size = to_u32(ctx.u64(range_size, "N")?.unwrap_or(n), "N")?;
    let origin = ctx.choice(origin, "origin")?.unwrap_or(OriginArg::Complementary);
    let count = ctx.u64(count, "count")?.unwrap_or(1);
    let n = to_u32(n, "n")?;
    let root = SeededRng::new(ctx.seed);
    let mut lines = Vec::new();
    for i in 0..count {
        let mut rng = root.child("reduce", i);
        let f = source(n, r, range_size, &mut rng)?;
        let pair = reduce_with(&f, origin, &mut rng)?;
        // Records keep their documented field order.
        lines.push(serde_json::to_string(&pair).map_err(|e| Failure::Io(e.to_string()))?);
    }
    ctx.emit(Report::Raw(lines))
}

fn inv(
    ctx: &Ctx,
    n: Option<u64>,
    r: Option<u64>,
    range_size: Option<u64>,
    origin: Option<OriginArg>,
    trials: Option<u64>,
    constant_text: Option<String>,
) -> Result<(), Failure> {
    let format = ctx.format(&[Format::Csv, Format::Json], Format::Csv, "inv")?;
    let n = ctx.need(n, "n")?;
    let r = ctx.need(r, "r")?;
    let range_size = to_u32(ctx.u64(range_size, "N")?.unwrap_or(n), "N")?;
    let origin = ctx.choice(origin, "origin")?.unwrap_or(OriginArg::Complementary);
    let trials = ctx.u64(trials, "trials")?.unwrap_or(100);
    let criterion = constant(ctx.string(constant_text, "constant")?)?;
    let (n32, r32) = (to_u32(n, "n")?, to_u32(r, "r")?);
    let root = SeededRng::new(ctx.seed);
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<ProfileRow, Failure> {
            let mut rng = root.child("inv", t);
            let f = make_r_to_one(n32, r32, range_size, &mut rng)?;
            let pair = reduce_with(&f, origin, &mut rng)?;
            let images = &pair.source.as_ref().expect("reductions record their source").images;
            let profile = inv_profile(&pair.a, images, r)?;
            Ok(ProfileRow {
                n,
                r,
                seed: rng.seed(),
                origin: pair.origin.as_str().to_string(),
                disp: disp(&profile)?,
                bad: criterion.is_bad(&profile)?,
                counts: profile.counts().to_vec(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = match format {
        Format::Csv => Report::Csv {
            header: PROFILE_CSV_HEADER.to_string(),
            rows: rows.iter().map(ProfileRow::to_csv).collect(),
        },
        Format::Json => Report::Lines(
            rows.iter()
                .map(|row| {
                    json!({
                        "n": row.n, "r": row.r, "seed": row.seed, "origin": row.origin,
                        "disp": row.disp.to_string(), "bad": row.bad, "counts": row.counts,
                    })
                })
                .collect(),
        ),
    };
    ctx.emit(report)
}

fn badprob(
    ctx: &Ctx,
    n: Option<u64>,
    r: Option<u64>,
    trials: Option<u64>,
    constant_text: Option<String>,
) -> Result<(), Failure> {
    ctx.format(&[Format::Json], Format::Json, "badprob")?;
    let n = ctx.need(n, "n")?;
    let r = ctx.need(r, "r")?;
    let trials = ctx.u64(trials, "trials")?.unwrap_or(10_000);
    let criterion = constant(ctx.string(constant_text, "constant")?)?;
    let exact = bad_prob_exact(n, r, &criterion)?;
    let mc = monte_carlo_bad_rate(n, r, trials, &SeededRng::new(ctx.seed), &criterion)?;
    ctx.emit(Report::Json(json!({
        "exact_per_image": exact.per_image.to_string(),
        "union_bound": exact.union_bound.to_string(),
        "mc_rate": mc.rate,
        "wilson": [mc.wilson.0, mc.wilson.1],
    })))
}

fn counts_json(c: &AdversaryCounts, closed_form_match: Option<bool>) -> Result<Value, Failure> {
    Ok(json!({
        "m": big(&c.m)?,
        "m_prime": big(&c.m_prime)?,
        "l": big(&c.l)?,
        "l_prime": big(&c.l_prime)?,
        "bound": c.bound,
        "closed_form_match": closed_form_match,
    }))
}

fn parse_profile(text: &str) -> Result<Vec<u64>, Failure> {
    text.split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--profile {text:?} must be comma separated integers")))
}

#[derive(serde::Deserialize)]
struct RelationFile {
    x: Vec<Vec<u32>>,
    y: Vec<Vec<u32>>,
    pairs: Vec<(usize, usize)>,
}

fn load_relation(path: &Path) -> Result<RelationFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read relation {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid relation file: {e}")))
}

fn adversary(
    ctx: &Ctx,
    mode: Option<Mode>,
    n: Option<u64>,
    r: Option<u64>,
    profile: Option<String>,
    relation: Option<PathBuf>,
) -> Result<(), Failure> {
    ctx.format(&[Format::Json], Format::Json, "adversary")?;
    let mode = ctx.choice(mode, "mode")?.ok_or_else(|| Failure::Usage("missing --mode".into()))?;
    let report = match mode {
        Mode::Grover => {
            let n = ctx.need(n, "n")? as usize;
            counts_json(&evaluate_relation_bound(&grover_relation(n)?)?, None)?
        }
        Mode::Comesfrom => {
            let text = ctx
                .string(profile, "profile")?
                .ok_or_else(|| Failure::Usage("missing --profile".into()))?;
            let r = ctx.need(r, "r")?;
            let p = MultiplicityProfile::new(r, parse_profile(&text)?)?;
            if let Some(n) = ctx.u64(n, "n")? {
                if n != p.n() {
                    return Err(Failure::Usage(format!("profile describes n = {}, not {n}", p.n())));
                }
            }
            let rep = comes_from_report(&p)?;
            counts_json(&rep.counts, Some(rep.closed_form_match))?
        }
        Mode::Custom => {
            let path = match relation {
                Some(p) => p,
                None => ctx
                    .file
                    .string("relation")?
                    .map(PathBuf::from)
                    .ok_or_else(|| Failure::Usage("missing --relation".into()))?,
            };
            let rel = load_relation(&path)?;
            let spec = RelationSpec::from_pairs(rel.x, rel.y, rel.pairs)?;
            counts_json(&evaluate_relation_bound(&spec)?, None)?
        }
    };
    ctx.emit(Report::Json(report))
}

fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Equal => "equal",
        Decision::Disjoint => "disjoint",
    }
}

fn tally_json(run: &SetEqualityRun) -> Value {
    serde_json::to_value(run.tally).expect("plain struct")
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ctx: &Ctx,
    alg: Option<Alg>,
    n: Option<u64>,
    r: Option<u64>,
    trials: Option<u64>,
    m: Option<u64>,
    k: Option<u64>,
    dist: Option<Dist>,
) -> Result<(), Failure> {
    ctx.format(&[Format::Json], Format::Json, "simulate")?;
    let alg = ctx.choice(alg, "alg")?.ok_or_else(|| Failure::Usage("missing --alg".into()))?;
    let n = ctx.need(n, "n")?;
    let trials = ctx.u64(trials, "trials")?.unwrap_or(1000);
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1").into());
    }
    let root = SeededRng::new(ctx.seed);
    let rows = match alg {
        Alg::Grover => {
            let m = ctx.u64(m, "m")?.unwrap_or(1) as usize;
            let n = n as usize;
            if m > n {
                return Err(Error::invalid("more marked items than the search space holds").into());
            }
            let k = ctx.u64(k, "k")?.unwrap_or_else(|| grover_iterations(n, m));
            let runs = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = root.child("simulate", t);
                    grover_search(n, |i| i <= m, k, &mut rng)
                })
                .collect::<qqlab::Result<Vec<_>>>()?;
            let found = runs.iter().filter(|g| g.found.is_some()).count();
            let mut rows: Vec<Value> = runs
                .iter()
                .enumerate()
                .map(|(t, g)| {
                    json!({
                        "kind": "run", "trial": t, "found": g.found, "success_prob": g.success_prob,
                        "tally": serde_json::to_value(g.tally).expect("plain struct"),
                    })
                })
                .collect();
            rows.push(json!({
                "kind": "summary", "alg": "grover", "n": n, "m": m, "iterations": k, "trials": trials,
                "closed_form": grover_closed_form(n, m, k),
                "success_rate": found as f64 / trials as f64,
            }));
            rows
        }
        Alg::Sqrtn | Alg::Cuberoot => {
            if n % 2 != 0 {
                return Err(Error::OddDomain.into());
            }
            let n32 = to_u32(n, "n")?;
            let sample = ctx.u64(k, "k")?.map(|k| k as usize);
            let name = if alg == Alg::Sqrtn { "sqrtn" } else { "cuberoot" };
            let runs = (0..trials)
                .into_par_iter()
                .map(|t| -> qqlab::Result<Vec<(u64, Decision, SetEqualityRun)>> {
                    let mut rng = root.child("simulate", t);
                    let f = make_one_to_one(n32, n32, &mut rng)?;
                    let mut out = Vec::with_capacity(2);
                    for (pair, want) in [
                        (equivalent_reduce(&f, &mut rng)?, Decision::Equal),
                        (complementary_reduce(&f, &mut rng)?, Decision::Disjoint),
                    ] {
                        let run = match alg {
                            Alg::Sqrtn => set_equality_sqrt_n(&pair, &mut rng)?,
                            _ => set_equality_cuberoot(&pair, sample, &mut rng)?,
                        };
                        out.push((t, want, run));
                    }
                    Ok(out)
                })
                .collect::<qqlab::Result<Vec<_>>>()?;
            let runs: Vec<_> = runs.into_iter().flatten().collect();
            let rate = |want: Decision| {
                runs.iter().filter(|(_, w, run)| *w == want && run.decision == want).count() as f64 / trials as f64
            };
            let within = runs.iter().all(|(_, _, run)| run.tally.total() <= run.budget);
            let mut rows: Vec<Value> = runs
                .iter()
                .map(|(t, want, run)| {
                    json!({
                        "kind": "run", "trial": t, "instance": decision_str(*want),
                        "decision": decision_str(run.decision), "correct": run.decision == *want,
                        "tally": tally_json(run), "budget": run.budget,
                    })
                })
                .collect();
            rows.push(json!({
                "kind": "summary", "alg": name, "n": n, "trials": trials,
                "equal_success": rate(Decision::Equal),
                "disjoint_success": rate(Decision::Disjoint),
                "within_budget": within,
            }));
            rows
        }
        Alg::Table => {
            let r = ctx.need(r, "r")?;
            let dist = ctx.choice(dist, "dist")?.unwrap_or(Dist::Exact);
            let d: Box<dyn Distinguisher> = match dist {
                Dist::Exact => Box::new(ExactSetComparison),
                Dist::Sqrtn => Box::new(SqrtNAlgorithm),
                Dist::SqrtnMajority => Box::new(Majority::of_five(SqrtNAlgorithm)),
            };
            let t = acceptance_table(d.as_ref(), to_u32(n, "n")?, to_u32(r, "r")?, trials, &root)?;
            let dichotomy = match dichotomy_classify(&t) {
                Ok(c) => serde_json::to_value(c).expect("unit enum"),
                Err(Error::NotASolver) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            let dist_name = dist.to_possible_value().expect("named").get_name().to_string();
            vec![json!({
                "kind": "summary", "alg": "table", "dist": dist_name, "n": n, "r": r, "trials": trials,
                "pc1": t.pc1, "pc2": t.pc2, "pe1": t.pe1, "pe2": t.pe2, "dichotomy": dichotomy,
            })]
        }
    };
    ctx.emit(Report::Lines(rows))
}

fn grid_kind(g: GridArg) -> GridKind {
    match g {
        GridArg::Pow2 => GridKind::Pow2,
        GridArg::Divisors => GridKind::Divisors,
    }
}

fn parse_sweep(text: &str) -> Result<(u64, u64), Failure> {
    let bad = || Failure::Usage(format!("--sweep {text:?} must look like n1..n2"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 4 || a > b {
        return Err(Failure::Usage(format!("--sweep needs 4 <= n1 <= n2, got {a}..{b}")));
    }
    Ok((a, b))
}

fn bounds(ctx: &Ctx, n: Option<u64>, grid_arg: Option<GridArg>, sweep: Option<String>) -> Result<(), Failure> {
    let kind = grid_kind(ctx.choice(grid_arg, "grid")?.unwrap_or(GridArg::Pow2));
    let Some(sweep) = ctx.string(sweep, "sweep")? else {
        ctx.format(&[Format::Json], Format::Json, "bounds")?;
        let n = ctx.need(n, "n")?;
        let report = serde_json::to_value(bound_report(n, kind)?).expect("plain struct");
        return ctx.emit(Report::Json(report));
    };
    let format = ctx.format(&[Format::Csv, Format::Json], Format::Csv, "bounds --sweep")?;
    let (lo, hi) = parse_sweep(&sweep)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    let mut n = lo;
    loop {
        let (r, value) = optimize_r(n, &grid(n, kind))?;
        xs.push((n as f64).ln());
        ys.push((r as f64).ln());
        let so_far = if xs.len() > 1 { json!(slope(&xs, &ys)) } else { Value::Null };
        rows.push(json!({"n": n, "r_star": r, "value": value, "slope_so_far": so_far}));
        match n.checked_mul(2) {
            Some(next) if next <= hi => n = next,
            _ => break,
        }
    }
    let report = match format {
        Format::Json => Report::Lines(rows),
        Format::Csv => Report::Csv {
            header: "n,r_star,value,slope_so_far".into(),
            rows: rows
                .iter()
                .map(|row| {
                    ["n", "r_star", "value", "slope_so_far"].iter().map(|k| csv_cell(&row[*k])).collect::<Vec<_>>().join(",")
                })
                .collect(),
        },
    };
    ctx.emit(report)
}
