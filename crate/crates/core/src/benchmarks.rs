//! Bundled domains and seeded problem generators.
//!
//! Pools live under `domains/<name>/{small,large}/pNN.pddl` next to a
//! `generator.json` holding the specs that produced them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::ground;
use crate::pddl::{parse_domain, parse_problem, serialize_problem, LiftedDomain, PddlError, Problem};
use crate::planner::{search, PlanOutcome, PlannerConfig};

pub const POOL_SIZE: usize = 50;
pub const DEFAULT_RETRY_CAP: usize = 100;

pub const EXAMPLE_DOMAIN: &str = include_str!("../../../domains/example/domain.pddl");
pub const EXAMPLE_PROBLEM: &str = include_str!("../../../domains/example/problem.pddl");
pub const COUNTERS_DOMAIN: &str = include_str!("../../../domains/counters/domain.pddl");
pub const SAILING_DOMAIN: &str = include_str!("../../../domains/sailing/domain.pddl");
pub const DEPOT_DOMAIN: &str = include_str!("../../../domains/depot/domain.pddl");

pub const BENCHMARKS: [&str; 3] = ["counters", "sailing", "depot"];

pub fn bundled_domain(name: &str) -> Option<&'static str> {
    match name {
        "example" => Some(EXAMPLE_DOMAIN),
        "counters" => Some(COUNTERS_DOMAIN),
        "sailing" => Some(SAILING_DOMAIN),
        "depot" => Some(DEPOT_DOMAIN),
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown benchmark domain {0}")]
    UnknownDomain(String),
    #[error("generator spec: {0}")]
    BadSpec(String),
    #[error("only {found} solvable instances after {attempts} regeneration attempts")]
    GenerationExhausted { found: usize, attempts: usize },
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub domain: String,
    pub size: String,
    pub count: usize,
    pub seed: u64,
    /// Object counts per type.
    pub objects: BTreeMap<String, usize>,
    /// Inclusive integer ranges for initial numeric values.
    pub ranges: BTreeMap<String, (i64, i64)>,
}

impl GeneratorSpec {
    fn objects(&self, ty: &str) -> Result<usize, BenchError> {
        self.objects
            .get(ty)
            .copied()
            .ok_or_else(|| BenchError::BadSpec(format!("missing object count for {ty}")))
    }

    fn range(&self, key: &str) -> Result<(i64, i64), BenchError> {
        match self.ranges.get(key) {
            Some(&(lo, hi)) if lo <= hi => Ok((lo, hi)),
            Some(_) => Err(BenchError::BadSpec(format!("empty range for {key}"))),
            None => Err(BenchError::BadSpec(format!("missing range for {key}"))),
        }
    }
}

/// `generator.json`: specs keyed by size.
pub fn read_generator_file(path: &Path) -> Result<BTreeMap<String, GeneratorSpec>, BenchError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

type ObjectCounts = Vec<(&'static str, usize)>;
type ValueRanges = Vec<(&'static str, (i64, i64))>;

/// Built-in specs, the same ones shipped in each `generator.json`.
pub fn default_spec(domain: &str, size: &str) -> Result<GeneratorSpec, BenchError> {
    let (objects, ranges): (ObjectCounts, ValueRanges) = match (domain, size) {
        ("counters", "small") => (vec![("counter", 6)], vec![("max_int", (8, 12))]),
        ("counters", "large") => (vec![("counter", 8)], vec![("max_int", (10, 16))]),
        ("sailing", "small") => (
            vec![("boat", 1), ("person", 2)],
            vec![("coord", (-3, 3)), ("d", (0, 6))],
        ),
        ("sailing", "large") => (
            vec![("boat", 2), ("person", 4)],
            vec![("coord", (-5, 5)), ("d", (0, 12))],
        ),
        ("depot", "small") => (
            vec![("depot", 1), ("distributor", 2), ("truck", 2), ("crate", 2)],
            vec![("weight", (1, 10)), ("load_limit", (10, 30))],
        ),
        ("depot", "large") => (
            vec![("depot", 2), ("distributor", 2), ("truck", 2), ("crate", 3)],
            vec![("weight", (1, 10)), ("load_limit", (10, 30))],
        ),
        _ if !BENCHMARKS.contains(&domain) => return Err(BenchError::UnknownDomain(domain.into())),
        _ => return Err(BenchError::BadSpec(format!("unknown size {size}"))),
    };
    let seed = 1000 * (BENCHMARKS.iter().position(|d| *d == domain).unwrap() as u64 + 1) + if size == "small" { 1 } else { 2 };
    Ok(GeneratorSpec {
        domain: domain.into(),
        size: size.into(),
        count: POOL_SIZE,
        seed,
        objects: objects.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        ranges: ranges.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn counters_text(spec: &GeneratorSpec, idx: usize, rng: &mut ChaCha8Rng) -> Result<String, BenchError> {
    let n = spec.objects("counter")?;
    let (lo, hi) = spec.range("max_int")?;
    let m = rng.gen_range(lo..=hi);
    let cs = names("c", n);
    let init: Vec<String> = cs
        .iter()
        .map(|c| format!("    (= (value {c}) {})", rng.gen_range(0..=m)))
        .collect();
    let goal: Vec<String> = cs
        .windows(2)
        .map(|w| format!("    (<= (+ (value {}) 1) (value {}))", w[0], w[1]))
        .collect();
    Ok(format!(
        "(define (problem counters-{}-{idx:02})\n  (:domain fn-counters)\n  (:objects {} - counter)\n  (:init\n    (= (max_int) {m})\n{}\n  )\n  (:goal (and\n{}\n  ))\n)\n",
        spec.size,
        cs.join(" "),
        init.join("\n"),
        goal.join("\n")
    ))
}

fn sailing_text(spec: &GeneratorSpec, idx: usize, rng: &mut ChaCha8Rng) -> Result<String, BenchError> {
    let boats = names("b", spec.objects("boat")?);
    let people = names("t", spec.objects("person")?);
    let (clo, chi) = spec.range("coord")?;
    let (dlo, dhi) = spec.range("d")?;
    let mut init = Vec::new();
    for b in &boats {
        init.push(format!("    (= (x {b}) {})", rng.gen_range(clo..=chi)));
        init.push(format!("    (= (y {b}) {})", rng.gen_range(clo..=chi)));
    }
    for t in &people {
        init.push(format!("    (= (d {t}) {})", rng.gen_range(dlo..=dhi)));
    }
    let goal: Vec<String> = people.iter().map(|t| format!("    (saved {t})")).collect();
    Ok(format!(
        "(define (problem sailing-{}-{idx:02})\n  (:domain sailing)\n  (:objects {} - boat {} - person)\n  (:init\n{}\n  )\n  (:goal (and\n{}\n  ))\n)\n",
        spec.size,
        boats.join(" "),
        people.join(" "),
        init.join("\n"),
        goal.join("\n")
    ))
}

/// One hoist and one pallet per place; crates stacked at random on pallets,
/// trucks parked at random places. The goal puts crate i on pallet i.
fn depot_text(spec: &GeneratorSpec, idx: usize, rng: &mut ChaCha8Rng) -> Result<String, BenchError> {
    let depots = names("depot", spec.objects("depot")?);
    let dists = names("distributor", spec.objects("distributor")?);
    let places: Vec<String> = depots.iter().chain(&dists).cloned().collect();
    let trucks = names("truck", spec.objects("truck")?);
    let crates = names("crate", spec.objects("crate")?);
    let hoists = names("hoist", places.len());
    let pallets = names("pallet", places.len());
    if places.len() < 2 {
        return Err(BenchError::BadSpec("depot needs at least two places".into()));
    }
    if crates.len() > pallets.len() {
        return Err(BenchError::BadSpec("more crates than pallets".into()));
    }
    let (wlo, whi) = spec.range("weight")?;
    let (llo, lhi) = spec.range("load_limit")?;
    let mut init = Vec::new();
    for (i, p) in places.iter().enumerate() {
        init.push(format!("    (at {} {p})", pallets[i]));
        init.push(format!("    (at {} {p})", hoists[i]));
        init.push(format!("    (available {})", hoists[i]));
    }
    for t in &trucks {
        init.push(format!("    (at {t} {})", places[rng.gen_range(0..places.len())]));
        init.push(format!("    (= (current_load {t}) 0)"));
        init.push(format!("    (= (load_limit {t}) {})", rng.gen_range(llo..=lhi)));
    }
    // top of each pallet's stack
    let mut top: Vec<String> = pallets.clone();
    for (k, c) in crates.iter().enumerate() {
        // never start on the goal pallet's place, so every crate has to travel
        let mut i = rng.gen_range(0..pallets.len() - 1);
        if i >= k {
            i += 1;
        }
        init.push(format!("    (at {c} {})", places[i]));
        init.push(format!("    (on {c} {})", top[i]));
        init.push(format!("    (= (weight {c}) {})", rng.gen_range(wlo..=whi)));
        top[i] = c.clone();
    }
    for t in &top {
        init.push(format!("    (clear {t})"));
    }
    let goal: Vec<String> = crates
        .iter()
        .zip(&pallets)
        .map(|(c, p)| format!("    (on {c} {p})"))
        .collect();
    Ok(format!(
        "(define (problem depot-{}-{idx:02})\n  (:domain depot)\n  (:objects\n    {} - depot\n    {} - distributor\n    {} - truck\n    {} - pallet\n    {} - crate\n    {} - hoist\n  )\n  (:init\n{}\n  )\n  (:goal (and\n{}\n  ))\n)\n",
        spec.size,
        depots.join(" "),
        dists.join(" "),
        trucks.join(" "),
        pallets.join(" "),
        crates.join(" "),
        hoists.join(" "),
        init.join("\n"),
        goal.join("\n")
    ))
}

fn instance_text(spec: &GeneratorSpec, idx: usize, rng: &mut ChaCha8Rng) -> Result<String, BenchError> {
    match spec.domain.as_str() {
        "counters" => counters_text(spec, idx, rng),
        "sailing" => sailing_text(spec, idx, rng),
        "depot" => depot_text(spec, idx, rng),
        other => Err(BenchError::UnknownDomain(other.into())),
    }
}

fn problem_key(p: &Problem) -> String {
    // identity without the problem name
    let mut p = p.clone();
    p.name.clear();
    serialize_problem(&p)
}

/// `spec.count` distinct, parse-valid problems. Seed-deterministic.
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<Problem>, BenchError> {
    let domain = parse_domain(bundled_domain(&spec.domain).ok_or_else(|| BenchError::UnknownDomain(spec.domain.clone()))?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gen = Generator::new(spec, &domain);
    let mut out = Vec::new();
    while out.len() < spec.count {
        out.push(gen.next(&mut rng, spec.count * 20)?);
    }
    Ok(out)
}

struct Generator<'a> {
    spec: &'a GeneratorSpec,
    domain: &'a LiftedDomain,
    seen: BTreeSet<String>,
    made: usize,
}

impl<'a> Generator<'a> {
    fn new(spec: &'a GeneratorSpec, domain: &'a LiftedDomain) -> Self {
        Generator {
            spec,
            domain,
            seen: BTreeSet::new(),
            made: 0,
        }
    }

    /// Next problem not seen before.
    fn next(&mut self, rng: &mut ChaCha8Rng, max_tries: usize) -> Result<Problem, BenchError> {
        for _ in 0..max_tries {
            let text = instance_text(self.spec, self.made, rng)?;
            let p = parse_problem(&text, self.domain)?;
            if self.seen.insert(problem_key(&p)) {
                self.made += 1;
                return Ok(p);
            }
        }
        Err(BenchError::GenerationExhausted {
            found: self.made,
            attempts: max_tries,
        })
    }
}

pub fn solvable(domain: &LiftedDomain, problem: &Problem, cfg: &PlannerConfig) -> bool {
    match ground(domain, problem) {
        Ok(task) => matches!(search(&task, cfg), PlanOutcome::Plan(_)),
        Err(_) => false,
    }
}

/// Keeps the instances the planner solves under `domain`, drawing
/// replacements from `regenerate` until `target` instances exist or
/// `retry_cap` replacements have been tried.
pub fn solvability_filter(
    pool: Vec<Problem>,
    domain: &LiftedDomain,
    cfg: &PlannerConfig,
    target: usize,
    retry_cap: usize,
    mut regenerate: impl FnMut() -> Result<Problem, BenchError>,
) -> Result<Vec<Problem>, BenchError> {
    let mut kept: Vec<Problem> = pool.into_iter().filter(|p| solvable(domain, p, cfg)).collect();
    let mut attempts = 0;
    while kept.len() < target {
        if attempts >= retry_cap {
            return Err(BenchError::GenerationExhausted {
                found: kept.len(),
                attempts,
            });
        }
        attempts += 1;
        let p = regenerate()?;
        if solvable(domain, &p, cfg) {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Planner settings used to certify instances.
pub fn certify_config() -> PlannerConfig {
    PlannerConfig {
        budget: Duration::from_secs(60),
        expansion_cap: 200_000,
    }
}

/// Generate, filter to solvable instances and rename them `<domain>-<size>-NN`.
pub fn generate_pool(spec: &GeneratorSpec, cfg: &PlannerConfig, retry_cap: usize) -> Result<Vec<Problem>, BenchError> {
    let domain = parse_domain(bundled_domain(&spec.domain).ok_or_else(|| BenchError::UnknownDomain(spec.domain.clone()))?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gen = Generator::new(spec, &domain);
    let mut first = Vec::new();
    for _ in 0..spec.count {
        first.push(gen.next(&mut rng, spec.count * 20)?);
    }
    let mut pool = solvability_filter(first, &domain, cfg, spec.count, retry_cap, || gen.next(&mut rng, spec.count * 20))?;
    for (i, p) in pool.iter_mut().enumerate() {
        p.name = format!("{}-{}-{i:02}", spec.domain, spec.size);
    }
    Ok(pool)
}

pub fn write_pool(dir: &Path, pool: &[Problem]) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    for (i, p) in pool.iter().enumerate() {
        std::fs::write(dir.join(format!("p{i:02}.pddl")), serialize_problem(p))?;
    }
    Ok(())
}

/// Reads every `*.pddl` in `dir`, sorted by file name.
pub fn read_pool(dir: &Path, domain: &LiftedDomain) -> Result<Vec<Problem>, BenchError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pddl"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|f| Ok(parse_problem(&std::fs::read_to_string(f)?, domain)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::serialize_domain;

    #[test]
    fn bundled_domains_round_trip() {
        for name in ["example", "counters", "sailing", "depot"] {
            let d = parse_domain(bundled_domain(name).unwrap()).unwrap();
            assert_eq!(parse_domain(&serialize_domain(&d)).unwrap(), d, "{name}");
        }
    }

    #[test]
    fn same_seed_same_pool() {
        for domain in BENCHMARKS {
            let spec = GeneratorSpec {
                count: 5,
                ..default_spec(domain, "small").unwrap()
            };
            let a: Vec<String> = generate(&spec).unwrap().iter().map(serialize_problem).collect();
            let b: Vec<String> = generate(&spec).unwrap().iter().map(serialize_problem).collect();
            assert_eq!(a, b);
            let distinct: BTreeSet<&String> = a.iter().collect();
            assert_eq!(distinct.len(), 5);
        }
    }

    #[test]
    fn small_pools_have_expected_dimensions() {
        let dims = |domain: &str| {
            let d = parse_domain(bundled_domain(domain).unwrap()).unwrap();
            let spec = GeneratorSpec {
                count: 1,
                ..default_spec(domain, "small").unwrap()
            };
            let t = ground(&d, &generate(&spec).unwrap()[0]).unwrap();
            (t.obs_len(false), t.num_actions())
        };
        assert_eq!(dims("counters"), (7, 12));
        assert_eq!(dims("sailing"), (6, 9));
        let (obs, actions) = dims("depot");
        assert_eq!((obs, actions), (64, 270));
    }

    #[test]
    fn goal_is_constant_across_a_pool() {
        for domain in BENCHMARKS {
            let spec = GeneratorSpec {
                count: 6,
                ..default_spec(domain, "small").unwrap()
            };
            let pool = generate(&spec).unwrap();
            for p in &pool {
                assert_eq!(p.goal_literals, pool[0].goal_literals);
                assert_eq!(p.goal_numeric, pool[0].goal_numeric);
            }
        }
    }

    #[test]
    fn solvable_pool_is_unchanged() {
        let spec = GeneratorSpec {
            count: 4,
            ..default_spec("sailing", "small").unwrap()
        };
        let pool = generate(&spec).unwrap();
        let d = parse_domain(SAILING_DOMAIN).unwrap();
        let kept = solvability_filter(pool.clone(), &d, &certify_config(), 4, 0, || unreachable!()).unwrap();
        assert_eq!(kept, pool);
    }

    #[test]
    fn unreachable_goal_exhausts_generation() {
        // max_int below the number of counters makes the ordering impossible
        let spec = GeneratorSpec {
            count: 3,
            ranges: [("max_int".to_string(), (2, 3))].into(),
            ..default_spec("counters", "small").unwrap()
        };
        let r = generate_pool(&spec, &certify_config(), 5);
        assert!(matches!(r, Err(BenchError::GenerationExhausted { found: 0, .. })));
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(matches!(default_spec("pogo", "small"), Err(BenchError::UnknownDomain(_))));
        let mut spec = default_spec("counters", "small").unwrap();
        spec.ranges.clear();
        assert!(matches!(generate(&spec), Err(BenchError::BadSpec(_))));
    }
}
