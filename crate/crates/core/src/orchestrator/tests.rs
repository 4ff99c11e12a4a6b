use super::*;
use crate::benchmarks::{default_spec, generate, EXAMPLE_DOMAIN, EXAMPLE_PROBLEM};
use crate::env::replay;
use crate::pddl::{parse_domain, parse_problem};

fn example() -> (LiftedDomain, Problem) {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let p = parse_problem(EXAMPLE_PROBLEM, &d).unwrap();
    (d, p)
}

fn example_with_fuel(d: &LiftedDomain, fuel: i64) -> Problem {
    let text = EXAMPLE_PROBLEM.replace("(= (fuel r1) 10)", &format!("(= (fuel r1) {fuel})"));
    parse_problem(&text, d).unwrap()
}

fn counters_pool(n: usize) -> (LiftedDomain, Vec<Problem>) {
    let d = parse_domain(crate::benchmarks::COUNTERS_DOMAIN).unwrap();
    let mut spec = default_spec("counters", "small").unwrap();
    spec.count = n;
    (d.clone(), generate(&spec).unwrap())
}

fn small_cfg(mode: Mode, episodes: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        episodes,
        t_max: 300,
        plan_budget_s: 5.0,
        seed,
        ..ExperimentConfig::default()
    }
}

fn record(outcome: Outcome, steps: usize, source: PlanSource) -> EpisodeRecord {
    EpisodeRecord {
        episode: 0,
        instance: "p".into(),
        outcome,
        steps,
        plan_source: source,
        planner_outcome: "plan".into(),
        rolling_success: 0.0,
        cum_solution_len: 0,
        plan_time_s: 0.0,
        learn_time_s: 0.0,
        act_time_s: 0.0,
        plan_len: None,
        safety_violation: false,
    }
}

/// Everything except wall-clock columns.
type Fingerprint = (usize, String, Outcome, usize, PlanSource, String, u64, usize);

fn fingerprint(rs: &[EpisodeRecord]) -> Vec<Fingerprint> {
    rs.iter()
        .map(|r| {
            (
                r.episode,
                r.instance.clone(),
                r.outcome,
                r.steps,
                r.plan_source,
                r.planner_outcome.clone(),
                r.rolling_success.to_bits(),
                r.cum_solution_len,
            )
        })
        .collect()
}

struct Capture(Vec<(String, Vec<usize>)>);

impl EpisodeSink for Capture {
    fn on_episode(&mut self, rec: &EpisodeRecord, _task: &GroundTask, traj: &Trajectory, _m: &LearnedModel) -> std::io::Result<()> {
        self.0.push((rec.instance.clone(), traj.transitions.iter().map(|t| t.action).collect()));
        Ok(())
    }
}

#[test]
fn twenty_five_successes_give_full_rate() {
    let r = rolling_success(&[true; 25]);
    assert_eq!(*r.last().unwrap(), 1.0);
}

#[test]
fn rolling_window_is_shorter_at_the_start_and_slides() {
    let mut xs = vec![false, true];
    xs.extend(std::iter::repeat_n(true, 24));
    let r = rolling_success(&xs);
    assert_eq!(r[0], 0.0);
    assert_eq!(r[1], 0.5);
    assert_eq!(r[24], 24.0 / 25.0);
    // the failure has left the window
    assert_eq!(r[25], 1.0);
}

#[test]
fn cumulative_length_counts_successes_only() {
    let rs = vec![
        record(Outcome::Solved, 3, PlanSource::Policy),
        record(Outcome::Truncated, 1500, PlanSource::Policy),
        record(Outcome::Solved, 5, PlanSource::Planner),
    ];
    assert_eq!(cumulative_length(&rs), vec![3, 3, 8]);
}

#[test]
fn utilization_is_over_solved_episodes() {
    let mut rs: Vec<EpisodeRecord> = (0..9).map(|_| record(Outcome::Solved, 2, PlanSource::Planner)).collect();
    rs.push(record(Outcome::Solved, 2, PlanSource::Policy));
    rs.push(record(Outcome::Truncated, 10, PlanSource::Policy));
    assert!((planner_utilization(&rs) - 0.9).abs() < 1e-12);
    assert_eq!(planner_utilization(&[]), 0.0);
}

#[test]
fn fill_metrics_matches_the_series() {
    let mut rs = vec![
        record(Outcome::Solved, 3, PlanSource::Policy),
        record(Outcome::Truncated, 9, PlanSource::Policy),
        record(Outcome::Solved, 5, PlanSource::Planner),
    ];
    fill_metrics(&mut rs);
    assert_eq!(rs.iter().map(|r| r.cum_solution_len).collect::<Vec<_>>(), vec![3, 3, 8]);
    assert_eq!(rs[2].rolling_success, 2.0 / 3.0);
}

#[test]
fn bad_configs_are_rejected() {
    let (d, p) = example();
    for cfg in [
        ExperimentConfig { episodes: 0, ..Default::default() },
        ExperimentConfig { t_max: 0, ..Default::default() },
        ExperimentConfig { plan_budget_s: -1.0, ..Default::default() },
        ExperimentConfig { plan_budget_s: f64::NAN, ..Default::default() },
    ] {
        assert!(matches!(ExperimentState::new(&d, vec![p.clone()], cfg), Err(ExperimentError::Config(_))));
    }
    assert!(matches!(ExperimentState::new(&d, vec![], ExperimentConfig::default()), Err(ExperimentError::Config(_))));
}

#[test]
fn mixed_layouts_are_rejected() {
    let (d, pool) = counters_pool(2);
    let c = parse_problem(
        "(define (problem tiny) (:domain fn-counters) (:objects c0 - counter) (:init (= (max_int) 3) (= (value c0) 0)) (:goal (and (>= (value c0) 1))))",
        &d,
    )
    .unwrap();
    let mut mixed = pool;
    mixed.push(c);
    assert!(matches!(ExperimentState::new(&d, mixed, ExperimentConfig::default()), Err(ExperimentError::Config(_))));
}

#[test]
fn mode_parses() {
    assert_eq!("ramp".parse::<Mode>().unwrap(), Mode::Ramp);
    assert_eq!("ppo".parse::<Mode>().unwrap(), Mode::Ppo);
    assert_eq!("ppo-baseline".parse::<Mode>().unwrap(), Mode::Ppo);
    assert!("dqn".parse::<Mode>().is_err());
    assert_eq!(Mode::Ppo.to_string(), "ppo");
}

#[test]
fn first_episode_has_no_model() {
    let (d, p) = example();
    let mut st = ExperimentState::new(&d, vec![p], small_cfg(Mode::Ramp, 1, 0)).unwrap();
    let (rec, traj) = st.run_episode(0, 0).unwrap();
    assert_eq!(rec.planner_outcome, "no_model");
    assert_eq!(rec.plan_source, PlanSource::Policy);
    assert!(traj.solved);
    assert_eq!(rec.outcome, Outcome::Solved);
}

fn learned_example_state(cfg: ExperimentConfig) -> ExperimentState {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let pool = vec![example_with_fuel(&d, 10), example_with_fuel(&d, 4)];
    let mut st = ExperimentState::new(&d, pool, cfg).unwrap();
    for i in 0..2 {
        let task = st.task(i).clone();
        let a = task.action_index("move(r1,loc_a,loc_b)").unwrap();
        let traj = replay(&task, EnvConfig::default(), &[a]).unwrap();
        st.absorb(i, &traj).unwrap();
    }
    assert_eq!(st.model.exportable_count() > 0, st.cfg.mode == Mode::Ramp);
    st
}

#[test]
fn learned_move_is_planned_and_followed() {
    let mut st = learned_example_state(small_cfg(Mode::Ramp, 1, 0));
    let (rec, traj) = st.run_episode(0, 0).unwrap();
    assert_eq!(rec.planner_outcome, "plan");
    assert_eq!(rec.plan_source, PlanSource::Planner);
    assert_eq!(rec.outcome, Outcome::Solved);
    assert_eq!(rec.steps, 1);
    assert_eq!(rec.plan_len, Some(1));
    assert!(traj.solved);
    assert!(st.violations.is_empty());
}

#[test]
fn timeout_falls_back_to_the_policy() {
    let mut cfg = small_cfg(Mode::Ramp, 1, 0);
    cfg.plan_budget_s = 0.0;
    let mut st = learned_example_state(cfg);
    let (rec, _) = st.run_episode(0, 0).unwrap();
    assert_eq!(rec.planner_outcome, "timeout");
    assert_eq!(rec.plan_source, PlanSource::Policy);
    assert_eq!(rec.plan_len, None);
}

#[test]
fn ppo_mode_never_plans() {
    let mut st = learned_example_state(small_cfg(Mode::Ppo, 1, 0));
    let (rec, _) = st.run_episode(0, 0).unwrap();
    assert_eq!(rec.planner_outcome, "skipped");
    assert_eq!(rec.plan_time_s, 0.0);
    // and never relearns
    assert_eq!(st.model.exportable_count(), 0);
}

#[test]
fn wrong_plans_are_reported_as_violations() {
    let mut st = learned_example_state(small_cfg(Mode::Ramp, 1, 0));
    // a model that believes moving needs no fuel, on an instance with none
    st.model.actions.get_mut("move").unwrap().num_pre.clear();
    let d = st.domain.clone();
    let empty = example_with_fuel(&d, 0);
    st.pool[0] = empty.clone();
    st.tasks[0] = Arc::new(ground(&d, &empty).unwrap());
    assert!(plan_with(&st.model.export(), &empty, &PlannerConfig::default()).plan().is_some());
    let (rec, traj) = st.run_episode(3, 0).unwrap();
    assert!(rec.safety_violation);
    assert_eq!(st.violations.len(), 1);
    assert_eq!(st.violations[0].episode, 3);
    assert_eq!(st.violations[0].step, 0);
    assert_eq!(rec.plan_source, PlanSource::Policy);
    // control went back to the policy for the rest of the episode
    assert_eq!(traj.len(), 300);
}

#[test]
fn identical_seeds_give_identical_tables() {
    let (d, pool) = counters_pool(5);
    let a = run_experiment(&d, pool.clone(), small_cfg(Mode::Ramp, 12, 7), &mut NullSink).unwrap();
    let b = run_experiment(&d, pool, small_cfg(Mode::Ramp, 12, 7), &mut NullSink).unwrap();
    assert_eq!(fingerprint(&a.records), fingerprint(&b.records));
    assert_eq!(a.agent.net.params, b.agent.net.params);
}

#[test]
fn disabled_planning_matches_the_baseline() {
    let (d, pool) = counters_pool(5);
    let mut ramp_cfg = small_cfg(Mode::Ramp, 10, 3);
    ramp_cfg.plan_budget_s = 0.0;
    let mut a = Capture(Vec::new());
    let mut b = Capture(Vec::new());
    let ra = run_experiment(&d, pool.clone(), ramp_cfg, &mut a).unwrap();
    let rb = run_experiment(&d, pool, small_cfg(Mode::Ppo, 10, 3), &mut b).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(ra.agent.net.params, rb.agent.net.params);
}

#[test]
fn executed_actions_start_with_the_plan() {
    let (d, pool) = counters_pool(5);
    let mut st = ExperimentState::new(&d, pool, small_cfg(Mode::Ramp, 30, 11)).unwrap();
    let mut followed = 0;
    for episode in 0..30 {
        let instance = st.rng.gen_range(0..st.pool.len());
        let planned = st.plan(instance);
        let (rec, traj) = st.run_episode(episode, instance).unwrap();
        if let Some(p) = planned.plan() {
            let task = st.task(instance).clone();
            let executed: Vec<String> = traj.transitions.iter().map(|t| task.actions[t.action].label()).collect();
            assert!(executed.len() >= p.actions.len());
            assert_eq!(&executed[..p.actions.len()], &p.actions[..]);
            assert_eq!(rec.plan_len, Some(p.actions.len()));
            followed += 1;
        }
        st.absorb(instance, &traj).unwrap();
    }
    assert!(followed > 0, "the planner never produced a plan");
    assert!(st.violations.is_empty());
}

#[test]
fn trajectories_accumulate_and_ppo_updates_run() {
    let (d, pool) = counters_pool(5);
    let mut cfg = small_cfg(Mode::Ppo, 8, 1);
    cfg.ppo.batch = 500;
    let r = run_experiment(&d, pool, cfg, &mut NullSink).unwrap();
    assert_eq!(r.datasets.trajectories, 8);
    assert_eq!(r.summary.episodes, 8);
    let steps: usize = r.records.iter().map(|x| x.steps).sum();
    assert_eq!(r.summary.total_steps, steps);
    assert_eq!(r.summary.ppo_updates, steps / 500);
    for rec in &r.records {
        if rec.outcome == Outcome::Solved {
            assert!(rec.steps <= 300);
        }
    }
}

#[test]
fn snapshots_follow_the_cadence() {
    let (d, pool) = counters_pool(3);
    let mut cfg = small_cfg(Mode::Ramp, 7, 2);
    cfg.snapshot_every = 3;
    let r = run_experiment(&d, pool, cfg, &mut NullSink).unwrap();
    assert_eq!(r.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![3, 6]);
}

#[test]
fn t_interval_matches_tabulated_quantile() {
    // t(0.975, 4) = 2.776445
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let (m, h) = t_interval(&xs, 0.95);
    assert_eq!(m, 3.0);
    let se = (2.5f64 / 5.0).sqrt();
    assert!((h - 2.776445 * se).abs() < 1e-5);
    assert_eq!(t_interval(&[4.0], 0.95), (4.0, 0.0));
    assert!(t_interval(&[], 0.95).0.is_nan());
}

#[test]
fn aggregate_is_per_episode() {
    let mk = |cum: &[usize]| -> Vec<EpisodeRecord> {
        cum.iter()
            .map(|&c| EpisodeRecord {
                cum_solution_len: c,
                rolling_success: 0.5,
                ..record(Outcome::Solved, 1, PlanSource::Policy)
            })
            .collect()
    };
    let rows = aggregate(&[mk(&[1, 2]), mk(&[3, 4]), mk(&[5])]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].seeds, 3);
    assert_eq!(rows[0].cum_solution_len_mean, 3.0);
    assert_eq!(rows[0].rolling_success_lo, 0.5);
    assert_eq!(rows[0].rolling_success_hi, 0.5);
    assert!(rows[0].cum_solution_len_lo < 3.0 && rows[0].cum_solution_len_hi > 3.0);
    assert_eq!(rows[1].seeds, 2);
    assert_eq!(rows[1].cum_solution_len_mean, 3.0);
}
