use threem::config::builtin_scenario;
use threem::sim::{run_closed_loop, AbortPlan, AbortPolicy, Termination};
use threem::trace::{format_trace, parse_trace};

#[test]
fn free_scenario_without_alternatives_weighting_reaches_primary() {
    let mut cfg = builtin_scenario("uav-free-1").unwrap();
    cfg.weights.gamma = 0.0;
    let run = run_closed_loop(&cfg.build(5).unwrap()).unwrap();
    assert_eq!(run.trace.termination, Termination::Completed(0));
    let last = &run.trace.final_state;
    assert!(((last[0] - 10.0).powi(2) + (last[1] - 10.0).powi(2)).sqrt() <= 0.5);
    assert!(run.diagnostics.iter().all(|d| d.alpha.0 == vec![1.0, 0.0, 0.0]));
}

#[test]
fn abort_mid_run_completes_an_alternative() {
    let mut cfg = builtin_scenario("uav-free-1").unwrap();
    cfg.controller.samples = 300;
    let mut sc = cfg.build(2).unwrap();
    sc.abort = Some(AbortPlan { step: 25, mode: 1, policy: AbortPolicy::MinCost });
    let run = run_closed_loop(&sc).unwrap();
    match run.trace.termination {
        Termination::AbortedCompleted(i) => assert!(i == 1 || i == 2),
        other => panic!("unexpected termination {other}"),
    }
    let abort = run.trace.abort.unwrap();
    assert_eq!(abort.step, 25);
    let states: Vec<&[f64]> = run.trace.states().collect();
    for (k, r) in run.trace.records.iter().enumerate() {
        let mode = if k < 25 { 0 } else { 1 };
        assert_eq!(sc.model.step(&r.state, &r.input, mode).unwrap(), states[k + 1]);
    }
}

#[test]
fn nearest_policy_with_one_alternative_picks_it() {
    let mut cfg = builtin_scenario("uav-free-2").unwrap();
    cfg.missions.truncate(2);
    cfg.controller.samples = 200;
    cfg.max_steps = 40;
    for step in [0, 10, 30] {
        let mut sc = cfg.build(3).unwrap();
        sc.abort = Some(AbortPlan { step, mode: 1, policy: AbortPolicy::Nearest });
        let run = run_closed_loop(&sc).unwrap();
        assert_eq!(run.trace.abort.unwrap().mission, 1);
    }
}

#[test]
fn descent_constraint_and_simplex_hold_on_every_step() {
    let mut cfg = builtin_scenario("uav-obstacles").unwrap();
    cfg.controller.samples = 200;
    cfg.max_steps = 80;
    let run = run_closed_loop(&cfg.build(8).unwrap()).unwrap();
    assert_eq!(run.diagnostics.len(), run.trace.records.len());
    for d in &run.diagnostics {
        let now: f64 = d.descent.iter().zip(&d.alpha.0).map(|(a, b)| a * b).sum();
        let before: f64 = d.descent.iter().zip(&d.alpha_prev.0).map(|(a, b)| a * b).sum();
        assert!(now <= before + 1e-9);
        assert!(d.alpha.is_on_simplex(1e-9) && d.alpha_desired.is_on_simplex(1e-9));
        assert!(d.alpha_desired.0[0] >= 1.0 - 0.66 - 1e-12);
    }
}

#[test]
fn real_trace_round_trips() {
    let mut cfg = builtin_scenario("ugv-obstacles").unwrap();
    cfg.controller.samples = 100;
    cfg.max_steps = 25;
    let run = run_closed_loop(&cfg.build(1).unwrap()).unwrap();
    assert_eq!(parse_trace(&format_trace(&run.trace)).unwrap(), run.trace);
}

#[test]
fn seeds_change_trajectories_but_repeats_do_not() {
    let mut cfg = builtin_scenario("uav-free-1").unwrap();
    cfg.controller.samples = 50;
    cfg.max_steps = 20;
    let a = run_closed_loop(&cfg.build(1).unwrap()).unwrap().trace;
    let b = run_closed_loop(&cfg.build(1).unwrap()).unwrap().trace;
    let c = run_closed_loop(&cfg.build(2).unwrap()).unwrap().trace;
    let states = |t: &threem::ClosedLoopTrace| t.records.iter().map(|r| r.state.clone()).collect::<Vec<_>>();
    assert_eq!(states(&a), states(&b));
    assert_ne!(states(&a), states(&c));
}
