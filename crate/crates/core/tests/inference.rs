mod common;

use proptest::prelude::*;

use btom::inference::{
    action_likelihood, boltzmann_distribution, goal_posterior, init_filter, score_partition,
    score_statement, ActionModel, BeliefPrior, BoltzmannPlanner, EvalAt, HypothesisSpace, ScoreFlag,
    DEFAULT_HYPOTHESIS_CAP,
};
use btom::logic::{parse_statement, ModelSignature};
use btom::planner::{Cost, Planner};
use btom::scenario::{expand_hypothesis_space, Scenario};
use btom::world::{self, Action, Direction, GemId, GridMap, Pos, WorldState};

use common::{planning_likelihood, CostTable};

const CAP: usize = DEFAULT_HYPOTHESIS_CAP;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Filter marginals and both statement scores against a direct product
    /// of action probabilities, on random puzzles and random walks.
    #[test]
    fn filter_equals_enumeration(seed in any::<u64>(), walk in any::<u64>(), beta in 0.5f64..4.0) {
        let (map, starts) = common::random_world(seed);
        let sig = ModelSignature::from_map(&map, &["player"]);
        let truth = &starts[(walk % 3) as usize];
        let actions = common::random_walk(&map, truth, 12, walk);
        let goals = vec![GemId(0), GemId(1)];
        let space = HypothesisSpace::uniform(goals.clone(), starts.clone(), beta).unwrap();
        let mut fs = init_filter(&space, CAP).unwrap();
        let mut model = BoltzmannPlanner::new(Planner::new(&map), beta);

        let tables: Vec<CostTable> = starts.iter().map(|s| CostTable::build(&map, s)).collect();
        let mut current: Vec<Option<WorldState>> = starts.iter().cloned().map(Some).collect();
        let mut lik = vec![vec![1.0; starts.len()]; goals.len()];
        let statements = ["(believes player (empty box1))", "(believes player (inside box1_red_key box1))"];
        for t in 0..=actions.len() {
            if t > 0 {
                let a = &actions[t - 1];
                fs.step(a, &mut model, &map).unwrap();
                for (i, slot) in current.iter_mut().enumerate() {
                    let Some(s) = slot.clone() else { continue };
                    if world::is_legal(&s, a, &map) {
                        for g in &goals {
                            lik[g.0][i] *= planning_likelihood(&tables[i], &map, &s, a, *g, beta);
                        }
                        *slot = Some(world::transition(&s, a, &map).unwrap());
                    } else {
                        for g in &goals {
                            lik[g.0][i] = 0.0;
                        }
                        *slot = None;
                    }
                }
            }
            let total: f64 = lik.iter().flatten().sum();
            let posterior = goal_posterior(&fs).unwrap();
            for (g, p) in &posterior {
                let want: f64 = lik[g.0].iter().sum::<f64>() / total;
                prop_assert!((p - want).abs() < 1e-9, "goal {g:?}: {p} vs {want}");
            }
            for text in statements {
                let st = parse_statement(text, &sig).unwrap();
                let holds: Vec<bool> = starts
                    .iter()
                    .map(|s| btom::logic::evaluate_closed(&st.body, s, &sig).unwrap())
                    .collect();
                let (mut yes, mut no) = ((0.0, 0.0), (0.0, 0.0));
                for row in &lik {
                    for (l, h) in row.iter().zip(&holds) {
                        if *h { yes.0 += l; yes.1 += 1.0; } else { no.0 += l; no.1 += 1.0; }
                    }
                }
                let expect = yes.0 / (yes.0 + no.0);
                let nl = (yes.0 / yes.1) / (yes.0 / yes.1 + no.0 / no.1);
                let got = |prior| score_statement(&fs, &st, &sig, prior, EvalAt::Initial).unwrap().probability;
                prop_assert!((got(BeliefPrior::UniformStates) - expect).abs() < 1e-9);
                prop_assert!((got(BeliefPrior::UniformStatement) - nl).abs() < 1e-9);
            }
        }
    }
}

fn room() -> (GridMap, WorldState) {
    let (mut map, _) = GridMap::from_ascii(
        &["#######", "#.....#", "#.....#", "#.....#", "#######"],
        vec!["red".into(), "blue".into()],
    );
    map.add_gem("west", "circle", Pos::new(1, 2)).unwrap();
    map.add_gem("east", "square", Pos::new(5, 2)).unwrap();
    let s = WorldState::initial(&map, Pos::new(3, 2), &[]).unwrap();
    (map, s)
}

#[test]
fn product_prior_weights() {
    let (map, s) = room();
    let other = WorldState::initial(&map, Pos::new(2, 2), &[]).unwrap();
    let space = HypothesisSpace::new(
        vec![(GemId(0), 0.7), (GemId(1), 0.3)],
        vec![(s, 0.5), (other, 0.5)],
        1.0,
    )
    .unwrap();
    let fs = init_filter(&space, CAP).unwrap();
    let w = fs.normalized_weights().unwrap();
    let want = [0.35, 0.35, 0.15, 0.15];
    for (a, b) in w.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    let single = HypothesisSpace::uniform(vec![GemId(1)], vec![fs.hypotheses()[0].s0.clone()], 1.0).unwrap();
    let fs = init_filter(&single, CAP).unwrap();
    assert_eq!(fs.normalized_weights().unwrap(), vec![1.0]);
    assert_eq!(goal_posterior(&fs).unwrap(), vec![(GemId(1), 1.0)]);
    assert!(init_filter(&space, 3).is_err());
}

#[test]
fn weighted_indicator_and_goal_marginal() {
    let (map, s) = room();
    let states: Vec<(WorldState, f64)> = [(1, 0.5), (2, 0.3), (4, 0.2)]
        .iter()
        .map(|&(x, w)| (WorldState::initial(&map, Pos::new(x, 1), &[]).unwrap(), w))
        .collect();
    let space = HypothesisSpace::new(vec![(GemId(0), 1.0)], states, 1.0).unwrap();
    let fs = init_filter(&space, CAP).unwrap();
    let score = score_partition(&fs, &[true, false, true], BeliefPrior::UniformStates).unwrap();
    assert!((score.probability - 0.7).abs() < 1e-15);
    assert_eq!(score.flag, None);

    let space = HypothesisSpace::new(
        vec![(GemId(0), 0.8), (GemId(1), 0.2)],
        vec![(s.clone(), 0.75), (WorldState::initial(&map, Pos::new(2, 2), &[]).unwrap(), 0.25)],
        1.0,
    )
    .unwrap();
    let fs = init_filter(&space, CAP).unwrap();
    let post = goal_posterior(&fs).unwrap();
    assert!((post[0].1 - 0.8).abs() < 1e-15 && (post[1].1 - 0.2).abs() < 1e-15);
}

#[test]
fn softmax_examples() {
    let d = boltzmann_distribution(&[Cost::Finite(3), Cost::Finite(5)], 1.0);
    let want = (-3.0f64).exp() / ((-3.0f64).exp() + (-5.0f64).exp());
    assert!((d[0] - want).abs() < 1e-12 && (want - 0.8808).abs() < 1e-4);
    for beta in [0.1, 1.0, 30.0] {
        let d = boltzmann_distribution(&[Cost::Finite(7), Cost::Finite(7)], beta);
        assert_eq!(d, vec![0.5, 0.5]);
    }
    let d = boltzmann_distribution(&[Cost::Finite(1), Cost::Finite(9), Cost::Finite(4)], 0.0);
    assert!(d.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
    let d = boltzmann_distribution(&[Cost::Infinite, Cost::Finite(2)], 1.0);
    assert_eq!(d, vec![0.0, 1.0]);
    let d = boltzmann_distribution(&[Cost::Infinite, Cost::Infinite], 1.0);
    assert_eq!(d, vec![0.5, 0.5]);
    // Large cost gaps do not underflow to NaN.
    let d = boltzmann_distribution(&[Cost::Finite(1), Cost::Finite(100_000)], 50.0);
    assert_eq!(d, vec![1.0, 0.0]);
}

#[test]
fn illegal_action_has_zero_likelihood() {
    let (map, s) = room();
    let mut p = Planner::new(&map);
    let a = Action::Open(btom::world::BoxId(0));
    assert_eq!(action_likelihood(&mut p, &s, &a, GemId(0), 1.0), 0.0);
}

#[test]
fn symmetric_evidence_keeps_goals_balanced() {
    let (map, s) = room();
    let space = HypothesisSpace::uniform(vec![GemId(0), GemId(1)], vec![s], 2.0).unwrap();
    let mut fs = init_filter(&space, CAP).unwrap();
    let mut model = BoltzmannPlanner::new(Planner::new(&map), 2.0);
    fs.step(&Action::Move(Direction::Up), &mut model, &map).unwrap();
    let post = goal_posterior(&fs).unwrap();
    assert_eq!(post[0].1, post[1].1);
    fs.step(&Action::Move(Direction::Right), &mut model, &map).unwrap();
    let post = goal_posterior(&fs).unwrap();
    assert!(post[1].1 > post[0].1);
}

fn locked_scenario() -> Scenario {
    Scenario::from_toml_str(
        r##"
format_version = 1
id = "locked"
colors = ["red", "blue"]
grid = """
#########
#1.@.2#g#
#.....B.#
#########
"""
objects = [
  { marker = "1", kind = "box", id = "box1" },
  { marker = "2", kind = "box", id = "box2" },
  { marker = "B", kind = "door", id = "blue_door", color = "blue" },
  { marker = "g", kind = "gem", id = "gem" },
]
trajectory = ["right", "open(box2)", "down", "right", "unlock(blue_door)"]
judgment_points = [0, 2, 5]

[hypotheses]
box_options = { box1 = ["empty", "blue"], box2 = ["empty", "blue"] }

[ground_truth]
box1 = "empty"
box2 = "blue"

[[statements]]
id = "blue_in_box2"
formula = "(believes player (inside box2_blue_key box2))"
"##,
    )
    .unwrap()
}

#[test]
fn unlocking_eliminates_empty_box_hypotheses() {
    let s = locked_scenario();
    let space = expand_hypothesis_space(&s, 2.0, CAP).unwrap();
    let mut fs = init_filter(&space, CAP).unwrap();
    let mut model = BoltzmannPlanner::new(Planner::new(&s.map), 2.0);
    let mut eliminated = vec![false; fs.hypotheses().len()];
    for a in &s.trajectory {
        fs.step(a, &mut model, &s.map).unwrap();
        for (i, h) in fs.hypotheses().iter().enumerate() {
            // Once gone, never back.
            assert!(!(eliminated[i] && !h.eliminated()));
            eliminated[i] = h.eliminated();
        }
    }
    let b2 = s.map.box_by_id("box2").unwrap();
    for h in fs.hypotheses() {
        assert_eq!(h.eliminated(), h.s0.box_contents(b2).is_none());
    }
    let st = &s.statements[0].statement;
    for prior in [BeliefPrior::UniformStates, BeliefPrior::UniformStatement] {
        let initial = score_statement(&fs, st, &s.signature, prior, EvalAt::Initial).unwrap();
        assert_eq!(initial.probability, 1.0);
        // The key has left the box, so the literal reading flips.
        let current = score_statement(&fs, st, &s.signature, prior, EvalAt::Current).unwrap();
        assert_eq!(current.probability, 0.0);
        assert_eq!(current.flag, Some(ScoreFlag::DegeneratePartition));
    }
}

#[test]
fn complementarity_along_corpus() {
    for s in common::corpus() {
        let space = expand_hypothesis_space(&s, 2.5, CAP).unwrap();
        let mut fs = init_filter(&space, CAP).unwrap();
        let mut model = BoltzmannPlanner::new(Planner::new(&s.map), 2.5);
        for t in 0..=s.trajectory.len() {
            if t > 0 {
                fs.step(&s.trajectory[t - 1], &mut model, &s.map).unwrap();
            }
            let total: f64 = goal_posterior(&fs).unwrap().iter().map(|g| g.1).sum();
            assert!((total - 1.0).abs() < 1e-9);
            for st in &s.statements {
                for prior in [BeliefPrior::UniformStates, BeliefPrior::UniformStatement] {
                    let score = |x| score_statement(&fs, x, &s.signature, prior, EvalAt::Initial).unwrap().probability;
                    let (p, q) = (score(&st.statement), score(&st.statement.negated()));
                    assert!((0.0..=1.0).contains(&p));
                    assert!((p + q - 1.0).abs() < 1e-12, "{} {} t={t}", s.id, st.id);
                }
            }
        }
    }
}

/// Multiplies every likelihood by the same constant.
struct Scaled<M>(M, f64);

impl<M: ActionModel> ActionModel for Scaled<M> {
    fn log_likelihood(&mut self, state: &WorldState, action: &Action, goal: GemId) -> f64 {
        self.0.log_likelihood(state, action, goal) + self.1
    }
}

#[test]
fn scaling_all_weights_changes_nothing() {
    let s = common::scenario("example3");
    let space = expand_hypothesis_space(&s, 2.5, CAP).unwrap();
    let run = |shift: f64| {
        let mut fs = init_filter(&space, CAP).unwrap();
        let mut model = Scaled(BoltzmannPlanner::new(Planner::new(&s.map), 2.5), shift);
        let mut out = Vec::new();
        for a in &s.trajectory {
            fs.step(a, &mut model, &s.map).unwrap();
            out.extend(goal_posterior(&fs).unwrap().iter().map(|g| g.1));
            for st in &s.statements {
                for prior in [BeliefPrior::UniformStates, BeliefPrior::UniformStatement] {
                    let sc = score_statement(&fs, &st.statement, &s.signature, prior, EvalAt::Initial);
                    out.push(sc.unwrap().probability);
                }
            }
        }
        out
    };
    let base = run(0.0);
    for shift in [-40.0, 3.7, 200.0] {
        for (x, y) in base.iter().zip(run(shift)) {
            assert!((x - y).abs() < 1e-12, "shift {shift}: {x} vs {y}");
        }
    }
}

#[test]
fn sharper_rationality_sharpens_the_optimal_goal() {
    // Walking straight east is optimal only for the east gem.
    let (map, s) = room();
    let path = [Action::Move(Direction::Right)];
    let mut last = 0.0;
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let space = HypothesisSpace::uniform(vec![GemId(0), GemId(1)], vec![s.clone()], beta).unwrap();
        let mut fs = init_filter(&space, CAP).unwrap();
        let mut model = BoltzmannPlanner::new(Planner::new(&map), beta);
        for a in &path {
            fs.step(a, &mut model, &map).unwrap();
        }
        let east = goal_posterior(&fs).unwrap()[1].1;
        assert!(east >= last, "beta {beta}: {east} < {last}");
        last = east;
    }
    assert!(last > 0.99);
}

#[test]
fn inconsistent_trajectory_is_an_error() {
    let s = locked_scenario();
    let space = expand_hypothesis_space(&s, 2.0, CAP).unwrap();
    let mut fs = init_filter(&space, CAP).unwrap();
    let mut model = BoltzmannPlanner::new(Planner::new(&s.map), 2.0);
    // Unlocking without ever holding a key is impossible in every world.
    let unlock = s.map.parse_action("unlock(blue_door)").unwrap();
    assert!(fs.step(&unlock, &mut model, &s.map).is_err());
}
