//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here uses the planner or the filter: plan costs come from an
//! explicit reachable-state graph searched backwards from goal states, and
//! posteriors from multiplying action probabilities along the trajectory for
//! every (goal, initial state) pair.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use btom::logic::{evaluate_closed, EpistemicStatement};
use btom::scenario::{load_scenario, Scenario};
use btom::world::{self, Action, ColorId, GemId, GridMap, Pos, WorldState};

pub const INF: u32 = u32::MAX;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn corpus() -> Vec<Scenario> {
    let mut paths: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p).unwrap()).collect()
}

pub fn scenario(id: &str) -> Scenario {
    load_scenario(corpus_dir().join(format!("{id}.toml"))).unwrap()
}

/// Exact cost-to-go for every goal from every state reachable from `s0`.
pub struct CostTable {
    index: HashMap<WorldState, usize>,
    costs: Vec<Vec<u32>>,
}

impl CostTable {
    pub fn build(map: &GridMap, s0: &WorldState) -> CostTable {
        let mut index = HashMap::new();
        let mut states = vec![s0.clone()];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
        index.insert(s0.clone(), 0);
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            for a in world::legal_actions(&s, map) {
                let n = world::transition(&s, &a, map).unwrap();
                let j = match index.get(&n) {
                    Some(&j) => j,
                    None => {
                        states.push(n.clone());
                        preds.push(Vec::new());
                        index.insert(n, states.len() - 1);
                        states.len() - 1
                    }
                };
                preds[j].push(i);
            }
            i += 1;
        }
        let costs = (0..map.gems().len())
            .map(|g| {
                let mut dist = vec![INF; states.len()];
                let mut queue = VecDeque::new();
                for (k, s) in states.iter().enumerate() {
                    if s.gem_collected(GemId(g)) {
                        dist[k] = 0;
                        queue.push_back(k);
                    }
                }
                while let Some(k) = queue.pop_front() {
                    for &p in &preds[k] {
                        if dist[p] == INF {
                            dist[p] = dist[k] + 1;
                            queue.push_back(p);
                        }
                    }
                }
                dist
            })
            .collect();
        CostTable { index, costs }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn states(&self) -> impl Iterator<Item = &WorldState> {
        self.index.keys()
    }

    pub fn cost(&self, s: &WorldState, goal: GemId) -> u32 {
        self.costs[goal.0][*self.index.get(s).expect("state reachable from s0")]
    }
}

fn softmax_prob(values: &[f64], chosen: usize, beta: f64) -> f64 {
    if values.iter().all(|v| v.is_infinite()) {
        return 1.0 / values.len() as f64;
    }
    let num = |v: f64| if v.is_infinite() { 0.0 } else { (-beta * v).exp() };
    num(values[chosen]) / values.iter().map(|v| num(*v)).sum::<f64>()
}

/// `P(a | s, g)` under Boltzmann-rational planning, from the cost table.
pub fn planning_likelihood(
    table: &CostTable,
    map: &GridMap,
    s: &WorldState,
    a: &Action,
    goal: GemId,
    beta: f64,
) -> f64 {
    let legal = world::legal_actions(s, map);
    let Some(chosen) = legal.iter().position(|x| x == a) else {
        return 0.0;
    };
    let q: Vec<f64> = legal
        .iter()
        .map(|x| {
            let c = table.cost(&world::transition(s, x, map).unwrap(), goal);
            if c == INF {
                f64::INFINITY
            } else {
                1.0 + c as f64
            }
        })
        .collect();
    softmax_prob(&q, chosen, beta)
}

/// Walls-only distance from each cell to the nearest cell within reach of
/// `gem`'s cell.
pub fn reach_distances(map: &GridMap, gem: Pos) -> HashMap<Pos, u32> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for y in 0..map.height() as i32 {
        for x in 0..map.width() as i32 {
            let p = Pos::new(x, y);
            if !map.is_wall(p) && (p.x - gem.x).abs() + (p.y - gem.y).abs() <= 1 {
                dist.insert(p, 0);
                queue.push_back(p);
            }
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for q in [
            Pos::new(p.x + 1, p.y),
            Pos::new(p.x - 1, p.y),
            Pos::new(p.x, p.y + 1),
            Pos::new(p.x, p.y - 1),
        ] {
            if map.in_bounds(q) && !map.is_wall(q) && !dist.contains_key(&q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

/// `P(a | s, g)` for the observer that scores actions by the door-blind
/// distance left after taking them.
pub fn heuristic_likelihood(map: &GridMap, s: &WorldState, a: &Action, goal: GemId, beta: f64) -> f64 {
    let field = reach_distances(map, map.gems()[goal.0].pos);
    let remaining = |t: &WorldState| {
        if t.gem_collected(goal) {
            0.0
        } else {
            field
                .get(&t.agent())
                .map_or(f64::INFINITY, |d| f64::from(*d) + 1.0)
        }
    };
    let legal = world::legal_actions(s, map);
    let Some(chosen) = legal.iter().position(|x| x == a) else {
        return 0.0;
    };
    let v: Vec<f64> = legal
        .iter()
        .map(|x| remaining(&world::transition(s, x, map).unwrap()))
        .collect();
    softmax_prob(&v, chosen, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observer {
    Planning,
    Heuristic,
}

/// Unnormalized joint `P(g) P(s0) Π P(a_t | s_{t-1}, g)` per hypothesis after
/// every prefix of the trajectory. Hypotheses are goal-major.
pub struct Enumeration {
    pub goals: Vec<GemId>,
    pub hypotheses: Vec<(GemId, WorldState, f64)>,
    /// `joint[t][i]` after `t` actions.
    pub joint: Vec<Vec<f64>>,
}

pub fn enumerate(scenario: &Scenario, beta: f64, observer: Observer) -> Enumeration {
    let map = &scenario.map;
    let states: Vec<WorldState> = scenario
        .content_space()
        .states(map)
        .map(|s| s.unwrap())
        .collect();
    let state_prior = scenario
        .state_prior
        .clone()
        .unwrap_or_else(|| vec![1.0 / states.len() as f64; states.len()]);
    let tables: Vec<Option<CostTable>> = states
        .iter()
        .map(|s| (observer == Observer::Planning).then(|| CostTable::build(map, s)))
        .collect();
    let goals: Vec<GemId> = (0..map.gems().len()).map(GemId).collect();
    let mut hypotheses = Vec::new();
    let mut rows = Vec::new();
    for &g in &goals {
        for (si, s0) in states.iter().enumerate() {
            let prior = scenario.goal_prior[g.0] * state_prior[si];
            hypotheses.push((g, s0.clone(), prior));
            let mut row = vec![prior];
            let mut s = s0.clone();
            let mut w = prior;
            for a in &scenario.trajectory {
                let p = if !world::is_legal(&s, a, map) {
                    0.0
                } else {
                    match &tables[si] {
                        Some(t) => planning_likelihood(t, map, &s, a, g, beta),
                        None => heuristic_likelihood(map, &s, a, g, beta),
                    }
                };
                w *= p;
                if p > 0.0 {
                    s = world::transition(&s, a, map).unwrap();
                }
                row.push(w);
            }
            rows.push(row);
        }
    }
    let steps = scenario.trajectory.len() + 1;
    let joint = (0..steps)
        .map(|t| rows.iter().map(|r| r[t]).collect())
        .collect();
    Enumeration {
        goals,
        hypotheses,
        joint,
    }
}

impl Enumeration {
    pub fn goal_marginal(&self, t: usize) -> Vec<f64> {
        let total: f64 = self.joint[t].iter().sum();
        let mut out = vec![0.0; self.goals.len()];
        for ((g, _, _), w) in self.hypotheses.iter().zip(&self.joint[t]) {
            out[g.0] += w / total;
        }
        out
    }

    fn truth(&self, scenario: &Scenario, st: &EpistemicStatement) -> Vec<bool> {
        self.hypotheses
            .iter()
            .map(|(_, s0, _)| evaluate_closed(&st.body, s0, &scenario.signature).unwrap())
            .collect()
    }

    /// Posterior expectation of the statement body over initial states.
    pub fn expectation(&self, scenario: &Scenario, st: &EpistemicStatement, t: usize) -> f64 {
        let truth = self.truth(scenario, st);
        let total: f64 = self.joint[t].iter().sum();
        self.joint[t]
            .iter()
            .zip(&truth)
            .filter(|(_, b)| **b)
            .map(|(w, _)| w / total)
            .sum()
    }

    /// Mean likelihood of the hypotheses where the body holds, normalized
    /// against the mean over those where it fails. `None` if one side is
    /// empty.
    pub fn normalized_likelihood(
        &self,
        scenario: &Scenario,
        st: &EpistemicStatement,
        t: usize,
    ) -> Option<f64> {
        let truth = self.truth(scenario, st);
        let (mut lt, mut nt, mut lf, mut nf) = (0.0, 0usize, 0.0, 0usize);
        for (((_, _, prior), w), b) in self.hypotheses.iter().zip(&self.joint[t]).zip(&truth) {
            let l = w / prior;
            if *b {
                lt += l;
                nt += 1;
            } else {
                lf += l;
                nf += 1;
            }
        }
        if nt == 0 || nf == 0 {
            return None;
        }
        let (a, b) = (lt / nt as f64, lf / nf as f64);
        Some(a / (a + b))
    }
}

/// A small random puzzle: one red door, one red floor key, one box that may
/// hold a red or blue key, a blue door, and two gems. Returns the map and the
/// initial state for each box content (empty, red, blue).
pub fn random_world(seed: u64) -> (GridMap, Vec<WorldState>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.random_range(6..9), rng.random_range(5..8));
    let mut map = GridMap::new(w, h, vec!["red".into(), "blue".into()]);
    // Interior walls only when they leave room for every object.
    let density = if rng.random_bool(0.7) { 0.2 } else { 0.0 };
    let mut free = Vec::new();
    let mut walls = 0;
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let p = Pos::new(x, y);
            let border = x == 0 || y == 0 || x == w as i32 - 1 || y == h as i32 - 1;
            if border {
                map.set_wall(p);
            } else if walls + 7 < (w - 2) * (h - 2) && rng.random_bool(density) {
                map.set_wall(p);
                walls += 1;
            } else {
                free.push(p);
            }
        }
    }
    free.shuffle(&mut rng);
    map.add_door("red_door", free[0], "red").unwrap();
    map.add_door("blue_door", free[1], "blue").unwrap();
    map.add_floor_key("red_key", free[2], "red").unwrap();
    let b = map.add_box("box1", free[3]).unwrap();
    map.add_box_key(b, "red").unwrap();
    map.add_box_key(b, "blue").unwrap();
    map.add_gem("apple", "apple", free[4]).unwrap();
    map.add_gem("berry", "berry", free[5]).unwrap();
    let agent = free[6];
    let states = [None, Some(ColorId(0)), Some(ColorId(1))]
        .iter()
        .map(|c| WorldState::initial(&map, agent, &[*c]).unwrap())
        .collect();
    (map, states)
}

/// A random walk of legal actions from `s`, stopping early if stuck.
pub fn random_walk(map: &GridMap, s: &WorldState, len: usize, seed: u64) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = s.clone();
    let mut out = Vec::new();
    for _ in 0..len {
        let legal = world::legal_actions(&s, map);
        let Some(a) = legal.choose(&mut rng).copied() else {
            break;
        };
        s = world::transition(&s, &a, map).unwrap();
        out.push(a);
    }
    out
}

/// Every action that names an object of `map`, legal or not.
pub fn all_actions(map: &GridMap) -> Vec<Action> {
    use btom::world::{BoxId, Direction, DoorId, Item, KeyId};
    let mut out: Vec<Action> = Direction::ALL.into_iter().map(Action::Move).collect();
    out.extend((0..map.keys().len()).map(|k| Action::Pickup(Item::Key(KeyId(k)))));
    out.extend((0..map.gems().len()).map(|g| Action::Pickup(Item::Gem(GemId(g)))));
    out.extend((0..map.doors().len()).map(|d| Action::Unlock(DoorId(d))));
    out.extend((0..map.boxes().len()).map(|b| Action::Open(BoxId(b))));
    out
}
