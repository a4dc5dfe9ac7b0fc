//! Optimal plan costs for the Boltzmann action model.
//!
//! Costs are numbers of unit-cost actions until the goal gem is collected.
//! The default planner runs exact A* guided by [`Planner::relaxed_distance`]
//! and memoizes exact costs per goal. A bounded real-time mode (RTAA*-style,
//! with a learned heuristic table) is available for reproducing the cheaper
//! approximate regime.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;

use crate::world::{self, Action, GemId, GridMap, Pos, WorldError, WorldState};

/// Plan cost in actions; `Infinite` when the goal cannot be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(u32),
    Infinite,
}

impl Cost {
    pub fn plus(self, n: u32) -> Cost {
        match self {
            Cost::Finite(c) => Cost::Finite(c + n),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Cost::Finite(c) => f64::from(c),
            Cost::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlannerMode {
    #[default]
    Exact,
    /// Bounded-expansion lookahead with heuristic learning. Estimates are
    /// admissible lower bounds and exact whenever the goal is found within
    /// the budget.
    RealTime { expansion_budget: usize },
}

const UNREACHABLE: u32 = u32::MAX;

/// Per-goal search state and caches for one map.
pub struct Planner<'m> {
    map: &'m GridMap,
    mode: PlannerMode,
    /// Wall-only BFS distance to the nearest cell from which each gem can be
    /// picked up.
    fields: Vec<Vec<u32>>,
    exact: Vec<HashMap<WorldState, Cost>>,
    learned: Vec<HashMap<WorldState, u32>>,
    expansions: u64,
}

impl<'m> Planner<'m> {
    pub fn new(map: &'m GridMap) -> Self {
        Self::with_mode(map, PlannerMode::Exact)
    }

    pub fn with_mode(map: &'m GridMap, mode: PlannerMode) -> Self {
        let fields = map
            .gems()
            .iter()
            .map(|g| reach_field(map, g.pos))
            .collect();
        let n = map.gems().len();
        Planner {
            map,
            mode,
            fields,
            exact: vec![HashMap::new(); n],
            learned: vec![HashMap::new(); n],
            expansions: 0,
        }
    }

    pub fn map(&self) -> &'m GridMap {
        self.map
    }

    pub fn mode(&self) -> PlannerMode {
        self.mode
    }

    /// Total search node expansions so far.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    /// Number of exactly-known (state, goal) costs.
    pub fn cached_costs(&self) -> usize {
        self.exact.iter().map(HashMap::len).sum()
    }

    pub fn cached_cost(&self, state: &WorldState, goal: GemId) -> Option<Cost> {
        self.exact[goal.0].get(&state.without_other_gems(goal)).copied()
    }

    /// Admissible heuristic: maze distance to pickup range of the gem with
    /// every door treated as open, plus one for the pickup itself.
    pub fn relaxed_distance(&self, state: &WorldState, goal: GemId) -> Cost {
        if state.gem_collected(goal) {
            return Cost::Finite(0);
        }
        match self.fields[goal.0][self.map.cell_index(state.agent())] {
            UNREACHABLE => Cost::Infinite,
            d => Cost::Finite(d + 1),
        }
    }

    /// Optimal number of actions from `state` until `goal` is collected.
    /// In real-time mode this is an admissible estimate.
    pub fn optimal_cost(&mut self, state: &WorldState, goal: GemId) -> Cost {
        let start = state.without_other_gems(goal);
        if let Some(c) = self.exact[goal.0].get(&start) {
            return *c;
        }
        match self.mode {
            PlannerMode::Exact => self.search(start, goal, None),
            PlannerMode::RealTime { expansion_budget } => {
                self.search(start, goal, Some(expansion_budget.max(1)))
            }
        }
    }

    /// `1 + optimal_cost(transition(state, action))`.
    pub fn q_value(
        &mut self,
        state: &WorldState,
        action: &Action,
        goal: GemId,
    ) -> Result<Cost, WorldError> {
        let next = world::transition(state, action, self.map)?;
        Ok(self.optimal_cost(&next, goal).plus(1))
    }

    /// Q-values of every legal action, in `legal_actions` order.
    pub fn action_values(&mut self, state: &WorldState, goal: GemId) -> Vec<(Action, Cost)> {
        world::legal_actions(state, self.map)
            .into_iter()
            .map(|a| {
                let q = self.q_value(state, &a, goal).expect("legal action");
                (a, q)
            })
            .collect()
    }

    fn heuristic(&self, s: &WorldState, goal: GemId) -> Cost {
        let h = self.relaxed_distance(s, goal);
        match (h, self.learned[goal.0].get(s)) {
            (Cost::Finite(a), Some(&b)) => Cost::Finite(a.max(b)),
            _ => h,
        }
    }

    /// A* over canonical states (other gems' status erased, since picking
    /// them up never helps). Cached exact costs act as exits with known
    /// remaining cost. With a budget, stops early and learns from the
    /// frontier instead.
    fn search(&mut self, start: WorldState, goal: GemId, budget: Option<usize>) -> Cost {
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        enum Entry {
            // Exits sort before plain nodes at equal (f, g).
            Exit(usize),
            Node(usize),
        }

        let map = self.map;
        let mut states: Vec<WorldState> = Vec::new();
        let mut g_of: Vec<u32> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut closed: Vec<bool> = Vec::new();
        let mut index: HashMap<WorldState, usize> = HashMap::new();
        let mut heap: BinaryHeap<Reverse<(u32, u32, WorldState, Entry)>> = BinaryHeap::new();

        let h0 = match self.heuristic(&start, goal) {
            Cost::Finite(h) => h,
            Cost::Infinite => {
                self.exact[goal.0].insert(start, Cost::Infinite);
                return Cost::Infinite;
            }
        };
        states.push(start.clone());
        g_of.push(0);
        parent.push(None);
        closed.push(false);
        index.insert(start.clone(), 0);
        heap.push(Reverse((h0, 0, start, Entry::Node(0))));

        let mut expanded = 0usize;
        let mut found: Option<(usize, u32)> = None;
        while let Some(Reverse((f, g, _, entry))) = heap.pop() {
            let id = match entry {
                Entry::Exit(id) => {
                    found = Some((id, f));
                    break;
                }
                Entry::Node(id) => id,
            };
            if closed[id] || g > g_of[id] {
                continue;
            }
            if states[id].gem_collected(goal) {
                found = Some((id, g));
                break;
            }
            if id != 0 {
                match self.exact[goal.0].get(&states[id]) {
                    Some(Cost::Finite(c)) => {
                        heap.push(Reverse((g + c, g, states[id].clone(), Entry::Exit(id))));
                        continue;
                    }
                    Some(Cost::Infinite) => {
                        closed[id] = true;
                        continue;
                    }
                    None => {}
                }
            }
            if let Some(b) = budget {
                if expanded >= b {
                    // Put the node back so the frontier minimum includes it.
                    heap.push(Reverse((f, g, states[id].clone(), Entry::Node(id))));
                    break;
                }
            }
            closed[id] = true;
            expanded += 1;
            self.expansions += 1;

            let current = states[id].clone();
            for a in world::legal_actions(&current, map) {
                let next = world::transition(&current, &a, map)
                    .expect("legal action")
                    .without_other_gems(goal);
                let ng = g + 1;
                let h = match self.heuristic(&next, goal) {
                    Cost::Finite(h) => h,
                    Cost::Infinite => continue,
                };
                let nid = match index.get(&next) {
                    Some(&nid) => {
                        if closed[nid] || ng >= g_of[nid] {
                            continue;
                        }
                        g_of[nid] = ng;
                        parent[nid] = Some(id);
                        nid
                    }
                    None => {
                        let nid = states.len();
                        states.push(next.clone());
                        g_of.push(ng);
                        parent.push(Some(id));
                        closed.push(false);
                        index.insert(next.clone(), nid);
                        nid
                    }
                };
                heap.push(Reverse((ng + h, ng, next, Entry::Node(nid))));
            }
        }

        if let Some((end, total)) = found {
            let mut cursor = Some(end);
            while let Some(n) = cursor {
                self.exact[goal.0].insert(states[n].clone(), Cost::Finite(total - g_of[n]));
                cursor = parent[n];
            }
            return Cost::Finite(total);
        }

        match budget {
            Some(_) if !heap.is_empty() => {
                let frontier = heap
                    .iter()
                    .map(|Reverse((f, _, _, _))| *f)
                    .min()
                    .expect("non-empty");
                let learned = &mut self.learned[goal.0];
                for (n, s) in states.iter().enumerate() {
                    if closed[n] {
                        let v = frontier - g_of[n];
                        let slot = learned.entry(s.clone()).or_insert(0);
                        *slot = (*slot).max(v);
                    }
                }
                Cost::Finite(frontier)
            }
            _ => {
                // Exhausted: nothing reachable from any closed state
                // collects the gem.
                for (n, s) in states.into_iter().enumerate() {
                    if closed[n] {
                        self.exact[goal.0].insert(s, Cost::Infinite);
                    }
                }
                Cost::Infinite
            }
        }
    }
}

/// Multi-source BFS over non-wall cells from every cell within reach of
/// `target`.
fn reach_field(map: &GridMap, target: Pos) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; map.width() * map.height()];
    let mut queue = VecDeque::new();
    let mut sources = vec![target];
    sources.extend(target.neighbors());
    for p in sources {
        if map.open_cell(p) {
            let i = map.cell_index(p);
            if dist[i] == UNREACHABLE {
                dist[i] = 0;
                queue.push_back(p);
            }
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[map.cell_index(p)];
        for q in p.neighbors() {
            if map.open_cell(q) {
                let i = map.cell_index(q);
                if dist[i] == UNREACHABLE {
                    dist[i] = d + 1;
                    queue.push_back(q);
                }
            }
        }
    }
    dist
}
