//! Deterministic Doors, Keys & Gems gridworld.
//!
//! A [`GridMap`] holds everything static about a puzzle: walls, door colors,
//! box sites, key identities and gem placements. A [`WorldState`] holds the
//! dynamic part: where the agent stands, where every key currently is, and
//! which doors, boxes and gems have changed status. Transitions are pure.
//!
//! Keys hidden in boxes are modeled as one potential key per (box, color)
//! pair. A particular world instance places at most one of them in each box;
//! the others are [`KeyLoc::Absent`].

use std::fmt;

use thiserror::Error;

/// Maximum number of doors, boxes or gems in a map (status is kept in bitmasks).
pub const MAX_OBJECTS_PER_KIND: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("illegal action {action} in current state")]
    IllegalAction { action: String },
    #[error("unknown gem index {0}")]
    UnknownGem(usize),
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("unknown color '{0}'")]
    UnknownColor(String),
    #[error("duplicate object id '{0}'")]
    DuplicateId(String),
    #[error("cell ({x},{y}) is out of bounds")]
    OutOfBounds { x: i32, y: i32 },
    #[error("cell ({x},{y}) is a wall")]
    OnWall { x: i32, y: i32 },
    #[error("cell ({x},{y}) is already occupied by '{other}'")]
    Occupied { x: i32, y: i32, other: String },
    #[error("too many objects of kind {0} (max {MAX_OBJECTS_PER_KIND})")]
    TooManyObjects(&'static str),
    #[error("box '{box_id}' has no potential {color} key")]
    NoSuchBoxKey { box_id: String, color: String },
    #[error("malformed action token '{0}'")]
    BadActionToken(String),
    #[error("content assignment has {got} entries, map has {expected} boxes")]
    ContentArity { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, WorldError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn step(self, dir: Direction) -> Pos {
        let (dx, dy) = dir.delta();
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors(self) -> [Pos; 4] {
        Direction::ALL.map(|d| self.step(d))
    }

    /// Co-located or 4-adjacent.
    pub fn within_reach(self, other: Pos) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() <= 1
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Grid direction; `Up` decreases `y` (row 0 is the top of the ASCII map).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

macro_rules! index_newtype {
    ($($(#[$m:meta])* $name:ident),*) => {$(
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub usize);
    )*};
}

index_newtype!(KeyId, DoorId, BoxId, GemId, ColorId);

#[derive(Debug, Clone, PartialEq)]
pub struct Door {
    pub id: String,
    pub pos: Pos,
    pub color: ColorId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSite {
    pub id: String,
    pub pos: Pos,
}

/// Where a key starts out in any world instance that contains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyHome {
    Floor(Pos),
    Box(BoxId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyDef {
    pub id: String,
    pub color: ColorId,
    pub home: KeyHome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gem {
    pub id: String,
    pub shape: String,
    pub pos: Pos,
}

/// Static layout of a puzzle.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: i32,
    height: i32,
    walls: Vec<bool>,
    colors: Vec<String>,
    doors: Vec<Door>,
    boxes: Vec<BoxSite>,
    keys: Vec<KeyDef>,
    gems: Vec<Gem>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, colors: Vec<String>) -> Self {
        GridMap {
            width: width as i32,
            height: height as i32,
            walls: vec![false; width * height],
            colors,
            doors: Vec::new(),
            boxes: Vec::new(),
            keys: Vec::new(),
            gems: Vec::new(),
        }
    }

    /// Builds a map from rows of ASCII where `#` is a wall. Every other
    /// character that is not `.` or a space is returned as a marker so the
    /// caller can attach objects to it.
    pub fn from_ascii(rows: &[&str], colors: Vec<String>) -> (GridMap, Vec<(char, Pos)>) {
        let height = rows.len();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let mut map = GridMap::new(width, height, colors);
        let mut markers = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let pos = Pos::new(x as i32, y as i32);
                match ch {
                    '#' => map.set_wall(pos),
                    '.' | ' ' => {}
                    other => markers.push((other, pos)),
                }
            }
        }
        (map, markers)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn cell_index(&self, p: Pos) -> usize {
        (p.y * self.width + p.x) as usize
    }

    pub fn set_wall(&mut self, p: Pos) {
        if self.in_bounds(p) {
            let i = self.cell_index(p);
            self.walls[i] = true;
        }
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        !self.in_bounds(p) || self.walls[self.cell_index(p)]
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }
    pub fn doors(&self) -> &[Door] {
        &self.doors
    }
    pub fn boxes(&self) -> &[BoxSite] {
        &self.boxes
    }
    pub fn keys(&self) -> &[KeyDef] {
        &self.keys
    }
    pub fn gems(&self) -> &[Gem] {
        &self.gems
    }

    pub fn color(&self, name: &str) -> Result<ColorId> {
        self.colors
            .iter()
            .position(|c| c == name)
            .map(ColorId)
            .ok_or_else(|| WorldError::UnknownColor(name.to_string()))
    }

    pub fn color_name(&self, c: ColorId) -> &str {
        &self.colors[c.0]
    }

    pub fn door_by_id(&self, id: &str) -> Option<DoorId> {
        self.doors.iter().position(|d| d.id == id).map(DoorId)
    }
    pub fn box_by_id(&self, id: &str) -> Option<BoxId> {
        self.boxes.iter().position(|b| b.id == id).map(BoxId)
    }
    pub fn key_by_id(&self, id: &str) -> Option<KeyId> {
        self.keys.iter().position(|k| k.id == id).map(KeyId)
    }
    pub fn gem_by_id(&self, id: &str) -> Option<GemId> {
        self.gems.iter().position(|g| g.id == id).map(GemId)
    }

    /// The potential key of `color` hidden in `b`, if the map declares one.
    pub fn box_key(&self, b: BoxId, color: ColorId) -> Option<KeyId> {
        self.keys
            .iter()
            .position(|k| k.home == KeyHome::Box(b) && k.color == color)
            .map(KeyId)
    }

    fn id_taken(&self, id: &str) -> bool {
        self.doors.iter().any(|d| d.id == id)
            || self.boxes.iter().any(|b| b.id == id)
            || self.keys.iter().any(|k| k.id == id)
            || self.gems.iter().any(|g| g.id == id)
    }

    fn occupant(&self, p: Pos) -> Option<&str> {
        self.doors
            .iter()
            .find(|d| d.pos == p)
            .map(|d| d.id.as_str())
            .or_else(|| self.boxes.iter().find(|b| b.pos == p).map(|b| b.id.as_str()))
            .or_else(|| {
                self.keys
                    .iter()
                    .find(|k| k.home == KeyHome::Floor(p))
                    .map(|k| k.id.as_str())
            })
            .or_else(|| self.gems.iter().find(|g| g.pos == p).map(|g| g.id.as_str()))
    }

    fn check_placement(&self, id: &str, p: Pos) -> Result<()> {
        if self.id_taken(id) {
            return Err(WorldError::DuplicateId(id.to_string()));
        }
        if !self.in_bounds(p) {
            return Err(WorldError::OutOfBounds { x: p.x, y: p.y });
        }
        if self.is_wall(p) {
            return Err(WorldError::OnWall { x: p.x, y: p.y });
        }
        if let Some(other) = self.occupant(p) {
            return Err(WorldError::Occupied {
                x: p.x,
                y: p.y,
                other: other.to_string(),
            });
        }
        Ok(())
    }

    pub fn add_door(&mut self, id: &str, pos: Pos, color: &str) -> Result<DoorId> {
        self.check_placement(id, pos)?;
        let color = self.color(color)?;
        if self.doors.len() >= MAX_OBJECTS_PER_KIND {
            return Err(WorldError::TooManyObjects("door"));
        }
        self.doors.push(Door {
            id: id.to_string(),
            pos,
            color,
        });
        Ok(DoorId(self.doors.len() - 1))
    }

    pub fn add_box(&mut self, id: &str, pos: Pos) -> Result<BoxId> {
        self.check_placement(id, pos)?;
        if self.boxes.len() >= MAX_OBJECTS_PER_KIND {
            return Err(WorldError::TooManyObjects("box"));
        }
        self.boxes.push(BoxSite {
            id: id.to_string(),
            pos,
        });
        Ok(BoxId(self.boxes.len() - 1))
    }

    pub fn add_floor_key(&mut self, id: &str, pos: Pos, color: &str) -> Result<KeyId> {
        self.check_placement(id, pos)?;
        let color = self.color(color)?;
        self.keys.push(KeyDef {
            id: id.to_string(),
            color,
            home: KeyHome::Floor(pos),
        });
        Ok(KeyId(self.keys.len() - 1))
    }

    /// Declares the potential `color` key of box `b`, named `<box>_<color>_key`.
    pub fn add_box_key(&mut self, b: BoxId, color: &str) -> Result<KeyId> {
        let cid = self.color(color)?;
        if let Some(existing) = self.box_key(b, cid) {
            return Ok(existing);
        }
        let id = format!("{}_{}_key", self.boxes[b.0].id, color);
        if self.id_taken(&id) {
            return Err(WorldError::DuplicateId(id));
        }
        self.keys.push(KeyDef {
            id,
            color: cid,
            home: KeyHome::Box(b),
        });
        Ok(KeyId(self.keys.len() - 1))
    }

    pub fn add_gem(&mut self, id: &str, shape: &str, pos: Pos) -> Result<GemId> {
        self.check_placement(id, pos)?;
        if self.gems.len() >= MAX_OBJECTS_PER_KIND {
            return Err(WorldError::TooManyObjects("gem"));
        }
        self.gems.push(Gem {
            id: id.to_string(),
            shape: shape.to_string(),
            pos,
        });
        Ok(GemId(self.gems.len() - 1))
    }

    fn door_at(&self, p: Pos) -> Option<DoorId> {
        self.doors.iter().position(|d| d.pos == p).map(DoorId)
    }

    /// True if the agent may stand on `p` in `state`.
    pub fn passable(&self, state: &WorldState, p: Pos) -> bool {
        if self.is_wall(p) {
            return false;
        }
        match self.door_at(p) {
            Some(d) => state.door_unlocked(d),
            None => true,
        }
    }

    /// Walls-only passability (doors treated as open).
    pub fn open_cell(&self, p: Pos) -> bool {
        !self.is_wall(p)
    }

    pub fn action_token(&self, a: &Action) -> String {
        match a {
            Action::Move(d) => d.name().to_string(),
            Action::Pickup(Item::Key(k)) => format!("pickup({})", self.keys[k.0].id),
            Action::Pickup(Item::Gem(g)) => format!("pickup({})", self.gems[g.0].id),
            Action::Unlock(d) => format!("unlock({})", self.doors[d.0].id),
            Action::Open(b) => format!("open({})", self.boxes[b.0].id),
        }
    }

    /// Parses `up/down/left/right`, `pickup(<id>)`, `unlock(<id>)`, `open(<id>)`.
    pub fn parse_action(&self, token: &str) -> Result<Action> {
        let t = token.trim().to_ascii_lowercase();
        let dir = Direction::ALL.into_iter().find(|d| d.name() == t);
        if let Some(d) = dir {
            return Ok(Action::Move(d));
        }
        let bad = || WorldError::BadActionToken(token.to_string());
        let open = t.find('(').ok_or_else(bad)?;
        if !t.ends_with(')') {
            return Err(bad());
        }
        let verb = t[..open].trim();
        let arg = t[open + 1..t.len() - 1].trim();
        let unknown = || WorldError::UnknownObject(arg.to_string());
        match verb {
            "pickup" => {
                if let Some(k) = self.key_by_id(arg) {
                    Ok(Action::Pickup(Item::Key(k)))
                } else {
                    self.gem_by_id(arg)
                        .map(|g| Action::Pickup(Item::Gem(g)))
                        .ok_or_else(unknown)
                }
            }
            "unlock" => self.door_by_id(arg).map(Action::Unlock).ok_or_else(unknown),
            "open" => self.box_by_id(arg).map(Action::Open).ok_or_else(unknown),
            _ => Err(bad()),
        }
    }
}

/// Current whereabouts of one key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyLoc {
    /// Not part of this world instance (a box option that was not realized).
    Absent,
    Floor,
    InBox(BoxId),
    Held,
    /// Spent on a door.
    Used(DoorId),
}

/// Full dynamic state. Field order gives the canonical ordering used for
/// deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldState {
    agent: Pos,
    keys: Vec<KeyLoc>,
    unlocked: u64,
    opened: u64,
    collected: u64,
}

impl WorldState {
    /// Builds the initial state of one world instance. `contents[b]` is the
    /// color of the key in box `b`, or `None` for an empty box.
    pub fn initial(map: &GridMap, agent: Pos, contents: &[Option<ColorId>]) -> Result<Self> {
        if contents.len() != map.boxes.len() {
            return Err(WorldError::ContentArity {
                expected: map.boxes.len(),
                got: contents.len(),
            });
        }
        if !map.in_bounds(agent) {
            return Err(WorldError::OutOfBounds {
                x: agent.x,
                y: agent.y,
            });
        }
        if map.is_wall(agent) {
            return Err(WorldError::OnWall {
                x: agent.x,
                y: agent.y,
            });
        }
        let mut keys: Vec<KeyLoc> = map
            .keys
            .iter()
            .map(|k| match k.home {
                KeyHome::Floor(_) => KeyLoc::Floor,
                KeyHome::Box(_) => KeyLoc::Absent,
            })
            .collect();
        for (b, content) in contents.iter().enumerate() {
            if let Some(color) = *content {
                let k = map
                    .box_key(BoxId(b), color)
                    .ok_or_else(|| WorldError::NoSuchBoxKey {
                        box_id: map.boxes[b].id.clone(),
                        color: map.color_name(color).to_string(),
                    })?;
                keys[k.0] = KeyLoc::InBox(BoxId(b));
            }
        }
        Ok(WorldState {
            agent,
            keys,
            unlocked: 0,
            opened: 0,
            collected: 0,
        })
    }

    pub fn agent(&self) -> Pos {
        self.agent
    }
    pub fn key_loc(&self, k: KeyId) -> KeyLoc {
        self.keys[k.0]
    }
    pub fn key_present(&self, k: KeyId) -> bool {
        self.keys[k.0] != KeyLoc::Absent
    }
    pub fn door_unlocked(&self, d: DoorId) -> bool {
        self.unlocked & (1 << d.0) != 0
    }
    pub fn box_opened(&self, b: BoxId) -> bool {
        self.opened & (1 << b.0) != 0
    }
    pub fn gem_collected(&self, g: GemId) -> bool {
        self.collected & (1 << g.0) != 0
    }

    /// The key currently inside box `b`, if any.
    pub fn box_contents(&self, b: BoxId) -> Option<KeyId> {
        self.keys
            .iter()
            .position(|l| *l == KeyLoc::InBox(b))
            .map(KeyId)
    }

    pub fn inventory(&self) -> impl Iterator<Item = KeyId> + '_ {
        self.keys
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == KeyLoc::Held)
            .map(|(i, _)| KeyId(i))
    }

    pub fn holds_color(&self, map: &GridMap, color: ColorId) -> Option<KeyId> {
        self.inventory().find(|k| map.keys[k.0].color == color)
    }

    /// Copy with every gem other than `keep` marked uncollected.
    pub fn without_other_gems(&self, keep: GemId) -> WorldState {
        let mut s = self.clone();
        s.collected &= 1 << keep.0;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Key(KeyId),
    Gem(GemId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Move(Direction),
    Pickup(Item),
    Unlock(DoorId),
    Open(BoxId),
}

impl Action {
    pub fn is_move(&self) -> bool {
        matches!(self, Action::Move(_))
    }
}

pub fn is_legal(state: &WorldState, action: &Action, map: &GridMap) -> bool {
    let here = state.agent;
    match *action {
        Action::Move(d) => map.passable(state, here.step(d)),
        Action::Pickup(Item::Key(k)) => match map.keys.get(k.0) {
            Some(KeyDef {
                home: KeyHome::Floor(p),
                ..
            }) => state.keys[k.0] == KeyLoc::Floor && here.within_reach(*p),
            _ => false,
        },
        Action::Pickup(Item::Gem(g)) => match map.gems.get(g.0) {
            Some(gem) => !state.gem_collected(g) && here.within_reach(gem.pos),
            None => false,
        },
        Action::Unlock(d) => match map.doors.get(d.0) {
            Some(door) => {
                !state.door_unlocked(d)
                    && here.within_reach(door.pos)
                    && state.holds_color(map, door.color).is_some()
            }
            None => false,
        },
        Action::Open(b) => match map.boxes.get(b.0) {
            Some(site) => !state.box_opened(b) && here.within_reach(site.pos),
            None => false,
        },
    }
}

/// Every action whose preconditions hold: moves in up/down/left/right order,
/// then pickups, unlocks and opens, each by ascending object id.
pub fn legal_actions(state: &WorldState, map: &GridMap) -> Vec<Action> {
    let mut out: Vec<Action> = Direction::ALL
        .into_iter()
        .map(Action::Move)
        .filter(|a| is_legal(state, a, map))
        .collect();

    let mut pickups: Vec<(&str, Action)> = Vec::new();
    for (i, k) in map.keys.iter().enumerate() {
        let a = Action::Pickup(Item::Key(KeyId(i)));
        if is_legal(state, &a, map) {
            pickups.push((&k.id, a));
        }
    }
    for (i, g) in map.gems.iter().enumerate() {
        let a = Action::Pickup(Item::Gem(GemId(i)));
        if is_legal(state, &a, map) {
            pickups.push((&g.id, a));
        }
    }
    pickups.sort_by(|a, b| a.0.cmp(b.0));
    out.extend(pickups.into_iter().map(|(_, a)| a));

    let mut unlocks: Vec<(&str, Action)> = map
        .doors
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), Action::Unlock(DoorId(i))))
        .filter(|(_, a)| is_legal(state, a, map))
        .collect();
    unlocks.sort_by(|a, b| a.0.cmp(b.0));
    out.extend(unlocks.into_iter().map(|(_, a)| a));

    let mut opens: Vec<(&str, Action)> = map
        .boxes
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), Action::Open(BoxId(i))))
        .filter(|(_, a)| is_legal(state, a, map))
        .collect();
    opens.sort_by(|a, b| a.0.cmp(b.0));
    out.extend(opens.into_iter().map(|(_, a)| a));
    out
}

pub fn transition(state: &WorldState, action: &Action, map: &GridMap) -> Result<WorldState> {
    if !is_legal(state, action, map) {
        return Err(WorldError::IllegalAction {
            action: map_token_or_debug(map, action),
        });
    }
    let mut next = state.clone();
    match *action {
        Action::Move(d) => next.agent = state.agent.step(d),
        Action::Pickup(Item::Key(k)) => next.keys[k.0] = KeyLoc::Held,
        Action::Pickup(Item::Gem(g)) => next.collected |= 1 << g.0,
        Action::Unlock(d) => {
            // Lowest-index held key of the door's color.
            let color = map.doors[d.0].color;
            let k = state
                .holds_color(map, color)
                .expect("legality checked above");
            next.keys[k.0] = KeyLoc::Used(d);
            next.unlocked |= 1 << d.0;
        }
        Action::Open(b) => {
            next.opened |= 1 << b.0;
            if let Some(k) = state.box_contents(b) {
                next.keys[k.0] = KeyLoc::Held;
            }
        }
    }
    Ok(next)
}

fn map_token_or_debug(map: &GridMap, action: &Action) -> String {
    let in_range = match action {
        Action::Move(_) => true,
        Action::Pickup(Item::Key(k)) => k.0 < map.keys.len(),
        Action::Pickup(Item::Gem(g)) => g.0 < map.gems.len(),
        Action::Unlock(d) => d.0 < map.doors.len(),
        Action::Open(b) => b.0 < map.boxes.len(),
    };
    if in_range {
        map.action_token(action)
    } else {
        format!("{action:?}")
    }
}

pub fn goal_achieved(state: &WorldState, goal: GemId, map: &GridMap) -> Result<bool> {
    if goal.0 >= map.gems.len() {
        return Err(WorldError::UnknownGem(goal.0));
    }
    Ok(state.gem_collected(goal))
}

/// Replays `actions` from `start`, failing at the first illegal step with its
/// zero-based index.
pub fn replay(
    start: &WorldState,
    actions: &[Action],
    map: &GridMap,
) -> std::result::Result<WorldState, (usize, WorldError)> {
    let mut s = start.clone();
    for (i, a) in actions.iter().enumerate() {
        s = transition(&s, a, map).map_err(|e| (i, e))?;
    }
    Ok(s)
}

/// Per-box content options and the initial states they generate.
///
/// Enumeration is odometer-style with the first box as the most significant
/// digit, so states come out in lexicographic option order.
#[derive(Debug, Clone)]
pub struct ContentSpace {
    agent: Pos,
    options: Vec<Vec<Option<ColorId>>>,
}

impl ContentSpace {
    pub fn new(agent: Pos, options: Vec<Vec<Option<ColorId>>>) -> Self {
        ContentSpace { agent, options }
    }

    pub fn options(&self) -> &[Vec<Option<ColorId>>] {
        &self.options
    }

    /// Number of assignments, or `None` on overflow.
    pub fn len(&self) -> Option<usize> {
        self.options
            .iter()
            .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn assignments(&self) -> impl Iterator<Item = Vec<Option<ColorId>>> + '_ {
        let total = if self.options.iter().any(|o| o.is_empty()) {
            0
        } else {
            self.len().unwrap_or(usize::MAX)
        };
        (0..total).map(move |mut n| {
            let mut digits = vec![None; self.options.len()];
            for (b, opts) in self.options.iter().enumerate().rev() {
                digits[b] = opts[n % opts.len()];
                n /= opts.len();
            }
            digits
        })
    }

    pub fn states<'a>(
        &'a self,
        map: &'a GridMap,
    ) -> impl Iterator<Item = Result<WorldState>> + 'a {
        self.assignments()
            .map(move |c| WorldState::initial(map, self.agent, &c))
    }
}
