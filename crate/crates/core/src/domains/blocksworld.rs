//! Blocks stacking: random layouts, a rule simulator for plans, and a
//! breadth-first reference planner for small instances.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DomainError, Verdict};

/// Largest block count the exhaustive planner accepts by default.
pub const DEFAULT_SEARCH_BOUND: usize = 6;

pub const COLORS: [&str; 24] = [
    "red", "blue", "green", "yellow", "orange", "purple", "black", "white", "gray", "cyan", "magenta", "pink", "brown",
    "violet", "teal", "maroon", "navy", "olive", "lime", "gold", "silver", "indigo", "beige", "coral",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BwInstance {
    pub blocks: Vec<String>,
    /// Initial stacks, each listed bottom to top, as block indices.
    pub initial: Vec<Vec<usize>>,
    /// Target tower, bottom to top.
    pub goal: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BwStep {
    Pick(usize),
    Put(usize),
    Stack(usize, usize),
    Unstack(usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BwPlan {
    pub steps: Vec<BwStep>,
}

impl BwPlan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One action per line in the answer format.
    pub fn render(&self, inst: &BwInstance) -> String {
        let name = |i: usize| inst.blocks[i].as_str();
        self.steps
            .iter()
            .map(|step| match *step {
                BwStep::Pick(x) => format!("pick {}", name(x)),
                BwStep::Put(x) => format!("put {}", name(x)),
                BwStep::Stack(x, y) => format!("stack {} {}", name(x), name(y)),
                BwStep::Unstack(x, y) => format!("unstack {} {}", name(x), name(y)),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Support {
    Table,
    On(usize),
    Held,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    support: Vec<Support>,
}

impl State {
    fn initial(inst: &BwInstance) -> Self {
        let mut support = vec![Support::Table; inst.blocks.len()];
        for stack in &inst.initial {
            for pair in stack.windows(2) {
                support[pair[1]] = Support::On(pair[0]);
            }
        }
        Self { support }
    }

    fn hand_empty(&self) -> bool {
        !self.support.contains(&Support::Held)
    }

    fn clear(&self, x: usize) -> bool {
        self.support[x] != Support::Held && !self.support.contains(&Support::On(x))
    }

    fn apply(&mut self, step: BwStep) -> Result<(), &'static str> {
        match step {
            BwStep::Pick(x) => {
                if !self.hand_empty() {
                    return Err("hand not empty");
                }
                if self.support[x] != Support::Table {
                    return Err("block not on table");
                }
                if !self.clear(x) {
                    return Err("block not clear");
                }
                self.support[x] = Support::Held;
            }
            BwStep::Unstack(x, y) => {
                if !self.hand_empty() {
                    return Err("hand not empty");
                }
                if self.support[x] != Support::On(y) {
                    return Err("block not on top of the named block");
                }
                if !self.clear(x) {
                    return Err("block not clear");
                }
                self.support[x] = Support::Held;
            }
            BwStep::Put(x) => {
                if self.support[x] != Support::Held {
                    return Err("block not held");
                }
                self.support[x] = Support::Table;
            }
            BwStep::Stack(x, y) => {
                if self.support[x] != Support::Held {
                    return Err("block not held");
                }
                if x == y || !self.clear(y) {
                    return Err("target block not clear");
                }
                self.support[x] = Support::On(y);
            }
        }
        Ok(())
    }

    fn satisfies(&self, goal: &[usize]) -> bool {
        goal.windows(2)
            .all(|pair| self.support[pair[1]] == Support::On(pair[0]))
    }
}

pub fn gen_blocksworld(b: usize, h: usize, seed: u64) -> Result<BwInstance, DomainError> {
    if b == 0 || h == 0 || h > b {
        return Err(DomainError::InvalidParameters(format!(
            "need 1 <= h <= b, got b={b}, h={h}"
        )));
    }
    if b > COLORS.len() {
        return Err(DomainError::NamePoolExhausted {
            needed: b,
            available: COLORS.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors = COLORS.to_vec();
    colors.shuffle(&mut rng);
    let blocks: Vec<String> = colors[..b].iter().map(|c| c.to_string()).collect();

    let mut initial: Vec<Vec<usize>> = Vec::new();
    for block in 0..b {
        // every stack has exactly one clear top
        let clear_tops = initial.len();
        if rng.gen_range(0..=clear_tops) == 0 {
            initial.push(vec![block]);
        } else {
            let stack = rng.gen_range(0..clear_tops);
            initial[stack].push(block);
        }
    }

    let mut order: Vec<usize> = (0..b).collect();
    order.shuffle(&mut rng);
    order.truncate(h);
    Ok(BwInstance {
        blocks,
        initial,
        goal: order,
    })
}

impl BwInstance {
    /// Request text: each stack bottom to top, the top block's clear fact
    /// just before its placement, then the goal tower bottom to top.
    pub fn request(&self) -> String {
        let name = |i: usize| self.blocks[i].as_str();
        let mut lines = vec!["As initial conditions I have that:".to_string()];
        for stack in &self.initial {
            for (pos, &block) in stack.iter().enumerate() {
                if pos + 1 == stack.len() {
                    lines.push(format!("the {} block is clear", name(block)));
                }
                if pos == 0 {
                    lines.push(format!("the {} block is on the table", name(block)));
                } else {
                    lines.push(format!(
                        "the {} block is on top of the {} block",
                        name(block),
                        name(stack[pos - 1])
                    ));
                }
            }
        }
        lines.push("My goal is to have that: ".to_string());
        for pair in self.goal.windows(2) {
            lines.push(format!(
                "the {} block is on top of the {} block",
                name(pair[1]),
                name(pair[0])
            ));
        }
        lines.join("\n")
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.eq_ignore_ascii_case(name))
    }

    pub fn goal_satisfied_initially(&self) -> bool {
        State::initial(self).satisfies(&self.goal)
    }
}

/// Parses one answer line. Blank lines are skipped by the caller.
pub fn parse_step(inst: &BwInstance, line: &str) -> Result<BwStep, String> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    let block = |t: &str| inst.block_index(t).ok_or_else(|| format!("unknown block `{t}`"));
    match tokens.as_slice() {
        [verb, x] if verb == "pick" => Ok(BwStep::Pick(block(x)?)),
        [verb, x] if verb == "put" => Ok(BwStep::Put(block(x)?)),
        [verb, x, y] if verb == "stack" => Ok(BwStep::Stack(block(x)?, block(y)?)),
        [verb, x, y] if verb == "unstack" => Ok(BwStep::Unstack(block(x)?, block(y)?)),
        _ => Err(format!("malformed action `{}`", line.trim())),
    }
}

/// Simulates `plan_text` under the stacking rules and accepts iff every
/// step is legal and the goal tower stands at the end.
pub fn check_blocksworld(inst: &BwInstance, plan_text: &str) -> Verdict {
    let mut state = State::initial(inst);
    let lines = plan_text.lines().map(str::trim).filter(|l| !l.is_empty());
    for (index, line) in lines.enumerate() {
        let step_no = index + 1;
        let step = match parse_step(inst, line) {
            Ok(step) => step,
            Err(reason) => return Verdict::reject(reason, Some(step_no)),
        };
        if let Err(reason) = state.apply(step) {
            return Verdict::reject(reason, Some(step_no));
        }
    }
    if state.satisfies(&inst.goal) {
        Verdict::Accept
    } else {
        Verdict::reject("goal not satisfied", None)
    }
}

fn successors(state: &State) -> Vec<(BwStep, State)> {
    let n = state.support.len();
    let mut out = Vec::new();
    let mut push = |step: BwStep| {
        let mut next = state.clone();
        if next.apply(step).is_ok() {
            out.push((step, next));
        }
    };
    match state.support.iter().position(|s| *s == Support::Held) {
        Some(x) => {
            push(BwStep::Put(x));
            for y in 0..n {
                push(BwStep::Stack(x, y));
            }
        }
        None => {
            for x in 0..n {
                match state.support[x] {
                    Support::Table => push(BwStep::Pick(x)),
                    Support::On(y) => push(BwStep::Unstack(x, y)),
                    Support::Held => {}
                }
            }
        }
    }
    out
}

pub fn bfs_plan_blocksworld(inst: &BwInstance) -> Result<BwPlan, DomainError> {
    bfs_plan_bounded(inst, DEFAULT_SEARCH_BOUND)
}

/// Shortest legal plan by breadth-first search over full states.
pub fn bfs_plan_bounded(inst: &BwInstance, bound: usize) -> Result<BwPlan, DomainError> {
    if inst.blocks.len() > bound {
        return Err(DomainError::OracleBoundExceeded {
            blocks: inst.blocks.len(),
            bound,
        });
    }
    let start = State::initial(inst);
    let mut parent: HashMap<State, Option<(State, BwStep)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        if state.satisfies(&inst.goal) {
            let mut steps = Vec::new();
            let mut cursor = state;
            while let Some(Some((prev, step))) = parent.get(&cursor) {
                steps.push(*step);
                cursor = prev.clone();
            }
            steps.reverse();
            return Ok(BwPlan { steps });
        }
        for (step, next) in successors(&state) {
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((state.clone(), step)));
                queue.push_back(next);
            }
        }
    }
    unreachable!("every goal tower is reachable from any layout")
}

/// Unstacks everything onto the table, then builds the goal tower. Legal
/// for any size, though usually far from shortest.
pub fn naive_plan_blocksworld(inst: &BwInstance) -> BwPlan {
    let mut steps = Vec::new();
    for stack in &inst.initial {
        for pos in (1..stack.len()).rev() {
            steps.push(BwStep::Unstack(stack[pos], stack[pos - 1]));
            steps.push(BwStep::Put(stack[pos]));
        }
    }
    for pair in inst.goal.windows(2) {
        steps.push(BwStep::Pick(pair[1]));
        steps.push(BwStep::Stack(pair[1], pair[0]));
    }
    BwPlan { steps }
}
