#![allow(dead_code)]

use std::path::{Path, PathBuf};

use tasknet::environment::Action;
use tasknet::gateway::AgentResponse;

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(golden_path(name)).unwrap_or_else(|e| panic!("golden {name}: {e}"))
}

pub fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Actor reply carrying `action`, in the format the agent prompt asks for.
pub fn reply(action: Action) -> String {
    AgentResponse::new("", "", action).to_json_string()
}

/// Independent decomposition oracle working on the raw library JSON: the
/// first method for a task wins, subtasks run in ascending key order.
pub mod htn {
    use std::collections::HashMap;

    use serde_json::Value;

    fn key(s: &str) -> String {
        s.trim().to_lowercase()
    }

    pub struct Oracle {
        methods: HashMap<String, Vec<String>>,
    }

    impl Oracle {
        pub fn from_json(text: &str) -> Self {
            let doc: Value = serde_json::from_str(text).unwrap();
            let mut methods = HashMap::new();
            for method in doc.as_object().unwrap().values() {
                let task = key(method["task"].as_str().unwrap());
                let mut subs: Vec<(u64, String)> = method["subtasks"]
                    .as_object()
                    .map(|m| {
                        m.iter()
                            .map(|(k, v)| {
                                (
                                    k.trim_start_matches("subtask").parse().unwrap(),
                                    v.as_str().unwrap().to_string(),
                                )
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                subs.sort();
                methods
                    .entry(task)
                    .or_insert_with(|| subs.into_iter().map(|(_, s)| s).collect());
            }
            Self { methods }
        }

        fn subtasks(&self, task: &str) -> &[String] {
            self.methods.get(&key(task)).map_or(&[], Vec::as_slice)
        }

        /// Every task in the order it is completed: children before parents.
        pub fn post_order(&self, task: &str) -> Vec<String> {
            let mut out = Vec::new();
            for sub in self.subtasks(task) {
                out.extend(self.post_order(sub));
            }
            out.push(task.to_string());
            out
        }

        /// Stack after decomposing only along the leftmost chain.
        pub fn initial_stack(&self, task: &str) -> Vec<String> {
            match self.subtasks(task).split_first() {
                None => vec![task.to_string()],
                Some((first, rest)) => {
                    let mut out = self.initial_stack(first);
                    out.extend(rest.iter().cloned());
                    out.push(task.to_string());
                    out
                }
            }
        }
    }
}

/// Independent blocksworld simulator over block names, written from the
/// rules text without reference to the library checker.
pub mod bw {
    use std::collections::HashMap;

    use tasknet::domains::BwInstance;

    const TABLE: &str = "<table>";
    const HAND: &str = "<hand>";

    pub struct World {
        below: HashMap<String, String>,
    }

    impl World {
        pub fn new(inst: &BwInstance) -> Self {
            let mut below = HashMap::new();
            for stack in &inst.initial {
                let mut under = TABLE.to_string();
                for &b in stack {
                    let name = inst.blocks[b].to_lowercase();
                    below.insert(name.clone(), under);
                    under = name;
                }
            }
            Self { below }
        }

        fn clear(&self, x: &str) -> bool {
            self.below.get(x).is_some_and(|u| u != HAND) && !self.below.values().any(|u| u == x)
        }

        fn hand_empty(&self) -> bool {
            !self.below.values().any(|u| u == HAND)
        }

        fn known(&self, x: &str) -> bool {
            self.below.contains_key(x)
        }

        pub fn step(&mut self, line: &str) -> bool {
            let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            let w: Vec<&str> = words.iter().map(String::as_str).collect();
            if w.iter().skip(1).any(|x| !self.known(x)) {
                return false;
            }
            match w.as_slice() {
                ["pick", x] if self.hand_empty() && self.below[*x] == TABLE && self.clear(x) => {
                    self.below.insert(x.to_string(), HAND.into());
                }
                ["unstack", x, y] if self.hand_empty() && self.below[*x] == *y && self.clear(x) => {
                    self.below.insert(x.to_string(), HAND.into());
                }
                ["put", x] if self.below[*x] == HAND => {
                    self.below.insert(x.to_string(), TABLE.into());
                }
                ["stack", x, y] if x != y && self.below[*x] == HAND && self.clear(y) => {
                    self.below.insert(x.to_string(), y.to_string());
                }
                _ => return false,
            }
            true
        }

        pub fn goal_holds(&self, inst: &BwInstance) -> bool {
            inst.goal
                .windows(2)
                .all(|p| self.below[&inst.blocks[p[1]].to_lowercase()] == inst.blocks[p[0]].to_lowercase())
        }
    }

    /// Accept iff every non-blank line is a legal step and the goal holds.
    pub fn accepts(inst: &BwInstance, plan: &str) -> bool {
        let mut world = World::new(inst);
        for line in plan.lines().filter(|l| !l.trim().is_empty()) {
            if !world.step(line) {
                return false;
            }
        }
        world.goal_holds(inst)
    }

    /// Every syntactically valid step over the instance's blocks.
    pub fn all_steps(inst: &BwInstance) -> Vec<String> {
        let mut out = Vec::new();
        for x in &inst.blocks {
            out.push(format!("pick {x}"));
            out.push(format!("put {x}"));
            for y in &inst.blocks {
                if x != y {
                    out.push(format!("stack {x} {y}"));
                    out.push(format!("unstack {x} {y}"));
                }
            }
        }
        out
    }
}
