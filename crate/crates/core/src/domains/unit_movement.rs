//! Surrounding a target location: random road networks, move-list checking,
//! and a max-flow feasibility oracle.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{DomainError, Verdict};

pub const NEIGHBOR_COUNT: usize = 4;
pub const OUTERS_PER_NEIGHBOR: usize = 3;
pub const EXTRA_EDGES: usize = 12;
pub const POPULATED_SECTIONS: usize = 3;
/// Neighbors that must be covered for success.
pub const REQUIRED_COVERED: usize = 3;
pub const UNIT_KIND: &str = "Infantry";

pub const LOCATIONS: [&str; 40] = [
    "Eastfield",
    "Seabreeze",
    "Skyline",
    "Moonlight",
    "Centerville",
    "Meadow",
    "Hillcrest",
    "Crestview",
    "Townsend",
    "Bayview",
    "Creekbend",
    "Summit",
    "Pineside",
    "Prairie",
    "Riverbend",
    "Lakeside",
    "Sunnyside",
    "Westwood",
    "Village",
    "Southshore",
    "Oakridge",
    "Maplewood",
    "Stonebridge",
    "Brookside",
    "Fairview",
    "Greenfield",
    "Highland",
    "Ironwood",
    "Kingsport",
    "Northgate",
    "Oldtown",
    "Redcliff",
    "Silverlake",
    "Thornbury",
    "Valleyview",
    "Willowdale",
    "Ashford",
    "Briarwood",
    "Cedarhurst",
    "Driftwood",
];

pub const GROUPS: [&str; 26] = [
    "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel", "India", "Juliett", "Kilo", "Lima",
    "Mike", "November", "Oscar", "Papa", "Quebec", "Romeo", "Sierra", "Tango", "Uniform", "Victor", "Whiskey", "Xray",
    "Yankee", "Zulu",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmInstance {
    pub n: usize,
    pub k: usize,
    pub target: String,
    pub neighbors: Vec<String>,
    /// Outer nodes of each neighbor's section, parallel to `neighbors`.
    pub outers: Vec<Vec<String>>,
    /// Undirected adjacency in insertion order.
    pub adjacency: IndexMap<String, Vec<String>>,
    pub extra_edges: Vec<(String, String)>,
    /// Indices into `neighbors` of the sections holding units.
    pub populated_sections: Vec<usize>,
    pub units: Vec<Unit>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// How strictly moves are checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmRules {
    /// Allow moves to any known location instead of adjacent ones only.
    pub allow_teleport: bool,
}

fn add_edge(adj: &mut IndexMap<String, Vec<String>>, a: &str, b: &str) {
    adj.entry(a.to_string()).or_default().push(b.to_string());
    adj.entry(b.to_string()).or_default().push(a.to_string());
}

pub fn gen_unit_movement(n: usize, k: usize, seed: u64) -> Result<UmInstance, DomainError> {
    if n == 0 || k == 0 {
        return Err(DomainError::InvalidParameters(format!(
            "need n >= 1 and k >= 1, got n={n}, k={k}"
        )));
    }
    let needed = 1 + NEIGHBOR_COUNT * (1 + OUTERS_PER_NEIGHBOR);
    if needed > LOCATIONS.len() {
        return Err(DomainError::NamePoolExhausted {
            needed,
            available: LOCATIONS.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = LOCATIONS.to_vec();
    names.shuffle(&mut rng);
    let mut names = names.into_iter().map(str::to_string);
    let target = names.next().expect("pool checked");
    let neighbors: Vec<String> = names.by_ref().take(NEIGHBOR_COUNT).collect();
    let outers: Vec<Vec<String>> = (0..NEIGHBOR_COUNT)
        .map(|_| names.by_ref().take(OUTERS_PER_NEIGHBOR).collect())
        .collect();

    let mut adjacency: IndexMap<String, Vec<String>> = IndexMap::new();
    adjacency.insert(target.clone(), Vec::new());
    for v in &neighbors {
        add_edge(&mut adjacency, &target, v);
    }
    for (v, outs) in neighbors.iter().zip(&outers) {
        for o in outs {
            add_edge(&mut adjacency, v, o);
        }
    }

    let others: Vec<&String> = adjacency.keys().filter(|v| **v != target).collect();
    let mut candidates = Vec::new();
    for (i, a) in others.iter().enumerate() {
        for b in &others[i + 1..] {
            if !adjacency[*a].contains(b) {
                candidates.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    let extra_edges: Vec<(String, String)> = index::sample(&mut rng, candidates.len(), EXTRA_EDGES)
        .into_iter()
        .map(|i| candidates[i].clone())
        .collect();
    for (a, b) in &extra_edges {
        add_edge(&mut adjacency, a, b);
    }

    let mut populated: Vec<usize> = index::sample(&mut rng, NEIGHBOR_COUNT, POPULATED_SECTIONS).into_vec();
    populated.sort_unstable();
    let mut groups: Vec<usize> = index::sample(&mut rng, GROUPS.len(), POPULATED_SECTIONS).into_vec();
    groups.sort_unstable();

    let mut units = Vec::with_capacity(n * POPULATED_SECTIONS);
    for (&section, &group) in populated.iter().zip(&groups) {
        for i in 0..n {
            let location = outers[section][rng.gen_range(0..OUTERS_PER_NEIGHBOR)].clone();
            units.push(Unit {
                id: format!("{}_{}", GROUPS[group], i),
                location,
            });
        }
    }

    let mut warnings = Vec::new();
    if n < k {
        warnings.push(format!(
            "{} units across {POPULATED_SECTIONS} groups cannot cover {REQUIRED_COVERED} neighbors with {k} units each",
            n * POPULATED_SECTIONS
        ));
    }
    Ok(UmInstance {
        n,
        k,
        target,
        neighbors,
        outers,
        adjacency,
        extra_edges,
        populated_sections: populated,
        units,
        warnings,
    })
}

impl UmInstance {
    pub fn request(&self) -> String {
        let mut out = String::from("Goal:\n");
        out.push_str(&format!(
            "    Surround the target location {{{}}} from at least three neighboring locations with your units. \
             A neighboring location is considered covered if there are at least {} units at that location.\n",
            self.target, self.k
        ));
        out.push_str("Units:\n");
        for unit in &self.units {
            out.push_str(&format!("{UNIT_KIND} ({}) at ({})\n", unit.id, unit.location));
        }
        out.push_str("\nLocation Network (location - neighbors):\n");
        for (node, adj) in &self.adjacency {
            let quoted: Vec<String> = adj.iter().map(|a| format!("'{a}'")).collect();
            out.push_str(&format!("{node} - [{}]\n", quoted.join(", ")));
        }
        out
    }

    pub fn is_adjacent(&self, a: &str, b: &str) -> bool {
        self.adjacency.get(a).is_some_and(|adj| adj.iter().any(|x| x == b))
    }

    fn may_move(&self, from: &str, to: &str, rules: &UmRules) -> bool {
        from == to || rules.allow_teleport || self.is_adjacent(from, to)
    }

    /// Units at each target neighbor, in neighbor order.
    pub fn coverage(&self, positions: &HashMap<&str, &str>) -> Vec<usize> {
        self.neighbors
            .iter()
            .map(|v| positions.values().filter(|loc| **loc == v.as_str()).count())
            .collect()
    }
}

/// A single move, as written in the answer list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub unit_id: String,
    pub location: String,
}

pub fn render_moves(moves: &[Move]) -> String {
    let list: Vec<Value> = moves
        .iter()
        .map(|m| json!({"unit_id": m.unit_id, "action_type": "move", "location": m.location}))
        .collect();
    serde_json::to_string_pretty(&list).expect("json values serialize")
}

fn parse_moves(answer_text: &str) -> Result<Vec<Move>, Verdict> {
    let value: Value = serde_json::from_str(answer_text.trim())
        .map_err(|e| Verdict::reject(format!("answer is not a JSON list: {e}"), None))?;
    let Value::Array(items) = value else {
        return Err(Verdict::reject("answer is not a JSON list", None));
    };
    let mut moves = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let step = Some(i + 1);
        let field = |name: &str| item.get(name).and_then(Value::as_str);
        let (Some(unit_id), Some(location)) = (field("unit_id"), field("location")) else {
            return Err(Verdict::reject("move needs string unit_id and location", step));
        };
        if !field("action_type").is_some_and(|a| a.trim().eq_ignore_ascii_case("move")) {
            return Err(Verdict::reject("unsupported action_type", step));
        }
        moves.push(Move {
            unit_id: unit_id.trim().to_string(),
            location: location.trim().to_string(),
        });
    }
    Ok(moves)
}

pub fn check_unit_movement(inst: &UmInstance, answer_text: &str) -> Verdict {
    check_unit_movement_with(inst, answer_text, &UmRules::default())
}

/// Applies the listed moves (unlisted units stay put) and accepts iff at
/// least three target neighbors end with `k` or more units.
pub fn check_unit_movement_with(inst: &UmInstance, answer_text: &str, rules: &UmRules) -> Verdict {
    let moves = match parse_moves(answer_text) {
        Ok(m) => m,
        Err(v) => return v,
    };
    let mut positions: HashMap<&str, &str> = inst
        .units
        .iter()
        .map(|u| (u.id.as_str(), u.location.as_str()))
        .collect();
    let mut moved = HashSet::new();
    for (i, mv) in moves.iter().enumerate() {
        let step = Some(i + 1);
        let Some(&from) = positions.get(mv.unit_id.as_str()) else {
            return Verdict::reject(format!("unknown unit `{}`", mv.unit_id), step);
        };
        let Some((to, _)) = inst.adjacency.get_key_value(mv.location.as_str()) else {
            return Verdict::reject(format!("unknown location `{}`", mv.location), step);
        };
        if !moved.insert(mv.unit_id.as_str()) {
            return Verdict::reject(format!("unit `{}` moved more than once", mv.unit_id), step);
        }
        if !inst.may_move(from, to, rules) {
            return Verdict::reject(format!("illegal move: `{from}` is not adjacent to `{to}`"), step);
        }
        let key = inst
            .units
            .iter()
            .find(|u| u.id == mv.unit_id)
            .map(|u| u.id.as_str())
            .expect("known unit");
        positions.insert(key, to.as_str());
    }
    let counts = inst.coverage(&positions);
    let covered = counts.iter().filter(|&&c| c >= inst.k).count();
    if covered >= REQUIRED_COVERED {
        Verdict::Accept
    } else {
        let detail: Vec<String> = inst
            .neighbors
            .iter()
            .zip(&counts)
            .map(|(v, c)| format!("{v}={c}"))
            .collect();
        Verdict::reject(format!("coverage insufficient: {}", detail.join(", ")), None)
    }
}

/// Edmonds-Karp on a dense capacity matrix; graphs here have a few dozen
/// nodes at most.
fn max_flow(cap: &mut [Vec<usize>], source: usize, sink: usize) -> usize {
    let n = cap.len();
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return flow;
        }
        let mut bottleneck = usize::MAX;
        let mut v = sink;
        while v != source {
            bottleneck = bottleneck.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = sink;
        while v != source {
            cap[prev[v]][v] -= bottleneck;
            cap[v][prev[v]] += bottleneck;
            v = prev[v];
        }
        flow += bottleneck;
    }
}

/// A covering move list if one exists: for each choice of three target
/// neighbors, route `k` units to each through single legal moves.
pub fn feasible_assignment(inst: &UmInstance, rules: &UmRules) -> Option<Vec<Move>> {
    let units = inst.units.len();
    for skip in (0..NEIGHBOR_COUNT).rev() {
        let chosen: Vec<usize> = (0..inst.neighbors.len()).filter(|&i| i != skip).collect();
        let source = 0;
        let sink = units + chosen.len() + 1;
        let mut cap = vec![vec![0usize; sink + 1]; sink + 1];
        for (u, unit) in inst.units.iter().enumerate() {
            cap[source][1 + u] = 1;
            for (c, &ni) in chosen.iter().enumerate() {
                if inst.may_move(&unit.location, &inst.neighbors[ni], rules) {
                    cap[1 + u][1 + units + c] = 1;
                }
            }
        }
        for c in 0..chosen.len() {
            cap[1 + units + c][sink] = inst.k;
        }
        let original = cap.clone();
        if max_flow(&mut cap, source, sink) < inst.k * chosen.len() {
            continue;
        }
        let mut moves = Vec::new();
        for (u, unit) in inst.units.iter().enumerate() {
            for (c, &ni) in chosen.iter().enumerate() {
                let used = original[1 + u][1 + units + c] == 1 && cap[1 + u][1 + units + c] == 0;
                if used && unit.location != inst.neighbors[ni] {
                    moves.push(Move {
                        unit_id: unit.id.clone(),
                        location: inst.neighbors[ni].clone(),
                    });
                }
            }
        }
        return Some(moves);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn positions(inst: &UmInstance) -> HashMap<&str, &str> {
        inst.units
            .iter()
            .map(|u| (u.id.as_str(), u.location.as_str()))
            .collect()
    }

    #[test]
    fn construction_counts() {
        for seed in 0..30 {
            let inst = gen_unit_movement(15, 9, seed).unwrap();
            assert_eq!(inst.adjacency[&inst.target].len(), 4);
            assert_eq!(inst.units.len(), 45);
            assert_eq!(inst.extra_edges.len(), 12);
            let edges: usize = inst.adjacency.values().map(Vec::len).sum::<usize>() / 2;
            assert_eq!(edges, 4 + 12 + 12);
            for (node, adj) in &inst.adjacency {
                let unique: HashSet<_> = adj.iter().collect();
                assert_eq!(unique.len(), adj.len(), "duplicate edge at {node}");
                assert!(!adj.contains(node));
            }
            assert!(inst.warnings.is_empty());
        }
    }

    #[test]
    fn request_layout() {
        let inst = gen_unit_movement(2, 1, 5).unwrap();
        let text = inst.request();
        assert!(text.starts_with(&format!(
            "Goal:\n    Surround the target location {{{}}} from",
            inst.target
        )));
        assert!(text.contains("if there are at least 1 units at that location.\nUnits:\nInfantry ("));
        assert!(text.contains("\n\nLocation Network (location - neighbors):\n"));
        assert!(text.ends_with("]\n"));
        let first = format!(
            "{} - ['{}', '{}', '{}', '{}']\n",
            inst.target, inst.neighbors[0], inst.neighbors[1], inst.neighbors[2], inst.neighbors[3]
        );
        assert!(text.contains(&first));
    }

    #[test]
    fn warning_when_groups_too_small() {
        let inst = gen_unit_movement(2, 5, 0).unwrap();
        assert_eq!(inst.warnings.len(), 1);
        assert!(feasible_assignment(&inst, &UmRules::default()).is_none());
    }

    #[test]
    fn minimal_cover() {
        let inst = gen_unit_movement(1, 1, 9).unwrap();
        assert_eq!(inst.units.len(), 3);
        let moves = feasible_assignment(&inst, &UmRules::default()).unwrap();
        assert_eq!(check_unit_movement(&inst, &render_moves(&moves)), Verdict::Accept);
    }

    #[test]
    fn rejections() {
        let inst = gen_unit_movement(3, 2, 1).unwrap();
        let unit = &inst.units[0];
        let bad_unit = r#"[{"unit_id": "Nobody_0", "action_type": "move", "location": "x"}]"#;
        assert!(check_unit_movement(&inst, bad_unit)
            .reason()
            .unwrap()
            .starts_with("unknown unit"));
        let bad_loc = format!(
            r#"[{{"unit_id": "{}", "action_type": "move", "location": "Atlantis"}}]"#,
            unit.id
        );
        assert!(check_unit_movement(&inst, &bad_loc)
            .reason()
            .unwrap()
            .starts_with("unknown location"));
        // units start on outer nodes, never next to the target
        let far = &inst.target;
        let illegal = format!(
            r#"[{{"unit_id": "{}", "action_type": "move", "location": "{far}"}}]"#,
            unit.id
        );
        assert!(check_unit_movement(&inst, &illegal)
            .reason()
            .unwrap()
            .starts_with("illegal move"));
        assert_eq!(
            check_unit_movement_with(&inst, &illegal, &UmRules { allow_teleport: true })
                .reason()
                .map(|r| r.starts_with("coverage")),
            Some(true)
        );
        let stay = format!(
            r#"[{{"unit_id": "{}", "action_type": "move", "location": "{}"}}]"#,
            unit.id, unit.location
        );
        let twice = format!("[{0}, {0}]", &stay[1..stay.len() - 1]);
        assert!(check_unit_movement(&inst, &twice)
            .reason()
            .unwrap()
            .contains("more than once"));
        assert!(check_unit_movement(&inst, "not json")
            .reason()
            .unwrap()
            .starts_with("answer is not a JSON list"));
        assert!(check_unit_movement(&inst, "{}")
            .reason()
            .unwrap()
            .starts_with("answer is not a JSON list"));
        // staying in place is a legal no-op
        assert!(check_unit_movement(&inst, &stay)
            .reason()
            .unwrap()
            .starts_with("coverage insufficient"));
    }

    #[test]
    fn pre_arranged_cover_accepts_empty_list() {
        let mut inst = gen_unit_movement(2, 2, 4).unwrap();
        for (i, unit) in inst.units.iter_mut().enumerate() {
            unit.location = inst.neighbors[i / 2].clone();
        }
        assert_eq!(check_unit_movement(&inst, "[]"), Verdict::Accept);
        assert_eq!(check_unit_movement(&inst, "\n  []  \n"), Verdict::Accept);
        let counts = inst.coverage(&positions(&inst));
        assert_eq!(counts.iter().filter(|&&c| c >= 2).count(), 3);
    }

    #[test]
    fn oracle_moves_accepted_in_any_order() {
        let inst = gen_unit_movement(10, 6, 3).unwrap();
        let mut moves = feasible_assignment(&inst, &UmRules::default()).unwrap();
        assert_eq!(check_unit_movement(&inst, &render_moves(&moves)), Verdict::Accept);
        moves.reverse();
        assert_eq!(check_unit_movement(&inst, &render_moves(&moves)), Verdict::Accept);
    }
}
