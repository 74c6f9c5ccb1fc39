//! Picking a dish from a list of ingredients, with lookup tools backed by a
//! bundled dish database.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DomainError, Verdict};
use crate::environment::Manifest;
use crate::resources;

pub const DEFAULT_DISTRACTORS: usize = 3;
pub const REQUEST_HEADER: &str = "Hello, I'd like to request a recipe for the following ingredients: ";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecipeDb {
    dishes: IndexMap<String, Vec<String>>,
}

impl RecipeDb {
    /// Parses `dish<TAB>ingredient|ingredient|...` lines; blank lines are
    /// ignored and names are trimmed.
    pub fn parse(text: &str) -> Result<Self, DomainError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .has_headers(false)
            .quoting(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut dishes = IndexMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| DomainError::MalformedDatabase {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let bad = |message: &str| DomainError::MalformedDatabase {
                line,
                message: message.to_string(),
            };
            if record.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if record.len() != 2 {
                return Err(bad("expected dish and ingredients separated by one tab"));
            }
            let dish = record[0].trim();
            let ingredients: Vec<String> = record[1]
                .split('|')
                .map(str::trim)
                .filter(|i| !i.is_empty())
                .map(str::to_string)
                .collect();
            if dish.is_empty() || ingredients.is_empty() {
                return Err(bad("dish needs a name and at least one ingredient"));
            }
            if dishes.insert(dish.to_string(), ingredients).is_some() {
                return Err(bad("duplicate dish"));
            }
        }
        if dishes.is_empty() {
            return Err(DomainError::EmptyDatabase);
        }
        Ok(Self { dishes })
    }

    pub fn len(&self) -> usize {
        self.dishes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dishes.is_empty()
    }

    pub fn dishes(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.dishes.iter().map(|(d, i)| (d.as_str(), i.as_slice()))
    }

    /// Every distinct ingredient, in first-seen order.
    pub fn ingredients(&self) -> Vec<&str> {
        let mut seen = IndexMap::new();
        for list in self.dishes.values() {
            for i in list {
                seen.insert(i.as_str(), ());
            }
        }
        seen.into_keys().collect()
    }

    /// Database text in the bundled format.
    pub fn to_tsv(&self) -> String {
        self.dishes
            .iter()
            .map(|(d, i)| format!("{d}\t{}\n", i.join("|")))
            .collect()
    }

    fn find_dish(&self, name: &str) -> Option<(&str, &[String])> {
        let name = name.trim();
        self.dishes
            .iter()
            .find(|(d, _)| d.eq_ignore_ascii_case(name))
            .map(|(d, i)| (d.as_str(), i.as_slice()))
    }
}

/// The database shipped with the crate, parsed once.
pub fn bundled_db() -> &'static RecipeDb {
    static DB: OnceLock<RecipeDb> = OnceLock::new();
    DB.get_or_init(|| RecipeDb::parse(resources::RECIPE_DB).expect("bundled recipe database is well formed"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgInstance {
    pub ingredients: Vec<String>,
    /// A dish known to be makeable from `ingredients`.
    pub witness: String,
}

impl RgInstance {
    pub fn request(&self) -> String {
        format!("{REQUEST_HEADER}\n{}", self.ingredients.join("\n"))
    }
}

/// Picks a dish, then pads its ingredient list with `distractors` others
/// and shuffles the result.
pub fn gen_recipe(db: &RecipeDb, distractors: usize, seed: u64) -> Result<RgInstance, DomainError> {
    if db.is_empty() {
        return Err(DomainError::EmptyDatabase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (witness, own) = db.dishes().nth(rng.gen_range(0..db.len())).expect("index in range");
    let pool: Vec<&str> = db
        .ingredients()
        .into_iter()
        .filter(|i| !own.iter().any(|o| o == i))
        .collect();
    if distractors > pool.len() {
        return Err(DomainError::InsufficientDistractors {
            needed: distractors,
            available: pool.len(),
        });
    }
    let mut ingredients: Vec<String> = own.to_vec();
    ingredients.extend(
        index::sample(&mut rng, pool.len(), distractors)
            .into_iter()
            .map(|i| pool[i].to_string()),
    );
    ingredients.shuffle(&mut rng);
    Ok(RgInstance {
        ingredients,
        witness: witness.to_string(),
    })
}

/// Accepts any database dish whose ingredients are all in the request.
pub fn check_recipe(db: &RecipeDb, inst: &RgInstance, answer_text: &str) -> Verdict {
    let answer = answer_text.trim();
    let Some((dish, needed)) = db.find_dish(answer) else {
        return Verdict::reject(format!("unknown dish `{answer}`"), None);
    };
    let have: BTreeSet<&str> = inst.ingredients.iter().map(|i| i.trim()).collect();
    let missing: Vec<&str> = needed
        .iter()
        .map(String::as_str)
        .filter(|i| !have.contains(i))
        .collect();
    if missing.is_empty() {
        Verdict::Accept
    } else {
        Verdict::reject(
            format!("missing ingredients for `{dish}`: {}", missing.join(", ")),
            None,
        )
    }
}

pub fn tool_get_ingredients(db: &RecipeDb, dish: &str) -> Vec<String> {
    db.dishes.get(dish.trim()).cloned().unwrap_or_default()
}

pub fn tool_get_dishes(db: &RecipeDb, ingredient: &str) -> Vec<String> {
    let ingredient = ingredient.trim();
    db.dishes
        .iter()
        .filter(|(_, list)| list.iter().any(|i| i == ingredient))
        .map(|(d, _)| d.clone())
        .collect()
}

/// Workspace with solver, tools specification, and the tool package on disk.
pub fn manifest(spec: &str, request: &str, db: &RecipeDb) -> Manifest {
    Manifest::standard(spec, request, Some(resources::RECIPE_TOOLS_SPEC), true)
        .with_support_file(resources::RECIPE_TOOLS_INIT, "")
        .with_support_file(resources::RECIPE_TOOLS_MODULE, resources::RECIPE_TOOLS_PY)
        .with_support_file(resources::RECIPE_TOOLS_DB, db.to_tsv())
}
