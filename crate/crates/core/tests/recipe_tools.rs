use std::collections::BTreeMap;

use tasknet::domains::recipe::{bundled_db, manifest, tool_get_dishes, tool_get_ingredients};
use tasknet::domains::{CellParams, Domain, Instance};
use tasknet::environment::{Action, EnvConfig, Environment};
use tasknet::resources::{OUTPUT, SOLVER, TOOLS_SPEC};

fn recipe_env() -> Environment {
    let Instance::Recipe(inst) = (CellParams::Recipe { distractors: 3 }).generate(0).unwrap() else {
        unreachable!()
    };
    let mut config = EnvConfig::default();
    config.solver.timeout_secs = 30.0;
    Environment::init(
        &manifest(Domain::Recipe.problem_spec(), &inst.request(), bundled_db()),
        config,
    )
    .unwrap()
}

#[test]
fn python_tools_agree_with_rust_lookups() {
    let db = bundled_db();
    let mut env = recipe_env();
    let script = "\
import json
from tools.recipes import get_ingredient_from_dish, get_dish_from_ingredient
import tools.recipes as r
dishes = {d: get_ingredient_from_dish(d) for d in r._DISHES}
ingredients = sorted({i for v in dishes.values() for i in v})
print(json.dumps({'dishes': dishes, 'by_ingredient': {i: get_dish_from_ingredient(i) for i in ingredients},
                  'unknown': [get_ingredient_from_dish('Moon Pie Surprise'), get_dish_from_ingredient('Unobtainium')],
                  'padded': get_ingredient_from_dish('  Chicken and Tomato Stir Fry  ')}))
";
    env.apply_action(&Action::write(SOLVER, script)).unwrap();
    let outcome = env.last_solver().unwrap();
    assert_eq!(outcome.exit_status, 0, "{}", outcome.stderr);
    let value: serde_json::Value = serde_json::from_str(env.content(OUTPUT).unwrap()).unwrap();

    let python: BTreeMap<String, Vec<String>> = serde_json::from_value(value["dishes"].clone()).unwrap();
    assert_eq!(python.len(), db.len());
    for (dish, ingredients) in db.dishes() {
        assert_eq!(python[dish], ingredients, "{dish}");
        assert_eq!(tool_get_ingredients(db, dish), ingredients);
    }
    let by_ingredient: BTreeMap<String, Vec<String>> = serde_json::from_value(value["by_ingredient"].clone()).unwrap();
    assert_eq!(by_ingredient.len(), db.ingredients().len());
    for (ingredient, dishes) in &by_ingredient {
        assert_eq!(&tool_get_dishes(db, ingredient), dishes, "{ingredient}");
    }
    assert_eq!(value["unknown"], serde_json::json!([[], []]));
    assert_eq!(
        value["padded"],
        serde_json::json!(["Chicken Breast", "Tomatoes", "Soy Sauce", "Sesame Oil"])
    );
}

#[test]
fn tools_spec_is_visible_and_tool_files_are_not() {
    let mut env = recipe_env();
    assert!(env.content(TOOLS_SPEC).unwrap().contains("from tools.recipes import"));
    let trace = env.apply_action(&Action::read("tools/recipes.py")).unwrap();
    assert_eq!(trace, tasknet::environment::ACCESS_DENIED);
    assert!(env.root().join("tools/recipe_db.tsv").exists());
}
