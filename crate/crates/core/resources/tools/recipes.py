"""Lookups over the recipe database shipped next to this module."""
import os

_DB_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "recipe_db.tsv")


def _load():
    dishes = {}
    with open(_DB_PATH, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            dish, ingredients = line.split("\t", 1)
            dishes[dish.strip()] = [i.strip() for i in ingredients.split("|") if i.strip()]
    return dishes


_DISHES = _load()


def get_ingredient_from_dish(dish):
    """Return the ingredients of `dish`, or an empty list if it is unknown."""
    return list(_DISHES.get(dish.strip(), []))


def get_dish_from_ingredient(ingredient):
    """Return every dish that uses `ingredient`, or an empty list."""
    ingredient = ingredient.strip()
    return [dish for dish, ingredients in _DISHES.items() if ingredient in ingredients]
