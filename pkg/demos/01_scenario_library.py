# Browse the built-in scenario templates and bind one into a runnable config.
from scenariotest.library import get_template, instantiate, list_templates, validate_bindings

for tid, category in list_templates():
    print(f"{tid:24s} {category.value}")

t = get_template("ped_crossing")
for p in t.parameters:
    print(p.name, p.lower, p.upper, p.unit)

# a bad binding set lists every problem at once
print(validate_bindings(t, {"start_distance": 500.0, "trigger_distance": 10.0}))

cfg = instantiate(t, {"start_distance": 40.0, "trigger_distance": 15.0,
                      "pedestrian_velocity": 1.5, "cloudiness": 20.0}, seed=7)
print(cfg.to_json())
