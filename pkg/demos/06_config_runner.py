"""Running declarative scenarios, the way the ``collapse-lab`` command does.

Every bundled JSON config under ``collapse_lab/examples`` can be run from the
shell with ``collapse-lab run <path>``.  The same thing from Python:
"""

import json
from importlib import resources

from collapse_lab.config import load_config, parse_config
from collapse_lab.runner import dumps, run

for path in sorted(resources.files("collapse_lab").joinpath("examples").iterdir()):
    if not path.name.endswith(".json"):
        continue
    report = run(load_config(path))
    print(f"{path.name:32s} kind={report.scenario['kind']:16s} {report.wall_time:6.2f} s")

# Configs can also be built in memory.  Complex numbers are [re, im] pairs.
cfg = parse_config({
    "kind": "two-measurement",
    "state": {"p": 0.5, "gamma": [0, 1]},
    "observables": {"y": {"theta": 1.5707963267948966, "phi": 1.5707963267948966}},
    "shots": 20000,
    "seed": 11,
})
report = run(cfg)
print("\ndistributions table:", report.tables["distributions"].columns)
for row in report.tables["distributions"].rows:
    print("  ", [round(v, 6) if isinstance(v, float) else v for v in row])
print("\nsummary:", json.dumps(report.summary, indent=1))
assert dumps(report, include_wall_time=False) == dumps(run(cfg), include_wall_time=False)
print("a second run reproduces the report exactly")
