"""
Running an experiment from a config
===================================

The harness turns a JSON config into a per-vector results table, quartile
summaries and boxplots. This is what ``boundlab run config.json`` does.
"""

import json
import tempfile
from pathlib import Path

from boundlab.harness import load_config, preset, run_experiment, write_outputs

# start from a bundled preset and shrink it
cfg_dict = preset("tang-10x100")
cfg_dict.update(sparsities=[0.01], num_vectors=20)

out = Path(tempfile.mkdtemp())
path = out / "tang.json"
path.write_text(json.dumps(cfg_dict, indent=2))

cfg = load_config(path)
table = run_experiment(cfg)
for p in write_outputs(table, cfg, out):
    print(p.name)

print((out / "summary.csv").read_text())
