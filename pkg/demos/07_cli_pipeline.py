"""Driving the command line from Python.

Each subcommand writes its outputs plus ``manifest.json`` with sha256
hashes; ``report`` runs the whole pipeline from a JSON config.
"""
# %%
import json
import tempfile
from pathlib import Path

from son2lab.cli import main

out = Path(tempfile.mkdtemp())
main(["enumerate", "--generators", "bundled:schottky_n2", "--radius", "8", "--out", str(out / "e")])
main(["project", "--ball", str(out / "e" / "ball.json"), "--out", str(out / "p")])
main(["growth", "--cloud", str(out / "p" / "cloud.csv"), "--out", str(out / "g")])
main(["bend", "--generators", "bundled:amalgam_n3", "--q", "11/10", "--out", str(out / "b")])

cfg = out / "sweep.json"
cfg.write_text(json.dumps({"generators": "bundled:amalgam_n3", "radius": 5,
                           "q": ["1", "6/5"], "zariski": {"enabled": True}}))
main(["report", "--config", str(cfg), "--out", str(out / "r")])
print(json.loads((out / "r" / "manifest.json").read_text())["outputs"][:3])
