#!/usr/bin/env python3
"""Convert the MATPOWER/PYPOWER IEEE 118-bus case into the gridstress JSON format.

Usage:
    transcribe_ieee118.py PATH/TO/case118.py OUT_DIR

Writes ieee118.json (uniform inertia) and ieee118_hetero.json (inertias drawn
uniformly from [0.2, 1.8] times the mean, fixed seed).
"""

import argparse
import json
import math
import runpy
from pathlib import Path

import numpy as np

BASE_MVA = 100.0
FREQUENCY = 50.0
H_UNIFORM = 10.0        # seconds
H_HETERO_MEAN = 100.0   # seconds, gives <m> = 200 / (2 pi f)
GAMMA = 0.5             # d / m in 1/s
SEED = 118

PV, REF = 2, 3


def load(path):
    ppc = runpy.run_path(str(path))["case118"]()
    return ppc["bus"], ppc["gen"], ppc["branch"]


def transcribe(bus, gen, branch):
    ids = [int(b[0]) for b in bus]
    kinds = {int(b[0]): ("active" if int(b[1]) in (PV, REF) else "passive") for b in bus}
    p = {i: 0.0 for i in ids}
    for b in bus:
        p[int(b[0])] -= b[2] / BASE_MVA
    for g in gen:
        if g[7] > 0:
            p[int(g[0])] += g[1] / BASE_MVA
    active = [i for i in ids if kinds[i] == "active"]
    residual = sum(p.values())
    for i in active:
        p[i] -= residual / len(active)

    lines, transformers = {}, {}
    for br in branch:
        if br[10] <= 0:
            continue
        a, b = int(br[0]), int(br[1])
        key = (min(a, b), max(a, b))
        target = transformers if br[8] != 0 else lines
        target[key] = target.get(key, 0.0) + 1.0 / br[3]
    return ids, kinds, p, lines, transformers, residual


def case_json(name, ids, kinds, p, inertia, lines, transformers):
    buses = []
    for i in ids:
        m = inertia[i] if kinds[i] == "active" else 0.0
        buses.append({"id": i, "kind": kinds[i], "p": p[i], "m": m, "d": GAMMA * m})
    branch = lambda d: [{"from": a, "to": b, "b": v} for (a, b), v in sorted(d.items())]
    return {
        "name": name,
        "base_frequency_hz": FREQUENCY,
        "buses": buses,
        "lines": branch(lines),
        "transformers": branch(transformers),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", type=Path)
    ap.add_argument("out_dir", type=Path)
    args = ap.parse_args()

    ids, kinds, p, lines, transformers, residual = transcribe(*load(args.source))
    omega0 = 2.0 * math.pi * FREQUENCY
    uniform = {i: 2.0 * H_UNIFORM / omega0 for i in ids}
    rng = np.random.default_rng(SEED)
    mean = 2.0 * H_HETERO_MEAN / omega0
    hetero = {i: mean * rng.uniform(0.2, 1.8) for i in ids if kinds[i] == "active"}

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for fname, title, inertia in [
        ("ieee118.json", "IEEE 118-bus, uniform inertia H = 10 s", uniform),
        ("ieee118_hetero.json", "IEEE 118-bus, heterogeneous inertia", hetero),
    ]:
        doc = case_json(title, ids, kinds, p, inertia, lines, transformers)
        (args.out_dir / fname).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{len(ids)} buses, {sum(k == 'active' for k in kinds.values())} active, "
          f"{len(lines)} lines, {len(transformers)} transformers, "
          f"balance residual {residual:.6f} p.u. spread over active buses")


if __name__ == "__main__":
    main()
