"""Regenerate ``reference_values.json`` from the independent oracle.

Run from the repository root::

    python tests/make_reference.py

The tests only read the frozen file; rerun this after changing the corpus.
Needs cvxpy for the oracle's warm start.
"""
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))

import oracle  # noqa: E402
from pidmaxent.distributions import gate, random_simplex  # noqa: E402

OUT = pathlib.Path(__file__).with_name("reference_values.json")
GATES = ("xor-duplicate", "xor-loses", "xor-multicoal", "and-duplicate")
N_RANDOM = 20
KEYS = ("CI", "UIX", "UIY", "UIZ", "UIXY", "UIXZ", "UIYZ", "SI")
MINIMA = {"I": "full", "12": (1, 2), "13": (1, 3), "23": (2, 3)}


def _jsonable(sym):
    return [_jsonable(s) for s in sym] if isinstance(sym, tuple) else sym


def _entry(name, pmf):
    p = oracle.pid(pmf)
    atoms, fine_gap = oracle.fine_atoms(pmf)
    gaps = list(p["gaps"].values()) + [fine_gap]
    return {
        "name": name,
        "pmf": [[_jsonable(k), v] for k, v in pmf.items()],
        "pid": {k: p[k] for k in KEYS},
        "minima": {k: p["minima"][v] for k, v in MINIMA.items()},
        "atoms": atoms,
        "max_gap_nats": max(gaps),
    }


def _bivariate():
    cases = {
        "xor": {(x ^ y, x, y): 0.25 for x in (0, 1) for y in (0, 1)},
        "copy-a": {(x, x, y): 0.25 for x in (0, 1) for y in (0, 1)},
        "identical": {(x, x, x): 0.5 for x in (0, 1)},
        "and": {(x & y, x, y): 0.25 for x in (0, 1) for y in (0, 1)},
    }
    return {k: {"pmf": [[list(t), p] for t, p in v.items()], **oracle.broja(v)}
            for k, v in cases.items()}


def main():
    out = {"gates": [], "random": [], "bivariate": _bivariate()}
    for g in GATES:
        out["gates"].append(_entry(g, dict(gate(g).items())))
        print(g, "max gap", out["gates"][-1]["max_gap_nats"], flush=True)
    for seed in range(N_RANDOM):
        pmf = dict(random_simplex((2, 2, 2, 2), seed=seed).items())
        out["random"].append(_entry(f"random-2222-seed{seed}", pmf))
        print(seed, "max gap", out["random"][-1]["max_gap_nats"], flush=True)
    worst = max(e["max_gap_nats"] for e in out["gates"] + out["random"])
    if worst > 1e-8:
        raise SystemExit(f"oracle gap {worst:.2e} nats exceeds 1e-8; not writing")
    OUT.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
