#!/usr/bin/env python3
"""Fill in the convex-solver reference fields of the committed fixtures.

Reads every instance JSON under crates/core/fixtures/, solves

    minimize ||c||_1  subject to  ||F c - y||_2 <= sigma

(with an equality constraint F c = y when sigma == 0) using an independent
interior-point solver, and writes `reference_l1_norm` and
`reference_solution` back into each file. Run from the repository root:

    python3 tools/solve_fixtures.py

The fixtures themselves come from `cargo run -p sparsetrig --example
gen_fixtures`; this script only needs to rerun when those change.
"""

import glob
import json
import sys

import cvxpy as cp
import numpy as np


def solve_fixture(path: str) -> None:
    with open(path) as f:
        obj = json.load(f)

    ks = np.array(obj["frequencies"], dtype=float)
    pts = np.array([p[0] for p in obj["points"]])
    F = np.exp(1j * np.outer(pts, ks))  # N x D
    y = np.array([complex(re, im) for re, im in obj["y"]])
    sigma = obj["sigma"]

    c = cp.Variable(len(ks), complex=True)
    if sigma == 0.0:
        constraints = [F @ c == y]
    else:
        constraints = [cp.norm(F @ c - y, 2) <= sigma]
    problem = cp.Problem(cp.Minimize(cp.norm1(c)), constraints)
    problem.solve(solver=cp.CLARABEL)

    if problem.status != cp.OPTIMAL:
        raise RuntimeError(f"{path}: solver returned status {problem.status}")

    sol = np.asarray(c.value)
    residual = np.linalg.norm(F @ sol - y)
    slack = residual - sigma
    print(
        f"{path}: l1={problem.value:.12f} residual={residual:.3e} "
        f"(constraint slack {slack:+.3e})"
    )

    obj["reference_l1_norm"] = float(np.sum(np.abs(sol)))
    obj["reference_solution"] = [[float(v.real), float(v.imag)] for v in sol]
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def main() -> int:
    paths = sorted(glob.glob("crates/core/fixtures/*.json"))
    if not paths:
        print("no fixtures found; run the gen_fixtures example first", file=sys.stderr)
        return 1
    for path in paths:
        solve_fixture(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
