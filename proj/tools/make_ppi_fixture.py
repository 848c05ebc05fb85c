#!/usr/bin/env python3
"""Write the synthetic expression matrix and interaction network used by the CLI tests.

The matrix holds a rank-one signal on 50 of 120 samples. It is carried by a densely connected
60-gene module and by 90 stronger "scattered" genes that share no edges with each other, on top of
unit Gaussian noise. Background edges join random gene pairs but never two scattered genes.
"""

import argparse
import itertools
from pathlib import Path

import numpy as np

GENES = 600
SAMPLES = 120
ACTIVE_SAMPLES = 50
MODULE = 60
SCATTERED = 90
MODULE_EDGES = 420
BACKGROUND_EDGES = 1200
SCATTERED_DEGREE = 2

SAMPLE_LOADING = 1.5
MODULE_LOADING = 1.0
SCATTERED_LOADING = 1.3


def build(seed):
    rng = np.random.default_rng(seed)
    genes = [f"G{i + 1:04d}" for i in range(GENES)]
    samples = [f"S{j + 1:03d}" for j in range(SAMPLES)]

    order = rng.permutation(GENES)
    module = np.sort(order[:MODULE])
    scattered = np.sort(order[MODULE:MODULE + SCATTERED])
    rest = np.sort(order[MODULE + SCATTERED:])
    active = np.sort(rng.choice(SAMPLES, ACTIVE_SAMPLES, replace=False))

    u = np.zeros(GENES)
    u[module] = MODULE_LOADING * rng.choice([-1.0, 1.0], MODULE)
    u[scattered] = SCATTERED_LOADING * rng.choice([-1.0, 1.0], SCATTERED)
    v = np.zeros(SAMPLES)
    v[active] = SAMPLE_LOADING * rng.choice([-1.0, 1.0], ACTIVE_SAMPLES)
    X = np.outer(u, v) + rng.standard_normal((GENES, SAMPLES))

    edges = set()
    pairs = list(itertools.combinations(module.tolist(), 2))
    for idx in rng.choice(len(pairs), MODULE_EDGES, replace=False):
        edges.add(pairs[idx])
    for s in scattered.tolist():
        for r in rng.choice(rest, SCATTERED_DEGREE, replace=False).tolist():
            edges.add((min(s, r), max(s, r)))
    scattered_set = set(scattered.tolist())
    module_set = set(module.tolist())
    target = len(edges) + BACKGROUND_EDGES
    while len(edges) < target:
        a, b = sorted(rng.choice(GENES, 2, replace=False).tolist())
        if a in scattered_set and b in scattered_set:
            continue
        if a in module_set and b in module_set:
            continue
        edges.add((a, b))

    return genes, samples, X, sorted(edges), module, scattered, active


def write(out, seed):
    genes, samples, X, edges, module, scattered, active = build(seed)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ppi_expression.tsv", "w") as f:
        f.write("gene\t" + "\t".join(samples) + "\n")
        for g, row in zip(genes, X):
            f.write(g + "\t" + "\t".join(f"{x:.6f}" for x in row) + "\n")
    with open(out / "ppi_edges.tsv", "w") as f:
        f.write("# gene_a\tgene_b\n")
        for a, b in edges:
            f.write(f"{genes[a]}\t{genes[b]}\n")
    with open(out / "ppi_module.txt", "w") as f:
        f.write("\n".join(genes[i] for i in module) + "\n")
    with open(out / "ppi_scattered.txt", "w") as f:
        f.write("\n".join(genes[i] for i in scattered) + "\n")
    with open(out / "ppi_samples.txt", "w") as f:
        f.write("\n".join(samples[j] for j in active) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    parser.add_argument("--seed", type=int, default=20240607)
    args = parser.parse_args()
    write(args.out, args.seed)


if __name__ == "__main__":
    main()
