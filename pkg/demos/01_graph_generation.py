"""Build the browsing substrate and check what the walkers rely on.

Grows a scale-free graph by rank-based attachment, verifies the structural
invariants (symmetry, no dangling nodes, connectedness), fits the degree
exponent, and round-trips the graph through the edge-list format.
"""

import tempfile
from pathlib import Path

import numpy as np

from webnav import fit_power_law, generate_scale_free, load_edge_list, write_edge_list

N, M, GAMMA, SEED = 30_000, 3, 2.1, 7

print(f"growing a graph: n={N}, m={M}, target degree exponent {GAMMA}")
graph = generate_scale_free(N, M, GAMMA, seed=SEED)
degrees = graph.degrees()
print(f"  {graph.n} nodes, {graph.n_edges} directed entries")
print(f"  degree: min={degrees.min()}, mean={degrees.mean():.2f}, max={degrees.max()}")

print("invariants:")
print(f"  in-degree == out-degree everywhere: {np.array_equal(graph.in_degrees(), degrees)}")
print(f"  no dangling nodes (min out-degree >= 1): {degrees.min() >= 1}")

fit = fit_power_law(degrees.tolist(), xmin=20)
print(f"degree tail MLE: alpha = {fit.alpha:.3f} +- {fit.stderr:.3f} "
      f"(xmin={fit.xmin}, {fit.n_tail} tail nodes); target was {GAMMA}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "edges.txt"
    write_edge_list(graph, path)
    reloaded = load_edge_list(path)
    again = Path(tmp) / "edges2.txt"
    write_edge_list(reloaded, again)
    identical = path.read_bytes() == again.read_bytes()
    print(f"edge-list round trip (write -> load -> write) byte-identical: {identical}")
