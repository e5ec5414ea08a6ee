"""Regenerate the karate club fixture files under data/karate/.

Dev-only script; requires networkx (not a package dependency). The committed
files are the canonical Zachary karate club network:

  edges.txt             78 undirected edges over 34 nodes
  features.txt          34 rows, each the node's binary adjacency row
  labels_split.txt      2-class faction split (instructor node 0 / administrator node 33)
  labels_modularity.txt 4-class maximum-modularity partition (unweighted Q ~= 0.41979)

The modularity partition is the known exact optimum; we re-derive it with
Louvain restarts and assert the expected Q before writing anything.
"""

import os

import networkx as nx
from networkx.algorithms.community import louvain_communities, modularity

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "karate")

EXPECTED_Q = 0.41978961209730437


def main() -> None:
    g = nx.karate_club_graph()
    n = g.number_of_nodes()
    assert n == 34 and g.number_of_edges() == 78

    best_q, best_part = -1.0, None
    for seed in range(300):
        part = louvain_communities(g, seed=seed, weight=None)
        q = modularity(g, part, weight=None)
        if q > best_q:
            best_q, best_part = q, part
    assert abs(best_q - EXPECTED_Q) < 1e-12, f"expected Q={EXPECTED_Q}, got {best_q}"
    assert len(best_part) == 4

    os.makedirs(OUT, exist_ok=True)

    with open(os.path.join(OUT, "edges.txt"), "w", encoding="utf-8") as f:
        f.write("# Zachary karate club, 34 nodes, 78 undirected edges\n")
        for u, v in sorted((min(e), max(e)) for e in g.edges()):
            f.write(f"{u} {v}\n")

    with open(os.path.join(OUT, "features.txt"), "w", encoding="utf-8") as f:
        for u in range(n):
            row = ["1" if g.has_edge(u, v) else "0" for v in range(n)]
            f.write(" ".join(row) + "\n")

    with open(os.path.join(OUT, "labels_split.txt"), "w", encoding="utf-8") as f:
        for u in range(n):
            club = g.nodes[u]["club"]
            f.write(f"{u} {0 if club == 'Mr. Hi' else 1}\n")

    communities = sorted((sorted(c) for c in best_part), key=lambda c: c[0])
    label_of = {}
    for cid, members in enumerate(communities):
        for u in members:
            label_of[u] = cid
    with open(os.path.join(OUT, "labels_modularity.txt"), "w", encoding="utf-8") as f:
        for u in range(n):
            f.write(f"{u} {label_of[u]}\n")

    print(f"wrote fixtures to {os.path.abspath(OUT)} (Q={best_q:.6f})")


if __name__ == "__main__":
    main()
