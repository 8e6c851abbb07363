#!/usr/bin/env python3
"""Generate a synthetic water distribution network in EPANET INP format.

Towns are jittered street lattices (4-neighbour pipes, some removed but kept
connected); towns are joined by transmission mains with a junction every
~500 m; reservoirs feed the larger towns through pumps. Coordinates are meters.
"""
import argparse
import math

import numpy as np


def inside(x, y, t):
    cx, cy, radius, _ = t
    dx, dy = x - cx, y - cy
    r = radius * (0.8 + 0.2 * math.sin(3 * math.atan2(dy, dx) + cx))
    return math.hypot(dx, dy) <= r


def town(rng, cx, cy, radius, spacing, drop, claimed=()):
    pts = {}
    n = int(radius / spacing) + 1
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            x, y = i * spacing, j * spacing
            # irregular boundary; earlier districts keep their ground
            if inside(cx + x, cy + y, (cx, cy, radius, spacing)) and not any(
                    inside(cx + x, cy + y, t) for t in claimed):
                pts[(i, j)] = (cx + x + rng.normal(0, spacing * 0.15),
                               cy + y + rng.normal(0, spacing * 0.15))
    keys = sorted(pts)
    index = {k: t for t, k in enumerate(keys)}
    edges = []
    for (i, j) in keys:
        for (di, dj) in ((1, 0), (0, 1)):
            if (i + di, j + dj) in pts:
                edges.append((index[(i, j)], index[(i + di, j + dj)]))
    # spanning tree by BFS keeps the town connected, other edges may drop
    adj = {t: [] for t in range(len(keys))}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    tree = set()
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    tree.add((min(u, v), max(u, v)))
                    nxt.append(v)
        frontier = nxt
    kept = [e for e in edges if (min(e), max(e)) in tree or rng.random() > drop]
    return [pts[k] for k in keys], kept


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    # (center x, center y, radius, street spacing): a dense core, looser
    # districts around it and two outlying villages
    towns = [
        (6000, 5000, 1600, 150),
        (8900, 6300, 2100, 250),
        (3500, 7000, 2000, 290),
        (7300, 2100, 1900, 300),
        (11500, 3400, 1700, 340),
        (1500, 2600, 600, 200),
        (12600, 9300, 500, 180),
    ]
    nodes = []  # (x, y)
    pipes = []  # (a, b)
    town_nodes = []
    for t, (cx, cy, r, s) in enumerate(towns):
        pts, edges = town(rng, cx, cy, r, s, drop=0.35, claimed=towns[:t])
        base = len(nodes)
        nodes.extend(pts)
        pipes.extend((base + a, base + b) for a, b in edges)
        town_nodes.append(list(range(base, base + len(pts))))

    # mains: minimum spanning tree over town centers
    centers = [(t[0], t[1]) for t in towns]
    in_tree = {0}
    mains = []
    while len(in_tree) < len(towns):
        best = None
        for a in in_tree:
            for b in range(len(towns)):
                if b in in_tree:
                    continue
                d = math.dist(centers[a], centers[b])
                if best is None or d < best[0]:
                    best = (d, a, b)
        mains.append(best[1:])
        in_tree.add(best[2])
    for a, b in mains:
        # closest pair of nodes between the two towns
        pa = min(town_nodes[a], key=lambda i: math.dist(nodes[i], centers[b]))
        pb = min(town_nodes[b], key=lambda i: math.dist(nodes[i], centers[a]))
        (x0, y0), (x1, y1) = nodes[pa], nodes[pb]
        steps = max(1, int(math.dist(nodes[pa], nodes[pb]) / 500))
        prev = pa
        for s in range(1, steps):
            t = s / steps
            nodes.append((x0 + t * (x1 - x0) + rng.normal(0, 60), y0 + t * (y1 - y0) + rng.normal(0, 60)))
            pipes.append((prev, len(nodes) - 1))
            prev = len(nodes) - 1
        pipes.append((prev, pb))

    n_junctions = len(nodes)
    # reservoirs on the outskirts of the three largest towns
    reservoirs = []
    pumps = []
    for t, (dx, dy) in zip(range(3), ((-900, -1500), (900, 700), (700, -600))):
        cx, cy, r, _ = towns[t]
        pos = (cx + dx * r / 1500, cy + dy * r / 1500)
        target = min(town_nodes[t], key=lambda i: math.dist(nodes[i], pos))
        reservoirs.append(pos)
        pumps.append((n_junctions + len(reservoirs) - 1, target))

    with open(args.out, "w") as f:
        f.write("[TITLE]\nSynthetic desk-scale water distribution network\n")
        f.write(f"; generated by gen_synthetic_wds.py --seed {args.seed}\n\n")
        f.write("[JUNCTIONS]\n;ID  Elev  Demand  Pattern\n")
        for i, (x, y) in enumerate(nodes):
            elev = 40 + 0.002 * x + rng.normal(0, 2)
            demand = round(float(rng.gamma(2.0, 0.15)), 4)
            f.write(f"J{i + 1}  {elev:.2f}  {demand}  1\n")
        f.write("\n[RESERVOIRS]\n;ID  Head\n")
        for r, _ in enumerate(reservoirs):
            f.write(f"R{r + 1}  {120 + 5 * r}\n")
        f.write("\n[PIPES]\n;ID  Node1  Node2  Length  Diameter  Roughness  MinorLoss  Status\n")

        def name(i):
            return f"J{i + 1}" if i < n_junctions else f"R{i - n_junctions + 1}"

        for p, (a, b) in enumerate(pipes):
            length = max(1.0, math.dist(nodes[a], nodes[b]))
            f.write(f"P{p + 1}  {name(a)}  {name(b)}  {length:.1f}  200  100  0  Open\n")
        f.write("\n[PUMPS]\n;ID  Node1  Node2  Parameters\n")
        for p, (a, b) in enumerate(pumps):
            f.write(f"PU{p + 1}  {name(a)}  {name(b)}  HEAD 1\n")
        f.write("\n[CURVES]\n1  100  60\n\n[PATTERNS]\n1  1.0  1.2  0.8\n")
        f.write("\n[OPTIONS]\nUnits  LPS\nHeadloss  H-W\n\n[TIMES]\nDuration  24:00\n")
        f.write("\n[COORDINATES]\n;Node  X-Coord  Y-Coord\n")
        for i, (x, y) in enumerate(nodes):
            f.write(f"J{i + 1}  {x:.2f}  {y:.2f}\n")
        for r, (x, y) in enumerate(reservoirs):
            f.write(f"R{r + 1}  {x:.2f}  {y:.2f}\n")
        f.write("\n[END]\n")
    print(f"{n_junctions} junctions, {len(reservoirs)} reservoirs, {len(pipes)} pipes, {len(pumps)} pumps")


if __name__ == "__main__":
    main()
