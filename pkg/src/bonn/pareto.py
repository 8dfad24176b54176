"""Cost/reward dominance analysis for sweep results."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class ParetoPoint:
    lam: float
    cost: float    # mean fraction of steps with an acquisition
    reward: float  # mean episode return
    seeds: int = 1


def pareto_front(points) -> list:
    """Maximal subset with no point at (cost <=, reward >=, one strict).

    Exact duplicates keep the first by input order; output is sorted by
    cost.  O(n log n) sort-and-sweep; tests cross-check a quadratic
    scan.
    """
    pts = list(points)
    for p in pts:
        if not (math.isfinite(p.cost) and math.isfinite(p.reward)):
            raise ValueError(f"non-finite point {p}")
    order = sorted(range(len(pts)),
                   key=lambda i: (pts[i].cost, -pts[i].reward, i))
    kept = []
    best_reward = -math.inf
    for i in order:
        if pts[i].reward > best_reward:
            kept.append(pts[i])
            best_reward = pts[i].reward
    return kept


def is_dominated(p, others) -> bool:
    return any(q is not p
               and q.cost <= p.cost and q.reward >= p.reward
               and (q.cost < p.cost or q.reward > p.reward)
               for q in others)
