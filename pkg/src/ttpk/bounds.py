"""Lower bounds on the optimal travel distance and exact itineraries for small instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Optional

import numpy as np

from .errors import TooLargeForExact
from .graphalg import graph_of, tsp_reference

EXACT_MAX = 12
TIE = 1e-9


def _trip_table(dist, v, opps, k):
    """Cheapest closed trip from v through each subset (bitmask over opps) of size <= k.

    Returns {mask: (weight, order)}.
    """
    q = len(opps)
    # path[mask][last] = (weight from v through mask ending at opps[last], previous index)
    path = {}
    for i in range(q):
        path[(1 << i, i)] = (dist[v, opps[i]], -1)
    by_size = [[] for _ in range(k + 1)]
    for mask in range(1, 1 << q):
        c = bin(mask).count("1")
        if c <= k:
            by_size[c].append(mask)
    for size in range(2, k + 1):
        for mask in by_size[size]:
            for last in range(q):
                if not mask >> last & 1:
                    continue
                prev = mask & ~(1 << last)
                best = None
                for j in range(q):
                    if prev >> j & 1:
                        w = path[(prev, j)][0] + dist[opps[j], opps[last]]
                        if best is None or w < best[0] - TIE:
                            best = (w, j)
                path[(mask, last)] = best
    trips = {}
    for size in range(1, k + 1):
        for mask in by_size[size]:
            best = None
            for last in range(q):
                if mask >> last & 1:
                    w = path[(mask, last)][0] + dist[opps[last], v]
                    if best is None or w < best[0] - TIE:
                        best = (w, last)
            order = []
            m, last = mask, best[1]
            while last != -1:
                order.append(opps[last])
                m, last = m & ~(1 << last), path[(m, last)][1]
            trips[mask] = (best[0], tuple(reversed(order)))
    return trips


def _optimal_itinerary(inst, k, v):
    n = inst.n
    if n > EXACT_MAX:
        raise TooLargeForExact(f"exact itineraries support n <= {EXACT_MAX}, got {n}")
    dist = inst.dist
    opps = [u for u in range(n) if u != v]
    q = len(opps)
    kk = min(k, q)
    trips = _trip_table(dist, v, opps, kk)
    full = (1 << q) - 1
    f = {0: 0}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask & ~low
        best = None
        sub = rest
        while True:
            t = sub | low
            if t in trips:
                w = trips[t][0] + f[mask & ~t]
                if best is None or w < best:
                    best = w
            if sub == 0:
                break
            sub = (sub - 1) & rest
        f[mask] = best
    # walk back, preferring the largest trip among ties
    chosen = []
    mask = full
    while mask:
        low = mask & -mask
        rest = mask & ~low
        pick = None
        sub = rest
        while True:
            t = sub | low
            if t in trips and trips[t][0] + f[mask & ~t] <= f[mask] + TIE * max(1.0, abs(f[mask])):
                if pick is None or bin(t).count("1") > bin(pick).count("1"):
                    pick = t
            if sub == 0:
                break
            sub = (sub - 1) & rest
        chosen.append(trips[pick][1])
        mask &= ~pick
    return f[full], chosen


def exact_itinerary_weight(inst, k, v):
    """psi_v: cheapest way for team v to visit every opponent in trips of at most k games."""
    val, _ = _optimal_itinerary(inst, k, v)
    return val.item() if hasattr(val, "item") else val


def optimal_itinerary(inst, k, v):
    """psi_v and one optimal list of trips."""
    val, trips = _optimal_itinerary(inst, k, v)
    return (val.item() if hasattr(val, "item") else val), trips


def itinerary_decomposition(inst, k, v):
    """(gamma, alpha, beta): weight share of full-length trips and the home-edge shares of both groups.

    Only defined when n is a multiple of k; returns None otherwise. Empty groups give share 0.
    """
    if inst.n > EXACT_MAX:
        raise TooLargeForExact(f"exact itineraries support n <= {EXACT_MAX}, got {inst.n}")
    if inst.n % k:
        return None
    total, trips = optimal_itinerary(inst, k, v)
    d = inst.dist
    w1 = h1 = w2 = h2 = 0.0
    for tr in trips:
        w = d[v, tr[0]] + d[tr[-1], v] + sum(d[a, b] for a, b in zip(tr, tr[1:]))
        home = d[v, tr[0]] + d[tr[-1], v]
        if len(tr) == k:
            w1, h1 = w1 + w, h1 + home
        else:
            w2, h2 = w2 + w, h2 + home
    gamma = w1 / total if total else 0.0
    alpha = h1 / w1 if w1 else 0.0
    beta = h2 / w2 if w2 else 0.0
    return float(gamma), float(alpha), float(beta)


def line_coefficients(n, k):
    """c_i for the gap between the i-th and (i+1)-th team on a line."""
    return [2 * i * ceil((n - i) / k) + 2 * (n - i) * ceil(i / k) for i in range(1, n)]


def ldttp_line_bound(gaps, k):
    gaps = np.asarray(gaps)
    c = line_coefficients(len(gaps) + 1, k)
    val = sum(ci * g for ci, g in zip(c, gaps.tolist()))
    return val


@dataclass(frozen=True)
class BoundReport:
    degree_bound: float
    tsp_bound: float
    tsp_exact: bool
    itinerary_bound: Optional[float] = None
    line_bound: Optional[float] = None
    sources: dict = field(default_factory=dict)

    @property
    def best(self):
        vals = [self.degree_bound, self.tsp_bound]
        vals += [v for v in (self.itinerary_bound, self.line_bound) if v is not None]
        return max(vals)

    def as_dict(self):
        return {
            "degree_bound": self.degree_bound,
            "tsp_bound": self.tsp_bound,
            "tsp_exact": self.tsp_exact,
            "itinerary_bound": self.itinerary_bound,
            "line_bound": self.line_bound,
            "best": self.best,
            "sources": dict(self.sources),
        }


def _num(x):
    return x.item() if hasattr(x, "item") else x


def compute_bounds(inst, k):
    delta = inst.dist.sum()
    degree = 2 * delta / k
    ref = tsp_reference(graph_of(inst))
    sources = {
        "degree_bound": "each trip costs at least twice its farthest stop",
        "tsp_bound": "every itinerary is a closed walk through all teams"
        + ("" if ref.exact else " (1-tree relaxation)"),
    }
    itin = None
    if inst.n <= EXACT_MAX:
        itin = _num(sum(exact_itinerary_weight(inst, k, v) for v in range(inst.n)))
        sources["itinerary_bound"] = "sum of exact per-team itineraries"
    line = None
    if inst.is_line:
        line = _num(ldttp_line_bound(inst.line_gaps, k))
        sources["line_bound"] = "every trip crosses each gap twice"
    return BoundReport(float(degree), inst.n * ref.value, ref.exact, itin, line, sources)
