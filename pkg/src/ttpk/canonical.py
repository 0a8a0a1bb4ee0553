"""Hamiltonian-cycle construction: a circle-method double round robin laid out along a cycle.

Teams c[0..n-2] sit on Z_{n-1} in cycle order and c[n-1] is the fixed pivot. In round r
label p meets label (r - p) mod (n-1), or the pivot when 2p = r. Consecutive rounds therefore
walk each team along the cycle, so away runs become trips through neighbouring teams.
Venues come from an antisymmetric run pattern F on the label difference, and rounds are
grouped in short blocks that are played forward and then mirrored.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InstanceError, NotSpanningS, TooFewTeams, Unsatisfiable
from .schedule import Schedule, trips_of


@dataclass(frozen=True)
class CycleOrder:
    order: tuple

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise InstanceError("cycle order must be a permutation of all teams")

    @property
    def n(self):
        return len(self.order)

    def weight(self, dist):
        o = list(self.order)
        return sum(dist[a, b] for a, b in zip(o, o[1:] + o[:1]))


@dataclass(frozen=True)
class Params:
    block: int
    run: int
    phase: int
    pivot_phase: int
    blocks: tuple


def _blocklists(M, b):
    q, rem = divmod(M, b)
    if rem == 0:
        return [(b,) * q]
    out = [(b,) * q + (rem,), (rem,) + (b,) * q]
    if rem == 1 and b >= 3:
        out.append((b,) * (q - 1) + (b - 1, 2))
    return [bl for bl in out if 1 not in bl]


def _pattern(n, run, phase):
    """F[d] for d in 0..n-2: True means the lower label of the pair travels."""
    M = n - 1
    h = (n - 2) // 2
    d = np.arange(M)
    base = ((d - 1 + phase) // run) % 2 == 0
    F = base.copy()
    F[h + 1:] = ~base[M - d[h + 1:]]
    return F


def _label_table(n, p):
    """Signed 1-based table over labels (pivot = n-1) for parameters p."""
    M = n - 1
    F = _pattern(n, p.run, p.phase)
    lab = np.arange(M)[:, None]
    r = np.arange(M)[None, :]
    opp = (r - lab) % M
    away = F[(r - 2 * lab) % M]
    meets_pivot = opp == lab
    pivot_home = (r + p.pivot_phase) % 2 == 0
    away = np.where(meets_pivot, np.broadcast_to(pivot_home, away.shape), away)
    opp = np.where(meets_pivot, M, opp)
    rounds = np.zeros((n, M), dtype=np.int32)
    rounds[:M] = np.where(away, -(opp + 1), opp + 1)
    # pivot row mirrors whoever meets it
    lab_of = np.argmax(meets_pivot, axis=0)
    rounds[M] = -np.sign(rounds[lab_of, np.arange(M)]) * (lab_of + 1)
    cols = []
    start = 0
    for j, b in enumerate(p.blocks):
        seg = rounds[:, start:start + b]
        pair = (-seg, seg) if j % 2 else (seg, -seg)
        cols.extend(pair)
        start += b
    return np.concatenate(cols, axis=1)


def _max_run(tab):
    home = tab > 0
    run = np.ones(tab.shape[0], dtype=np.int32)
    best = 1
    for d in range(1, tab.shape[1]):
        run = np.where(home[:, d] == home[:, d - 1], run + 1, 1)
        best = max(best, int(run.max()))
    return best


@lru_cache(maxsize=None)
def _candidates(n, k):
    """Run-feasible parameter sets with their label tables, in a fixed order."""
    M = n - 1
    out = []
    for b in range(min(k, M), 1, -1):
        for run in range(k, 0, -1):
            for phase in range(run):
                for gp in (0, 1):
                    for bl in _blocklists(M, b):
                        p = Params(b, run, phase, gp, bl)
                        tab = _label_table(n, p)
                        if _max_run(tab) <= k:
                            tab.setflags(write=False)
                            out.append((p, tab))
    return out


def _relabel(tab, order):
    order = np.asarray(order)
    out = np.empty_like(tab)
    sign = np.sign(tab)
    out[order] = sign * (order[np.abs(tab) - 1] + 1)
    return out


def trip_locality_violations(s, c):
    """Away trips whose venues are not an arc of the cycle.

    The pivot c[n-1] is left out of the ring: its own trips are exempt and a visit to it
    does not break another team's arc.
    """
    order = list(c.order if isinstance(c, CycleOrder) else c)
    n = len(order)
    pivot = order[-1]
    pos = {t: i for i, t in enumerate(order[:-1])}
    ring = n - 1
    bad = []
    for t in order[:-1]:
        trips, _ = trips_of(s.table[t], t)
        me = pos[t]
        for tr in trips:
            # positions along the ring with the traveler removed
            ps = sorted((pos[v] - me - 1) % ring for v in tr if v != pivot)
            if len(ps) < 2:
                continue
            size = ring - 1
            gaps = sum(1 for a, b in zip(ps, ps[1:] + [ps[0] + size]) if b - a > 1)
            if gaps > 1:
                bad.append((t, tr))
    return bad


def build_hamiltonian_schedule(inst, k, c=None):
    """Feasible TTP-k schedule whose trips follow the cycle order c."""
    n = inst.n
    if n < 6:
        raise TooFewTeams(f"need at least 6 teams, got {n}")
    if not 3 <= k <= n - 1:
        raise InstanceError(f"k must lie in [3, {n - 1}], got {k}")
    if c is None:
        c = CycleOrder(tuple(range(n)))
    elif not isinstance(c, CycleOrder):
        c = CycleOrder(tuple(int(t) for t in c))
    if c.n != n:
        raise InstanceError("cycle order size differs from the instance")
    dist = inst.dist
    order = np.asarray(c.order)
    scored = []
    for i, (p, tab) in enumerate(_candidates(n, k)):
        s = Schedule(_relabel(tab, order))
        v = s.venues()
        own = np.arange(n)
        cost = dist[own, v[:, 0]].sum() + dist[v[:, -1], own].sum() + dist[v[:, :-1], v[:, 1:]].sum()
        scored.append((float(cost), i, s))
    if not scored:
        raise Unsatisfiable(f"no circle-method layout for n={n}, k={k}")
    scored.sort(key=lambda x: (x[0], x[1]))
    for _, _, s in scored:
        if not trip_locality_violations(s, c):
            return s
    return scored[0][2]


def lift_core_cycle(inst, core_cycle):
    """Extend a cycle on the core set to all teams, each outsider placed next to its nearest core team."""
    core = [int(v) for v in core_cycle]
    if len(set(core)) != len(core) or not core:
        raise NotSpanningS("core cycle must list distinct teams")
    if any(v < 0 or v >= inst.n for v in core):
        raise NotSpanningS("core cycle names a team outside the instance")
    d = inst.dist
    inside = set(core)
    attached = {v: [] for v in core}
    for u in range(inst.n):
        if u in inside:
            continue
        near = min(core, key=lambda v: (d[u, v], v))
        attached[near].append(u)
    order = []
    for v in core:
        order.append(v)
        # shortcut of the doubled edges: visit the outsiders hanging on v, nearest first
        order.extend(sorted(attached[v], key=lambda u: (d[u, v], u)))
    return CycleOrder(tuple(order))
