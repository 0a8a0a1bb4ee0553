"""k-cycle packing construction.

The core set S is covered by 2m cycles of k teams (cycle-teams); consecutive cycle-teams are
glued into m super-teams. Super-teams play a circle-method round robin over m-1 slots with
U_m fixed, each super-game expanded into 4k days of ordinary games. Teams outside S form pairs
that ride along in the outermost ("right") games. Leftovers are finished after the last slot
with small blocks of at most two consecutive home or away games.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BadPairAssignment,
    BadShape,
    CoverMismatch,
    Overlap,
    StructuralInconsistency,
    TooSmallForPacking,
)
from .graphalg import complete_paths, cycle_weight, graph_of, k_packing
from .schedule import Schedule
from .ttp2 import build_ttp2_block

# ---------------------------------------------------------------- core set and structure


def core_sizes(n, k):
    m = 2 * (n // (4 * k))
    n_s = 2 * m * k
    return m, n_s, (n - n_s) // 2


def select_core_set(inst, k):
    """Top-degree 2mk teams (lowest index on ties) and the rest, both sorted."""
    n = inst.n
    if n < 8 * k * k:
        raise TooSmallForPacking(f"packing needs n >= 8k^2 = {8 * k * k}, got n = {n}")
    m, n_s, _ = core_sizes(n, k)
    deg = inst.degree()
    ranked = sorted(range(n), key=lambda v: (-deg[v], v))
    S = tuple(sorted(ranked[:n_s]))
    S_bar = tuple(sorted(ranked[n_s:]))
    total = deg.sum()
    assert deg[list(S)].sum() * n >= n_s * total - 1e-9 * max(1.0, abs(total)) * n
    return S, S_bar


@dataclass(frozen=True, eq=False)
class SuperStructure:
    k: int
    m: int
    r: int
    S: tuple
    S_bar: tuple
    sigma: tuple  # sigma[a] = packing component placed as cycle-team a
    cycle_teams: tuple  # 2m tuples of k teams, in cycle order
    super_teams: tuple  # m tuples of 2k teams: u_{2i-1} then u_{2i}
    team_pairs: tuple
    cross: np.ndarray  # w(u_a, u_b)
    cyc: np.ndarray  # w(C_a)
    inner: np.ndarray  # all-pairs weight inside u_a

    def super_cross(self, i, j):
        """w(U_i, U_j) over the four cycle-team cross pairs."""
        return self.cross[2 * i:2 * i + 2, 2 * j:2 * j + 2].sum()

    def super_inner(self, i):
        """w(U_i): every pair inside the super-team."""
        return self.inner[2 * i] + self.inner[2 * i + 1] + self.cross[2 * i, 2 * i + 1]


def _set_weight(dist, a, b):
    return dist[np.ix_(list(a), list(b))].sum()


def component_tables(dist, components):
    """Cross weights, cycle weights and inner all-pair weights of the packing components."""
    c = len(components)
    cross = np.zeros((c, c), dtype=dist.dtype)
    for a in range(c):
        for b in range(a + 1, c):
            cross[a, b] = cross[b, a] = _set_weight(dist, components[a], components[b])
    cyc = np.array([cycle_weight(dist, comp) for comp in components], dtype=dist.dtype)
    inner = np.array([_set_weight(dist, comp, comp) / 2 for comp in components])
    inner = inner.astype(dist.dtype) if np.issubdtype(dist.dtype, np.integer) else inner
    return cross, cyc, inner


def build_super_structure(inst, k, packing, sigma=None, core=None):
    S, S_bar = core if core is not None else select_core_set(inst, k)
    m, n_s, r = core_sizes(inst.n, k)
    comps = [tuple(c) for c in packing.components]
    if sorted(v for c in comps for v in c) != list(S) or any(len(c) != k for c in comps):
        raise CoverMismatch("packing must cover the core set exactly with components of size k")
    if len(comps) != 2 * m:
        raise CoverMismatch(f"expected {2 * m} components, got {len(comps)}")
    sigma = tuple(range(2 * m)) if sigma is None else tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(2 * m)):
        raise CoverMismatch("sigma must permute the packing components")
    cycle_teams = tuple(comps[s] for s in sigma)
    super_teams = tuple(cycle_teams[2 * i] + cycle_teams[2 * i + 1] for i in range(m))
    pairs = tuple((S_bar[2 * i], S_bar[2 * i + 1]) for i in range(r))
    cross, cyc, inner = component_tables(inst.dist, comps)
    idx = np.asarray(sigma)
    return SuperStructure(
        k, m, r, S, S_bar, sigma, cycle_teams, super_teams, pairs,
        cross[np.ix_(idx, idx)], cyc[idx], inner[idx],
    )


# ---------------------------------------------------------------- slot plan


@dataclass(frozen=True)
class SuperGame:
    kind: str  # "left", "normal" or "right"
    away: int  # super-team index playing the away role
    home: int
    upper: Optional[int] = None  # right games: super-team holding the upper position
    pair: Optional[int] = None  # right games: team-pair index


@dataclass(frozen=True)
class SlotPlan:
    m: int
    r: int
    slots: tuple  # m-1 tuples of SuperGame; the final one is the last slot
    cycles: tuple  # per pair index, directed cycles upper -> lower over U_1..U_{m-1}


def position_of(q, s, m):
    """Position of the super-team with initial position q in slot s (1-based)."""
    return (q + s - 1) % (m - 1)


def _at(pos, s, m):
    return (pos - s + 1) % (m - 1)


def plan_slots(m, r):
    if m % 2 or m < 2:
        raise BadShape(f"super-team count must be even and positive, got {m}")
    if m <= 2 * r:
        raise BadShape(f"need m > 2r, got m={m}, r={r}")
    h = (m - 2) // 2
    slots = []
    for s in range(1, m):
        last = s == m - 1
        piv = _at(0, s, m)
        um = m - 1
        games = [SuperGame("left", um, piv) if s % 2 else SuperGame("left", piv, um)]
        for j in range(1, h + 1):
            up, lo = _at(j, s, m), _at(m - 1 - j, s, m)
            away, home = (up, lo) if (s - j) % 2 else (lo, up)
            if j >= h - r + 1:
                games.append(SuperGame("right", away, home, up, h - j))
            elif last:
                games.append(SuperGame("left", away, home))
            else:
                games.append(SuperGame("normal", away, home))
        slots.append(tuple(games))
    cycles = []
    for p in range(r):
        j = h - p
        succ = {}
        for s in range(1, m):
            succ[_at(j, s, m)] = _at(m - 1 - j, s, m)
        seen, cyc = set(), []
        for start in range(m - 1):
            if start in seen:
                continue
            cur, c = start, []
            while cur not in seen:
                seen.add(cur)
                c.append(cur)
                cur = succ[cur]
            cyc.append(tuple(c))
        cycles.append(tuple(cyc))
    return SlotPlan(m, r, tuple(slots), tuple(cycles))


# ---------------------------------------------------------------- cycle-games


def _rot(ys, l0):
    k = len(ys)
    return [ys[(i + l0) % k] for i in range(k)]


def rotation_sums(dist, xs, ys):
    """S(l) = sum_i w(x_i, y^l_i) + w(x_i, y^l_{i-1}) for each rotation l = 0..k-1."""
    k = len(xs)
    out = []
    for l0 in range(k):
        yr = _rot(ys, l0)
        out.append(sum(dist[xs[i], yr[i]] + dist[xs[i], yr[i - 1]] for i in range(k)))
    return out


def optimize_cycle_game_labels(dist, xs, ys):
    """Rotation of the home side's labels minimizing the cross terms (lowest on ties)."""
    sums = rotation_sums(dist, xs, ys)
    best = min(range(len(sums)), key=lambda l0: (sums[l0], l0))
    return best, sums


def _matching(xs, ys, l0):
    """p_{l0+1}: x_i travels to y_{i+l0}."""
    k = len(xs)
    return [(ys[(i + l0) % k], xs[i]) for i in range(k)]


def _flip(games):
    return [(a, h) for h, a in games]


def normal_cycle_game(xs, ys):
    """2k days, (p_1..p_k)(overline p_1..p_k); games as (day, home, away)."""
    k = len(xs)
    days = [_matching(xs, ys, l) for l in range(k)]
    days += [_flip(g) for g in days]
    return [(d, h, a) for d, g in enumerate(days) for h, a in g]


def left_cycle_game(xs, ys):
    """2k days, (p_1..p_{k-1} overline p_k)(overline p_1..overline p_{k-1} p_k)."""
    k = len(xs)
    first = [_matching(xs, ys, l) for l in range(k - 1)] + [_flip(_matching(xs, ys, k - 1))]
    days = first + [_flip(g) for g in first]
    return [(d, h, a) for d, g in enumerate(days) for h, a in g]


def _check_disjoint(a, b):
    if set(a) & set(b):
        raise Overlap("super-game sides share a team")


@dataclass(frozen=True)
class CycleGameRecord:
    xs: tuple
    ys: tuple
    rotation: int
    cross_sum: float
    weight: float  # exact travel of the 2k-day block
    bound: float  # (4/k) w(u, u') + (k-1)(w(C) + w(C'))


def _normal_record(dist, xs, ys, l0, sums):
    k = len(xs)
    wc = cycle_weight(dist, xs) + cycle_weight(dist, ys)
    w_uu = _set_weight(dist, xs, ys)
    return CycleGameRecord(
        tuple(xs), tuple(ys), l0, sums[l0],
        2 * sums[l0] + (k - 1) * wc,
        4 * w_uu / k + (k - 1) * wc,
    )


def extend_normal_super_game(Ux, Uy, dist, optimize=True):
    """Four normal cycle-games over 4k days. Ux travels first; returns (games, records)."""
    _check_disjoint(Ux, Uy)
    k = len(Ux) // 2
    ua, ub = list(Ux[:k]), list(Ux[k:])
    uc, ud = list(Uy[:k]), list(Uy[k:])
    games, recs = [], []
    for off, pairs in ((0, ((ua, uc), (ub, ud))), (2 * k, ((ua, ud), (ub, uc)))):
        for xs, ys in pairs:
            l0, sums = optimize_cycle_game_labels(dist, xs, ys) if optimize else (0, rotation_sums(dist, xs, ys))
            yr = _rot(ys, l0)
            games += [(off + d, h, a) for d, h, a in normal_cycle_game(xs, yr)]
            recs.append(_normal_record(dist, xs, ys, l0, sums))
    return games, recs


def extend_left_super_game(Ux, Uy):
    _check_disjoint(Ux, Uy)
    k = len(Ux) // 2
    ua, ub = list(Ux[:k]), list(Ux[k:])
    uc, ud = list(Uy[:k]), list(Uy[k:])
    games = []
    for off, pairs in ((0, ((ua, uc), (ub, ud))), (2 * k, ((ua, ud), (ub, uc)))):
        for xs, ys in pairs:
            games += [(off + d, h, a) for d, h, a in left_cycle_game(xs, ys)]
    return games


def _right_matching(xs, ys, l):
    """p_l over 2k+1 teams per side: x_i travels to y_{(2k+2l-i) mod (2k+1) + 1}, 1-based l, i."""
    size = len(xs)
    k2 = size - 1
    return [(ys[(k2 + 2 * l - i) % size], xs[i - 1]) for i in range(1, size + 1)]


def extend_right_super_game(Ux, Uy, pair, upper_is_x):
    """4k days on the two sides augmented by the pair; also returns the deferred core pairs.

    The first pair member joins the upper super-team, the second the lower one.
    """
    _check_disjoint(Ux, Uy)
    if len(pair) != 2 or pair[0] == pair[1] or set(pair) & (set(Ux) | set(Uy)):
        raise BadPairAssignment("team-pair must be two distinct teams outside both super-teams")
    k = len(Ux) // 2
    up, lo = pair
    xs = list(Ux) + [up if upper_is_x else lo]
    ys = list(Uy) + [lo if upper_is_x else up]
    p = {l: _right_matching(xs, ys, l) for l in range(1, 2 * k + 2)}

    def half(first):
        seq = [p[l] for l in range(first, first + k - 2)]
        return seq + [_flip(p[first + k - 2]), p[first + k - 1]]

    g1, g2 = half(1), half(k + 1)
    days = g1 + [_flip(g) for g in g1] + g2 + [_flip(g) for g in g2]
    games = [(d, h, a) for d, g in enumerate(days) for h, a in g]
    deferred = [(a, h) for h, a in p[2 * k + 1] if not (a in pair and h in pair)]
    return games, deferred


# ---------------------------------------------------------------- labels


@dataclass(frozen=True)
class LabelCoefficients:
    """W-bar(sigma) = const + sum_{a<b} P[a,b] X[s_a, s_b] + sum_a Q[a] Y[s_a]."""

    const: float
    P: np.ndarray
    Q: np.ndarray


def label_coefficients(plan, k, const=0.0):
    m = plan.m
    P = np.zeros((2 * m, 2 * m))
    Q = np.zeros(2 * m)

    def both(i, j, c):
        for a in (2 * i, 2 * i + 1):
            for b in (2 * j, 2 * j + 1):
                P[a, b] += c
                P[b, a] += c

    for i in range(m):
        P[2 * i, 2 * i + 1] += 4
        P[2 * i + 1, 2 * i] += 4
    for slot in plan.slots:
        for g in slot:
            if g.kind == "normal":
                i, j = g.away, g.home
                for a, b in ((2 * i, 2 * j), (2 * i + 1, 2 * j + 1), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j)):
                    P[a, b] += 4 / k
                    P[b, a] += 4 / k
                    Q[a] += k - 1
                    Q[b] += k - 1
            else:
                both(g.away, g.home, 4)
    return LabelCoefficients(const, P, Q)


def label_constant(inst, k, S_bar, inner):
    """Label-free part of W-bar: games touching S-bar plus games inside cycle-teams."""
    d = inst.dist
    sb = list(S_bar)
    wa = 4 * (d[sb].sum() - d[np.ix_(sb, sb)].sum() / 2) if sb else 0
    return wa, 4 * float(np.sum(inner))


def w_bar(coef, X, Y, sigma):
    s = np.asarray(sigma)
    Xs = X[np.ix_(s, s)]
    return float(coef.const + (coef.P * Xs).sum() / 2 + (coef.Q * Y[s]).sum())


def expected_w_bar(coef, X, Y):
    c = len(Y)
    pair_mean = (X.sum() - np.trace(X)) / (c * (c - 1))
    return float(coef.const + coef.P.sum() / 2 * pair_mean + coef.Q.sum() * Y.mean())


def expected_cross_weight(X):
    """E[w(u_a, u_b)] for a != b under a uniform labeling."""
    c = X.shape[0]
    return float(2 * np.triu(X, 1).sum() / (c * (c - 1)))


def _conditional(coef, X, Y, fixed, unused):
    """E[W-bar] when slots 0..len(fixed)-1 are fixed and the rest draw uniformly from unused."""
    P, Q = coef.P, coef.Q
    t = len(fixed)
    f = np.asarray(fixed, dtype=np.int64)
    u = np.asarray(unused, dtype=np.int64)
    val = coef.const
    if t:
        val += (P[:t, :t] * X[np.ix_(f, f)]).sum() / 2 + (Q[:t] * Y[f]).sum()
    if len(u):
        val += Q[t:].sum() * Y[u].mean()
        if t:
            row_mean = X[np.ix_(f, u)].mean(axis=1)
            val += (P[:t, t:].sum(axis=1) * row_mean).sum()
        if len(u) > 1:
            sub = X[np.ix_(u, u)]
            mean = (sub.sum() - np.trace(sub)) / (len(u) * (len(u) - 1))
            val += P[t:, t:].sum() / 2 * mean
    return float(val)


def optimize_labels(coef, X, Y, mode="derandomized", seed=0, trials=1):
    """Label permutation sigma by conditional expectations or best of random samples."""
    c = len(Y)
    if mode == "derandomized":
        fixed = []
        unused = list(range(c))
        for _ in range(c):
            best = None
            for comp in unused:
                rest = [x for x in unused if x != comp]
                val = _conditional(coef, X, Y, fixed + [comp], rest)
                if best is None or val < best[0] - 1e-12 * max(1.0, abs(best[0])):
                    best = (val, comp)
            fixed.append(best[1])
            unused.remove(best[1])
        return tuple(fixed)
    if mode == "randomized":
        rng = np.random.default_rng(seed)
        best = None
        for _ in range(max(1, trials)):
            s = tuple(int(x) for x in rng.permutation(c))
            val = w_bar(coef, X, Y, s)
            if best is None or val < best[0]:
                best = (val, s)
        return best[1]
    if mode == "identity":
        return tuple(range(c))
    raise ValueError(f"unknown labeling mode {mode!r}")


# ---------------------------------------------------------------- assembly


class _Table:
    def __init__(self, n, days):
        self.t = np.zeros((n, days), dtype=np.int32)

    def put(self, day, h, a):
        if self.t[h, day] or self.t[a, day]:
            raise StructuralInconsistency(f"day {day}: team {h} or {a} already plays")
        self.t[h, day] = a + 1
        self.t[a, day] = -(h + 1)

    def put_all(self, base, games):
        for d, h, a in games:
            self.put(base + d, h, a)

    def tail(self, t, day, length=2):
        row = self.t[t, max(0, day - length):day]
        return "".join("H" if x > 0 else "A" for x in row)

    def prev_opp(self, t, day):
        return int(abs(self.t[t, day - 1]) - 1) if day > 0 else None


def _block(tab, teams, day):
    blk = build_ttp2_block(
        teams,
        [tab.tail(t, day) for t in teams],
        [tab.prev_opp(t, day) for t in teams],
    )
    tab.put_all(day, blk.games)


def build_last_slot(tab, ss, plan, base):
    """Last slot super-games, the deferred right-game leftovers and the closing blocks.

    base is the first day of the last slot; tab is filled in place.
    """
    k, m, r = ss.k, ss.m, ss.r
    U = ss.super_teams
    for g in plan.slots[-1]:
        if g.kind == "left":
            tab.put_all(base, extend_left_super_game(U[g.away], U[g.home]))
        elif g.kind == "right":
            games, _ = extend_right_super_game(U[g.away], U[g.home], ss.team_pairs[g.pair], g.upper == g.away)
            tab.put_all(base, games)
        else:
            raise BadShape("last slot holds only left and right super-games")
    day = base + 4 * k
    # the fixed super-team and all pairs
    fixed = list(U[m - 1]) + [t for p in ss.team_pairs for t in p]
    _block(tab, fixed, day)
    # odd cycles of each pair index, four days per index
    for p, cycles in enumerate(plan.cycles):
        d0 = day + 4 * p
        for cyc in cycles:
            for t in range(len(cyc)):
                a, b = U[cyc[t]], U[cyc[(t + 1) % len(cyc)]]
                for i in range(k):
                    j = 2 * k - 1 - i
                    tab.put(d0, b[j], a[i])
                    tab.put(d0 + 1, b[i], a[j])
                    tab.put(d0 + 2, a[i], b[j])
                    tab.put(d0 + 3, a[j], b[i])
    day += 4 * r
    for i in range(m - 1):
        _block(tab, list(U[i]), day)


@dataclass(frozen=True)
class PackingOptions:
    mode: str = "derandomized"
    seed: int = 0
    trials: int = 1
    strategy: str = "greedy_local"
    kind: str = "k_cycle"
    optimize_rotation: bool = True


@dataclass(frozen=True, eq=False)
class PackingResult:
    schedule: Schedule
    structure: SuperStructure
    plan: SlotPlan
    W: dict
    W_bar: float
    records: list = field(default_factory=list)

    @property
    def bound(self):
        return sum(self.W.values())


def make_core_packing(inst, k, core=None, kind="k_cycle", strategy="greedy_local"):
    S, _ = core if core is not None else select_core_set(inst, k)
    p = k_packing(graph_of(inst, S), k, kind=kind, strategy=strategy)
    return complete_paths(p, inst.dist) if p.kind == "k_path" else p


def label_problem(inst, k, packing, core=None):
    """Slot plan, identity-labeled structure and W-bar coefficients for a core packing.

    W-bar of a labeling sigma is w_bar(coef, ss.cross, ss.cyc, sigma).
    """
    core = core if core is not None else select_core_set(inst, k)
    m, _, r = core_sizes(inst.n, k)
    plan = plan_slots(m, r)
    ss = build_super_structure(inst, k, packing, None, core)
    wa, inner_const = label_constant(inst, k, ss.S_bar, ss.inner)
    return plan, ss, label_coefficients(plan, k, wa + inner_const)


def build_packing_schedule(inst, k, packing=None, opts=None):
    """Feasible TTP-k schedule from a k-cycle packing of the core set."""
    opts = opts or PackingOptions()
    core = select_core_set(inst, k)
    if packing is None:
        packing = make_core_packing(inst, k, core, opts.kind, opts.strategy)
    elif packing.kind == "k_path":
        packing = complete_paths(packing, inst.dist)
    m, _, r = core_sizes(inst.n, k)
    plan, base_ss, coef = label_problem(inst, k, packing, core)
    wa = label_constant(inst, k, base_ss.S_bar, base_ss.inner)[0]
    sigma = optimize_labels(coef, base_ss.cross, base_ss.cyc, opts.mode, opts.seed, opts.trials)
    ss = build_super_structure(inst, k, packing, sigma, core)

    n = inst.n
    tab = _Table(n, 2 * n - 2)
    U = ss.super_teams
    d = inst.dist
    W = {"W_a": wa, "W_b": 0.0, "W_c": 0.0, "W_d": 0.0, "W_e": 0.0}
    W["W_b"] = 4 * sum(ss.super_inner(i) for i in range(m))
    records = []
    for s, slot in enumerate(plan.slots[:-1]):
        base = 4 * k * s
        for g in slot:
            if g.kind == "normal":
                games, recs = extend_normal_super_game(U[g.away], U[g.home], d, opts.optimize_rotation)
                tab.put_all(base, games)
                records += recs
                W["W_e"] += sum(rc.weight for rc in recs)
            elif g.kind == "left":
                tab.put_all(base, extend_left_super_game(U[g.away], U[g.home]))
                W["W_c"] += 4 * ss.super_cross(g.away, g.home)
            else:
                games, _ = extend_right_super_game(U[g.away], U[g.home], ss.team_pairs[g.pair], g.upper == g.away)
                tab.put_all(base, games)
                W["W_d"] += 4 * ss.super_cross(g.away, g.home)
    for g in plan.slots[-1]:
        key = "W_c" if g.kind == "left" else "W_d"
        W[key] += 4 * ss.super_cross(g.away, g.home)
    build_last_slot(tab, ss, plan, 4 * k * (m - 2))
    if np.any(tab.t == 0):
        raise StructuralInconsistency("construction left empty cells")
    W = {key: float(v) for key, v in W.items()}
    wb = w_bar(coef, base_ss.cross, base_ss.cyc, sigma)
    return PackingResult(Schedule(tab.t), ss, plan, W, wb, records)

