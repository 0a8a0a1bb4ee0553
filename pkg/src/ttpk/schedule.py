"""Double round-robin schedules: data model, validator, travel cost and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SizeMismatch, StructuralInconsistency


@dataclass(frozen=True, eq=False)
class Schedule:
    """Team-major table of signed 1-based opponents: +o hosts team o, -o plays at team o."""

    table: np.ndarray

    @property
    def n(self):
        return self.table.shape[0]

    @property
    def days(self):
        return self.table.shape[1]

    def opponents(self):
        return np.abs(self.table) - 1

    def home(self):
        return self.table > 0

    def venues(self):
        """Index of the team whose home hosts each (team, day) game."""
        own = np.arange(self.n)[:, None]
        return np.where(self.table > 0, own, np.abs(self.table) - 1)

    def day_major(self):
        return self.table.T.copy()

    def pattern(self, t, start=0, stop=None):
        row = self.table[t, start:stop]
        return "".join("H" if x > 0 else "A" for x in row)

    def games(self):
        """All games as (day, home, away), 0-based, sorted."""
        t, d = np.nonzero(self.table > 0)
        away = self.table[t, d] - 1
        return sorted(zip(d.tolist(), t.tolist(), away.tolist()))

    def __eq__(self, other):
        return isinstance(other, Schedule) and np.array_equal(self.table, other.table)

    __hash__ = None


def from_games(n, days, games):
    """Build a schedule from (day, home, away) triples."""
    table = np.zeros((n, days), dtype=np.int32)
    for d, h, a in games:
        if table[h, d] or table[a, d]:
            raise StructuralInconsistency(f"team plays twice on day {d}: game {h} vs {a}")
        table[h, d] = a + 1
        table[a, d] = -(h + 1)
    return Schedule(table)


class Violation(NamedTuple):
    constraint: str
    teams: tuple
    days: tuple


@dataclass(frozen=True)
class ValidationReport:
    complete_drr: bool
    no_repeat_ok: bool
    bounded_by_k_ok: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return self.complete_drr and self.no_repeat_ok and self.bounded_by_k_ok

    def summary(self):
        return {
            "complete_drr": self.complete_drr,
            "no_repeat_ok": self.no_repeat_ok,
            "bounded_by_k_ok": self.bounded_by_k_ok,
            "violations": len(self.violations),
        }


def check_structure(s):
    n, days = s.table.shape
    tab = s.table
    if np.any(tab == 0) or np.any(np.abs(tab) > n):
        t, d = np.argwhere((tab == 0) | (np.abs(tab) > n))[0]
        raise StructuralInconsistency(f"team {t} has no valid opponent on day {d}")
    opp = np.abs(tab) - 1
    own = np.arange(n)[:, None]
    if np.any(opp == own):
        t, d = np.argwhere(opp == own)[0]
        raise StructuralInconsistency(f"team {t} plays itself on day {d}")
    cols = np.arange(days)[None, :]
    back = tab[opp, np.broadcast_to(cols, tab.shape)]
    bad = back != -np.sign(tab) * (own + 1)
    if np.any(bad):
        t, d = np.argwhere(bad)[0]
        raise StructuralInconsistency(
            f"day {d}: team {t} entry {tab[t, d]} not mirrored by team {opp[t, d]}"
        )


def validate(s, k):
    """Check double round-robin completeness, no-repeat and the run bound k."""
    check_structure(s)
    n, days = s.table.shape
    tab = s.table
    viol = []

    complete = True
    if days != 2 * (n - 1):
        complete = False
        viol.append(Violation("complete_drr", (), (days,)))
    seen = {}
    for d, h, a in s.games():
        seen.setdefault((h, a), []).append(d)
    for a in range(n):
        for b in range(n):
            if a != b and len(seen.get((b, a), ())) != 1:
                complete = False
                viol.append(Violation("complete_drr", (a, b), tuple(seen.get((b, a), ()))))

    opp = np.abs(tab) - 1
    rep = np.argwhere(opp[:, :-1] == opp[:, 1:])
    no_repeat = True
    for t, d in rep:
        if t < opp[t, d]:
            no_repeat = False
            viol.append(Violation("no_repeat", (int(t), int(opp[t, d])), (int(d), int(d) + 1)))

    bounded = True
    home = tab > 0
    for t in range(n):
        start = 0
        for d in range(1, days + 1):
            if d == days or home[t, d] != home[t, start]:
                if d - start > k:
                    bounded = False
                    viol.append(Violation("bounded_by_k", (t,), tuple(range(start, d))))
                start = d
    return ValidationReport(complete, no_repeat, bounded, viol)


def max_run(s):
    home = s.table > 0
    best = 0
    for row in home:
        run = 1
        for d in range(1, len(row)):
            run = run + 1 if row[d] == row[d - 1] else 1
            best = max(best, run)
    return best


def _check_size(s, inst):
    if s.n != inst.n:
        raise SizeMismatch(f"schedule has {s.n} teams, instance has {inst.n}")


def _as_number(x, inst):
    return int(x) if inst.integral else float(x)


def team_costs(s, inst):
    _check_size(s, inst)
    v = s.venues()
    own = np.arange(s.n)
    d = inst.dist
    cost = d[own, v[:, 0]] + d[v[:, -1], own] + d[v[:, :-1], v[:, 1:]].sum(axis=1)
    return cost


def total_cost(s, inst):
    """Direct-travel distance summed over all teams."""
    return _as_number(team_costs(s, inst).sum(), inst)


@dataclass(frozen=True)
class Itinerary:
    team: int
    trips: list
    total_distance: float


def trips_of(row, t):
    """Split a signed row into away trips (tuples of venues) and their day ranges."""
    trips, spans, cur, start = [], [], [], None
    for d, x in enumerate(row):
        if x < 0:
            if not cur:
                start = d
            cur.append(int(-x - 1))
        elif cur:
            trips.append(tuple(cur))
            spans.append((start, d))
            cur = []
    if cur:
        trips.append(tuple(cur))
        spans.append((start, len(row)))
    return trips, spans


def trip_weight(dist, home, venues):
    pos = [home, *venues, home]
    return sum(dist[a, b] for a, b in zip(pos, pos[1:]))


def team_itinerary(s, inst, t):
    _check_size(s, inst)
    trips, _ = trips_of(s.table[t], t)
    total = sum(trip_weight(inst.dist, t, tr) for tr in trips)
    return Itinerary(t, trips, _as_number(total, inst))


def dumps(s, k, inst=None, extra=None):
    """Serialize as JSON text, one team row per line."""
    rep = validate(s, k)
    summary = {"validation": rep.summary()}
    if inst is not None:
        summary["cost"] = total_cost(s, inst)
    if extra:
        summary.update(extra)
    rows = ",\n    ".join(json.dumps([int(x) for x in row]) for row in s.table)
    return (
        "{\n"
        f'  "n": {s.n},\n'
        f'  "k": {int(k)},\n'
        f'  "days": {s.days},\n'
        f'  "rows": [\n    {rows}\n  ],\n'
        f'  "summary": {json.dumps(summary, sort_keys=True)}\n'
        "}\n"
    )


def loads(text):
    """Inverse of dumps; returns (schedule, k, summary)."""
    doc = json.loads(text)
    table = np.array(doc["rows"], dtype=np.int32).reshape(doc["n"], doc["days"])
    return Schedule(table), doc["k"], doc.get("summary", {})
