"""Small double round-robin blocks with at most two consecutive home or away days."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import Unsatisfiable

MAX_RUN = 2
SEAM_RUN = 3


@dataclass(frozen=True)
class Block:
    teams: tuple
    games: list  # (day, home, away) with global team ids, day relative to block start
    boundary_in: tuple

    @property
    def days(self):
        return 2 * (len(self.teams) - 1)

    def row(self, t):
        """Signed row for team t (+o home vs o, -o away at o, 1-based)."""
        out = [0] * self.days
        for d, h, a in self.games:
            if h == t:
                out[d] = a + 1
            elif a == t:
                out[d] = -(h + 1)
        return out

    def pattern(self, t):
        return "".join("H" if x > 0 else "A" for x in self.row(t))


def _canonical_rounds(N):
    """Circle-method single round robin whose mirrored double has runs of at most two."""
    M = N - 1
    rounds = []
    for r in range(M):
        g = [(N - 1, r) if r % 2 else (r, N - 1)]
        for i in range(1, N // 2):
            a, b = (r + i) % M, (r - i) % M
            g.append((a, b) if i % 2 else (b, a))
        rounds.append(g)
    return rounds


def _mirrored(N, shift):
    rounds = _canonical_rounds(N)
    rounds = rounds[shift:] + rounds[:shift]
    days = rounds + [[(a, h) for h, a in g] for g in rounds]
    return [(d, h, a) for d, g in enumerate(days) for h, a in g]


def _trailing_run(letters):
    if not letters:
        return "", 0
    last = letters[-1]
    n = len(letters) - len(letters.rstrip(last))
    return last, n


def _block_ok(N, games, boundary, prev):
    days = 2 * (N - 1)
    rows = [[None] * days for _ in range(N)]
    for d, h, a in games:
        rows[h][d] = ("H", a)
        rows[a][d] = ("A", h)
    for t in range(N):
        letters = "".join(x[0] for x in rows[t])
        if "HHH" in letters or "AAA" in letters:
            return False
        last, run = _trailing_run(boundary[t])
        lead = len(letters) - len(letters.lstrip(letters[0]))
        if last == letters[0] and run + lead > SEAM_RUN:
            return False
        if prev[t] is not None and rows[t][0][1] == prev[t]:
            return False
        for d in range(days - 1):
            if rows[t][d][1] == rows[t][d + 1][1]:
                return False
    return True


def _search(N, boundary, prev, node_limit=2_000_000):
    """Depth-first search over days; most-constrained team first within a day."""
    days = 2 * (N - 1)
    remaining = {(h, a) for h in range(N) for a in range(N) if h != a}
    letter = []
    block_run = [0] * N
    total_run = []
    for t in range(N):
        last, run = _trailing_run(boundary[t])
        letter.append(last or None)
        total_run.append(run)
    last_opp = list(prev)
    n_home = [N - 1] * N
    n_away = [N - 1] * N
    out = []
    nodes = [0]

    def can(t, v):
        if letter[t] == v:
            return block_run[t] < MAX_RUN and total_run[t] < SEAM_RUN
        return True

    def budget_ok(t):
        h, a = n_home[t], n_away[t]
        if letter[t] == "H":
            return h <= (MAX_RUN - block_run[t]) + MAX_RUN * a and a <= MAX_RUN * (h + 1)
        if letter[t] == "A":
            return a <= (MAX_RUN - block_run[t]) + MAX_RUN * h and h <= MAX_RUN * (a + 1)
        return h <= MAX_RUN * (a + 1) and a <= MAX_RUN * (h + 1)

    def options(t, free):
        opts = []
        for o in sorted(free):
            if o == t or o == last_opp[t]:
                continue
            if (t, o) in remaining and can(t, "H") and can(o, "A"):
                opts.append((t, o))
            if (o, t) in remaining and can(t, "A") and can(o, "H"):
                opts.append((o, t))
        return opts

    def play(h, a):
        saved = []
        for t, v in ((h, "H"), (a, "A")):
            saved.append((t, letter[t], block_run[t], total_run[t], last_opp[t]))
            if letter[t] == v:
                block_run[t] += 1
                total_run[t] += 1
            else:
                letter[t], block_run[t], total_run[t] = v, 1, 1
        last_opp[h], last_opp[a] = a, h
        n_home[h] -= 1
        n_away[a] -= 1
        remaining.discard((h, a))
        return saved

    def undo(h, a, saved):
        for t, l, br, tr, lo in saved:
            letter[t], block_run[t], total_run[t], last_opp[t] = l, br, tr, lo
        n_home[h] += 1
        n_away[a] += 1
        remaining.add((h, a))

    def fill_day(d, free, chosen):
        nodes[0] += 1
        if nodes[0] > node_limit:
            raise Unsatisfiable(f"search budget exhausted for {N} teams")
        if not free:
            if all(budget_ok(t) for t in range(N)) and solve(d + 1):
                return True
            return False
        best = None
        for t in sorted(free):
            opts = options(t, free)
            if best is None or len(opts) < len(best[1]):
                best = (t, opts)
                if not opts:
                    return False
        t, opts = best
        for h, a in opts:
            saved = play(h, a)
            chosen.append((h, a))
            if fill_day(d, free - {h, a}, chosen):
                return True
            chosen.pop()
            undo(h, a, saved)
        return False

    def solve(d):
        if d == days:
            return True
        chosen = []
        if fill_day(d, frozenset(range(N)), chosen):
            out[:0] = [(d, h, a) for h, a in chosen]
            return True
        return False

    if not solve(0):
        raise Unsatisfiable(f"no block exists for {N} teams with the given boundary")
    return sorted(out)


def build_ttp2_block(teams, boundary_in=None, prev_opponents=None):
    """Double round-robin on `teams` with runs of at most two and a safe seam.

    boundary_in gives each team's last venue letters before the block (e.g. "AH"),
    prev_opponents the opponent each team met on the day before the block.
    """
    teams = tuple(int(t) for t in teams)
    N = len(teams)
    if N < 2 or N % 2:
        raise Unsatisfiable(f"block needs a positive even team count, got {N}")
    boundary = tuple(boundary_in) if boundary_in is not None else ("",) * N
    if len(boundary) != N:
        raise ValueError("boundary_in must give one entry per team")
    index = {t: i for i, t in enumerate(teams)}
    prev = [None] * N
    if prev_opponents is not None:
        prev = [index.get(p) for p in prev_opponents]
    games = None
    if N == 2:
        # the only double round robin on two teams; it necessarily repeats the pairing
        first = (0, 1) if _trailing_run(boundary[0])[0] != "H" else (1, 0)
        games = [(0, *first), (1, first[1], first[0])]
    elif N >= 6:
        for shift in range(2, N - 1, 2):
            cand = _mirrored(N, shift)
            if _block_ok(N, cand, boundary, prev):
                games = cand
                break
    if games is None:
        games = _search(N, boundary, prev)
    mapped = [(d, teams[h], teams[a]) for d, h, a in games]
    return Block(teams, mapped, boundary)


def block_schedule(block):
    """The block as a standalone schedule over its own team indices."""
    from .schedule import from_games

    index = {t: i for i, t in enumerate(block.teams)}
    N = len(block.teams)
    return from_games(N, block.days, [(d, index[h], index[a]) for d, h, a in block.games])
