import itertools
import os

import numpy as np
from hypothesis import HealthCheck, settings

from ttpk.instance import Instance

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def points_metric(n, seed, side=100.0):
    """Euclidean matrix for any n (odd sizes too), used where instances need not be even."""
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, side, size=(n, 2))
    return np.sqrt(((xy[:, None] - xy[None]) ** 2).sum(axis=2))


def random_instance(n, seed, side=100.0):
    # built directly: graph helpers accept odd sizes that the parser refuses
    return Instance(n, points_metric(n, seed, side), name=f"pts{n}_{seed}")


def simulate_cost(table, dist):
    """Walk every team day by day: stay put at home, otherwise go to the host."""
    n, days = len(table), len(table[0])
    total = 0.0
    for t in range(n):
        here = t
        for d in range(days):
            x = int(table[t][d])
            there = t if x > 0 else -x - 1
            total += dist[here][there]
            here = there
        total += dist[here][t]
    return total


def independent_check(table, k):
    """(complete, no_repeat, bounded) recomputed from scratch with plain loops."""
    n, days = len(table), len(table[0])
    hosted = {}
    ok_struct = days == 2 * (n - 1)
    for t in range(n):
        for d in range(days):
            x = int(table[t][d])
            o = abs(x) - 1
            if x == 0 or o == t or int(table[o][d]) != (-(t + 1) if x > 0 else t + 1):
                return False, False, False
            if x > 0:
                hosted[(t, o)] = hosted.get((t, o), 0) + 1
    complete = ok_struct and all(
        hosted.get((a, b), 0) == 1 for a in range(n) for b in range(n) if a != b
    )
    no_repeat = all(
        abs(int(table[t][d])) != abs(int(table[t][d + 1])) for t in range(n) for d in range(days - 1)
    )
    bounded = True
    for t in range(n):
        letters = "".join("H" if int(x) > 0 else "A" for x in table[t])
        if "H" * (k + 1) in letters or "A" * (k + 1) in letters:
            bounded = False
    return complete, no_repeat, bounded


def brute_itinerary(dist, v, k):
    """Minimum over all ordered partitions of v's opponents into trips of at most k stops."""
    opps = [u for u in range(len(dist)) if u != v]

    def trip(seq):
        pos = [v, *seq, v]
        return sum(dist[a][b] for a, b in zip(pos, pos[1:]))

    def rec(rest):
        if not rest:
            return 0.0
        first, others = rest[0], rest[1:]
        best = float("inf")
        for size in range(0, min(k, len(rest)) - 1 + 1):
            for extra in itertools.combinations(others, size):
                group = (first, *extra)
                left = tuple(x for x in others if x not in extra)
                cheapest = min(trip(p) for p in itertools.permutations(group))
                best = min(best, cheapest + rec(left))
        return best

    return rec(tuple(opps))


def brute_matching(mat):
    """Minimum perfect matching weight by recursion over the lowest free vertex."""
    def rec(rest):
        if not rest:
            return 0.0
        a = rest[0]
        return min(mat[a][rest[i]] + rec(rest[1:i] + rest[i + 1:]) for i in range(1, len(rest)))

    return rec(tuple(range(len(mat))))


def brute_tour(mat):
    """Shortest closed tour by enumerating permutations with vertex 0 fixed."""
    n = len(mat)
    best = float("inf")
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        order = (0, *perm, 0)
        best = min(best, sum(mat[a][b] for a, b in zip(order, order[1:])))
    return best


def brute_mst(mat):
    """Minimum spanning tree weight over every labeled tree (Pruefer sequences)."""
    n = len(mat)
    best = float("inf")
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        total = 0.0
        for x in seq:
            leaf = min(v for v in range(n) if degree[v] == 1)
            total += mat[leaf][x]
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [v for v in range(n) if degree[v] == 1]
        best = min(best, total + mat[u][v])
    return best


def brute_partition(mat, k, closed):
    """Cheapest split of all vertices into groups of k, each priced as its best cycle or path."""
    n = len(mat)

    def price(group):
        best = float("inf")
        for p in itertools.permutations(group):
            w = sum(mat[a][b] for a, b in zip(p, p[1:]))
            if closed:
                w += mat[p[-1]][p[0]]
            best = min(best, w)
        return best

    def rec(rest):
        if not rest:
            return 0.0
        first, others = rest[0], rest[1:]
        return min(
            price((first, *extra)) + rec(tuple(x for x in others if x not in extra))
            for extra in itertools.combinations(others, k - 1)
        )

    return rec(tuple(range(n)))


ACCEPTANCE_LINES = []


def acceptance_line(name, ok, detail, seconds):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{seconds:.2f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
