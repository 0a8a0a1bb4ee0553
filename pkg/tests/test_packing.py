import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import independent_check, random_instance
from ttpk.errors import BadPairAssignment, BadShape, CoverMismatch, Overlap, TooSmallForPacking
from ttpk.graphalg import cycle_weight, graph_of, k_packing, make_packing
from ttpk.instance import Instance, generate_random_metric, unit_line
from ttpk.packing import (
    PackingOptions,
    build_packing_schedule,
    build_super_structure,
    core_sizes,
    expected_cross_weight,
    expected_w_bar,
    extend_left_super_game,
    extend_normal_super_game,
    extend_right_super_game,
    label_problem,
    make_core_packing,
    optimize_cycle_game_labels,
    optimize_labels,
    plan_slots,
    rotation_sums,
    select_core_set,
    w_bar,
)
from ttpk.schedule import from_games, total_cost, validate

# rows x_1..x_{2k} of a k=3 block: +j hosts y_j, -j plays at y_j (1-based)
NORMAL_K3 = [
    [-1, -2, -3, 1, 2, 3, -4, -5, -6, 4, 5, 6],
    [-2, -3, -1, 2, 3, 1, -5, -6, -4, 5, 6, 4],
    [-3, -1, -2, 3, 1, 2, -6, -4, -5, 6, 4, 5],
    [-4, -5, -6, 4, 5, 6, -1, -2, -3, 1, 2, 3],
    [-5, -6, -4, 5, 6, 4, -2, -3, -1, 2, 3, 1],
    [-6, -4, -5, 6, 4, 5, -3, -1, -2, 3, 1, 2],
]
LEFT_K3 = [
    [-1, -2, 3, 1, 2, -3, -4, -5, 6, 4, 5, -6],
    [-2, -3, 1, 2, 3, -1, -5, -6, 4, 5, 6, -4],
    [-3, -1, 2, 3, 1, -2, -6, -4, 5, 6, 4, -5],
    [-4, -5, 6, 4, 5, -6, -1, -2, 3, 1, 2, -3],
    [-5, -6, 4, 5, 6, -4, -2, -3, 1, 2, 3, -1],
    [-6, -4, 5, 6, 4, -5, -3, -1, 2, 3, 1, -2],
]
RIGHT_K3 = [
    [-1, 3, -5, 1, -3, 5, -7, 2, -4, 7, -2, 4],
    [-7, 2, -4, 7, -2, 4, -6, 1, -3, 6, -1, 3],
    [-6, 1, -3, 6, -1, 3, -5, 7, -2, 5, -7, 2],
    [-5, 7, -2, 5, -7, 2, -4, 6, -1, 4, -6, 1],
    [-4, 6, -1, 4, -6, 1, -3, 5, -7, 3, -5, 7],
    [-3, 5, -7, 3, -5, 7, -2, 4, -6, 2, -4, 6],
    [-2, 4, -6, 2, -4, 6, -1, 3, -5, 1, -3, 5],
]


def x_rows(games, xs, ys, days):
    pos = {y: j + 1 for j, y in enumerate(ys)}
    rows = {x: [0] * days for x in xs}
    for d, h, a in games:
        if h in rows:
            rows[h][d] = pos[a]
        if a in rows:
            rows[a][d] = -pos[h]
    return [rows[x] for x in xs]


def flat(n, w=1):
    d = np.full((n, n), w, dtype=np.int64)
    np.fill_diagonal(d, 0)
    return Instance(n, d)


def test_core_sizes():
    assert core_sizes(76, 3) == (12, 72, 2)
    assert core_sizes(72, 3) == (12, 72, 0)
    assert core_sizes(130, 4) == (16, 128, 1)


def test_core_set_ties_go_to_low_indices():
    S, S_bar = select_core_set(flat(76), 3)
    assert S == tuple(range(72)) and S_bar == (72, 73, 74, 75)
    with pytest.raises(TooSmallForPacking):
        select_core_set(flat(70), 3)


def test_core_set_takes_heaviest_teams():
    inst = generate_random_metric(76, 4)
    S, S_bar = select_core_set(inst, 3)
    deg = inst.degree()
    assert min(deg[list(S)]) >= max(deg[list(S_bar)])
    assert deg[list(S)].sum() * 76 >= 72 * deg.sum()


def test_identity_structure():
    inst = random_instance(12, 0)
    p = make_packing(inst.dist, "k_cycle", 3, [(0, 1, 2), (3, 4, 5), (6, 7, 8), (9, 10, 11)])
    ss = build_super_structure(inst, 3, p, core=(tuple(range(12)), ()))
    assert ss.super_teams == ((0, 1, 2, 3, 4, 5), (6, 7, 8, 9, 10, 11))
    d = inst.dist
    assert ss.super_cross(0, 1) == pytest.approx(d[:6, 6:].sum())
    assert ss.super_inner(0) == pytest.approx(d[:6, :6].sum() / 2)
    with pytest.raises(CoverMismatch):
        build_super_structure(inst, 3, p, sigma=(0, 0, 1, 2), core=(tuple(range(12)), ()))


@pytest.mark.parametrize("seed", range(5))
def test_super_team_inner_weight(seed):
    inst = generate_random_metric(72, seed)
    p = make_core_packing(inst, 3)
    ss = build_super_structure(inst, 3, p)
    for i in range(ss.m):
        assert ss.super_inner(i) <= 3 * ss.cross[2 * i, 2 * i + 1] + 1e-9


def meets(plan):
    seen = {}
    for slot in plan.slots:
        for g in slot:
            key = frozenset((g.away, g.home))
            seen[key] = seen.get(key, 0) + 1
    return seen


def test_slot_plan_ten_two():
    plan = plan_slots(10, 2)
    assert len(plan.slots) == 9
    for slot in plan.slots[:-1]:
        kinds = sorted(g.kind for g in slot)
        assert kinds == ["left", "normal", "normal", "right", "right"]
    assert sorted(g.kind for g in plan.slots[-1]) == ["left", "left", "left", "right", "right"]
    assert [len(c) for c in plan.cycles[0]] == [9]
    assert [len(c) for c in plan.cycles[1]] == [3, 3, 3]
    seen = meets(plan)
    assert len(seen) == 45 and set(seen.values()) == {1}


def test_slot_plan_four_zero():
    plan = plan_slots(4, 0)
    assert len(plan.slots) == 3
    for slot in plan.slots[:-1]:
        assert sorted(g.kind for g in slot) == ["left", "normal"]
    assert [g.kind for g in plan.slots[-1]] == ["left", "left"]
    assert set(meets(plan).values()) == {1} and len(meets(plan)) == 6


def test_slot_plan_shape_errors():
    with pytest.raises(BadShape):
        plan_slots(6, 3)
    with pytest.raises(BadShape):
        plan_slots(7, 0)


@given(st.integers(1, 12).map(lambda h: 2 * h).flatmap(lambda m: st.tuples(st.just(m), st.integers(0, (m - 1) // 2))))
def test_slot_plan_invariants(shape):
    m, r = shape
    plan = plan_slots(m, r)
    seen = meets(plan)
    assert len(seen) == m * (m - 1) // 2 and set(seen.values()) == {1}
    for slot in plan.slots:
        assert len(slot) == m // 2
        assert sum(g.kind == "left" for g in slot) >= 1
        assert sum(g.kind == "right" for g in slot) == r
        assert sorted(t for g in slot for t in (g.away, g.home)) == list(range(m))
    assert all(g.kind != "normal" for g in plan.slots[-1])
    for cycles in plan.cycles:
        lengths = {len(c) for c in cycles}
        assert len(lengths) == 1
        (length,) = lengths
        assert length % 2 == 1 and length * len(cycles) == m - 1


def test_normal_block_grid():
    xs, ys = list(range(6)), list(range(6, 12))
    games, recs = extend_normal_super_game(xs, ys, flat(12).dist, optimize=False)
    assert x_rows(games, xs, ys, 12) == NORMAL_K3
    assert len(recs) == 4


def test_left_block_grid():
    xs, ys = list(range(6)), list(range(6, 12))
    games = extend_left_super_game(xs, ys)
    assert x_rows(games, xs, ys, 12) == LEFT_K3


def test_right_block_grid():
    xs, ys = list(range(6)), list(range(6, 12))
    games, deferred = extend_right_super_game(xs, ys, (12, 13), upper_is_x=True)
    assert x_rows(games, xs + [12], ys + [13], 12) == RIGHT_K3
    # everything else between the two 7-team sides, except the pair itself, is deferred
    played = {(h, a) for _, h, a in games}
    left = {(h, a) for h in xs + [12] for a in ys + [13]} | {(a, h) for h in xs + [12] for a in ys + [13]}
    left -= played | {(12, 13), (13, 12)}
    assert len(deferred) == 6
    assert left == {(h, a) for a, h in deferred} | {(a, h) for a, h in deferred}
    assert len(left) == 2 * 7 - 2


def test_right_block_lower_side_gets_second_member():
    games, _ = extend_right_super_game(list(range(6)), list(range(6, 12)), (12, 13), upper_is_x=False)
    assert {a for _, h, a in games if h == 12} <= set(range(6))


def test_block_errors():
    with pytest.raises(Overlap):
        extend_left_super_game([0, 1, 2, 3, 4, 5], [5, 6, 7, 8, 9, 10])
    with pytest.raises(BadPairAssignment):
        extend_right_super_game(list(range(6)), list(range(6, 12)), (3, 12), True)
    with pytest.raises(BadPairAssignment):
        extend_right_super_game(list(range(6)), list(range(6, 12)), (12, 12), True)


def block_patterns(games, teams, days):
    rows = {t: [""] * days for t in teams}
    for d, h, a in games:
        rows[h][d] = "H"
        rows[a][d] = "A"
    return {t: "".join(rows[t]) for t in teams}


@pytest.mark.parametrize("k", [3, 4, 5])
def test_block_venue_patterns(k):
    xs, ys = list(range(2 * k)), list(range(2 * k, 4 * k))
    d = random_instance(4 * k + 2, k).dist
    normal, _ = extend_normal_super_game(xs, ys, d)
    pats = block_patterns(normal, xs + ys, 4 * k)
    base = "A" * k + "H" * k
    assert all(p in (base * 2, base.translate(str.maketrans("AH", "HA")) * 2) for p in pats.values())
    left = extend_left_super_game(xs, ys)
    pats = block_patterns(left, xs + ys, 4 * k)
    shape = "A" * (k - 1) + "H" * k + "A" * k + "H" * k + "A"
    assert all(p in (shape, shape.translate(str.maketrans("AH", "HA"))) for p in pats.values())
    right, _ = extend_right_super_game(xs, ys, (4 * k, 4 * k + 1), True)
    pats = block_patterns(right, xs + ys + [4 * k, 4 * k + 1], 4 * k)
    for p in (*pats.values(), *block_patterns(left, xs + ys, 4 * k).values()):
        assert p[-2:] in ("AH", "HA")
        assert "A" * (k + 1) not in p and "H" * (k + 1) not in p


def block_travel(games, teams, dist):
    """Direct travel inside one block, each team starting and ending at home."""
    days = 1 + max(d for d, _, _ in games)
    venue = {t: [t] * days for t in teams}
    for d, h, a in games:
        venue[a][d] = h
    total = 0.0
    for t in teams:
        path = [t, *venue[t], t]
        total += sum(dist[u, v] for u, v in zip(path, path[1:]))
    return total


def test_rotation_ties_pick_first():
    l0, sums = optimize_cycle_game_labels(flat(6).dist, [0, 1, 2], [3, 4, 5])
    assert l0 == 0 and len(set(sums)) == 1


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("seed", range(6))
def test_rotation_and_block_bound(k, seed):
    inst = random_instance(2 * k, seed)
    d = inst.dist
    xs, ys = list(range(k)), list(range(k, 2 * k))
    l0, sums = optimize_cycle_game_labels(d, xs, ys)
    w_uu = d[np.ix_(xs, ys)].sum()
    assert sums == rotation_sums(d, xs, ys)
    assert sums[l0] == min(sums)
    assert sums[l0] <= 2 * w_uu / k + 1e-9
    # one normal cycle-game in isolation: the first sub-slot of a super-game on k-team halves
    Ux, Uy = xs + [2 * k + i for i in range(k)], ys + [3 * k + i for i in range(k)]
    big = random_instance(4 * k, seed)
    games, recs = extend_normal_super_game(Ux, Uy, big.dist)
    first = [(dd, h, a) for dd, h, a in games if dd < 2 * k and (h in xs + ys or a in xs + ys)]
    rec = recs[0]
    assert rec.weight == pytest.approx(block_travel(first, xs + ys, big.dist))
    assert rec.weight <= rec.bound + 1e-9


def test_flat_labels_are_identity():
    inst = flat(72)
    p = make_core_packing(inst, 3)
    plan, ss, coef = label_problem(inst, 3, p)
    sigma = optimize_labels(coef, ss.cross, ss.cyc)
    assert sigma == tuple(range(24))
    rng = np.random.default_rng(0)
    vals = {round(w_bar(coef, ss.cross, ss.cyc, rng.permutation(24)), 6) for _ in range(5)}
    assert len(vals) == 1


def test_expected_cross_weight_by_sampling():
    inst = generate_random_metric(76, 2)
    p = make_core_packing(inst, 3)
    _, ss, coef = label_problem(inst, 3, p)
    X = ss.cross
    rng = np.random.default_rng(1)
    draws = [X[tuple(rng.choice(24, 2, replace=False))] for _ in range(20000)]
    exact = expected_cross_weight(X)
    assert np.mean(draws) == pytest.approx(exact, rel=0.02)
    samples = [w_bar(coef, X, ss.cyc, rng.permutation(24)) for _ in range(2000)]
    assert np.mean(samples) == pytest.approx(expected_w_bar(coef, X, ss.cyc), rel=0.01)


@pytest.mark.parametrize("seed", range(3))
def test_derandomized_beats_average(seed):
    inst = generate_random_metric(76, seed)
    p = make_core_packing(inst, 3)
    _, ss, coef = label_problem(inst, 3, p)
    sigma = optimize_labels(coef, ss.cross, ss.cyc, "derandomized")
    rng = np.random.default_rng(seed)
    mean = np.mean([w_bar(coef, ss.cross, ss.cyc, rng.permutation(24)) for _ in range(200)])
    assert w_bar(coef, ss.cross, ss.cyc, sigma) <= mean
    assert w_bar(coef, ss.cross, ss.cyc, sigma) <= expected_w_bar(coef, ss.cross, ss.cyc) + 1e-6


def test_randomized_labels_reproducible():
    inst = generate_random_metric(72, 0)
    p = make_core_packing(inst, 3)
    _, ss, coef = label_problem(inst, 3, p)
    a = optimize_labels(coef, ss.cross, ss.cyc, "randomized", seed=5, trials=4)
    b = optimize_labels(coef, ss.cross, ss.cyc, "randomized", seed=5, trials=4)
    assert a == b and sorted(a) == list(range(24))
    with pytest.raises(ValueError):
        optimize_labels(coef, ss.cross, ss.cyc, "magic")


def test_line_instance_schedule():
    inst = unit_line(76)
    res = build_packing_schedule(inst, 3, opts=PackingOptions(strategy="line_blocks"))
    assert validate(res.schedule, 3).ok


def test_no_pairs_means_no_right_games():
    inst = generate_random_metric(72, 3)
    res = build_packing_schedule(inst, 3)
    assert validate(res.schedule, 3).ok
    assert all(g.kind != "right" for slot in res.plan.slots for g in slot)
    assert res.W["W_d"] == 0 and res.W["W_a"] == 0


def test_zero_instance():
    inst = Instance(72, np.zeros((72, 72)))
    res = build_packing_schedule(inst, 3)
    assert total_cost(res.schedule, inst) == 0
    assert res.W_bar == 0


def test_path_packing_is_closed():
    inst = generate_random_metric(74, 1)
    S, S_bar = select_core_set(inst, 3)
    p = k_packing(graph_of(inst, S), 3, "k_path", "greedy_local")
    res = build_packing_schedule(inst, 3, packing=p)
    assert validate(res.schedule, 3).ok
    weights = [cycle_weight(inst.dist, c) for c in res.structure.cycle_teams]
    assert len(weights) == 24


def test_too_small():
    with pytest.raises(TooSmallForPacking):
        build_packing_schedule(generate_random_metric(70, 0), 3)


@pytest.mark.parametrize("k", [3, 4])
def test_feasible_near_threshold(k):
    # every even n from 8k^2 to 8k^2 + 20, five seeds each
    for n in range(8 * k * k, 8 * k * k + 22, 2):
        for seed in range(5):
            inst = generate_random_metric(n, seed)
            res = build_packing_schedule(inst, k, opts=PackingOptions(mode="randomized", seed=seed))
            assert independent_check(res.schedule.table.tolist(), k) == (True, True, True), (n, seed)
            cost = total_cost(res.schedule, inst)
            assert cost <= res.bound + 1e-6
            assert res.bound <= res.W_bar + 1e-6 * res.W_bar
            assert all(rc.weight <= rc.bound + 1e-9 for rc in res.records)


def test_schedule_game_set_is_complete():
    inst = generate_random_metric(80, 0)
    res = build_packing_schedule(inst, 3)
    s = res.schedule
    rebuilt = from_games(80, s.days, s.games())
    assert rebuilt == s
