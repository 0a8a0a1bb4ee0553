import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_itinerary, random_instance
from ttpk.bounds import (
    compute_bounds,
    exact_itinerary_weight,
    itinerary_decomposition,
    ldttp_line_bound,
    line_coefficients,
    optimal_itinerary,
)
from ttpk.canonical import build_hamiltonian_schedule
from ttpk.errors import TooLargeForExact
from ttpk.instance import Instance, from_gaps, generate_random_metric, unit_line
from ttpk.schedule import team_itinerary, total_cost
from ttpk.ttp2 import block_schedule, build_ttp2_block


def flat(n, w=1):
    d = np.full((n, n), w, dtype=np.int64)
    np.fill_diagonal(d, 0)
    return Instance(n, d)


def test_four_flat_teams():
    inst = flat(4)
    assert [exact_itinerary_weight(inst, 3, v) for v in range(4)] == [4, 4, 4, 4]
    b = compute_bounds(inst, 3)
    assert b.itinerary_bound == 16
    assert b.degree_bound == 8
    assert b.best == 16
    assert b.tsp_exact and b.tsp_bound == 16


def test_zero_instance_bounds():
    b = compute_bounds(Instance(6, np.zeros((6, 6), dtype=np.int64)), 3)
    assert (b.degree_bound, b.tsp_bound, b.itinerary_bound, b.best) == (0, 0, 0, 0)
    assert ldttp_line_bound([0] * 5, 3) == 0


def test_line_coefficients_six():
    assert line_coefficients(6, 3) == [14, 16, 12, 16, 14]
    assert ldttp_line_bound([1] * 5, 3) == 72
    assert compute_bounds(unit_line(6), 3).line_bound == 72


@given(st.integers(3, 40), st.integers(2, 8))
def test_line_coefficients_symmetric(n, k):
    c = line_coefficients(n, k)
    assert c == c[::-1]


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("k", [2, 3, 4])
def test_dp_against_exhaustive(seed, k):
    inst = random_instance(6, seed)
    d = inst.dist.tolist()
    for v in range(6):
        assert exact_itinerary_weight(inst, k, v) == pytest.approx(brute_itinerary(d, v, k))


def test_dp_trips_cover_opponents():
    inst = random_instance(8, 3)
    val, trips = optimal_itinerary(inst, 3, 2)
    assert sorted(t for tr in trips for t in tr) == [0, 1, 3, 4, 5, 6, 7]
    assert all(len(tr) <= 3 for tr in trips)
    d = inst.dist
    priced = sum(d[2, tr[0]] + d[tr[-1], 2] + sum(d[a, b] for a, b in zip(tr, tr[1:])) for tr in trips)
    assert priced == pytest.approx(val)


@given(st.integers(0, 10_000), st.sampled_from([6, 8]))
def test_itinerary_monotone_in_k(seed, n):
    inst = random_instance(n, seed)
    vals = [compute_bounds(inst, k).itinerary_bound for k in range(2, n)]
    assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


def test_decomposition_on_flat_six():
    gamma, alpha, beta = itinerary_decomposition(flat(6), 3, 0)
    assert gamma == pytest.approx(4 / 7)
    assert alpha == pytest.approx(2 / 4)
    assert beta == pytest.approx(2 / 3)


def test_decomposition_shares_and_suppression():
    for v in range(6):
        gamma, alpha, beta = itinerary_decomposition(unit_line(6), 3, v)
        assert 0 <= gamma <= 1 and 0 <= alpha <= 1 and 0 <= beta <= 1
    assert itinerary_decomposition(unit_line(6), 4, 0) is None
    assert itinerary_decomposition(flat(6), 5, 0) is None


def test_exact_limit():
    with pytest.raises(TooLargeForExact):
        exact_itinerary_weight(generate_random_metric(14, 0), 3, 0)
    assert compute_bounds(generate_random_metric(14, 0), 3).itinerary_bound is None


@pytest.mark.parametrize("n, k", [(6, 3), (8, 3), (10, 4), (12, 5)])
@pytest.mark.parametrize("seed", range(3))
def test_bounds_below_constructed_schedules(n, k, seed):
    inst = generate_random_metric(n, seed)
    b = compute_bounds(inst, k)
    s = build_hamiltonian_schedule(inst, k)
    cost = total_cost(s, inst)
    for v in (b.degree_bound, b.tsp_bound, b.itinerary_bound):
        assert v <= cost + 1e-6
    for t in range(n):
        assert exact_itinerary_weight(inst, k, t) <= team_itinerary(s, inst, t).total_distance + 1e-9


@given(st.lists(st.integers(0, 9), min_size=5, max_size=9).filter(lambda g: len(g) % 2 == 1))
def test_line_bound_below_schedules(gaps):
    inst = from_gaps(gaps)
    n = inst.n
    b = compute_bounds(inst, 3)
    sched = build_hamiltonian_schedule(inst, 3) if n >= 6 else block_schedule(build_ttp2_block(range(n)))
    cost = total_cost(sched, inst)
    assert b.line_bound <= cost
    assert b.best <= cost + 1e-9
