import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import independent_check
from ttpk.errors import Unsatisfiable
from ttpk.schedule import validate
from ttpk.ttp2 import block_schedule, build_ttp2_block

ENDINGS = ("AH", "HA", "HH", "AA")


def seam_ok(block, boundary):
    for t, b in zip(block.teams, boundary):
        letters = b + block.pattern(t)
        if "HHHH" in letters or "AAAA" in letters:
            return False
    return True


def test_two_teams():
    b = build_ttp2_block([5, 9])
    assert b.days == 2
    assert sorted(b.games) == [(0, 5, 9), (1, 9, 5)]
    assert {b.pattern(5), b.pattern(9)} == {"HA", "AH"}


def test_two_teams_follow_boundary():
    b = build_ttp2_block([5, 9], boundary_in=("HH", "AA"))
    assert b.pattern(5) == "AH"


def test_four_teams_every_ordered_pair_once():
    b = build_ttp2_block(range(4))
    assert b.days == 6
    assert sorted((h, a) for _, h, a in b.games) == [(h, a) for h in range(4) for a in range(4) if h != a]


@pytest.mark.parametrize("size", [4, 6, 8, 10, 12])
@pytest.mark.parametrize("ending", ENDINGS)
def test_uniform_boundary(size, ending):
    boundary = (ending,) * size
    b = build_ttp2_block(range(size), boundary_in=boundary)
    rep = validate(block_schedule(b), 2)
    assert rep.ok
    assert seam_ok(b, boundary)


@given(
    st.sampled_from([4, 6, 8, 10, 12]).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.sampled_from(ENDINGS), min_size=n, max_size=n),
            st.permutations(range(n)),
        )
    )
)
def test_mixed_boundaries(case):
    n, boundary, perm = case
    teams = [10 + 3 * i for i in range(n)]
    # previous-day opponents form a perfect matching of the block's teams
    prev = [None] * n
    for i in range(0, n, 2):
        a, b = perm[i], perm[i + 1]
        prev[a], prev[b] = teams[b], teams[a]
    blk = build_ttp2_block(teams, boundary_in=boundary, prev_opponents=prev)
    s = block_schedule(blk)
    assert independent_check(s.table.tolist(), 2) == (True, True, True)
    assert seam_ok(blk, boundary)
    first = {h: a for d, h, a in blk.games if d == 0} | {a: h for d, h, a in blk.games if d == 0}
    assert all(first[t] != p for t, p in zip(teams, prev))


def test_odd_size_rejected():
    with pytest.raises(Unsatisfiable):
        build_ttp2_block(range(5))
