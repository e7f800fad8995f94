"""Comparison-method tests: naive scan, binned prefix sums, reservoir, M4."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import m4_reference, sat_reference
from tracksum.baselines import (
    BaselineError,
    BinnedTable,
    SatResolutionError,
    _round_half_away,
    attr_mask,
    m4_bars,
    m4_query,
    naive_query,
    reservoir_query,
    sat_query,
)
from tracksum.model import CATEGORICAL, EventTable, TimeSpan


def _table(recs, schema=None):
    return EventTable.from_records(recs, schema or {})


# --- naive scan -------------------------------------------------------------------


def test_naive_query_uses_closed_interval():
    table = _table([
        (0, 0, 10, {}),    # leave == window begin: kept
        (0, 30, 40, {}),   # enter == window end: kept
        (0, 11, 29, {}),   # inside
        (0, 0, 9, {}),     # ends before
        (0, 31, 40, {}),   # starts after
        (1, 15, 20, {}),   # wrong track
    ])
    rows = naive_query(table, TimeSpan(10, 30), 0, 0)
    assert rows.tolist() == [0, 1, 2]


def test_naive_query_mask_narrows():
    table = _table(
        [(0, 0, 5, {"op": "a"}), (0, 1, 6, {"op": "b"}), (0, 2, 7, {"op": "a"})],
        {"op": CATEGORICAL},
    )
    mask = attr_mask(table, "op", "a")
    assert naive_query(table, TimeSpan(0, 10), 0, 0, mask).tolist() == [0, 2]
    assert not attr_mask(table, "op", "zzz").any()
    assert not attr_mask(table, "nope", "a").any()


# --- reservoir --------------------------------------------------------------------


def test_reservoir_small_input_returned_whole():
    rows = np.arange(7)
    out = reservoir_query(rows, 10, seed=1)
    assert out.tolist() == rows.tolist()
    out[0] = 99  # must be a copy
    assert rows[0] == 0


def test_reservoir_zero_k():
    assert reservoir_query(np.arange(5), 0).size == 0


def test_reservoir_negative_k_rejected():
    with pytest.raises(BaselineError):
        reservoir_query(np.arange(5), -1)


def test_reservoir_replay_is_identical():
    rows = np.arange(10_000)
    a = reservoir_query(rows, 128, seed=100)
    b = reservoir_query(rows, 128, seed=100)
    assert a.tolist() == b.tolist()
    c = reservoir_query(rows, 128, seed=101)
    assert a.tolist() != c.tolist()


@settings(max_examples=40)
@given(st.integers(0, 500), st.integers(0, 60), st.integers(0, 2**31 - 1))
def test_reservoir_is_a_sample_of_the_input(n, k, seed):
    rows = np.arange(1000, 1000 + n)
    out = reservoir_query(rows, k, seed=seed)
    assert len(out) == min(n, k)
    assert set(out.tolist()) <= set(rows.tolist())
    assert len(set(out.tolist())) == len(out)


# --- binned prefix sums -----------------------------------------------------------


def test_binned_table_validation():
    table = _table([(0, 0, 5, {})])
    with pytest.raises(BaselineError):
        BinnedTable.build(table, 0)
    with pytest.raises(BaselineError):
        BinnedTable.build(table, 4, extent=TimeSpan(3, 3))


def test_sat_finer_than_grid_raises():
    table = _table([(0, 0, 1000, {})])
    binned = BinnedTable.build(table, 10, extent=TimeSpan(0, 1000))
    with pytest.raises(SatResolutionError, match="finer than"):
        sat_query(binned, TimeSpan(0, 50), 0, 0, 10)


def test_sat_counts_match_brute_force():
    rng = np.random.default_rng(41)
    for trial in range(60):
        n = int(rng.integers(1, 60))
        ext_len = int(rng.integers(50, 3000))
        extent = TimeSpan(0, ext_len)
        enter = rng.integers(0, ext_len, size=n)
        dur = rng.integers(0, ext_len // 3 + 1, size=n)
        dur[rng.random(n) < 0.25] = 0
        leave = np.minimum(enter + dur, ext_len)
        recs = [(0, int(e), int(l), {}) for e, l in zip(enter, leave)]
        table = _table(recs)
        bins = int(rng.integers(4, 200))
        binned = BinnedTable.build(table, bins, extent=extent)
        cols = int(rng.integers(1, bins + 1))
        lo = int(rng.integers(0, ext_len - 1))
        min_len = -(-cols * ext_len // bins)  # narrowest window the grid resolves
        hi = min(lo + max(min_len, int(rng.integers(min_len, ext_len + 1))), ext_len)
        if hi <= lo:
            lo, hi = 0, ext_len
        window = TimeSpan(lo, hi)
        if binned.bin_width_exceeds(window, cols):
            continue
        got = sat_query(binned, window, 0, 0, cols)[0]
        want = sat_reference(enter, leave, extent, bins, window, cols)
        assert got.tolist() == want, f"trial {trial}"


def test_sat_empty_bins_hold_nothing():
    # more bins than time units leaves some bins with an empty range; a
    # spanning event must not leak presence into them
    enter = np.array([0, 1])
    leave = np.array([5, 1])
    extent = TimeSpan(0, 5)
    table = _table([(0, int(e), int(l), {}) for e, l in zip(enter, leave)])
    binned = BinnedTable.build(table, 8, extent=extent)
    # one column over [1, 3) sums bins 1..3 and the middle bin is zero-width;
    # the spanning event sits in bins 1 and 3 only, the instant in bin 1
    assert sat_query(binned, TimeSpan(1, 3), 0, 0, 1)[0].tolist() == [3]
    got = sat_query(binned, extent, 0, 0, 8)[0]
    assert got.tolist() == sat_reference(enter, leave, extent, 8, extent, 8)


def test_sat_skips_empty_tracks():
    table = _table([(2, 0, 10, {})])
    binned = BinnedTable.build(table, 4, extent=TimeSpan(0, 16))
    out = sat_query(binned, TimeSpan(0, 16), 0, 2, 4)
    assert sorted(out) == [2]


# --- M4 ---------------------------------------------------------------------------


def test_round_half_away_ties():
    num = np.array([5, -5, 3, -3, 7, 0, 2])
    assert _round_half_away(num, 2).tolist() == [3, -3, 2, -2, 4, 0, 1]
    assert _round_half_away(np.array([1, 2, 3]), 3).tolist() == [0, 1, 1]


def test_m4_validation():
    with pytest.raises(BaselineError):
        m4_query(np.array([0]), np.array([1]), TimeSpan(5, 5), 4)
    with pytest.raises(BaselineError):
        m4_query(np.array([0]), np.array([1]), TimeSpan(0, 10), 0)


def test_m4_empty_input():
    k, at, ct = m4_query(np.array([], dtype=np.int64), np.array([], dtype=np.int64), TimeSpan(0, 10), 4)
    assert len(k) == len(at) == len(ct) == 0


def test_m4_matches_reference_interpreter():
    rng = np.random.default_rng(77)
    for trial in range(80):
        n = int(rng.integers(1, 80))
        begin = int(rng.integers(0, 500))
        length = int(rng.integers(10, 4000))
        # events may poke out of the window on both sides
        enter = rng.integers(max(0, begin - length // 2), begin + length, size=n)
        leave = enter + rng.integers(0, length, size=n)
        bins = int(rng.integers(1, 60))
        k, at, ct = m4_query(enter, leave, TimeSpan(begin, begin + length), bins)
        got = list(zip(k.tolist(), at.tolist(), ct.tolist()))
        want = m4_reference(enter, leave, begin, begin + length, bins)
        assert got == want, f"trial {trial}"


def test_m4_bars_pairing():
    # rows for events [1,5) and [2,8): all endpoints survive
    at = np.array([1, 2, 5, 8])
    ct = np.array([1, 1, 0, 0])
    bars, marks = m4_bars(at, ct)
    assert sorted(bars) == [(1, 8), (2, 5)]  # LIFO pairing nests the bars
    assert marks == []


def test_m4_bars_unpaired_rows_become_marks():
    # a leave with no prior enter, then an enter never closed
    at = np.array([3, 10])
    ct = np.array([0, 1])
    bars, marks = m4_bars(at, ct)
    assert bars == []
    assert sorted(marks) == [3, 10]


def test_m4_bars_instant_rows():
    # at equal timestamps the leave is processed first so back-to-back bars
    # pair correctly; an instant's two rows therefore fall through to marks
    # at the same column, which paints identically to a zero-width bar
    at = np.array([4, 4])
    ct = np.array([1, 0])
    bars, marks = m4_bars(at, ct)
    assert bars == []
    assert marks == [4, 4]


def test_m4_bars_back_to_back_events_do_not_cross():
    # [1,4) then [4,8): the shared timestamp must close the first bar before
    # opening the second
    at = np.array([1, 4, 4, 8])
    ct = np.array([1, 0, 1, 0])
    bars, marks = m4_bars(at, ct)
    assert sorted(bars) == [(1, 4), (4, 8)]
    assert marks == []
