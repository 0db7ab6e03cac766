import time

from hypothesis import given, strategies as st

from fpplab.parallel import default_threads, map_ordered


@given(st.lists(st.integers()), st.integers(1, 8))
def test_order_preserved(items, threads):
    assert map_ordered(lambda v: 2 * v, items, threads) == [2 * v for v in items]


def test_out_of_order_completion_still_ordered():
    def slow(i):
        time.sleep(0.01 * (5 - i))
        return i
    assert map_ordered(slow, range(5), 5) == list(range(5))


def test_default_threads(monkeypatch):
    monkeypatch.setenv("FPP_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("FPP_THREADS", "junk")
    assert default_threads() >= 1
