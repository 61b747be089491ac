import numpy as np
import pytest

from iocut.iomodel import (ConfigError, ExternalOrderedMap, IoConfig, MemoryBudgetError,
                           blocks_touched, open_session)


def test_fresh_session_counts_nothing():
    s = open_session(IoConfig(16, 4))
    assert (s.stats.block_reads, s.stats.block_writes) == (0, 0)


@pytest.mark.parametrize("m,b", [(4, 4), (15, 4), (16, 1)])
def test_bad_config(m, b):
    with pytest.raises(ConfigError):
        IoConfig(m, b)


def test_only_store_traffic_is_counted():
    s = open_session(IoConfig(1024, 16))
    s.place(np.arange(100).reshape(-1, 1))
    assert s.stats.total == 0
    s.store(np.arange(100).reshape(-1, 1))
    assert s.stats.block_writes == 7


@pytest.mark.parametrize("start,count,blocks", [(0, 8, 2), (0, 1, 1), (3, 5, 2), (4, 0, 0)])
def test_read_charges_blocks_touched(small_session, start, count, blocks):
    seq = small_session.place(np.arange(16).reshape(-1, 1))
    out = seq.read(start, count)
    assert small_session.stats.block_reads == blocks
    assert out[:, 0].tolist() == list(range(start, start + count))


@pytest.mark.parametrize("count,blocks", [(4, 1), (0, 0), (6, 2)])
def test_append_charges_blocks(small_session, count, blocks):
    seq = small_session.empty(1)
    seq.append(np.arange(count).reshape(-1, 1))
    assert small_session.stats.block_writes == blocks
    assert len(seq) == count


def test_read_beyond_memory_is_refused(small_session):
    seq = small_session.place(np.zeros((64, 1), dtype=np.int64))
    with pytest.raises(MemoryBudgetError):
        seq.read(0, 17)


def test_scan_all_matches_scan(small_session):
    seq = small_session.place(np.arange(37).reshape(-1, 1))
    with small_session.measure() as a:
        chunks = list(seq.scan())
    with small_session.measure() as b:
        whole = seq.scan_all()
    assert a.total == b.total == 10
    assert np.array_equal(np.concatenate(chunks), whole)


def test_writer_charges_ceil(small_session):
    w = small_session.writer(2)
    for i in range(9):
        w.extend(np.array([[i, i]]))
    seq = w.close()
    assert len(seq) == 9
    assert small_session.stats.block_writes == 3


def test_blocks_touched():
    assert blocks_touched(0, 0, 4) == 0
    assert blocks_touched(3, 2, 4) == 2
    assert blocks_touched(4, 4, 4) == 1


def test_ordered_map(small_session):
    pq = ExternalOrderedMap(small_session)
    for z in [5, 1, 9, 3]:
        pq.insert((z, z))
    assert pq.peek_max() == (9, 9)
    assert pq.pop_max() == (9, 9)
    assert pq.successor((2, 0)) == (3, 3)
    pq.delete((3, 3))
    assert pq.successor((2, 0)) == (5, 5)
    assert small_session.stats.total > 0
    free = ExternalOrderedMap(None, charged=False)
    free.insert((1, 1))
    assert free.pop_max() == (1, 1)


def test_directory_mode(tmp_path):
    s = open_session(IoConfig(16, 4), store_dir=tmp_path)
    seq = s.store(np.arange(12).reshape(-1, 3))
    seq._flush()
    files = list(tmp_path.glob("*.bin"))
    assert len(files) == 1
    assert np.array_equal(np.fromfile(files[0], dtype="<i8").reshape(-1, 3), seq.peek())
