import logging
import os
import sys

import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from data_io import read_null_distribution, write_null_distribution
from null_distribution import NullDistribution
from utils.cache import NullDistributionCache, generate_cache_key, null_cache_key


def make_distribution(seed: int = 1) -> NullDistribution:
    return NullDistribution(
        draws=(0.1, 0.2, 0.7),
        method="limit-k",
        k=2,
        weights=(0.5, 0.5),
        order="simple",
        reps=3,
        grid_size=100,
        master_seed=seed,
    )


@pytest.fixture
def cache(tmp_path) -> NullDistributionCache:
    return NullDistributionCache(str(tmp_path / "cache"), enabled=True)


# Test cases
def test_set_get_exists_delete(cache):
    key = null_cache_key("limit-k", 2, (0.5, 0.5), 3, 100, 1)
    assert cache.get(key) is None
    assert not cache.exists(key)

    assert cache.set(key, make_distribution()) is True
    assert cache.exists(key)
    assert cache.get(key) == make_distribution()

    assert cache.delete(key, "missing") == 1
    assert not cache.exists(key)


def test_get_returns_default_on_miss(cache):
    sentinel = object()
    assert cache.get("nothing-here", sentinel) is sentinel


def test_corrupt_file_is_a_miss(cache, caplog):
    key = "corrupt"
    cache.set(key, make_distribution())
    cache._get_path(key).write_text("method=limit-k\nnot a number\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        assert cache.get(key) is None
    assert "corrupt" in caplog.text.lower()


def test_disabled_cache_never_reads_or_writes(tmp_path):
    cache = NullDistributionCache(str(tmp_path), enabled=False)
    assert cache.set("k", make_distribution()) is False
    assert cache.get("k") is None
    assert list(tmp_path.iterdir()) == []


def test_get_or_create_simulates_once(cache):
    calls = []

    def factory():
        calls.append(1)
        return make_distribution()

    first = cache.get_or_create("key", factory)
    second = cache.get_or_create("key", factory)
    assert first == second
    assert len(calls) == 1, f"Expected one simulation, got {len(calls)}"


def test_cache_key_fields():
    base = dict(method="finite-sample", k=2, weights=(0.4, 0.6), reps=100, grid=None, seed=1, order="simple", sizes=(4, 6))
    key = null_cache_key(**base)
    assert key == null_cache_key(**{**base, "weights": (0.4 + 1e-12, 0.6 - 1e-12)})
    assert key != null_cache_key(**{**base, "sizes": (40, 60)})
    assert key != null_cache_key(**{**base, "order": "tree(root=1)"})
    assert key != null_cache_key(**{**base, "seed": 2})
    assert key != null_cache_key(**{**base, "statistic": "Tn*"})
    assert len(key) == 64


def test_generate_cache_key_ignores_keyword_order():
    assert generate_cache_key(1, a=1, b=2) == generate_cache_key(1, b=2, a=1)
    assert generate_cache_key(1, a=1) != generate_cache_key(2, a=1)


def test_cache_files_use_the_null_distribution_file_format(cache, tmp_path):
    cache.set("shared", make_distribution())
    assert read_null_distribution(cache._get_path("shared")) == make_distribution()

    exported = tmp_path / "exported.txt"
    write_null_distribution(exported, make_distribution(seed=9))
    cache._get_path("imported").write_bytes(exported.read_bytes())
    assert cache.get("imported") == make_distribution(seed=9)


def test_writes_leave_no_temporary_files(cache):
    cache.set("a", make_distribution())
    cache.set("a", make_distribution(seed=2))
    assert [p.name for p in cache.cache_dir.iterdir()] == [cache._get_path("a").name]
    assert cache.get("a").master_seed == 2


def test_unreadable_entry_is_a_miss(cache, caplog):
    cache._get_path("binary").parent.mkdir(parents=True, exist_ok=True)
    cache._get_path("binary").write_bytes(b"\xff\xfe\x00garbage")
    with caplog.at_level(logging.ERROR):
        assert cache.get("binary", "fallback") == "fallback"
    assert "Cache get failed" in caplog.text
