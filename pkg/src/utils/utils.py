import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List


def compute_hash(data: bytes, hash_algo: str = 'md5') -> str:
    hasher = hashlib.new(hash_algo)
    hasher.update(data)
    return hasher.hexdigest()


def config_digest(config: dict) -> str:
    """
    Digest of a configuration dictionary, independent of key order.
    """
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'))
    return compute_hash(canonical.encode('utf-8'), hash_algo='sha256')


def map_ordered(func: Callable[[Any], Any], items: Iterable[Any], workers: int = 1) -> List[Any]:
    """
    Apply func to every item, optionally on a thread pool, returning results in input order.

    Args:
        func: Function of one argument.
        items: Inputs (grid points, sweep cells).
        workers: Pool size; 1 runs sequentially.

    Returns:
        List of results aligned with items.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
