import time
import logging
import datetime
import threading
from contextlib import contextmanager
from functools import wraps
from typing import Any, Callable, Dict, Iterator, List, Optional

# Configure logging
logger = logging.getLogger(__name__)

# Cache storage
_memory_cache: Dict[str, Any] = {}
_cache_order: List[str] = []
_cache_stats = {'hits': 0, 'misses': 0}
_cache_lock = threading.RLock()


class PerformanceMonitor:
    """Tracks timings of library operations (CLI commands, sweep cells, spline builds)"""

    # Storage for timing records
    _operation_times: List[Dict[str, Any]] = []
    _operation_stats: Dict[str, Dict[str, float]] = {}

    # Maximum number of entries to keep
    MAX_ENTRIES = 1000

    @classmethod
    def track_operation(cls, name: str, start_time: float, end_time: float, status: str = 'ok') -> None:
        """Record timing information for one operation"""
        duration = end_time - start_time

        with _cache_lock:
            cls._operation_times.append({
                'timestamp': datetime.datetime.now(datetime.timezone.utc).isoformat(),
                'operation': name,
                'duration': duration,
                'status': status
            })

            # Keep list from growing too large
            if len(cls._operation_times) > cls.MAX_ENTRIES:
                cls._operation_times = cls._operation_times[-cls.MAX_ENTRIES:]

            # Update per-operation aggregates
            if name not in cls._operation_stats:
                cls._operation_stats[name] = {
                    'count': 1,
                    'total_time': duration,
                    'min_time': duration,
                    'max_time': duration,
                    'avg_time': duration
                }
            else:
                stats = cls._operation_stats[name]
                stats['count'] += 1
                stats['total_time'] += duration
                stats['min_time'] = min(stats['min_time'], duration)
                stats['max_time'] = max(stats['max_time'], duration)
                stats['avg_time'] = stats['total_time'] / stats['count']

        logger.debug(f"{name} finished in {duration:.4f}s ({status})")

    @classmethod
    @contextmanager
    def timed(cls, name: str) -> Iterator[None]:
        """Time the enclosed block; failures are recorded with status 'error'"""
        start = time.perf_counter()
        status = 'ok'
        try:
            yield
        except Exception:
            status = 'error'
            raise
        finally:
            cls.track_operation(name, start, time.perf_counter(), status)

    @classmethod
    def get_performance_metrics(cls) -> Dict[str, Any]:
        """Get collected timing metrics"""
        with _cache_lock:
            if cls._operation_times:
                times = [entry['duration'] for entry in cls._operation_times]
                avg_time = sum(times) / len(times)
                max_time = max(times)
                p95_time = sorted(times)[int(len(times) * 0.95)]
            else:
                avg_time = 0.0
                max_time = 0.0
                p95_time = 0.0

            # Top 5 slowest operations by average
            slowest = sorted(
                cls._operation_stats.items(),
                key=lambda item: item[1]['avg_time'],
                reverse=True
            )[:5]

            return {
                'timestamp': datetime.datetime.now(datetime.timezone.utc).isoformat(),
                'operation_stats': {
                    'count': len(cls._operation_times),
                    'avg_time': avg_time,
                    'max_time': max_time,
                    'p95_time': p95_time
                },
                'slowest_operations': [
                    {'operation': name, 'avg_time': stats['avg_time'], 'count': int(stats['count'])}
                    for name, stats in slowest
                ],
                'cache': cache_info()
            }

    @classmethod
    def reset(cls) -> None:
        """Drop all recorded timings"""
        with _cache_lock:
            cls._operation_times = []
            cls._operation_stats = {}


def cache_result(maxsize: Optional[int] = 256) -> Callable:
    """
    Decorator to memoize results of pure functions in memory
    maxsize: number of entries kept (oldest evicted first); None keeps everything
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            # Create a cache key from function name and arguments
            key_parts = [func.__qualname__]
            key_parts.extend([repr(arg) for arg in args])
            key_parts.extend([f"{k}={v!r}" for k, v in sorted(kwargs.items())])
            cache_key = ":".join(key_parts)

            with _cache_lock:
                if cache_key in _memory_cache:
                    _cache_stats['hits'] += 1
                    return _memory_cache[cache_key]
                _cache_stats['misses'] += 1

            # Call the function outside the lock and cache the result
            result = func(*args, **kwargs)

            with _cache_lock:
                if cache_key not in _memory_cache:
                    _memory_cache[cache_key] = result
                    _cache_order.append(cache_key)
                    if maxsize is not None:
                        _evict_over(func.__qualname__, maxsize)

            return result
        return wrapper
    return decorator


def _evict_over(prefix: str, maxsize: int) -> None:
    """Evict the oldest entries of one function once it holds more than maxsize"""
    owned = [key for key in _cache_order if key.startswith(prefix + ":")]
    for key in owned[:max(0, len(owned) - maxsize)]:
        _cache_order.remove(key)
        del _memory_cache[key]


def clear_cache(prefix: Optional[str] = None) -> None:
    """
    Clear the memory cache
    prefix: Optional function qualname prefix to clear only matching entries
    """
    with _cache_lock:
        if prefix:
            keys_to_remove = [k for k in _memory_cache.keys() if k.startswith(prefix)]
            for key in keys_to_remove:
                del _memory_cache[key]
                _cache_order.remove(key)
        else:
            _memory_cache.clear()
            _cache_order.clear()
            _cache_stats['hits'] = 0
            _cache_stats['misses'] = 0


def cache_info() -> Dict[str, int]:
    """Current cache size and hit/miss counters"""
    with _cache_lock:
        return {
            'entries': len(_memory_cache),
            'hits': _cache_stats['hits'],
            'misses': _cache_stats['misses']
        }
