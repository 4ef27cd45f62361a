"""A thread-safe LRU cache with per-entry expiry and write-behind persistence."""
import json
import os
import pickle
import queue
import threading
import time
from collections import OrderedDict

import yaml


class CacheEntry:
    __slots__ = ('value', 'expires', 'hits')

    def __init__(self, value, ttl):
        self.value = value
        self.expires = time.monotonic() + ttl if ttl else None
        self.hits = 0

    def expired(self, now=None):
        if self.expires is None:
            return False
        return (now or time.monotonic()) >= self.expires


class LRUCache:
    def __init__(self, capacity=1024, default_ttl=None, on_evict=None):
        if capacity <= 0:
            raise ValueError('capacity must be positive')
        self.capacity = capacity
        self.default_ttl = default_ttl
        self.on_evict = on_evict
        self._data = OrderedDict()
        self._lock = threading.RLock()
        self.hits = 0
        self.misses = 0

    def __len__(self):
        with self._lock:
            return len(self._data)

    def __contains__(self, key):
        with self._lock:
            entry = self._data.get(key)
            return entry is not None and not entry.expired()

    def get(self, key, default=None):
        with self._lock:
            entry = self._data.get(key)
            if entry is None:
                self.misses += 1
                return default
            if entry.expired():
                self._evict(key)
                self.misses += 1
                return default
            self._data.move_to_end(key)
            entry.hits += 1
            self.hits += 1
            return entry.value

    def set(self, key, value, ttl=None):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
            self._data[key] = CacheEntry(value, ttl if ttl is not None else self.default_ttl)
            while len(self._data) > self.capacity:
                oldest = next(iter(self._data))
                self._evict(oldest)

    def _evict(self, key):
        entry = self._data.pop(key, None)
        if entry is not None and self.on_evict is not None:
            try:
                self.on_evict(key, entry.value)
            except Exception:
                pass

    def purge_expired(self):
        now = time.monotonic()
        removed = 0
        with self._lock:
            for key in [k for k, e in self._data.items() if e.expired(now)]:
                self._evict(key)
                removed += 1
        return removed

    def stats(self):
        total = self.hits + self.misses
        return {'size': len(self), 'hits': self.hits, 'misses': self.misses,
                'hit_rate': self.hits / total if total else 0.0}


class PersistentCache(LRUCache):
    def __init__(self, path, flush_interval=5.0, fmt='pickle', **kwargs):
        super().__init__(**kwargs)
        self.path = path
        self.fmt = fmt
        self._pending = queue.Queue()
        self._stop = threading.Event()
        self._writer = threading.Thread(target=self._drain, args=(flush_interval,), daemon=True)
        if os.path.exists(path):
            self.load()
        self._writer.start()

    def set(self, key, value, ttl=None):
        super().set(key, value, ttl)
        self._pending.put(key)

    def _drain(self, interval):
        while not self._stop.is_set():
            dirty = False
            try:
                while True:
                    self._pending.get(timeout=interval)
                    dirty = True
            except queue.Empty:
                pass
            if dirty:
                self.flush()

    def snapshot(self):
        with self._lock:
            return {k: e.value for k, e in self._data.items() if not e.expired()}

    def flush(self):
        data = self.snapshot()
        tmp = self.path + '.tmp'
        if self.fmt == 'json':
            with open(tmp, 'w', encoding='utf-8') as fh:
                json.dump(data, fh, sort_keys=True)
        elif self.fmt == 'yaml':
            with open(tmp, 'w', encoding='utf-8') as fh:
                yaml.safe_dump(data, fh)
        else:
            with open(tmp, 'wb') as fh:
                pickle.dump(data, fh)
        os.replace(tmp, self.path)

    def load(self):
        if self.fmt == 'json':
            with open(self.path, encoding='utf-8') as fh:
                data = json.load(fh)
        elif self.fmt == 'yaml':
            with open(self.path, encoding='utf-8') as fh:
                data = yaml.safe_load(fh) or {}
        else:
            with open(self.path, 'rb') as fh:
                data = pickle.load(fh)
        for key, value in data.items():
            super().set(key, value)

    def close(self):
        self._stop.set()
        self._writer.join(timeout=1.0)
        self.flush()
