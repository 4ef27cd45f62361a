"""Priority job scheduler with worker threads, retries and cron-like triggers."""
import heapq
import itertools
import logging
import threading
import time
import traceback
from datetime import datetime, timedelta

log = logging.getLogger('scheduler')


class JobFailed(RuntimeError):
    pass


class Job:
    _ids = itertools.count(1)

    def __init__(self, func, args=(), kwargs=None, priority=10, retries=0, interval=None, name=None):
        self.id = next(Job._ids)
        self.func = func
        self.args = args
        self.kwargs = kwargs or {}
        self.priority = priority
        self.retries = retries
        self.interval = interval
        self.name = name or getattr(func, '__name__', 'job-%d' % self.id)
        self.attempts = 0
        self.last_error = None
        self.result = None
        self.done = threading.Event()

    def __lt__(self, other):
        return (self.priority, self.id) < (other.priority, other.id)

    def run(self):
        self.attempts += 1
        started = time.perf_counter()
        try:
            self.result = self.func(*self.args, **self.kwargs)
            return True
        except Exception as exc:
            self.last_error = ''.join(traceback.format_exception_only(type(exc), exc)).strip()
            log.warning('job %s failed on attempt %d: %s', self.name, self.attempts, self.last_error)
            return False
        finally:
            log.debug('job %s took %.3fs', self.name, time.perf_counter() - started)


class Scheduler:
    def __init__(self, workers=4, clock=time.monotonic):
        self.clock = clock
        self._queue = []
        self._cond = threading.Condition()
        self._threads = []
        self._stopping = False
        self.completed = []
        self.failed = []
        for i in range(workers):
            t = threading.Thread(target=self._worker, name='worker-%d' % i, daemon=True)
            self._threads.append(t)

    def start(self):
        for t in self._threads:
            t.start()
        return self

    def submit(self, job, delay=0.0):
        with self._cond:
            heapq.heappush(self._queue, (self.clock() + delay, job))
            self._cond.notify()
        return job

    def every(self, seconds, func, *args, **kwargs):
        job = Job(func, args, kwargs, interval=seconds)
        return self.submit(job)

    def _next(self):
        with self._cond:
            while True:
                if self._stopping and not self._queue:
                    return None
                if self._queue:
                    due, job = self._queue[0]
                    wait = due - self.clock()
                    if wait <= 0:
                        heapq.heappop(self._queue)
                        return job
                    self._cond.wait(timeout=min(wait, 1.0))
                else:
                    self._cond.wait(timeout=1.0)

    def _worker(self):
        while True:
            job = self._next()
            if job is None:
                return
            ok = job.run()
            if ok:
                self.completed.append(job)
                if job.interval and not self._stopping:
                    self.submit(job, delay=job.interval)
                    continue
                job.done.set()
            elif job.attempts <= job.retries:
                backoff = min(2 ** job.attempts, 60)
                self.submit(job, delay=backoff)
            else:
                self.failed.append(job)
                job.done.set()

    def shutdown(self, wait=True, timeout=None):
        with self._cond:
            self._stopping = True
            self._cond.notify_all()
        if wait:
            deadline = None if timeout is None else self.clock() + timeout
            for t in self._threads:
                remaining = None if deadline is None else max(deadline - self.clock(), 0)
                t.join(remaining)

    def pending(self):
        with self._cond:
            return [job.name for _, job in sorted(self._queue)]


def next_fire_time(spec, now=None):
    """Next datetime matching a `minute hour` spec where * matches anything."""
    now = now or datetime.now()
    minute_spec, hour_spec = spec.split()
    candidate = now.replace(second=0, microsecond=0) + timedelta(minutes=1)
    for _ in range(24 * 60):
        minute_ok = minute_spec == '*' or candidate.minute == int(minute_spec)
        hour_ok = hour_spec == '*' or candidate.hour == int(hour_spec)
        if minute_ok and hour_ok:
            return candidate
        candidate += timedelta(minutes=1)
    raise ValueError('spec %r never fires' % spec)
