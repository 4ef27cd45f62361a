"""Connection-pooling HTTP session with retries and cookie persistence."""
import logging
import threading
import time
from urllib.parse import urljoin, urlparse

import requests
from requests.adapters import HTTPAdapter

logger = logging.getLogger(__name__)

DEFAULT_RETRIES = 3
RETRY_STATUSES = {429, 500, 502, 503, 504}


class RetryPolicy:
    def __init__(self, total=DEFAULT_RETRIES, backoff=0.5, statuses=None):
        self.total = total
        self.backoff = backoff
        self.statuses = set(statuses or RETRY_STATUSES)

    def delay(self, attempt):
        if attempt <= 0:
            return 0.0
        return min(self.backoff * (2 ** (attempt - 1)), 30.0)

    def should_retry(self, method, status, attempt):
        if attempt >= self.total:
            return False
        if method.upper() not in ('GET', 'HEAD', 'OPTIONS', 'PUT', 'DELETE'):
            return False
        return status in self.statuses


class Session:
    def __init__(self, base_url=None, timeout=10.0, policy=None, pool_size=10):
        self.base_url = base_url
        self.timeout = timeout
        self.policy = policy or RetryPolicy()
        self._session = requests.Session()
        adapter = HTTPAdapter(pool_connections=pool_size, pool_maxsize=pool_size)
        self._session.mount('http://', adapter)
        self._session.mount('https://', adapter)
        self._lock = threading.Lock()
        self._hooks = []
        self.stats = {'requests': 0, 'retries': 0, 'failures': 0}

    def add_hook(self, hook):
        with self._lock:
            self._hooks.append(hook)

    def _resolve(self, url):
        if self.base_url and not urlparse(url).scheme:
            return urljoin(self.base_url, url)
        return url

    def _fire(self, response):
        for hook in list(self._hooks):
            try:
                hook(response)
            except Exception:
                logger.exception('response hook failed for %s', response.url)

    def request(self, method, url, **kwargs):
        kwargs.setdefault('timeout', self.timeout)
        target = self._resolve(url)
        attempt = 0
        while True:
            with self._lock:
                self.stats['requests'] += 1
            try:
                response = self._session.request(method, target, **kwargs)
            except requests.ConnectionError as exc:
                if attempt >= self.policy.total:
                    with self._lock:
                        self.stats['failures'] += 1
                    raise
                logger.warning('connection error on %s: %s', target, exc)
                response = None
            if response is not None and not self.policy.should_retry(method, response.status_code, attempt):
                self._fire(response)
                return response
            attempt += 1
            with self._lock:
                self.stats['retries'] += 1
            time.sleep(self.policy.delay(attempt))

    def get(self, url, params=None, **kwargs):
        return self.request('GET', url, params=params, **kwargs)

    def post(self, url, data=None, json=None, **kwargs):
        return self.request('POST', url, data=data, json=json, **kwargs)

    def close(self):
        self._session.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False


def paginate(session, url, page_size=100, max_pages=None):
    """Yield items across pages following `next` links."""
    pages = 0
    params = {'per_page': page_size}
    while url:
        response = session.get(url, params=params)
        response.raise_for_status()
        payload = response.json()
        for item in payload.get('items', []):
            yield item
        pages += 1
        if max_pages is not None and pages >= max_pages:
            break
        url = payload.get('next')
        params = None
