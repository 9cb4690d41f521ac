"""Fetch adapters: offline corpus snapshots and live HTTP.

Every failure maps into a FetchOutcome variant; a single bad fetch never
aborts the crawl. The live adapter bounds redirects, enforces the page size
cap, applies per-host politeness delays, and records the final URL after
redirects. The corpus adapter resolves URLs in a snapshot manifest and is
fully deterministic.
"""

from __future__ import annotations

import logging
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable
from urllib.parse import urlsplit

from .corpus import CorpusSnapshot

logger = logging.getLogger(__name__)

SUCCESS = "success"
HTTP_ERROR = "http_error"
NETWORK_ERROR = "network_error"
ROBOTS_DENIED = "robots_denied"
SKIPPED = "skipped"

MAX_REDIRECTS = 5


@dataclass
class FetchOutcome:
    url: str
    kind: str
    final_url: str = ""
    body: bytes = b""
    content_type: str = ""
    status: int = 0
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.kind == SUCCESS

    @property
    def is_html(self) -> bool:
        return self.ok and self.content_type.split(";")[0].strip().lower() in (
            "text/html", "application/xhtml+xml", ""
        )


class CorpusFetcher:
    """Resolves URLs against a snapshot; misses behave like a 404."""

    adapter_name = "corpus"

    def __init__(self, snapshot: CorpusSnapshot):
        self.snapshot = snapshot

    def fetch(self, url: str) -> FetchOutcome:
        entry = self.snapshot.get(url)
        if entry is None:
            return FetchOutcome(url, HTTP_ERROR, status=404, detail="not in snapshot")
        body = self.snapshot.read(entry)
        if entry.status != 200:
            return FetchOutcome(
                url, HTTP_ERROR, status=entry.status, detail="stored non-200 status"
            )
        return FetchOutcome(
            url,
            SUCCESS,
            final_url=entry.url,
            body=body,
            content_type=entry.content_type,
            status=entry.status,
        )


class _BoundedRedirects(urllib.request.HTTPRedirectHandler):
    max_redirections = MAX_REDIRECTS


class LiveFetcher:
    """HTTP(S) fetches with timeout, size cap, and per-host delay."""

    adapter_name = "live"

    def __init__(
        self,
        user_agent: str,
        timeout: float = 20.0,
        size_cap: int = 2 * 1024 * 1024,
        delay_ms: int = 1000,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.user_agent = user_agent
        self.timeout = timeout
        self.size_cap = size_cap
        self.delay = delay_ms / 1000.0
        self._sleep = sleep
        self._clock = clock
        self._last_fetch: dict[str, float] = {}
        self._opener = urllib.request.build_opener(_BoundedRedirects())

    def _be_polite(self, host: str) -> None:
        last = self._last_fetch.get(host)
        if last is not None:
            wait = self.delay - (self._clock() - last)
            if wait > 0:
                self._sleep(wait)
        self._last_fetch[host] = self._clock()

    def fetch(self, url: str) -> FetchOutcome:
        host = urlsplit(url).netloc
        self._be_polite(host)
        request = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with self._opener.open(request, timeout=self.timeout) as response:
                body = response.read(self.size_cap + 1)
                if len(body) > self.size_cap:
                    return FetchOutcome(url, SKIPPED, detail="size cap exceeded")
                content_type = response.headers.get("Content-Type", "")
                return FetchOutcome(
                    url,
                    SUCCESS,
                    final_url=response.geturl(),
                    body=body,
                    content_type=content_type,
                    status=response.status,
                )
        except urllib.error.HTTPError as exc:
            if exc.code in (301, 302, 303, 307, 308):
                return FetchOutcome(url, HTTP_ERROR, status=exc.code,
                                    detail="redirect limit exceeded")
            return FetchOutcome(url, HTTP_ERROR, status=exc.code, detail=str(exc.reason))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            return FetchOutcome(url, NETWORK_ERROR, detail=str(exc))
