"""Robot exclusion: the original robots.txt format.

User-agent groups with Disallow path prefixes; an empty Disallow allows
everything. Agent matching is a case-insensitive substring test with '*' as
the catch-all. Anything we cannot fetch or parse defaults to allowed, and
rules are cached per host with a TTL.
"""

from __future__ import annotations

import logging
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import urlsplit

logger = logging.getLogger(__name__)

DEFAULT_TTL = 3600.0


@dataclass
class RobotsRules:
    # (agent patterns, disallow prefixes) per group, in file order
    groups: list[tuple[list[str], list[str]]] = field(default_factory=list)

    def _group_for(self, user_agent: str) -> list[str] | None:
        ua = user_agent.lower()
        fallback = None
        for agents, disallows in self.groups:
            for agent in agents:
                if agent == "*":
                    if fallback is None:
                        fallback = disallows
                elif agent in ua:
                    return disallows
        return fallback

    def allows(self, user_agent: str, path: str) -> bool:
        disallows = self._group_for(user_agent)
        if disallows is None:
            return True
        return not any(path.startswith(prefix) for prefix in disallows)


def parse_robots(text: str) -> RobotsRules:
    rules = RobotsRules()
    agents: list[str] = []
    disallows: list[str] = []
    in_rules = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or ":" not in line:
            continue
        key, _, value = line.partition(":")
        key = key.strip().lower()
        value = value.strip()
        if key == "user-agent":
            if in_rules:
                rules.groups.append((agents, disallows))
                agents, disallows = [], []
                in_rules = False
            agents.append(value.lower())
        elif key == "disallow" and agents:
            in_rules = True
            if value:
                disallows.append(value)
        # any other field: ignored per the original format
    if agents:
        rules.groups.append((agents, disallows))
    return rules


class HostRulesCache:
    """Per-host robots rules with a TTL; fetch failures count and allow."""

    def __init__(
        self,
        fetch_text: Callable[[str], str | None],
        ttl: float = DEFAULT_TTL,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._fetch_text = fetch_text
        self._ttl = ttl
        self._clock = clock
        self._cache: dict[str, tuple[float, RobotsRules | None]] = {}
        self.fetch_failures = 0

    def rules_for(self, url: str) -> RobotsRules | None:
        parts = urlsplit(url)
        host_key = f"{parts.scheme}://{parts.netloc}"
        now = self._clock()
        cached = self._cache.get(host_key)
        if cached and cached[0] > now:
            return cached[1]
        text = self._fetch_text(host_key + "/robots.txt")
        if text is None:
            self.fetch_failures += 1
            rules = None
        else:
            rules = parse_robots(text)
        self._cache[host_key] = (now + self._ttl, rules)
        return rules


def robots_allowed(cache: HostRulesCache, url: str, user_agent: str) -> bool:
    """True when the host's rules (if any) permit fetching the URL's path."""
    rules = cache.rules_for(url)
    if rules is None:
        return True
    path = urlsplit(url).path or "/"
    return rules.allows(user_agent, path)


def urllib_robots_fetcher(user_agent: str, timeout: float = 10.0) -> Callable[[str], str | None]:
    """Fetcher for live crawls: GET robots.txt, None on any failure."""

    def fetch(url: str) -> str | None:
        request = urllib.request.Request(url, headers={"User-Agent": user_agent})
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                if response.status != 200:
                    return None
                return response.read(512 * 1024).decode("utf-8", errors="replace")
        except (urllib.error.URLError, OSError, ValueError):
            return None

    return fetch
