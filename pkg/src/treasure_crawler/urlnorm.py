"""URL resolution and canonicalization.

Canonical form is the frontier's deduplication key: lowercase scheme and
host, default port stripped, fragment removed, percent-encoding normalized
(unreserved octets decoded, remaining triplets uppercased), empty path
mapped to "/". Only http and https are accepted.
"""

from __future__ import annotations

import string
from urllib.parse import quote, urljoin, urlsplit, urlunsplit

ACCEPTED_SCHEMES = frozenset({"http", "https"})

_UNRESERVED = frozenset(string.ascii_letters + string.digits + "-._~")
_HEX = frozenset(string.hexdigits)
# RFC 3986 pchar plus "/" and "%"; anything else gets percent-encoded
_PATH_SAFE = "%/:@!$&'()*+,;=-._~"


def _normalize_percent(text: str) -> str:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "%" and i + 2 < n and text[i + 1] in _HEX and text[i + 2] in _HEX:
            decoded = chr(int(text[i + 1 : i + 3], 16))
            if decoded in _UNRESERVED:
                out.append(decoded)
            else:
                out.append("%" + text[i + 1 : i + 3].upper())
            i += 3
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def canonicalize(url: str) -> str | None:
    """Canonical form of an absolute http(s) URL, or None if unacceptable."""
    try:
        parts = urlsplit(url)
    except ValueError:
        return None
    scheme = parts.scheme.lower()
    if scheme not in ACCEPTED_SCHEMES or not parts.hostname:
        return None
    host = parts.hostname.lower()
    try:
        port = parts.port
    except ValueError:
        return None
    if port is not None and not (
        (scheme == "http" and port == 80) or (scheme == "https" and port == 443)
    ):
        host = f"{host}:{port}"
    path = quote(_normalize_percent(parts.path), safe=_PATH_SAFE) or "/"
    query = quote(_normalize_percent(parts.query), safe=_PATH_SAFE + "?")
    return urlunsplit((scheme, host, path, query, ""))


def resolve_url(base: str, href: str) -> str | None:
    """RFC-3986 resolution of href against an absolute base, canonicalized.

    Returns None for unresolvable references and non-http(s) schemes
    (mailto, javascript, data, ...); callers drop and count those.
    """
    href = href.strip()
    if not href:
        return canonicalize(base)
    try:
        joined = urljoin(base, href)
    except ValueError:
        return None
    return canonicalize(joined)
