"""Corpus snapshots: frozen, manifest-indexed page sets.

A snapshot directory holds a ``manifest.tsv`` plus page files. Manifest
lines are ``url<TAB>relative-path<TAB>status<TAB>content-type``; '#' starts
a comment. Snapshots stand in for the live Web in every deterministic test.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .urlnorm import canonicalize

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    url: str
    path: str
    status: int
    content_type: str


class CorpusSnapshot:
    def __init__(self, root: Path, entries: dict[str, CorpusEntry]):
        self.root = Path(root)
        self.entries = entries

    @classmethod
    def load(cls, root: str | Path, manifest_name: str = MANIFEST_NAME) -> "CorpusSnapshot":
        root = Path(root)
        manifest = root / manifest_name
        if not manifest.is_file():
            raise CorpusError(f"no manifest at {manifest}")
        entries: dict[str, CorpusEntry] = {}
        for lineno, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise CorpusError(f"{manifest}:{lineno}: expected 4 tab-separated fields")
            url, relpath, status, content_type = parts
            canon = canonicalize(url)
            if canon is None:
                raise CorpusError(f"{manifest}:{lineno}: bad URL {url!r}")
            entries[canon] = CorpusEntry(canon, relpath, int(status), content_type)
        return cls(root, entries)

    def __len__(self) -> int:
        return len(self.entries)

    def urls(self) -> list[str]:
        return sorted(self.entries)

    def get(self, url: str) -> CorpusEntry | None:
        canon = canonicalize(url)
        return self.entries.get(canon) if canon else None

    def read(self, entry: CorpusEntry) -> bytes:
        return (self.root / entry.path).read_bytes()

    def pages(self, urls: list[str] | None = None) -> dict[str, bytes]:
        """url -> bytes mapping, for T-Graph construction."""
        selected = self.urls() if urls is None else urls
        out: dict[str, bytes] = {}
        for url in selected:
            entry = self.get(url)
            if entry is None:
                raise CorpusError(f"URL not in snapshot: {url}")
            out[entry.url] = self.read(entry)
        return out


def write_snapshot(
    root: str | Path,
    pages: dict[str, tuple[bytes, int, str]],
    manifest_name: str = MANIFEST_NAME,
) -> CorpusSnapshot:
    """Write pages (url -> (bytes, status, content type)) plus a manifest.

    Page files land under pages/ with deterministic names in URL sort
    order, so identical inputs produce byte-identical snapshots.
    """
    root = Path(root)
    (root / "pages").mkdir(parents=True, exist_ok=True)
    entries: dict[str, CorpusEntry] = {}
    lines = ["# url\tpath\tstatus\tcontent-type"]
    for i, url in enumerate(sorted(pages)):
        canon = canonicalize(url)
        if canon is None:
            raise CorpusError(f"bad URL {url!r}")
        body, status, content_type = pages[url]
        relpath = f"pages/{i:05d}.html"
        (root / relpath).write_bytes(body)
        entries[canon] = CorpusEntry(canon, relpath, status, content_type)
        lines.append(f"{canon}\t{relpath}\t{status}\t{content_type}")
    (root / manifest_name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return CorpusSnapshot(root, entries)
