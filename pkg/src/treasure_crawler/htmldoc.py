"""Tolerant HTML parsing and structural extraction.

Builds a tag tree from arbitrary bytes (recovering from unclosed and
misnested tags) and extracts what the relevance machinery consumes: the main
heading, the h1-h6 section nesting, paragraphs, and every link together with
its anchor text and topical boundary (the enclosing paragraph's words, or
all items of the enclosing list).

Recovery rules, documented here and exercised by the fixtures:
  * void elements never open a scope;
  * a block-level start tag implicitly closes an open <p>; <li>, <dt>/<dd>,
    <tr>, <td>/<th> and <option> implicitly close their siblings;
  * an end tag with no matching open element is ignored; one matching a
    non-innermost element closes everything inside it;
  * <html>, <head> and <body> map onto a synthesized skeleton, so every
    tree has exactly one root with a head and a body.

script/style contents and comments are invisible everywhere.
"""

from __future__ import annotations

import codecs
import logging
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .porter import stem
from .textproc import tokenize
from .urlnorm import resolve_url

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 2 * 1024 * 1024

VOID_TAGS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link",
    "meta", "param", "source", "track", "wbr",
})

HEADING_TAGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})

BLOCK_TAGS = frozenset({
    "address", "article", "aside", "blockquote", "body", "dd", "div", "dl",
    "dt", "fieldset", "figcaption", "figure", "footer", "form", "header",
    "li", "main", "nav", "ol", "p", "pre", "section", "table", "tbody",
    "td", "tfoot", "th", "thead", "tr", "ul",
}) | HEADING_TAGS

_INVISIBLE_TAGS = frozenset({"script", "style", "head", "title"})

_P_CLOSERS = frozenset({
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset",
    "figure", "footer", "form", "header", "hr", "main", "nav", "ol", "p",
    "pre", "section", "table", "ul",
}) | HEADING_TAGS

# start of key closes open elements of values (nearest-first)
_SIBLING_CLOSERS = {
    "li": {"li"},
    "dt": {"dt", "dd"},
    "dd": {"dt", "dd"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "option": {"option"},
}


class PageTooLarge(Exception):
    """Input exceeds the configured page size cap; the page is skipped."""


@dataclass
class TextNode:
    text: str


@dataclass
class Element:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list = field(default_factory=list)
    parent: "Element | None" = field(default=None, repr=False, compare=False)

    def append(self, node) -> None:
        if isinstance(node, Element):
            node.parent = self
        self.children.append(node)

    def iter_elements(self):
        for child in self.children:
            if isinstance(child, Element):
                yield child
                yield from child.iter_elements()

    def find(self, tag: str) -> "Element | None":
        for el in self.iter_elements():
            if el.tag == tag:
                return el
        return None


class TagTree:
    """One root <html> element with synthesized <head> and <body>."""

    def __init__(self, root: Element, head: Element, body: Element):
        self.root = root
        self.head = head
        self.body = body

    def iter_elements(self):
        return self.root.iter_elements()


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = Element("html")
        self.head = Element("head")
        self.body = Element("body")
        self.root.append(self.head)
        self.root.append(self.body)
        self._stack: list[Element] = []
        self._body_seen = False

    def _top(self) -> Element:
        if self._stack:
            return self._stack[-1]
        return self.body if self._body_seen else self.head

    def handle_starttag(self, tag, attrs):
        if tag in ("html", "head", "body"):
            target = {"html": self.root, "head": self.head, "body": self.body}[tag]
            for k, v in attrs:
                target.attrs.setdefault(k, v if v is not None else "")
            if tag == "body":
                self._body_seen = True
            return
        if not self._body_seen and tag not in ("title", "meta", "link", "base", "style"):
            self._body_seen = True
        if tag in _P_CLOSERS:
            while self._stack and self._stack[-1].tag == "p":
                self._stack.pop()
        siblings = _SIBLING_CLOSERS.get(tag)
        if siblings:
            closable = siblings | {"p"}
            while self._stack and self._stack[-1].tag in closable:
                self._stack.pop()
        element = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self._top().append(element)
        if tag not in VOID_TAGS:
            self._stack.append(element)

    def handle_startendtag(self, tag, attrs):
        if tag in VOID_TAGS or tag in ("html", "head", "body"):
            self.handle_starttag(tag, attrs)
            return
        element = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self._top().append(element)

    def handle_endtag(self, tag):
        if tag in ("html", "head", "body"):
            self._stack.clear()
            if tag != "head":
                self._body_seen = True
            return
        for i in range(len(self._stack) - 1, -1, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return
        # unmatched end tag: ignored

    def handle_data(self, data):
        if data:
            self._top().append(TextNode(data))

    def tree(self) -> TagTree:
        return TagTree(self.root, self.head, self.body)


_CHARSET_RE = re.compile(rb"""charset\s*=\s*["']?([A-Za-z0-9_\-]+)""", re.IGNORECASE)


def _decode(raw: bytes, declared_encoding: str | None) -> str:
    candidates = []
    if declared_encoding:
        candidates.append(declared_encoding)
    if raw.startswith(codecs.BOM_UTF8):
        candidates.append("utf-8-sig")
    elif raw.startswith((codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE)):
        candidates.append("utf-16")
    sniffed = _CHARSET_RE.search(raw[:2048])
    if sniffed:
        candidates.append(sniffed.group(1).decode("ascii", "ignore"))
    candidates.append("utf-8")
    for name in candidates:
        try:
            codecs.lookup(name)
        except LookupError:
            continue
        return raw.decode(name, errors="replace")
    return raw.decode("utf-8", errors="replace")


def parse_html(
    raw: bytes | str,
    declared_encoding: str | None = None,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> TagTree:
    """Best-effort tag tree from arbitrary bytes; never fails on bad markup.

    Raises PageTooLarge when the input exceeds size_cap; that is the only
    failure mode.
    """
    if isinstance(raw, str):
        raw = raw.encode("utf-8", errors="replace")
    if len(raw) > size_cap:
        raise PageTooLarge(f"{len(raw)} bytes exceeds cap of {size_cap}")
    text = _decode(raw, declared_encoding)
    builder = _TreeBuilder()
    try:
        builder.feed(text)
        builder.close()
    except Exception:  # html.parser should not raise; belt and braces
        logger.exception("tree builder error; returning partial tree")
    return builder.tree()


def visible_text(element: Element) -> str:
    """All visible text under an element, script/style/title excluded."""
    parts: list[str] = []

    def walk(el: Element):
        for child in el.children:
            if isinstance(child, TextNode):
                parts.append(child.text)
            elif child.tag not in _INVISIBLE_TAGS:
                walk(child)

    walk(element)
    return " ".join(" ".join(parts).split())


def _direct_text_runs(block: Element, anchor: Element | None) -> list[tuple[str, bool]]:
    """(text, inside_anchor) runs of a block, not descending into nested blocks."""
    runs: list[tuple[str, bool]] = []

    def walk(el: Element, in_anchor: bool):
        for child in el.children:
            if isinstance(child, TextNode):
                runs.append((child.text, in_anchor))
            elif child.tag in _INVISIBLE_TAGS or child.tag in BLOCK_TAGS:
                continue
            else:
                walk(child, in_anchor or child is anchor)

    walk(block, block is anchor)
    return runs


@dataclass(frozen=True)
class BoundaryWord:
    term: str
    is_anchor: bool


def _list_items(list_el: Element) -> list[Element]:
    return [c for c in list_el.children if isinstance(c, Element) and c.tag == "li"]


def _boundary_block(anchor: Element) -> tuple[Element | None, bool]:
    """Nearest enclosing block; for list items, the whole list."""
    node = anchor.parent
    while node is not None:
        if node.tag in ("ul", "ol"):
            return node, True
        if node.tag == "li":
            parent = node.parent
            while parent is not None and parent.tag not in ("ul", "ol"):
                parent = parent.parent
            if parent is not None:
                return parent, True
            return node, False
        if node.tag in BLOCK_TAGS:
            return node, False
        node = node.parent
    return None, False


def topical_boundary(anchor: Element, tree: TagTree) -> tuple[list[BoundaryWord], bool]:
    """Boundary words around a link, anchor-text words flagged.

    Paragraph rule: the enclosing paragraph's words (or nearest block-level
    ancestor when no <p> encloses the link). List rule: the words of ALL
    items of the enclosing list.
    """
    block, from_list = _boundary_block(anchor)
    if block is None:
        block = tree.body
    if from_list and block.tag in ("ul", "ol"):
        runs: list[tuple[str, bool]] = []
        for item in _list_items(block):
            runs.extend(_direct_text_runs(item, anchor))
    else:
        runs = _direct_text_runs(block, anchor)
    words: list[BoundaryWord] = []
    for text, in_anchor in runs:
        for token in tokenize(text).texts():
            words.append(BoundaryWord(stem(token), in_anchor))
    return words, from_list


@dataclass
class UnvisitedLink:
    absolute_url: str
    anchor_text: str
    boundary: list[BoundaryWord]
    subheading_u: str
    section_heading: str
    main_heading: str
    from_list: bool
    block_index: int


@dataclass
class LinkBlock:
    """One paragraph or list containing links; the unit T-Graph nodes are made of."""

    index: int
    subheading_u: str
    section_heading: str
    main_heading: str
    text: str
    urls: list[str]
    from_list: bool


@dataclass
class PageElements:
    main_heading: str
    body_terms: list[str]
    links: list[UnvisitedLink]
    paragraphs: list[tuple[str, str]]
    link_blocks: list[LinkBlock]
    dropped_links: int = 0


def _heading_context(stack: list[tuple[int, str]]) -> tuple[str, str]:
    """(subheading_u, section_heading) from the active heading chain.

    U is the deepest h2-h6 heading covering this point; the section heading
    is the next-shallower heading in the chain (which may be the h1).
    """
    sub_indices = [i for i, (level, _) in enumerate(stack) if level >= 2]
    if not sub_indices:
        return "", ""
    u_index = sub_indices[-1]
    section = stack[u_index - 1][1] if u_index > 0 else ""
    return stack[u_index][1], section


def extract_page_elements(tree: TagTree, base_url: str) -> PageElements:
    """Headings, body terms, paragraphs and unvisited links of a parsed page."""
    h1 = tree.body.find("h1") or tree.root.find("h1")
    if h1 is not None:
        main_heading = visible_text(h1)
    else:
        title = tree.root.find("title")
        main_heading = " ".join(
            c.text for c in title.children if isinstance(c, TextNode)
        ).strip() if title is not None else ""
        main_heading = " ".join(main_heading.split())

    links: list[UnvisitedLink] = []
    paragraphs: list[tuple[str, str]] = []
    blocks: list[LinkBlock] = []
    block_index_by_id: dict[int, int] = {}
    dropped = 0
    stack: list[tuple[int, str]] = []

    def walk(el: Element):
        nonlocal dropped
        for child in el.children:
            if not isinstance(child, Element) or child.tag in ("script", "style"):
                continue
            if child.tag in HEADING_TAGS:
                level = int(child.tag[1])
                while stack and stack[-1][0] >= level:
                    stack.pop()
                stack.append((level, visible_text(child)))
            if child.tag == "p":
                context = stack[-1][1] if stack else main_heading
                paragraphs.append((context, visible_text(child)))
            if child.tag == "a" and "href" in child.attrs:
                url = resolve_url(base_url, child.attrs["href"])
                if url is None:
                    dropped += 1
                else:
                    sub_u, section = _heading_context(stack)
                    boundary, from_list = topical_boundary(child, tree)
                    block_el, _ = _boundary_block(child)
                    if block_el is None:
                        block_el = tree.body
                    key = id(block_el)
                    if key not in block_index_by_id:
                        if from_list and block_el.tag in ("ul", "ol"):
                            text = " ".join(
                                t
                                for item in _list_items(block_el)
                                for t, _ in _direct_text_runs(item, None)
                            )
                        else:
                            text = " ".join(
                                t for t, _ in _direct_text_runs(block_el, None)
                            )
                        block_index_by_id[key] = len(blocks)
                        blocks.append(LinkBlock(
                            index=len(blocks),
                            subheading_u=sub_u,
                            section_heading=section,
                            main_heading=main_heading,
                            text=" ".join(text.split()),
                            urls=[],
                            from_list=from_list,
                        ))
                    blocks[block_index_by_id[key]].urls.append(url)
                    anchor_text = " ".join(
                        " ".join(t for t, _ in _direct_text_runs(child, None)).split()
                    )
                    links.append(UnvisitedLink(
                        absolute_url=url,
                        anchor_text=anchor_text,
                        boundary=boundary,
                        subheading_u=sub_u,
                        section_heading=section,
                        main_heading=main_heading,
                        from_list=from_list,
                        block_index=block_index_by_id[key],
                    ))
            walk(child)

    walk(tree.body)
    body_terms = [stem(t) for t in tokenize(visible_text(tree.body)).texts()]
    return PageElements(
        main_heading=main_heading,
        body_terms=body_terms,
        links=links,
        paragraphs=paragraphs,
        link_blocks=blocks,
        dropped_links=dropped,
    )
