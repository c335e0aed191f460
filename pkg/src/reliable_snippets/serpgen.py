"""Static SERP pages for caption annotation studies.

Caption order is a Fisher-Yates shuffle driven by SplitMix64 seeded from
``(seed, query_id)`` only, so every extraction method shown for a query gets
the same order. Result links are rendered without an ``href``.
"""

from __future__ import annotations

import html
from dataclasses import dataclass
from typing import Sequence, TypeVar

from .extract import Caption

T = TypeVar("T")

MASK64 = (1 << 64) - 1
DEFAULT_QUERY_TEMPLATE = "Is {intervention} effective in treating {condition}?"


class SplitMix64:
    def __init__(self, state: int):
        self.state = state & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def query_state(seed: int, query_id: str) -> int:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return SplitMix64(seed).next() ^ fnv1a64(query_id.encode("utf-8"))


def order_captions(captions: Sequence[T], query_id: str, seed: int) -> list[T]:
    if not captions:
        raise ValueError("empty SERP")
    items = list(captions)
    rng = SplitMix64(query_state(seed, query_id))
    for i in range(len(items) - 1, 0, -1):
        j = rng.next() % (i + 1)
        items[i], items[j] = items[j], items[i]
    return items


def display_query(intervention: str, condition: str, template: str = DEFAULT_QUERY_TEMPLATE) -> str:
    return template.format(intervention=intervention, condition=condition)


@dataclass(frozen=True)
class SerpPage:
    query_text: str
    captions: tuple[Caption, ...]
    seed: int
    method_tag: str


_HEAD = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: Arial, sans-serif; margin: 2em auto; max-width: 40em; color: #202124; }}
.query {{ border: 1px solid #dfe1e5; border-radius: 24px; padding: 0.6em 1.2em; margin-bottom: 1.5em; }}
.result {{ margin-bottom: 1.4em; }}
.result a {{ color: #1a0dab; font-size: 1.2em; text-decoration: none; cursor: default; }}
.url {{ color: #006621; font-size: 0.9em; }}
.snippet {{ color: #4d5156; font-size: 0.95em; }}
</style>
</head>
<body data-method="{method}" data-seed="{seed}">
<div class="query"><input type="text" value="{query}" readonly aria-label="Search query"></div>
<ol class="results">
"""

_RESULT = """<li class="result">
<a role="link" aria-disabled="true">{title}</a>
{url}<div class="snippet">{snippet}</div>
</li>
"""

_TAIL = """</ol>
</body>
</html>
"""


def render(page: SerpPage) -> str:
    if not page.captions:
        raise ValueError("empty SERP")
    esc = html.escape
    parts = [_HEAD.format(title=esc(page.query_text), method=esc(page.method_tag), seed=page.seed, query=esc(page.query_text))]
    for cap in page.captions:
        url = f'<div class="url">{esc(cap.url)}</div>\n' if cap.url else ""
        parts.append(_RESULT.format(title=esc(cap.title), url=url, snippet=esc(cap.snippet_text)))
    parts.append(_TAIL)
    return "".join(parts)


def build_page(
    captions: Sequence[Caption],
    query_id: str,
    seed: int,
    method_tag: str,
    intervention: str,
    condition: str,
    template: str = DEFAULT_QUERY_TEMPLATE,
) -> SerpPage:
    ordered = order_captions(captions, query_id, seed)
    return SerpPage(display_query(intervention, condition, template), tuple(ordered), seed, method_tag)
