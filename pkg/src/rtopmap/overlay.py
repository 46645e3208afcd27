"""Per-topic value layers drawn over the basemap.

Citation and share computations run in exact rational arithmetic so
conservation properties hold literally; values become floats only at
JSON export time.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .ingest import Corpus, ResearcherProfile
from .normalize import TopicLexicon
from .stem import stem

log = logging.getLogger(__name__)

BASE_SETS = ("WORLD", "US", "EU")

_TAG_RE = re.compile(r"<[^>]*>")
_TOKEN_RE = re.compile(r"[a-z0-9]+")


class OverlayKind(enum.Enum):
    CITATIONS = "CITATIONS"
    CITATIONS_NORMALIZED = "CITATIONS_NORMALIZED"
    HUMAN_RESOURCES = "HUMAN_RESOURCES"
    DEPARTMENT = "DEPARTMENT"
    DOCUMENT = "DOCUMENT"


class RenderHint(enum.Enum):
    HEAT = "HEAT"
    SIGNED_CIRCLES = "SIGNED_CIRCLES"


@dataclass
class OverlayResult:
    kind: OverlayKind
    values: dict[str, object]  # topic_id -> int | Fraction
    render_hint: RenderHint
    meta: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "render_hint": self.render_hint.value,
            "meta": dict(self.meta),
            "values": {t: float(v) for t, v in sorted(self.values.items())},
        }


def _profiles_at(corpus: Corpus, university_id: str) -> list[ResearcherProfile]:
    known = {u.university_id for u in corpus.universities}
    known.update(p.university_id for p in corpus.profiles)
    if university_id not in known:
        raise ValueError(f"unknown university: {university_id}")
    return [p for p in corpus.profiles if p.university_id == university_id]


def base_profiles(corpus: Corpus, base: str = "WORLD") -> list[ResearcherProfile]:
    """Profiles forming the comparison population for a base set."""
    if base not in BASE_SETS:
        raise ValueError(f"base must be one of {BASE_SETS}, got {base!r}")
    if base == "WORLD":
        return list(corpus.profiles)
    regions = {u.university_id: u.region for u in corpus.universities}
    return [p for p in corpus.profiles if regions.get(p.university_id) == base]


def _full_counts(profiles) -> Counter:
    counts: Counter = Counter()
    for p in profiles:
        for t in p.topics:
            counts[t] += p.total_citations
    return counts


def citations_overlay(university_id: str, corpus: Corpus,
                      mode: str = "full") -> OverlayResult:
    """Citations at one university summed per topic.

    full mode counts every researcher's citations once per listed
    topic; split mode divides them equally across the listed topics,
    conserving the university total exactly.
    """
    if mode not in ("full", "split"):
        raise ValueError(f"mode must be full or split, got {mode!r}")
    profiles = _profiles_at(corpus, university_id)
    values: dict[str, object] = {}
    if mode == "full":
        values.update(_full_counts(profiles))
    else:
        for p in profiles:
            if not p.topics:
                continue
            share = Fraction(p.total_citations, len(p.topics))
            for t in p.topics:
                values[t] = values.get(t, Fraction(0)) + share
    return OverlayResult(
        kind=OverlayKind.CITATIONS,
        values=values,
        render_hint=RenderHint.HEAT,
        meta={"university": university_id, "mode": mode},
    )


def normalized_citations_overlay(university_id: str, corpus: Corpus,
                                 base: str = "WORLD",
                                 mode: str = "rate") -> OverlayResult:
    """Citation heat corrected for how much each field cites overall.

    rate mode: c_X(t) * (C / |T|) / c_base(t), which divides out the
    base citation rate of the topic (T = topics with any base
    citations, C = their total). literal mode multiplies by the base
    share instead: c_X(t) * c_base(t) / C.
    """
    if mode not in ("rate", "literal"):
        raise ValueError(f"mode must be rate or literal, got {mode!r}")
    cx = _full_counts(_profiles_at(corpus, university_id))
    cbase = _full_counts(base_profiles(corpus, base))
    total = sum(cbase.values())
    cited = {t for t, v in cbase.items() if v > 0}
    values: dict[str, object] = {}
    if total == 0:
        log.warning("base %s has no citations; normalized overlay is empty",
                    base)
    elif mode == "rate":
        per_topic = Fraction(total, len(cited))
        for t, v in cx.items():
            if t in cited:
                values[t] = v * per_topic / cbase[t]
            else:
                log.warning("topic %s has no base citations; omitted", t)
    else:
        for t, v in cx.items():
            values[t] = Fraction(v * cbase[t], total)
    return OverlayResult(
        kind=OverlayKind.CITATIONS_NORMALIZED,
        values=values,
        render_hint=RenderHint.HEAT,
        meta={"university": university_id, "mode": mode, "base": base},
    )


def hr_overlay(university_id: str, corpus: Corpus,
               base: str = "WORLD") -> OverlayResult:
    """Percentage-point difference in researcher share per topic."""
    x_profiles = _profiles_at(corpus, university_id)
    if not x_profiles:
        raise ValueError(f"university {university_id} has no researchers")
    pool = base_profiles(corpus, base)
    if not pool:
        raise ValueError(f"base set {base} has no researchers")
    x_counts = Counter(t for p in x_profiles for t in set(p.topics))
    b_counts = Counter(t for p in pool for t in set(p.topics))
    values: dict[str, object] = {}
    for t in set(x_counts) | set(b_counts):
        values[t] = (Fraction(100 * x_counts.get(t, 0), len(x_profiles))
                     - Fraction(100 * b_counts.get(t, 0), len(pool)))
    return OverlayResult(
        kind=OverlayKind.HUMAN_RESOURCES,
        values=values,
        render_hint=RenderHint.SIGNED_CIRCLES,
        meta={"university": university_id, "base": base},
    )


def department_overlay(keyword: str, corpus: Corpus) -> OverlayResult:
    """Researchers matched by whole-word affiliation search, per topic."""
    keyword = keyword.strip()
    if not keyword:
        raise ValueError("keyword must be nonempty")
    pattern = re.compile(rf"\b{re.escape(keyword)}\b", re.IGNORECASE)
    values: Counter = Counter()
    for p in corpus.profiles:
        if p.affiliation and pattern.search(p.affiliation):
            for t in p.topics:
                values[t] += 1
    return OverlayResult(
        kind=OverlayKind.DEPARTMENT,
        values=dict(values),
        render_hint=RenderHint.HEAT,
        meta={"keyword": keyword},
    )


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    text = resources.files("rtopmap").joinpath("data/stopwords.txt").read_text()
    return frozenset(w for w in text.split() if w)


def extract_document_terms(text: str, max_n: int = 3) -> dict[str, int]:
    """Stemmed uni/bi/trigram frequencies of the surviving tokens."""
    stop = load_stopwords()
    cleaned = _TAG_RE.sub(" ", text.lower())
    stems = [stem(w) for w in _TOKEN_RE.findall(cleaned) if w not in stop]
    counts: Counter = Counter()
    for n in range(1, max_n + 1):
        for k in range(len(stems) - n + 1):
            counts[" ".join(stems[k:k + n])] += 1
    return dict(counts)


def document_overlay(text: str, lexicon: TopicLexicon) -> OverlayResult:
    """Document term mass mapped onto lexicon topics by stemmed phrase."""
    # stem keys keep intra-word punctuation (fault-toler) that the
    # extractor splits away; flatten them to its tokenization
    table: dict[str, str] = {}
    for key, tid in lexicon.stem_index.items():
        flat = " ".join(_TOKEN_RE.findall(key))
        if flat:
            table.setdefault(flat, tid)
    values: Counter = Counter()
    for phrase, count in extract_document_terms(text).items():
        tid = table.get(phrase)
        if tid is not None:
            values[tid] += count
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    return OverlayResult(
        kind=OverlayKind.DOCUMENT,
        values=dict(values),
        render_hint=RenderHint.HEAT,
        meta={"digest": digest},
    )
