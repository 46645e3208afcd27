"""Canonical topic lexicon construction.

Raw topic fields go through clean -> conjunction split -> stem-group
merge -> fingerprint-group merge. Each merge stage keeps the member with
the highest profile count as the display form (ties break toward the
lexicographically smallest), so stems like "appli" never surface as
labels. Profiles are rewritten in terms of the final topic ids.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field

from .ingest import Corpus, ResearcherProfile, clean_topic_field
from .stem import stem

_CONJUNCTIONS = {"and", "or", "&"}

_PUNCT_TO_SPACE = str.maketrans({c: " " for c in string.punctuation})
_CTRL_TO_SPACE = str.maketrans({chr(c): " " for c in [*range(0x20), 0x7F]})


def split_topic(raw: str) -> list[str]:
    """Split a cleaned topic string at standalone and/or/& tokens."""
    pieces: list[str] = []
    current: list[str] = []
    for token in raw.split():
        if token in _CONJUNCTIONS:
            if current:
                pieces.append(" ".join(current))
                current = []
        else:
            current.append(token)
    if current:
        pieces.append(" ".join(current))
    return pieces


def stem_phrase(phrase: str) -> str:
    """Stem each whitespace token independently and re-join."""
    return " ".join(stem(token) for token in phrase.split())


def fingerprint_key(phrase: str) -> str:
    """Order- and punctuation-insensitive key for collision correction."""
    s = phrase.lower().translate(_CTRL_TO_SPACE).translate(_PUNCT_TO_SPACE)
    return " ".join(sorted(set(s.split())))


@dataclass
class TopicLexicon:
    topics: dict[str, str]
    frequency: dict[str, int]
    stem_index: dict[str, str]
    fingerprint_index: dict[str, str]
    # every raw form seen, for diagnostics and idempotent re-annotation
    form_index: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "topics": {
                tid: {
                    "name": name,
                    "frequency": self.frequency[tid],
                    "stem": stem_phrase(name),
                    "fingerprint": fingerprint_key(name),
                }
                for tid, name in self.topics.items()
            },
            "stem_index": self.stem_index,
            "fingerprint_index": self.fingerprint_index,
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TopicLexicon":
        payload = json.loads(text)
        topics = {tid: rec["name"] for tid, rec in payload["topics"].items()}
        frequency = {tid: rec["frequency"] for tid, rec in payload["topics"].items()}
        return cls(
            topics=topics,
            frequency=frequency,
            stem_index=payload["stem_index"],
            fingerprint_index=payload["fingerprint_index"],
        )


def _pick_canonical(members: list[str], freq: dict[str, int]) -> str:
    best = members[0]
    for m in members[1:]:
        if (freq[m], best) > (freq[best], m):
            # higher frequency wins; on ties the smaller string wins
            best = m
    return best


def canonicalize(corpus: Corpus) -> tuple[TopicLexicon, Corpus]:
    """Merge raw topic forms and annotate profiles with topic ids.

    Stage 1 groups forms by stemmed phrase; stage 2 groups the stage-1
    canonicals by fingerprint key. Frequencies are distinct-profile
    counts, accumulated across each group before the next stage applies
    the same max-frequency rule. Topic ids are assigned by descending
    final frequency (ties by name) so low ids are the common topics.
    """
    per_profile_forms: list[set[str]] = []
    listing: dict[str, set[int]] = {}
    for i, p in enumerate(corpus.profiles):
        forms: set[str] = set()
        for piece in clean_topic_field(p.raw_topics):
            forms.update(split_topic(piece))
        per_profile_forms.append(forms)
        for f in forms:
            listing.setdefault(f, set()).add(i)

    freq0 = {f: len(profs) for f, profs in listing.items()}
    stem_groups: dict[str, list[str]] = {}
    for f in sorted(listing):
        stem_groups.setdefault(stem_phrase(f), []).append(f)

    canon1: dict[str, str] = {}
    stage1_profiles: dict[str, set[int]] = {}
    for members in stem_groups.values():
        canonical = _pick_canonical(members, freq0)
        bucket = stage1_profiles.setdefault(canonical, set())
        for m in members:
            canon1[m] = canonical
            bucket.update(listing[m])

    freq1 = {c: len(profs) for c, profs in stage1_profiles.items()}
    fp_groups: dict[str, list[str]] = {}
    for c in sorted(stage1_profiles):
        fp_groups.setdefault(fingerprint_key(c), []).append(c)

    canon2: dict[str, str] = {}
    final_profiles: dict[str, set[int]] = {}
    for members in fp_groups.values():
        canonical = _pick_canonical(members, freq1)
        bucket = final_profiles.setdefault(canonical, set())
        for m in members:
            canon2[m] = canonical
            bucket.update(stage1_profiles[m])

    final_freq = {name: len(profs) for name, profs in final_profiles.items()}
    ranked = sorted(final_freq, key=lambda name: (-final_freq[name], name))
    id_of = {name: f"t{rank:05d}" for rank, name in enumerate(ranked)}

    final_of_form = {f: canon2[canon1[f]] for f in listing}

    stem_index: dict[str, str] = {}
    fingerprint_index: dict[str, str] = {}
    form_index: dict[str, str] = {}
    # canonical names first so their keys win any residual collision
    for name in ranked:
        stem_index[stem_phrase(name)] = id_of[name]
        fingerprint_index[fingerprint_key(name)] = id_of[name]
    for f in sorted(listing, key=lambda f: (-final_freq[final_of_form[f]], f)):
        tid = id_of[final_of_form[f]]
        stem_index.setdefault(stem_phrase(f), tid)
        fingerprint_index.setdefault(fingerprint_key(f), tid)
        form_index[f] = tid

    lexicon = TopicLexicon(
        topics={id_of[name]: name for name in ranked},
        frequency={id_of[name]: final_freq[name] for name in ranked},
        stem_index=stem_index,
        fingerprint_index=fingerprint_index,
        form_index=form_index,
    )

    annotated = Corpus(
        profiles=[
            ResearcherProfile(
                researcher_id=p.researcher_id,
                name=p.name,
                university_id=p.university_id,
                total_citations=p.total_citations,
                affiliation=p.affiliation,
                raw_topics=p.raw_topics,
                topics=sorted({id_of[final_of_form[f]] for f in forms}),
            )
            for p, forms in zip(corpus.profiles, per_profile_forms)
        ],
        universities=list(corpus.universities),
    )
    return lexicon, annotated
