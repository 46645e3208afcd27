"""Corpus ingestion: profile parsing, topic-field cleaning, synthetic data.

External format is UTF-8 line-delimited JSON. Profiles carry keys
id, name, uni, cites, affiliation, raw_topics (plus an optional "topics"
list so annotated corpora survive a round trip); universities carry
id, name, region, staff. Parsing defaults to skip-and-report because
scraped data is dirty; strict=True aborts on the first bad record.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .stem import stem

REGIONS = ("US", "EU", "OTHER")


class IngestError(Exception):
    """Raised in strict mode on the first malformed record."""


@dataclass
class RecordError:
    line: int | None
    message: str


@dataclass
class ResearcherProfile:
    researcher_id: str
    name: str
    university_id: str
    total_citations: int
    affiliation: str
    raw_topics: str
    topics: list[str] = field(default_factory=list)


@dataclass
class University:
    university_id: str
    name: str
    region: str
    academic_staff: int | None = None


@dataclass
class Corpus:
    profiles: list[ResearcherProfile]
    universities: list[University]

    def university_index(self) -> dict[str, University]:
        return {u.university_id: u for u in self.universities}


_TAG_RE = re.compile(r"<[^>]*>")
_CTRL_RE = re.compile(r"[\x00-\x1f\x7f]")


def clean_topic_field(raw: str) -> list[str]:
    """Split a raw topic field into trimmed, lowercased pieces.

    Markup tags are dropped, the separators / ; . # become commas, then
    the field splits on commas. Interior whitespace runs collapse to a
    single space so spacing quirks do not create distinct topics.
    """
    if not raw:
        return []
    s = _TAG_RE.sub("", raw)
    s = _CTRL_RE.sub(" ", s)
    for sep in "/;.#":
        s = s.replace(sep, ",")
    pieces = []
    for piece in s.split(","):
        piece = " ".join(piece.lower().split())
        if piece:
            pieces.append(piece)
    return pieces


def _fail(errors: list[RecordError], strict: bool, line: int | None, message: str):
    if strict:
        raise IngestError(f"line {line}: {message}")
    errors.append(RecordError(line, message))


def parse_profiles(lines, strict: bool = False) -> tuple[Corpus, list[RecordError]]:
    """Parse line-delimited profile records into a Corpus (no universities).

    Unknown fields are ignored. Malformed lines are skipped and reported
    with their 1-based line number unless strict.
    """
    profiles: list[ResearcherProfile] = []
    errors: list[RecordError] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            _fail(errors, strict, line_no, f"bad json: {e.msg}")
            continue
        if not isinstance(rec, dict):
            _fail(errors, strict, line_no, "record is not an object")
            continue
        rid = rec.get("id")
        if not rid:
            _fail(errors, strict, line_no, "missing id")
            continue
        rid = str(rid)
        if rid in seen:
            _fail(errors, strict, line_no, f"duplicate researcher id {rid!r}")
            continue
        uni = rec.get("uni")
        if not uni:
            _fail(errors, strict, line_no, "missing university id")
            continue
        try:
            cites = int(rec.get("cites", 0))
        except (TypeError, ValueError):
            _fail(errors, strict, line_no, "bad citations value")
            continue
        if cites < 0:
            _fail(errors, strict, line_no, "negative citations")
            continue
        topics = rec.get("topics", [])
        if not isinstance(topics, list) or not all(isinstance(t, str) for t in topics):
            _fail(errors, strict, line_no, "bad topics list")
            continue
        seen.add(rid)
        profiles.append(ResearcherProfile(
            researcher_id=rid,
            name=str(rec.get("name", "")),
            university_id=str(uni),
            total_citations=cites,
            affiliation=str(rec.get("affiliation", "")),
            raw_topics=str(rec.get("raw_topics", "")),
            topics=list(topics),
        ))
    return Corpus(profiles=profiles, universities=[]), errors


def load_universities(lines, strict: bool = False) -> tuple[list[University], list[RecordError]]:
    """Parse line-delimited university records. Region defaults to OTHER."""
    unis: list[University] = []
    errors: list[RecordError] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            _fail(errors, strict, line_no, f"bad json: {e.msg}")
            continue
        uid = rec.get("id")
        if not uid:
            _fail(errors, strict, line_no, "missing id")
            continue
        uid = str(uid)
        if uid in seen:
            _fail(errors, strict, line_no, f"duplicate university id {uid!r}")
            continue
        region = rec.get("region", "OTHER")
        if region is None:
            region = "OTHER"
        region = str(region).upper()
        if region not in REGIONS:
            _fail(errors, strict, line_no, f"unknown region {region!r}")
            continue
        staff = rec.get("staff")
        if staff is not None:
            try:
                staff = int(staff)
            except (TypeError, ValueError):
                _fail(errors, strict, line_no, "bad staff count")
                continue
        seen.add(uid)
        unis.append(University(uid, str(rec.get("name", "")), region, staff))
    return unis, errors


def load_corpus(profiles_path, universities_path=None,
                strict: bool = False) -> tuple[Corpus, list[RecordError]]:
    """Load profiles (and optionally universities), cross-checking ids."""
    with open(profiles_path, encoding="utf-8") as f:
        corpus, errors = parse_profiles(f, strict=strict)
    if universities_path is not None:
        with open(universities_path, encoding="utf-8") as f:
            unis, uerrors = load_universities(f, strict=strict)
        errors.extend(uerrors)
        known = {u.university_id for u in unis}
        kept = []
        for p in corpus.profiles:
            if p.university_id in known:
                kept.append(p)
            else:
                _fail(errors, strict, None,
                      f"profile {p.researcher_id!r}: unknown university "
                      f"{p.university_id!r}")
        corpus = Corpus(profiles=kept, universities=unis)
    return corpus, errors


def dump_profiles(profiles: list[ResearcherProfile]) -> str:
    out = []
    for p in profiles:
        rec = {
            "id": p.researcher_id,
            "name": p.name,
            "uni": p.university_id,
            "cites": p.total_citations,
            "affiliation": p.affiliation,
            "raw_topics": p.raw_topics,
        }
        if p.topics:
            rec["topics"] = p.topics
        out.append(json.dumps(rec, sort_keys=True, ensure_ascii=False))
    return "\n".join(out) + ("\n" if out else "")


def dump_universities(universities: list[University]) -> str:
    out = []
    for u in universities:
        rec = {"id": u.university_id, "name": u.name, "region": u.region}
        if u.academic_staff is not None:
            rec["staff"] = u.academic_staff
        out.append(json.dumps(rec, sort_keys=True, ensure_ascii=False))
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# synthetic corpora
# ---------------------------------------------------------------------------

# Field pools drive topic phrases, department names, and affiliations.
# Pool words avoid standalone and/or/& so splitting never changes a
# synthetic topic's identity.
_FIELDS = [
    ("machine learning", "computer science",
     ["deep", "statistical", "probabilistic", "supervised", "unsupervised",
      "bayesian", "neural", "adversarial", "federated", "online", "causal",
      "generative"],
     ["learning", "networks", "inference", "models", "classification",
      "clustering", "optimization", "embeddings", "regression",
      "forecasting", "vision", "transformers"]),
    ("systems", "computer science",
     ["distributed", "operating", "embedded", "concurrent", "scalable",
      "secure", "mobile", "cloud", "virtualized", "streaming", "parallel",
      "fault-tolerant"],
     ["systems", "databases", "storage", "networking", "scheduling",
      "caching", "protocols", "architectures", "compilers", "runtimes",
      "middleware", "kernels"]),
    ("theory", "computer science",
     ["approximation", "randomized", "combinatorial", "computational",
      "parameterized", "distributed", "quantum", "algebraic", "geometric",
      "spectral", "sublinear", "streaming"],
     ["algorithms", "complexity", "optimization", "graphs", "games",
      "logic", "automata", "cryptography", "coding", "counting",
      "matroids", "lattices"]),
    ("visualization", "computer science",
     ["interactive", "graph", "information", "scientific", "immersive",
      "perceptual", "collaborative", "visual", "topological", "geospatial",
      "temporal", "exploratory"],
     ["visualization", "drawing", "analytics", "interfaces", "interaction",
      "rendering", "mapping", "layouts", "displays", "sketching",
      "storytelling", "dashboards"]),
    ("bioinformatics", "biology",
     ["genomic", "proteomic", "molecular", "evolutionary", "microbial",
      "structural", "synthetic", "computational", "single-cell",
      "metagenomic", "epigenetic", "translational"],
     ["genomics", "sequencing", "phylogenetics", "biology", "pathways",
      "expression", "annotation", "alignment", "variants", "proteins",
      "enzymes", "assemblies"]),
    ("chemistry", "chemistry and chemical biology",
     ["organic", "inorganic", "physical", "analytical", "polymer",
      "catalytic", "medicinal", "supramolecular", "electrochemical",
      "photochemical", "theoretical", "green"],
     ["chemistry", "catalysis", "synthesis", "spectroscopy", "kinetics",
      "thermodynamics", "electrochemistry", "crystallography", "polymers",
      "surfaces", "membranes", "sensors"]),
    ("physics", "physics",
     ["quantum", "condensed", "statistical", "nuclear", "particle",
      "gravitational", "optical", "plasma", "astro", "nonlinear",
      "computational", "atomic"],
     ["physics", "optics", "cosmology", "mechanics", "dynamics",
      "photonics", "magnetism", "superconductivity", "lasers",
      "relativity", "detectors", "fluids"]),
    ("materials", "materials science",
     ["nano", "composite", "functional", "ceramic", "metallic",
      "semiconductor", "ferroelectric", "photovoltaic", "thermoelectric",
      "biocompatible", "porous", "thin-film"],
     ["materials", "nanostructures", "coatings", "alloys", "crystals",
      "interfaces", "fabrication", "characterization", "batteries",
      "devices", "films", "fibers"]),
    ("neuroscience", "neuroscience",
     ["cognitive", "computational", "molecular", "behavioral", "clinical",
      "developmental", "systems", "sensory", "motor", "social",
      "translational", "theoretical"],
     ["neuroscience", "cognition", "memory", "plasticity", "perception",
      "attention", "imaging", "circuits", "neurons", "synapses",
      "disorders", "connectomics"]),
    ("medicine", "medicine",
     ["clinical", "cardiovascular", "pediatric", "oncological",
      "epidemiological", "surgical", "geriatric", "preventive",
      "regenerative", "personalized", "metabolic", "immunological"],
     ["medicine", "oncology", "immunology", "epidemiology", "cardiology",
      "pathology", "therapeutics", "diagnostics", "trials", "genetics",
      "pharmacology", "radiology"]),
    ("economics", "economics",
     ["behavioral", "development", "labor", "monetary", "environmental",
      "experimental", "financial", "international", "public", "urban",
      "health", "agricultural"],
     ["economics", "econometrics", "markets", "policy", "trade", "finance",
      "taxation", "auctions", "incentives", "productivity", "inequality",
      "growth"]),
    ("sociology", "sociology",
     ["political", "urban", "comparative", "historical", "quantitative",
      "digital", "economic", "environmental", "medical", "cultural",
      "organizational", "global"],
     ["sociology", "demography", "migration", "stratification", "gender",
      "religion", "education", "criminology", "movements", "networks",
      "institutions", "ethnography"]),
    ("linguistics", "linguistics",
     ["computational", "historical", "cognitive", "corpus", "applied",
      "psycho", "socio", "phonological", "syntactic", "semantic",
      "typological", "forensic"],
     ["linguistics", "phonetics", "syntax", "semantics", "pragmatics",
      "morphology", "discourse", "translation", "lexicography",
      "dialectology", "prosody", "acquisition"]),
    ("robotics", "mechanical engineering",
     ["autonomous", "aerial", "soft", "swarm", "surgical", "industrial",
      "humanoid", "underwater", "agricultural", "legged", "modular",
      "collaborative"],
     ["robotics", "manipulation", "locomotion", "planning", "control",
      "slam", "actuators", "grasping", "teleoperation", "navigation",
      "kinematics", "drones"]),
    ("environment", "environmental science",
     ["climate", "atmospheric", "marine", "hydrological", "ecological",
      "renewable", "sustainable", "geospatial", "polar", "coastal",
      "forest", "urban"],
     ["ecology", "climatology", "oceanography", "hydrology",
      "biodiversity", "conservation", "emissions", "meteorology",
      "geochemistry", "soils", "wetlands", "glaciers"]),
    ("mathematics", "mathematics",
     ["algebraic", "differential", "numerical", "stochastic", "discrete",
      "functional", "convex", "harmonic", "topological", "arithmetic",
      "applied", "ergodic"],
     ["geometry", "topology", "analysis", "probability", "statistics",
      "equations", "dynamics", "operators", "manifolds", "representations",
      "combinatorics", "theory"]),
]

_FIRST_NAMES = [
    "ada", "grace", "alan", "edsger", "barbara", "donald", "radia", "vint",
    "frances", "john", "katherine", "claude", "hedy", "annie", "maryam",
    "emmy", "paul", "sofia", "leonhard", "carl", "lise", "rosalind",
    "dorothy", "george", "mae", "luis", "wang", "ravi", "elena", "kofi",
    "ingrid", "tomas", "yuki", "amara", "nadia", "omar", "priya", "sven",
]
_LAST_NAMES = [
    "lovelace", "hopper", "turing", "dijkstra", "liskov", "knuth",
    "perlman", "cerf", "allen", "mccarthy", "johnson", "shannon",
    "lamarr", "easley", "mirzakhani", "noether", "erdos", "kovalevskaya",
    "euler", "gauss", "meitner", "franklin", "vaughan", "boole", "jemison",
    "alvarez", "chen", "gupta", "papadaki", "mensah", "bergstrom",
    "novak", "tanaka", "okafor", "haddad", "rahman", "iyer", "lindqvist",
]
_PLACES = [
    "aldford", "bexley", "carram", "dunmore", "eastvale", "farrow",
    "glenholm", "harwick", "ithacia", "juneau", "kestrel", "lakemont",
    "marwood", "nordby", "oakhaven", "penrith", "quarry", "ravenna",
    "stanhope", "tilbury", "umbria", "valmont", "westbrook", "yarrow",
]
_UNI_TEMPLATES = [
    "university of {p}", "{p} institute of technology", "{p} state university",
    "{p} polytechnic", "national university of {p}",
]
_AFFIL_TEMPLATES = [
    "professor of {d}", "department of {d}, {u}", "professor of {d}, {u}",
    "school of {d}, {u}", "{d} group, {u}", "associate professor of {d}",
]


@dataclass
class SynthReport:
    variant_profiles: list[str] = field(default_factory=list)
    permuted_profiles: list[str] = field(default_factory=list)


def default_vocabulary(n_topics: int = 600, seed: int = 0) -> list[tuple[str, float]]:
    """Deterministic (phrase, weight) vocabulary grouped by field blocks.

    Phrases within a field share word pools so profiles sampled inside a
    field co-occur naturally. Entries are distinct under both stemming
    and fingerprinting, keeping downstream merge counts predictable.
    """
    rng = np.random.default_rng(seed)
    per_field = -(-n_topics // len(_FIELDS))
    blocks: list[list[str]] = []
    seen_keys: set[str] = set()
    for _, _, mods, nouns in _FIELDS:
        candidates = list(nouns)
        candidates += [f"{m} {n}" for m in mods for n in nouns]
        candidates += [f"{m} {n} {n2}" for m in mods for n in nouns
                       for n2 in nouns if n2 != n]
        order = rng.permutation(len(candidates))
        block = []
        for idx in order:
            phrase = candidates[idx]
            key = " ".join(stem(t) for t in phrase.split())
            fp = " ".join(sorted(set(phrase.split())))
            if key in seen_keys or fp in seen_keys:
                continue
            seen_keys.add(key)
            seen_keys.add(fp)
            block.append(phrase)
            if len(block) >= per_field:
                break
        blocks.append(block)
    vocab: list[tuple[str, float]] = []
    rank = 0
    # interleave fields so global Zipf weight spreads across fields
    for i in range(per_field):
        for block in blocks:
            if i < len(block) and len(vocab) < n_topics:
                vocab.append((block[i], 1.0 / (rank + 1) ** 0.85))
                rank += 1
    return vocab


def _variant_forms(word: str) -> list[str]:
    out = []
    if word.endswith("ies") and len(word) > 4:
        out.append(word[:-3] + "y")
    elif word.endswith("s") and not word.endswith("ss") and len(word) > 3:
        out.append(word[:-1])
    if not word.endswith(("s", "x", "z")):
        if word.endswith("y") and len(word) > 2:
            out.append(word[:-1] + "ies")
        else:
            out.append(word + "s")
    return out


def _suffix_variant(phrase: str) -> str | None:
    """A plural/singular form of one word that keeps the phrase's stem."""
    words = phrase.split()
    for j in range(len(words) - 1, -1, -1):
        for cand in _variant_forms(words[j]):
            if cand != words[j] and stem(cand) == stem(words[j]):
                return " ".join(words[:j] + [cand] + words[j + 1:])
    return None


def synth_corpus_report(
    seed: int,
    n_profiles: int,
    vocabulary: list[tuple[str, float]] | None = None,
    n_universities: int = 24,
    variant_fraction: float = 0.1,
    permuted_fraction: float = 0.05,
) -> tuple[Corpus, SynthReport]:
    """Generate a deterministic synthetic corpus plus an injection report.

    The report lists which profiles carry an injected suffix variant or a
    token-permuted duplicate form, so tests can count injections without
    markers polluting the records themselves.
    """
    rng = np.random.default_rng(seed)
    if vocabulary is None:
        vocabulary = default_vocabulary()
    n_fields = len(_FIELDS)
    # contiguous blocks of the vocabulary act as fields for sampling
    block_size = -(-len(vocabulary) // n_fields)
    blocks = [list(range(i, min(i + block_size, len(vocabulary))))
              for i in range(0, len(vocabulary), block_size)]
    weights = np.array([w for _, w in vocabulary], dtype=float)
    block_probs = []
    for blk in blocks:
        w = weights[blk]
        block_probs.append(w / w.sum())
    global_probs = weights / weights.sum()

    universities = []
    for i in range(n_universities):
        place = _PLACES[i % len(_PLACES)]
        tmpl = _UNI_TEMPLATES[int(rng.integers(len(_UNI_TEMPLATES)))]
        name = tmpl.format(p=place)
        if i >= len(_PLACES):
            name = f"{name} {i // len(_PLACES) + 1}"
        roll = rng.random()
        region = "US" if roll < 0.45 else ("EU" if roll < 0.8 else "OTHER")
        staff = int(rng.integers(200, 5000)) if rng.random() < 0.8 else None
        universities.append(University(f"u{i:03d}", name, region, staff))
    uni_weights = np.array([1.0 / (i + 1) ** 0.7 for i in range(n_universities)])
    uni_probs = uni_weights / uni_weights.sum()

    report = SynthReport()
    profiles = []
    for i in range(n_profiles):
        rid = f"r{i:05d}"
        name = (f"{_FIRST_NAMES[int(rng.integers(len(_FIRST_NAMES)))]} "
                f"{_LAST_NAMES[int(rng.integers(len(_LAST_NAMES)))]}")
        uni_idx = int(rng.choice(n_universities, p=uni_probs))
        uni = universities[uni_idx]
        field_idx = int(rng.choice(
            n_fields, p=uni_weights[:n_fields] / uni_weights[:n_fields].sum()))
        field_idx = min(field_idx, len(blocks) - 1)
        k = 1 + int(rng.choice(5, p=[0.10, 0.20, 0.30, 0.25, 0.15]))
        chosen: list[str] = []
        chosen_set: set[int] = set()
        for _ in range(k):
            for _try in range(10):
                if rng.random() < 0.85:
                    blk = blocks[field_idx]
                    vi = blk[int(rng.choice(len(blk), p=block_probs[field_idx]))]
                else:
                    vi = int(rng.choice(len(vocabulary), p=global_probs))
                if vi not in chosen_set:
                    chosen_set.add(vi)
                    chosen.append(vocabulary[vi][0])
                    break

        if chosen and rng.random() < variant_fraction:
            slot = int(rng.integers(len(chosen)))
            variant = _suffix_variant(chosen[slot])
            if variant is not None:
                chosen[slot] = variant
                report.variant_profiles.append(rid)
        if chosen and rng.random() < permuted_fraction:
            multi = [j for j, t in enumerate(chosen) if " " in t]
            if multi:
                slot = multi[int(rng.integers(len(multi)))]
                chosen[slot] = " ".join(reversed(chosen[slot].split()))
                report.permuted_profiles.append(rid)

        sep_roll = rng.random()
        sep = ", " if sep_roll < 0.88 else ("; " if sep_roll < 0.96 else " / ")
        raw = sep.join(chosen)
        deco = rng.random()
        if deco < 0.05:
            raw = raw.title()
        elif deco < 0.08 and chosen:
            raw = raw.replace(chosen[0], f"<b>{chosen[0]}</b>", 1)
        elif deco < 0.10:
            raw = raw + "."

        dept, dept2 = _FIELDS[field_idx % len(_FIELDS)][1], None
        tmpl = _AFFIL_TEMPLATES[int(rng.integers(len(_AFFIL_TEMPLATES)))]
        if rng.random() < 0.15:
            dept2 = _FIELDS[int(rng.integers(len(_FIELDS)))][1]
            affiliation = f"professor of {dept} and {dept2}, {uni.name}"
        else:
            affiliation = tmpl.format(d=dept, u=uni.name)

        cites = int(min(rng.pareto(1.2) * 40.0, 2.0e5))
        profiles.append(ResearcherProfile(
            researcher_id=rid, name=name, university_id=uni.university_id,
            total_citations=cites, affiliation=affiliation, raw_topics=raw))
    return Corpus(profiles=profiles, universities=universities), report


def synth_corpus(seed: int, n_profiles: int, **kwargs) -> Corpus:
    corpus, _ = synth_corpus_report(seed, n_profiles, **kwargs)
    return corpus
