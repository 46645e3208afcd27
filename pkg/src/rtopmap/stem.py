"""Porter-style suffix-stripping stemmer.

Implements the classic 1980 rule tables. Words of length <= 2 are left
alone. Input is expected to be lowercase; non-alphabetic characters are
treated as consonants so hyphenated or numeric tokens pass through the
rules without special casing.
"""

from functools import lru_cache

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y is a consonant only when it follows a vowel (or starts the word)
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_part: str) -> int:
    """Number of vowel->consonant transitions, the m of [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem_part)):
        vowel = not _is_consonant(stem_part, i)
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _has_vowel(stem_part: str) -> bool:
    return any(not _is_consonant(stem_part, i) for i in range(len(stem_part)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


# (suffix, replacement, minimum measure) rule tables; None measure means
# the rule applies unconditionally once the suffix matches.
_STEP2 = [
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
]

_STEP3 = [
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
]

_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def _longest_match(word: str, suffixes) -> str | None:
    best = None
    for suf in suffixes:
        if word.endswith(suf) and (best is None or len(suf) > len(best)):
            best = suf
    return best


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    removed = None
    if word.endswith("ed") and _has_vowel(word[:-2]):
        removed = word[:-2]
    elif word.endswith("ing") and _has_vowel(word[:-3]):
        removed = word[:-3]
    if removed is None:
        return word
    if removed.endswith(("at", "bl", "iz")):
        return removed + "e"
    if _ends_double_consonant(removed) and removed[-1] not in "lsz":
        return removed[:-1]
    if _measure(removed) == 1 and _ends_cvc(removed):
        return removed + "e"
    return removed


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _apply_table(word: str, table) -> str:
    # longest matching suffix decides the rule; a failed measure condition
    # still ends the step
    suf = _longest_match(word, [s for s, _ in table])
    if suf is None:
        return word
    repl = dict(table)[suf]
    stem_part = word[: -len(suf)]
    if _measure(stem_part) > 0:
        return stem_part + repl
    return word


def _step4(word: str) -> str:
    suf = _longest_match(word, _STEP4)
    if suf is None:
        return word
    stem_part = word[: -len(suf)]
    if _measure(stem_part) <= 1:
        return word
    if suf == "ion" and not stem_part.endswith(("s", "t")):
        return word
    return stem_part


def _step5(word: str) -> str:
    if word.endswith("e"):
        stem_part = word[:-1]
        m = _measure(stem_part)
        if m > 1 or (m == 1 and not _ends_cvc(stem_part)):
            word = stem_part
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]
    return word


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    """Stem a single lowercase token."""
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_table(word, _STEP2)
    word = _apply_table(word, _STEP3)
    word = _step4(word)
    word = _step5(word)
    return word


def stem_tokens(tokens: list[str]) -> list[str]:
    return [stem(t) for t in tokens]
