"""Clinical negation-cue detection: pattern compilation and sentence matching."""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .corpus import Document, segment_sentences

WORD_MODE = "word"
PREFIX_MODE = "prefix"

BUILTIN_SOURCE = "builtin-23"
BUILTIN_COUNT = 23


class PatternError(Exception):
    """Raised for malformed or invalid pattern files."""


@dataclass(frozen=True)
class NegationPattern:
    pattern_id: int
    phrase: str
    mode: str
    regex: re.Pattern

    def __len__(self) -> int:
        return len(self.phrase)


@dataclass(frozen=True)
class NegationMatch:
    pattern_id: int
    start: int
    end: int


class NegationPatternSet:
    """Ordered, immutable set of negation cue phrases."""

    def __init__(self, entries: list[tuple[str, str]], source: str):
        self.source = source
        seen: set[str] = set()
        patterns = []
        for pattern_id, (phrase, mode) in enumerate(entries):
            phrase = phrase.strip().lower()
            if not phrase:
                raise PatternError(f"{source}: empty pattern phrase")
            if phrase in seen:
                raise PatternError(f"{source}: duplicate pattern {phrase!r}")
            if mode not in (WORD_MODE, PREFIX_MODE):
                raise PatternError(f"{source}: unknown match mode {mode!r} for {phrase!r}")
            seen.add(phrase)
            body = re.escape(phrase).replace(r"\ ", r"\s+")
            tail = r"" if mode == PREFIX_MODE else r"\b"
            regex = re.compile(r"\b" + body + tail, re.IGNORECASE)
            patterns.append(NegationPattern(pattern_id, phrase, mode, regex))
        self.patterns: tuple[NegationPattern, ...] = tuple(patterns)

    def __len__(self) -> int:
        return len(self.patterns)


def _parse_pattern_lines(lines: list[str], source: str) -> NegationPatternSet:
    entries = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        phrase = parts[0].strip()
        mode = parts[1].strip() if len(parts) > 1 else WORD_MODE
        entries.append((phrase, mode))
    return NegationPatternSet(entries, source)


def load_patterns(path: str) -> NegationPatternSet:
    """Load a pattern file: one phrase per line, '#' comments allowed."""
    with open(path, encoding="utf-8") as fh:
        return _parse_pattern_lines(fh.readlines(), source=path)


def builtin_patterns() -> NegationPatternSet:
    """The shipped 23-pattern clinical cue set."""
    text = resources.files("bioground.data").joinpath("negation_patterns.txt").read_text("utf-8")
    patterns = _parse_pattern_lines(text.splitlines(), source=BUILTIN_SOURCE)
    if len(patterns) != BUILTIN_COUNT:
        raise PatternError(f"builtin pattern set must contain {BUILTIN_COUNT} phrases, found {len(patterns)}")
    return patterns


def find_cues(sentence: str, patterns: NegationPatternSet) -> list[NegationMatch]:
    """All non-overlapping cue matches, leftmost-longest, case-insensitive."""
    candidates = []
    for pattern in patterns.patterns:
        for m in pattern.regex.finditer(sentence):
            # Prefix-mode spans cover the phrase only, not the rest of the word.
            end = m.start() + len(pattern.phrase) if pattern.mode == PREFIX_MODE else m.end()
            candidates.append((m.start(), end, pattern.pattern_id))
    candidates.sort(key=lambda c: (c[0], -(c[1] - c[0]), c[2]))
    matches = []
    cursor = 0
    for start, end, pattern_id in candidates:
        if start < cursor:
            continue
        matches.append(NegationMatch(pattern_id=pattern_id, start=start, end=end))
        cursor = end
    return matches


def cue_count(document_text: str, patterns: NegationPatternSet) -> int:
    """Total cue matches over the document's sentences."""
    return sum(len(find_cues(s, patterns)) for s in segment_sentences(document_text))


def filter_negative_sentences(
    document: Document, patterns: NegationPatternSet
) -> list[tuple[int, str, list[NegationMatch]]]:
    """Sentences of the document that contain at least one cue, in order."""
    kept = []
    for index, sentence in enumerate(document.sentences):
        matches = find_cues(sentence, patterns)
        if matches:
            kept.append((index, sentence, matches))
    return kept
