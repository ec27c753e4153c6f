"""Tokenization, the 16 interpretable lexical features, and fluency counters.

Tokens are maximal runs of letters with internal apostrophes preserved;
everything else separates. All counting is done on lowercased text. The
16-feature set gives each statistic a closed-form definition so every value
is independently checkable; cap rules keep all of them finite on any
nonempty transcript.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import PipelineError
from .manifest import FeatureVector

LEX_FEATURE_SET_ID = "lex16"
FLUENCY_FEATURE_SET_ID = "fluency"

LEX_FEATURE_NAMES = (
    "n_tokens",
    "n_types",
    "n_sentences",
    "mean_tokens_per_sentence",
    "mean_chars_per_token",
    "ttr",
    "root_ttr",
    "corrected_ttr",
    "herdan_c",
    "n_hapax",
    "hapax_ratio",
    "brunet_w",
    "honore_r",
    "n_long_words",
    "long_word_ratio",
    "function_word_ratio",
)

FLUENCY_FEATURE_NAMES = ("p_word_count", "animal_count")

HONORE_CAP = 10000.0
LONG_WORD_LETTERS = 7
BRUNET_EXPONENT = -0.165

_TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)*")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")


class EmptyTranscript(PipelineError):
    pass


class LexiconError(PipelineError):
    pass


@dataclass(frozen=True)
class TokenList:
    tokens: tuple

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)


def tokenize(text: str) -> TokenList:
    """Lowercase tokens; digits and punctuation separate; '' normalized to '."""
    lowered = text.lower().replace("’", "'")
    return TokenList(tokens=tuple(_TOKEN_RE.findall(lowered)))


def sentence_count(text: str) -> int:
    """Number of '.'/'!'/'?'-terminated runs containing at least one token.

    A transcript with tokens but no terminated run counts as one sentence.
    """
    lowered = text.lower().replace("’", "'")
    pieces = _SENTENCE_SPLIT_RE.split(lowered)
    terminated = pieces[:-1]  # the final piece has no terminator
    count = sum(1 for p in terminated if _TOKEN_RE.search(p))
    if count == 0 and _TOKEN_RE.search(lowered):
        return 1
    return count


@lru_cache(maxsize=1)
def stop_words() -> frozenset:
    """The fixed built-in 50-word function-word list."""
    text = resources.files("speechscreen").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


def _letters(token: str) -> int:
    return len(token) - token.count("'")


def general_features(text: str) -> FeatureVector:
    """The 16 lexical features, in the fixed LEX_FEATURE_NAMES order."""
    tokens = tokenize(text).tokens
    if not tokens:
        raise EmptyTranscript("no tokens in transcript")
    n = len(tokens)
    counts = Counter(tokens)
    types = len(counts)
    hapax = sum(1 for c in counts.values() if c == 1)
    sentences = sentence_count(text)
    stops = stop_words()
    n_long = sum(1 for t in tokens if _letters(t) >= LONG_WORD_LETTERS)

    herdan = 1.0 if n == 1 else math.log(types) / math.log(n)
    if hapax == types:
        honore = HONORE_CAP
    else:
        honore = 100.0 * math.log(n) / (1.0 - hapax / types)
    values = (
        float(n),
        float(types),
        float(sentences),
        n / sentences,
        sum(len(t) for t in tokens) / n,
        types / n,
        types / math.sqrt(n),
        types / math.sqrt(2 * n),
        herdan,
        float(hapax),
        hapax / n,
        n ** (types ** BRUNET_EXPONENT),
        honore,
        float(n_long),
        n_long / n,
        sum(1 for t in tokens if t in stops) / n,
    )
    return FeatureVector(
        feature_set_id=LEX_FEATURE_SET_ID, names=LEX_FEATURE_NAMES, values=values
    )


def pft_count(tokens: TokenList) -> int:
    """Distinct p-initial tokens of length >= 2 that are not function words."""
    stops = stop_words()
    return len(
        {t for t in tokens if t.startswith("p") and len(t) >= 2 and t not in stops}
    )


@dataclass(frozen=True)
class AnimalLexicon:
    entries: frozenset  # lowercase, 1 or 2 whitespace-separated words each

    def __post_init__(self):
        if not self.entries:
            raise LexiconError("animal lexicon is empty")
        for e in self.entries:
            if not 1 <= len(e.split()) <= 2:
                raise LexiconError(f"lexicon entry {e!r} must be 1 or 2 words")


def load_lexicon(text: str) -> AnimalLexicon:
    """Parse a lexicon file: one entry per line, '#' starts a comment."""
    entries = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip().lower()
        if line:
            entries.add(line)
    return AnimalLexicon(entries=frozenset(entries))


@lru_cache(maxsize=1)
def default_animal_lexicon() -> AnimalLexicon:
    text = resources.files("speechscreen").joinpath("data/animals.txt").read_text("utf-8")
    return load_lexicon(text)


def sft_count(tokens: TokenList, lexicon: AnimalLexicon) -> int:
    """Distinct lexicon entries found by a greedy left-to-right scan.

    At each position the 2-word phrase is tried before the 1-word entry, so
    "polar bear" is not double-counted as "bear".
    """
    toks = tokens.tokens
    matched = set()
    i = 0
    while i < len(toks):
        if i + 1 < len(toks) and f"{toks[i]} {toks[i + 1]}" in lexicon.entries:
            matched.add(f"{toks[i]} {toks[i + 1]}")
            i += 2
        elif toks[i] in lexicon.entries:
            matched.add(toks[i])
            i += 1
        else:
            i += 1
    return len(matched)


def fluency_features(tokens: TokenList, lexicon: AnimalLexicon) -> FeatureVector:
    """Both fluency counters as one uniform per-recording feature block."""
    return FeatureVector(
        feature_set_id=FLUENCY_FEATURE_SET_ID,
        names=FLUENCY_FEATURE_NAMES,
        values=(float(pft_count(tokens)), float(sft_count(tokens, lexicon))),
    )
