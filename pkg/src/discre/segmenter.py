"""Text preprocessing and discourse argument extraction.

Messages are tokenized with URL/mention normalization and emoji isolation,
tagged with a coarse Twitter-style POS tagger (lexicon + suffix heuristics,
or pass-through for pre-tagged input), then cut into discourse arguments.
A connective at the start of a sentence takes the span up to the end of the
first verb group as its attached argument; a connective in the middle splits
the sentence at its position.  Emoji runs always form their own argument.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .corpus_io import RawMessage

URL_TOKEN = "<URL>"
MENTION_TOKEN = "<USER>"

# Tags that end a sentence when carried by . ! ? tokens.
_SENT_FINAL = {".", "!", "?", "…"}

# Punctuation gets the single ARK punctuation tag.
PUNCT_TAG = ","
COORD_TAG = "&"
VERB_TAG = "V"
EMOJI_TAG = "E"

MAX_ARGUMENTS = 8

BEGIN = "begin"
MIDDLE = "middle"


@dataclass(frozen=True)
class Token:
    text: str
    pos: str | None = None
    is_emoji: bool = False
    is_url: bool = False
    is_mention: bool = False
    span: tuple[int, int] = (0, 0)

    def with_pos(self, pos: str) -> "Token":
        return Token(
            text=self.text,
            pos=pos,
            is_emoji=self.is_emoji,
            is_url=self.is_url,
            is_mention=self.is_mention,
            span=self.span,
        )


@dataclass(frozen=True)
class ConnectiveMention:
    start: int
    end: int
    connective: str
    position: str  # BEGIN or MIDDLE


@dataclass(frozen=True)
class DiscourseArgument:
    start: int
    end: int
    is_emoji: bool = False


@dataclass(frozen=True)
class Pair:
    arg1: int
    arg2: int
    connective: str | None


@dataclass
class ArgumentSegmentation:
    tokens: list[Token]
    arguments: list[DiscourseArgument] = field(default_factory=list)
    pairs: list[Pair] = field(default_factory=list)

    def argument_tokens(self, index: int) -> list[str]:
        arg = self.arguments[index]
        return [t.text for t in self.tokens[arg.start : arg.end]]


_EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x1FA70, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
    (0x1F1E6, 0x1F1FF),
    (0x2B00, 0x2BFF),
)
# Combining codepoints glued onto the preceding emoji token.
_EMOJI_JOINERS = {0xFE0F, 0x200D} | set(range(0x1F3FB, 0x1F400))


def _is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


_URL_RE = re.compile(r"https?://\S+|www\.\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
_NUMBER_RE = re.compile(r"\d+(?:[.,:]\d+)*")
_WORD_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*", re.UNICODE)


def preprocess(text: str) -> list[Token]:
    """Tokenize raw text: URLs and mentions become special tokens, emoji
    codepoints become standalone tokens, words are lowercased, punctuation
    is split off character by character."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = _URL_RE.match(text, i)
        if m:
            end = m.end()
            while end > i + 1 and text[end - 1] in ".,!?;:)\"'":
                end -= 1
            tokens.append(Token(URL_TOKEN, is_url=True, span=(i, end)))
            i = end
            continue
        m = _MENTION_RE.match(text, i)
        if m:
            tokens.append(Token(MENTION_TOKEN, is_mention=True, span=(i, m.end())))
            i = m.end()
            continue
        if _is_emoji_char(ch):
            end = i + 1
            while end < n and ord(text[end]) in _EMOJI_JOINERS:
                end += 1
            tokens.append(Token(text[i:end], is_emoji=True, span=(i, end)))
            i = end
            continue
        if ord(ch) in _EMOJI_JOINERS:
            i += 1
            continue
        m = _HASHTAG_RE.match(text, i) or _NUMBER_RE.match(text, i) or _WORD_RE.match(text, i)
        if m:
            tokens.append(Token(m.group().lower(), span=(i, m.end())))
            i = m.end()
            continue
        tokens.append(Token(ch, span=(i, i + 1)))
        i += 1
    return tokens


_LEXICON: dict[str, str] | None = None


def _tag_lexicon() -> dict[str, str]:
    global _LEXICON
    if _LEXICON is None:
        lexicon: dict[str, str] = {}
        data = resources.files("discre.data").joinpath("ark_lexicon.tsv").read_text("utf-8")
        for line in data.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            word, tag = line.split("\t")
            lexicon[word] = tag
        _LEXICON = lexicon
    return _LEXICON


_SUFFIX_TAGS = (
    ("ing", "V"),
    ("ed", "V"),
    ("ly", "R"),
    ("tion", "N"),
    ("ment", "N"),
    ("ness", "N"),
    ("ity", "N"),
    ("ship", "N"),
    ("ous", "A"),
    ("ful", "A"),
    ("ive", "A"),
    ("able", "A"),
    ("est", "A"),
)


def _guess_tag(text: str) -> str:
    lexicon = _tag_lexicon()
    if text in lexicon:
        return lexicon[text]
    if _NUMBER_RE.fullmatch(text):
        return "$"
    if all(not c.isalnum() for c in text):
        return PUNCT_TAG
    for suffix, tag in _SUFFIX_TAGS:
        if len(text) > len(suffix) + 1 and text.endswith(suffix):
            return tag
    return "N"


def pos_tag(tokens: Sequence[Token]) -> list[Token]:
    """Assign a coarse Twitter-style tag to each token.  Already-tagged
    tokens pass through unchanged; unknown words default to N."""
    tagged: list[Token] = []
    for tok in tokens:
        if tok.pos is not None:
            tagged.append(tok)
        elif tok.is_emoji:
            tagged.append(tok.with_pos(EMOJI_TAG))
        elif tok.is_url:
            tagged.append(tok.with_pos("U"))
        elif tok.is_mention:
            tagged.append(tok.with_pos("@"))
        elif tok.text.startswith("#") and len(tok.text) > 1:
            tagged.append(tok.with_pos("#"))
        else:
            tagged.append(tok.with_pos(_guess_tag(tok.text)))
    return tagged


def tokens_from_tagged(raw: Sequence[tuple[str, str]]) -> list[Token]:
    """Wrap pre-tagged (text, pos) pairs as Tokens with synthesized spans."""
    tokens: list[Token] = []
    offset = 0
    for text, pos in raw:
        end = offset + len(text)
        tokens.append(
            Token(
                text=text,
                pos=pos,
                is_emoji=pos == EMOJI_TAG or (len(text) > 0 and _is_emoji_char(text[0])),
                is_url=text == URL_TOKEN,
                is_mention=text == MENTION_TOKEN,
                span=(offset, end),
            )
        )
        offset = end + 1
    return tokens


def tag_message(message: RawMessage) -> list[Token]:
    """Tokenize and tag one corpus record, honoring pre-tagged input."""
    if message.is_tagged:
        return tokens_from_tagged(message.tokens or [])
    return pos_tag(preprocess(message.text or ""))


def _sentence_bounds(tokens: Sequence[Token]) -> list[tuple[int, int]]:
    """Half-open sentence spans; a sentence ends after a run of . ! ? tokens."""
    bounds: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(tokens)
    while i < n:
        if tokens[i].pos == PUNCT_TAG and tokens[i].text in _SENT_FINAL:
            while i + 1 < n and tokens[i + 1].pos == PUNCT_TAG and tokens[i + 1].text in _SENT_FINAL:
                i += 1
            bounds.append((start, i + 1))
            start = i + 1
        i += 1
    if start < n:
        bounds.append((start, n))
    return bounds


def _candidate_mentions(tokens: Sequence[Token], connectives: Iterable[str]) -> list[tuple[int, int, str]]:
    """Longest-match, leftmost, non-overlapping connective spans."""
    by_tokens = [(c, tuple(c.split())) for c in sorted(set(connectives))]
    texts = [t.text.lower() for t in tokens]
    found: list[tuple[int, int, str]] = []
    i = 0
    n = len(texts)
    while i < n:
        best: tuple[int, int, str] | None = None
        for connective, parts in by_tokens:
            k = len(parts)
            if tuple(texts[i : i + k]) == parts:
                if best is None or k > best[1] - best[0]:
                    best = (i, i + k, connective)
        if best is not None:
            found.append(best)
            i = best[1]
        else:
            i += 1
    return found


def _first_verb_group_end(tokens: Sequence[Token], start: int, stop: int) -> int | None:
    """End index (exclusive) of the first maximal run of V tokens in
    [start, stop), searching only up to the first punctuation token."""
    i = start
    while i < stop:
        tag = tokens[i].pos
        if tag == PUNCT_TAG:
            return None
        if tag == VERB_TAG:
            j = i + 1
            while j < stop and tokens[j].pos == VERB_TAG:
                j += 1
            return j
        i += 1
    return None


def _has_verb(tokens: Sequence[Token], start: int, end: int) -> bool:
    return any(tokens[i].pos == VERB_TAG for i in range(start, end))


def detect_connectives(
    tokens: Sequence[Token], connectives: Iterable[str]
) -> list[ConnectiveMention]:
    """Find connective mentions, keeping only those whose induced argument
    spans pass the verb gate (a span must contain a verb; an empty remainder
    after a sentence-initial connective is allowed and simply yields no pair)."""
    sentences = _sentence_bounds(tokens)
    candidates = _candidate_mentions(tokens, connectives)
    mentions: list[ConnectiveMention] = []
    for start, end, connective in candidates:
        sentence = next(((s, e) for s, e in sentences if s <= start < e), None)
        if sentence is None:
            continue
        s_start, s_end = sentence
        later_starts = [c[0] for c in candidates if c[0] > start and c[0] < s_end]
        boundary = min(later_starts) if later_starts else s_end
        if start == s_start:
            v_end = _first_verb_group_end(tokens, end, boundary)
            if v_end is None:
                continue
            # remainder of the sentence is Arg1; empty passes vacuously
            if v_end < s_end and not _has_verb(tokens, v_end, s_end):
                continue
            mentions.append(ConnectiveMention(start, end, connective, BEGIN))
        else:
            if not _has_verb(tokens, s_start, start):
                continue
            if not _has_verb(tokens, start, boundary):
                continue
            mentions.append(ConnectiveMention(start, end, connective, MIDDLE))
    return mentions


def _argument_boundaries(
    tokens: Sequence[Token], mentions: Sequence[ConnectiveMention]
) -> tuple[list[int], dict[int, int]]:
    """Cut points over the token list plus, per mention index, the boundary
    that starts (middle) or ends (begin) its attached argument."""
    n = len(tokens)
    cuts: set[int] = {0, n}
    mention_cut: dict[int, int] = {}
    sentences = _sentence_bounds(tokens)
    for s_start, s_end in sentences:
        cuts.add(s_start)
        cuts.add(s_end)
    mention_spans = [(m.start, m.end) for m in mentions]
    for k, mention in enumerate(mentions):
        sentence = next(((s, e) for s, e in sentences if s <= mention.start < e), (0, n))
        if mention.position == MIDDLE:
            cuts.add(mention.start)
            mention_cut[k] = mention.start
        else:
            boundary = min(
                [st for st, _ in mention_spans if st > mention.start] + [sentence[1]]
            )
            v_end = _first_verb_group_end(tokens, mention.end, boundary)
            if v_end is not None:
                cuts.add(v_end)
                mention_cut[k] = v_end
    # emoji runs become standalone arguments
    i = 0
    while i < n:
        if tokens[i].is_emoji:
            j = i
            while j < n and tokens[j].is_emoji:
                j += 1
            cuts.add(i)
            cuts.add(j)
            i = j
        else:
            i += 1
    # a coordinating conjunction in the middle splits, even outside the table
    covered = set()
    for m in mentions:
        covered.update(range(m.start, m.end))
    for i in range(1, n):
        if tokens[i].pos == COORD_TAG and i not in covered:
            cuts.add(i)
    return sorted(cuts), mention_cut


def extract_arguments(
    tokens: Sequence[Token], mentions: Sequence[ConnectiveMention]
) -> ArgumentSegmentation:
    """Cut a tagged message into discourse arguments and build argument pairs.

    Explicit pairs attach the connective-bearing argument as Arg2 and the
    adjacent argument as Arg1; both must contain a verb.  Emoji arguments
    pair with adjacent text arguments under a null connective.
    """
    tokens = list(tokens)
    n = len(tokens)
    if n == 0:
        return ArgumentSegmentation(tokens=tokens)
    cuts, mention_cut = _argument_boundaries(tokens, mentions)
    arguments: list[DiscourseArgument] = []
    for a, b in zip(cuts, cuts[1:]):
        if a >= b:
            continue
        arguments.append(
            DiscourseArgument(a, b, is_emoji=all(t.is_emoji for t in tokens[a:b]))
        )
    arguments = arguments[:MAX_ARGUMENTS]
    if not arguments:
        return ArgumentSegmentation(tokens=tokens)

    def argument_at(pos: int) -> int | None:
        for idx, arg in enumerate(arguments):
            if arg.start <= pos < arg.end:
                return idx
        return None

    pairs: list[Pair] = []
    seen: set[tuple[int, int, str | None]] = set()

    def add_pair(a1: int | None, a2: int | None, connective: str | None) -> None:
        if a1 is None or a2 is None or a1 == a2:
            return
        key = (a1, a2, connective)
        if key in seen:
            return
        seen.add(key)
        pairs.append(Pair(a1, a2, connective))

    for k, mention in enumerate(mentions):
        arg2 = argument_at(mention.start)
        if arg2 is None:
            continue
        if mention.position == MIDDLE:
            arg1 = arg2 - 1 if arg2 > 0 else None
        else:
            arg1 = arg2 + 1 if arg2 + 1 < len(arguments) else None
        if arg1 is None:
            continue
        a1 = arguments[arg1]
        a2 = arguments[arg2]
        if not _has_verb(tokens, a1.start, a1.end) or not _has_verb(tokens, a2.start, a2.end):
            continue
        add_pair(arg1, arg2, mention.connective)

    for idx, arg in enumerate(arguments):
        if not arg.is_emoji:
            continue
        if idx > 0 and not arguments[idx - 1].is_emoji:
            add_pair(idx - 1, idx, None)
        if idx + 1 < len(arguments) and not arguments[idx + 1].is_emoji:
            add_pair(idx, idx + 1, None)

    return ArgumentSegmentation(tokens=tokens, arguments=arguments, pairs=pairs)


def segment_message(
    tokens: Sequence[Token], connectives: Iterable[str]
) -> ArgumentSegmentation:
    """Detect connectives and extract the argument segmentation in one step."""
    mentions = detect_connectives(tokens, connectives)
    return extract_arguments(tokens, mentions)


def segment_corpus(
    messages: Sequence[RawMessage], connectives: Iterable[str]
) -> list[tuple[str, ArgumentSegmentation]]:
    """Segment every message; messages yielding no arguments are dropped."""
    connectives = list(connectives)
    out: list[tuple[str, ArgumentSegmentation]] = []
    for message in messages:
        seg = segment_message(tag_message(message), connectives)
        if seg.arguments:
            out.append((message.message_id, seg))
    return out


def segmentation_to_record(message_id: str, seg: ArgumentSegmentation) -> dict:
    return {
        "id": message_id,
        "arguments": [seg.argument_tokens(i) for i in range(len(seg.arguments))],
        "pairs": [
            {"arg1": p.arg1, "arg2": p.arg2, "connective": p.connective}
            for p in seg.pairs
        ],
    }


def segmentation_from_record(record: dict) -> tuple[str, ArgumentSegmentation]:
    """Rebuild a segmentation from its serialized form (texts only; POS tags
    are not persisted and are not needed downstream)."""
    tokens: list[Token] = []
    arguments: list[DiscourseArgument] = []
    offset = 0
    for arg_tokens in record["arguments"]:
        start = len(tokens)
        for text in arg_tokens:
            text = str(text)
            end = offset + len(text)
            tokens.append(
                Token(
                    text=text,
                    is_emoji=bool(text) and _is_emoji_char(text[0]),
                    is_url=text == URL_TOKEN,
                    is_mention=text == MENTION_TOKEN,
                    span=(offset, end),
                )
            )
            offset = end + 1
        arguments.append(
            DiscourseArgument(
                start,
                len(tokens),
                is_emoji=all(t.is_emoji for t in tokens[start:]),
            )
        )
    pairs = [
        Pair(int(p["arg1"]), int(p["arg2"]), p.get("connective"))
        for p in record.get("pairs", [])
    ]
    return str(record["id"]), ArgumentSegmentation(
        tokens=tokens, arguments=arguments, pairs=pairs
    )
