"""SemEval-2016 restaurant reviews: parsing, tokens, left/target/right split, embeddings."""

from __future__ import annotations

import hashlib
import io
import logging
import os
import string
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

POLARITIES = ("positive", "neutral", "negative")
POLARITY_INDEX = {p: i for i, p in enumerate(POLARITIES)}

EMBEDDING_DIM = 300
OOV_STD = 0.052

# same-length replacements only, so XML character offsets stay valid
_CHAR_MAP = str.maketrans({"—": "-", "–": "-", "’": "'"})
_PUNCT = set(string.punctuation) | {"“", "”", "‘"}


class ParseError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Opinion:
    target: str
    category: str
    polarity: str
    start: int
    end: int

    @property
    def explicit(self) -> bool:
        return self.target != "NULL" and self.end > self.start


@dataclass
class Sentence:
    id: str
    text: str
    opinions: list[Opinion] = field(default_factory=list)


@dataclass
class Review:
    id: str
    sentences: list[Sentence] = field(default_factory=list)


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    char_span: tuple[int, int]
    index: int
    pos: str | None = None
    head: int | None = None  # 0-based index of the governor, None for the root
    dep: str | None = None


@dataclass
class OpinionInstance:
    left: list[Token]
    target: list[Token]
    right: list[Token]
    polarity: int
    review_id: str
    sentence_id: str
    opinion_index: int
    category: str = ""

    @property
    def id(self) -> str:
        return f"{self.sentence_id}#{self.opinion_index}"

    @property
    def tokens(self) -> list[Token]:
        return self.left + self.target + self.right

    def parts(self) -> list[tuple[str, Token]]:
        return [("left", t) for t in self.left] + [("target", t) for t in self.target] + [("right", t) for t in self.right]


# ---------------------------------------------------------------- XML


def _read_bytes(src) -> bytes:
    if isinstance(src, bytes):
        return src
    if isinstance(src, (str, os.PathLike)):
        return Path(src).read_bytes()
    return src.read()


def parse_semeval(src: bytes | str | os.PathLike | BinaryIO) -> list[Review]:
    """Parse a SemEval-2016 Task 5 Subtask 1 file into reviews.

    Character offsets are kept verbatim. Opinion elements must carry
    target, category, polarity, from and to.
    """
    try:
        root = ET.fromstring(_read_bytes(src))
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc

    reviews = []
    review_elems = [root] if root.tag == "Review" else root.findall("Review")
    for r_i, r_el in enumerate(review_elems):
        rid = r_el.get("rid")
        r_path = f"Reviews/Review[{r_i}]"
        if rid is None:
            raise ParseError(f"{r_path}: missing attribute 'rid'")
        review = Review(rid)
        for s_i, s_el in enumerate(r_el.iterfind("sentences/sentence")):
            s_path = f"{r_path}/sentences/sentence[{s_i}]"
            sid = s_el.get("id")
            if sid is None:
                raise ParseError(f"{s_path}: missing attribute 'id'")
            text_el = s_el.find("text")
            if text_el is None:
                raise ParseError(f"{s_path}: missing <text>")
            sent = Sentence(sid, text_el.text or "")
            for o_i, o_el in enumerate(s_el.iterfind("Opinions/Opinion")):
                o_path = f"{s_path}/Opinions/Opinion[{o_i}]"
                attrs = {}
                for key in ("target", "category", "polarity", "from", "to"):
                    val = o_el.get(key)
                    if val is None:
                        raise ParseError(f"{o_path}: missing attribute {key!r}")
                    attrs[key] = val
                if attrs["polarity"] not in POLARITY_INDEX:
                    raise ParseError(f"{o_path}: unknown polarity {attrs['polarity']!r}")
                try:
                    start, end = int(attrs["from"]), int(attrs["to"])
                except ValueError:
                    raise ParseError(f"{o_path}: non-integer offsets from={attrs['from']!r} to={attrs['to']!r}") from None
                if start > end:
                    raise ParseError(f"{o_path}: from={start} > to={end}")
                sent.opinions.append(Opinion(attrs["target"], attrs["category"], attrs["polarity"], start, end))
            review.sentences.append(sent)
        reviews.append(review)
    return reviews


def normalize_chars(text: str) -> str:
    return text.translate(_CHAR_MAP)


def filter_explicit(opinions: Iterable[Opinion]) -> list[Opinion]:
    return [o for o in opinions if o.explicit]


# ---------------------------------------------------------------- tokens


@dataclass
class AnnotationRow:
    index: int
    surface: str
    lemma: str
    pos: str
    head: int | None
    dep: str
    start: int
    end: int


def read_annotations(src: str | os.PathLike | io.TextIOBase) -> dict[str, list[AnnotationRow]]:
    """Read the tab-separated annotation sidecar keyed by sentence id.

    Columns: sentence_id, token_index (1-based), surface, lemma, pos_tag,
    head_index (0 = root), dep_label, from, to.
    """
    if isinstance(src, (str, os.PathLike)):
        with open(src, encoding="utf-8") as fh:
            return read_annotations(fh)
    out: dict[str, list[AnnotationRow]] = {}
    for lineno, line in enumerate(src, 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 9:
            raise ParseError(f"annotations line {lineno}: expected 9 tab-separated fields, got {len(cols)}")
        sid, idx, surface, lemma, pos, head, dep, start, end = cols
        try:
            idx_i, head_i, start_i, end_i = int(idx), int(head), int(start), int(end)
        except ValueError:
            raise ParseError(f"annotations line {lineno}: non-integer index/head/offset") from None
        out.setdefault(sid, []).append(
            AnnotationRow(idx_i - 1, surface, lemma, pos, None if head_i == 0 else head_i - 1, dep, start_i, end_i)
        )
    for rows in out.values():
        rows.sort(key=lambda r: r.index)
    return out


def _fallback_tokens(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    for chunk in text.split():
        start = text.index(chunk, pos)
        pos = start + len(chunk)
        lo, hi = 0, len(chunk)
        while lo < hi and chunk[lo] in _PUNCT:
            lo += 1
        while hi > lo and chunk[hi - 1] in _PUNCT:
            hi -= 1
        pieces = [(start + k, start + k + 1) for k in range(lo)]
        if hi > lo:
            pieces.append((start + lo, start + hi))
        pieces += [(start + k, start + k + 1) for k in range(hi, len(chunk))]
        for a, b in pieces:
            s = text[a:b]
            tokens.append(Token(s, s.lower(), (a, b), len(tokens)))
    return tokens


def tokenize(text: str, annotation: Sequence[AnnotationRow] | None = None) -> list[Token]:
    """Tokens for one normalized sentence.

    Annotation rows, when given, are used verbatim; otherwise whitespace
    splitting with leading/trailing punctuation detached.
    """
    if annotation is None:
        return _fallback_tokens(text)
    tokens = []
    n = len(text)
    for k, row in enumerate(annotation):
        if not (0 <= row.start <= row.end <= n):
            raise AlignmentError(f"token {row.surface!r} span ({row.start},{row.end}) lies outside a {n}-char sentence")
        if row.head is not None and not 0 <= row.head < len(annotation):
            raise AlignmentError(f"token {row.surface!r} has head {row.head + 1} outside 1..{len(annotation)}")
        tokens.append(Token(row.surface, row.lemma, (row.start, row.end), k, row.pos, row.head, row.dep))
    return tokens


def split_lcr(tokens: Sequence[Token], opinion: Opinion) -> tuple[list[Token], list[Token], list[Token]]:
    """Tokens before, overlapping, and after the opinion span ``[start, end)``."""
    lo, hi = opinion.start, opinion.end
    inside = [i for i, t in enumerate(tokens) if t.char_span[0] < hi and t.char_span[1] > lo]
    if not inside:
        near = sorted(tokens, key=lambda t: min(abs(t.char_span[0] - lo), abs(t.char_span[1] - hi)))[:3]
        shown = ", ".join(f"{t.surface!r}{t.char_span}" for t in near)
        raise AlignmentError(f"no token overlaps target {opinion.target!r} [{lo},{hi}); nearest: {shown}")
    first, last = inside[0], inside[-1]
    return list(tokens[:first]), list(tokens[first : last + 1]), list(tokens[last + 1 :])


def build_instances(reviews: Iterable[Review], annotations: Mapping[str, Sequence[AnnotationRow]] | None = None) -> list[OpinionInstance]:
    """One instance per explicit opinion; unalignable targets are dropped with a warning."""
    annotations = annotations or {}
    out = []
    for review in reviews:
        for sent in review.sentences:
            explicit = [(k, o) for k, o in enumerate(sent.opinions) if o.explicit]
            if not explicit:
                continue
            text = normalize_chars(sent.text)
            tokens = tokenize(text, annotations.get(sent.id))
            for k, op in explicit:
                try:
                    left, target, right = split_lcr(tokens, op)
                except AlignmentError as exc:
                    logger.warning("dropping opinion %s#%d: %s", sent.id, k, exc)
                    continue
                out.append(OpinionInstance(left, target, right, POLARITY_INDEX[op.polarity], review.id, sent.id, k, op.category))
    return out


def load_instances(xml_path, annotation_path=None) -> list[OpinionInstance]:
    annotations = read_annotations(annotation_path) if annotation_path else None
    return build_instances(parse_semeval(xml_path), annotations)


def class_counts(instances: Iterable[OpinionInstance]) -> list[int]:
    counts = [0] * len(POLARITIES)
    for inst in instances:
        counts[inst.polarity] += 1
    return counts


# ---------------------------------------------------------------- embeddings


class EmbeddingTable:
    """Pretrained vectors plus lazily drawn N(0, 0.052) vectors for unknown words.

    An unknown word's vector depends only on the word and the seed, so the
    same word maps to the same vector however lookups are ordered.
    """

    def __init__(self, known: Mapping[str, np.ndarray] | None = None, dim: int = EMBEDDING_DIM, seed: int = 0, oov_std: float = OOV_STD):
        self.dim = dim
        self.seed = int(seed)
        self.oov_std = oov_std
        self.known: dict[str, np.ndarray] = {}
        self.oov: dict[str, np.ndarray] = {}
        for word, vec in (known or {}).items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"vector for {word!r} has shape {vec.shape}, expected ({dim},)")
            self.known[word] = vec

    @classmethod
    def load(cls, path, dim: int = EMBEDDING_DIM, seed: int = 0, vocab: Iterable[str] | None = None) -> "EmbeddingTable":
        """Read "word v1 ... v_dim" lines; with ``vocab`` only those words are kept."""
        keep = set(vocab) if vocab is not None else None
        known = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.rstrip("\n").rstrip(" ").split(" ")
                if len(parts) < 2:
                    continue
                word, nums = " ".join(parts[:-dim]), parts[-dim:]
                if len(parts) < dim + 1:
                    raise ParseError(f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}")
                if keep is not None and word not in keep:
                    continue
                if word in known:
                    continue
                known[word] = np.array([float(v) for v in nums])
        return cls(known, dim=dim, seed=seed)

    @staticmethod
    def key(token: Token) -> str:
        return token.lemma.lower()

    def vector(self, word: str) -> np.ndarray:
        vec = self.known.get(word)
        if vec is not None:
            return vec
        vec = self.oov.get(word)
        if vec is None:
            digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(0x6F6F76, int.from_bytes(digest, "little")))
            vec = np.random.Generator(np.random.PCG64(seq)).normal(0.0, self.oov_std, size=self.dim)
            self.oov[word] = vec
        return vec

    def embed(self, token: Token) -> np.ndarray:
        return self.vector(self.key(token))

    def matrix(self, tokens: Sequence[Token]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self.embed(t) for t in tokens])

    def __contains__(self, word: str) -> bool:
        return word in self.known
