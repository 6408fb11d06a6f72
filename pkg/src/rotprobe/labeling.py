"""Word-level probe labels: part of speech, aspect relation, sentiment, aspect sentiment."""

from __future__ import annotations

import csv
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import OpinionInstance, Token

POS_CLASSES = ("Noun", "Verb", "Adj", "Adv", "Rem")
RELATION_CLASSES = ("Yes", "No")
SENTIMENT_CLASSES = ("Positive", "Negative", "NoSentiment")
ASPECT_SENTIMENT_CLASSES = ("Positive", "Negative", "NoAspectSentiment")

TASKS = {
    "POS": POS_CLASSES,
    "Relation": RELATION_CLASSES,
    "Sentiment": SENTIMENT_CLASSES,
    "AspectSentiment": ASPECT_SENTIMENT_CLASSES,
}
_CSV_COLUMN = {"POS": "pos", "Relation": "relation", "Sentiment": "sentiment", "AspectSentiment": "aspect_sentiment"}

_TAG_FAMILIES = (("NN", "Noun"), ("VB", "Verb"), ("JJ", "Adj"), ("RB", "Adv"))


@dataclass
class SentimentLexicon:
    ontology: dict[str, str] = field(default_factory=dict)  # lemma -> "Positive" | "Negative"
    scores: dict[str, tuple[float, float]] = field(default_factory=dict)  # lemma -> (pos, neg)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SentimentLexicon":
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) == 2 and cols[1].upper() in ("POSITIVE", "NEGATIVE"):
                    lex.ontology[cols[0]] = cols[1].capitalize()
                elif len(cols) == 3:
                    lex.scores[cols[0]] = (float(cols[1]), float(cols[2]))
                else:
                    raise ValueError(f"{path}:{lineno}: expected 'lemma TAB POSITIVE|NEGATIVE' or 'lemma TAB pos TAB neg'")
        return lex


def load_ontology_links(path: str | os.PathLike) -> dict[str, set[str]]:
    links: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'lemma TAB category'")
            links.setdefault(cols[0], set()).add(cols[1])
    return links


def label_pos(tag: str | None) -> str:
    """Penn tag family to one of the five classes; missing tags are Rem."""
    if tag:
        for prefix, cls in _TAG_FAMILIES:
            if tag.upper().startswith(prefix):
                return cls
    return "Rem"


def ontology_connects(lemma: str, category: str, links: Mapping[str, set[str]]) -> bool:
    """A link to the full category ("FOOD#QUALITY") or its entity ("FOOD") counts."""
    cats = links.get(lemma)
    if not cats:
        return False
    return category in cats or category.split("#", 1)[0] in cats


def _dependency_distance(tokens: Sequence[Token], src: int, targets: set[int], limit: int) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(len(tokens))}
    for i, t in enumerate(tokens):
        if t.head is not None:
            adj[i].append(t.head)
            adj[t.head].append(i)
    seen = {src}
    frontier = deque([(src, 0)])
    while frontier:
        node, dist = frontier.popleft()
        if dist == limit:
            continue
        for nb in adj[node]:
            if nb in targets:
                return True
            if nb not in seen:
                seen.add(nb)
                frontier.append((nb, dist + 1))
    return False


def label_relation(index: int, inst: OpinionInstance, links: Mapping[str, set[str]] | None = None, max_edges: int = 1) -> str:
    """Yes when the word is a target word, is within ``max_edges`` dependency
    edges of a target word, or is linked to the opinion's aspect category."""
    tokens = inst.tokens
    n_left = len(inst.left)
    targets = set(range(n_left, n_left + len(inst.target)))
    if index in targets:
        return "Yes"
    if _dependency_distance(tokens, index, targets, max_edges):
        return "Yes"
    if links and ontology_connects(tokens[index].lemma.lower(), inst.category, links):
        return "Yes"
    return "No"


def label_sentiment(lemma: str, lexicon: SentimentLexicon) -> str:
    key = lemma.lower()
    sup = lexicon.ontology.get(key)
    if sup is not None:
        return sup
    scores = lexicon.scores.get(key)
    if scores is not None:
        pos, neg = scores
        if pos > neg:
            return "Positive"
        if neg > pos:
            return "Negative"
    return "NoSentiment"


def label_aspect_sentiment(relation: str, sentiment: str) -> str:
    if relation == "Yes" and sentiment in ("Positive", "Negative"):
        return sentiment
    return "NoAspectSentiment"


@dataclass(frozen=True)
class WordLabels:
    opinion_id: str
    word_index: int
    pos: str
    relation: str
    sentiment: str
    aspect_sentiment: str

    def get(self, task: str) -> str:
        return getattr(self, _CSV_COLUMN[task])

    def index(self, task: str) -> int:
        return TASKS[task].index(self.get(task))


def label_instance(inst: OpinionInstance, lexicon: SentimentLexicon, links: Mapping[str, set[str]] | None = None, max_edges: int = 1) -> list[WordLabels]:
    out = []
    for i, tok in enumerate(inst.tokens):
        rel = label_relation(i, inst, links, max_edges)
        sent = label_sentiment(tok.lemma, lexicon)
        out.append(WordLabels(inst.id, i, label_pos(tok.pos), rel, sent, label_aspect_sentiment(rel, sent)))
    return out


def label_all(instances: Iterable[OpinionInstance], lexicon: SentimentLexicon, links=None, max_edges: int = 1) -> list[WordLabels]:
    out = []
    for inst in instances:
        out.extend(label_instance(inst, lexicon, links, max_edges))
    return out


def write_labels(path, labels: Iterable[WordLabels]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["opinion_id", "word_index", "pos", "relation", "sentiment", "aspect_sentiment"])
        for lab in labels:
            w.writerow([lab.opinion_id, lab.word_index, lab.pos, lab.relation, lab.sentiment, lab.aspect_sentiment])


def read_labels(path) -> dict[tuple[str, int], WordLabels]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            lab = WordLabels(row["opinion_id"], int(row["word_index"]), row["pos"], row["relation"], row["sentiment"], row["aspect_sentiment"])
            for task, classes in TASKS.items():
                if lab.get(task) not in classes:
                    raise ValueError(f"{path}: unknown {task} label {lab.get(task)!r}")
            out[(lab.opinion_id, lab.word_index)] = lab
    return out


# ---------------------------------------------------------------- tables

TABLE_ROWS = (
    ("Correctly predicted training set", "train", True),
    ("Correctly predicted test set", "test", True),
    ("Incorrectly predicted test set", "test", False),
)


def tabulate(words: Iterable[tuple[str, bool, WordLabels]]) -> dict[str, list[list[int]]]:
    """Class counts per task for the three (split, correctness) rows.

    ``words`` yields (split, prediction_correct, labels) per word.
    """
    tables = {task: [[0] * len(cls) for _ in TABLE_ROWS] for task, cls in TASKS.items()}
    row_of = {(split, ok): k for k, (_, split, ok) in enumerate(TABLE_ROWS)}
    for split, ok, lab in words:
        k = row_of.get((split, ok))
        if k is None:
            continue
        for task in TASKS:
            tables[task][k][lab.index(task)] += 1
    return tables


def format_count_table(task: str, rows: list[list[int]]) -> str:
    classes = TASKS[task]
    width = max(len(name) for name, _, _ in TABLE_ROWS)
    head = " " * width + "".join(f"{c:>19}" for c in classes)
    lines = [head]
    for (name, _, _), counts in zip(TABLE_ROWS, rows):
        lines.append(f"{name:<{width}}" + "".join(f"{n:>19}" for n in counts))
    return "\n".join(lines)


def write_count_tables(path, tables: dict[str, list[list[int]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["task", "row", "class", "count"])
        for task, rows in tables.items():
            for (name, _, _), counts in zip(TABLE_ROWS, rows):
                for cls, n in zip(TASKS[task], counts):
                    w.writerow([task, name, cls, n])
