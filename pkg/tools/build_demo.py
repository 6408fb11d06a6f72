"""Regenerate the bundled demo corpus under src/rotprobe/data/demo/.

Writes SemEval-schema train/test XML, an annotation sidecar produced by a
small rule-based tagger and attachment heuristic, a sentiment lexicon, an
ontology link file, synthetic 300-d embeddings and a run config.

    python tools/build_demo.py
"""

from __future__ import annotations

import sys
from pathlib import Path
from xml.sax.saxutils import quoteattr, escape

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from rotprobe.corpus import normalize_chars, tokenize  # noqa: E402

OUT = ROOT / "src" / "rotprobe" / "data" / "demo"

# (review id, sentence text, [(target, category, polarity)]); "NULL" targets are implicit
TRAIN = [
    ("404464", "Thalia is a beautiful restaurant with beautiful people serving you, but the food doesn’t quite match up.",
     [("people", "SERVICE#GENERAL", "positive"), ("food", "FOOD#QUALITY", "negative"), ("Thalia", "AMBIENCE#GENERAL", "positive")]),
    ("d01", "The pasta was delicious and the waiter was friendly.",
     [("pasta", "FOOD#QUALITY", "positive"), ("waiter", "SERVICE#GENERAL", "positive")]),
    ("d01", "The soup was cold and bland.", [("soup", "FOOD#QUALITY", "negative")]),
    ("d02", "Our server was rude and slow.", [("server", "SERVICE#GENERAL", "negative")]),
    ("d02", "The pizza is excellent.", [("pizza", "FOOD#QUALITY", "positive")]),
    ("d03", "The staff were helpful and the decor is lovely.",
     [("staff", "SERVICE#GENERAL", "positive"), ("decor", "AMBIENCE#GENERAL", "positive")]),
    ("d03", "The prices are terrible.", [("prices", "RESTAURANT#PRICES", "negative")]),
    ("d04", "We ordered the salmon for dinner.", [("salmon", "FOOD#QUALITY", "neutral")]),
    ("d04", "The wine list is great.", [("wine list", "DRINKS#STYLE_OPTIONS", "positive")]),
    ("d05", "The music was loud and awful.", [("music", "AMBIENCE#GENERAL", "negative")]),
    ("d05", "I loved the sushi.", [("sushi", "FOOD#QUALITY", "positive")]),
    ("d06", "The bread was stale.", [("bread", "FOOD#QUALITY", "negative")]),
    ("d06", "The menu has a few options.", [("menu", "FOOD#STYLE_OPTIONS", "neutral")]),
    ("d07", "The desserts are amazing.", [("desserts", "FOOD#QUALITY", "positive")]),
    ("d07", "The hostess was very unpleasant.", [("hostess", "SERVICE#GENERAL", "negative")]),
    ("d08", "Great coffee – and a nice view.",
     [("coffee", "DRINKS#QUALITY", "positive"), ("view", "LOCATION#GENERAL", "positive")]),
    ("d08", "The steak was overcooked and dry.", [("steak", "FOOD#QUALITY", "negative")]),
    ("d09", "The place was packed on Friday.", [("place", "RESTAURANT#GENERAL", "neutral")]),
    ("d09", "Worth every penny.", [("NULL", "RESTAURANT#PRICES", "positive")]),
    ("d10", "We went there last week.", []),
    ("d10", "The tacos were fresh and tasty.", [("tacos", "FOOD#QUALITY", "positive")]),
    ("d11", "The service was horrible.", [("service", "SERVICE#GENERAL", "negative")]),
    ("d11", "The burgers are good but the fries are soggy.",
     [("burgers", "FOOD#QUALITY", "positive"), ("fries", "FOOD#QUALITY", "negative")]),
]

TEST = [
    ("t01", "The lasagna was wonderful.", [("lasagna", "FOOD#QUALITY", "positive")]),
    ("t01", "The waitress was rude.", [("waitress", "SERVICE#GENERAL", "negative")]),
    ("t02", "The curry is tasty and the staff are friendly.",
     [("curry", "FOOD#QUALITY", "positive"), ("staff", "SERVICE#GENERAL", "positive")]),
    ("t02", "The noodles were bland and cold.", [("noodles", "FOOD#QUALITY", "negative")]),
    ("t03", "We ordered the chicken.", [("chicken", "FOOD#QUALITY", "neutral")]),
    ("t03", "The atmosphere is lovely.", [("atmosphere", "AMBIENCE#GENERAL", "positive")]),
    ("t04", "The prices were awful.", [("prices", "RESTAURANT#PRICES", "negative")]),
    ("t04", "Never again.", [("NULL", "RESTAURANT#GENERAL", "negative")]),
    ("t05", "The cake is excellent but the tea was stale.",
     [("cake", "FOOD#QUALITY", "positive"), ("tea", "DRINKS#QUALITY", "negative")]),
]

POS = {
    "NN": "restaurant people food pasta waiter soup server pizza staff decor prices salmon dinner wine list music sushi "
          "bread menu options desserts hostess coffee view steak place friday tacos service burgers fries lasagna "
          "waitress curry noodles chicken atmosphere cake tea week penny thalia",
    "VB": "is was are were serving match ordered has loved went",
    "JJ": "beautiful delicious friendly cold bland rude slow excellent helpful lovely terrible great loud awful stale "
          "few amazing unpleasant nice overcooked dry packed fresh tasty horrible good soggy wonderful last worth",
    "RB": "quite up very there again never",
    "DT": "the a every",
    "PRP": "you i we our",
    "IN": "with for on",
    "CC": "and but",
}
POS_OF = {w: tag for tag, words in POS.items() for w in words.split()}
POS_OF.update({"our": "PRP$", "doesn't": "VBZ", "are": "VBP", "were": "VBD", "was": "VBD", "is": "VBZ",
               "loved": "VBD", "ordered": "VBD", "went": "VBD", "serving": "VBG", "has": "VBZ",
               "prices": "NNS", "people": "NNS", "options": "NNS", "desserts": "NNS", "tacos": "NNS",
               "burgers": "NNS", "fries": "NNS", "noodles": "NNS", "thalia": "NNP", "friday": "NNP"})
LEMMA = {"is": "be", "was": "be", "are": "be", "were": "be", "doesn't": "do", "loved": "love", "ordered": "order",
         "went": "go", "serving": "serve", "has": "have", "prices": "price", "people": "people",
         "options": "option", "desserts": "dessert", "tacos": "taco", "burgers": "burger", "fries": "fry",
         "noodles": "noodle", "overcooked": "overcook", "packed": "pack"}

LEXICON_ONTOLOGY = {
    "beautiful": "POSITIVE", "delicious": "POSITIVE", "friendly": "POSITIVE", "excellent": "POSITIVE",
    "lovely": "POSITIVE", "great": "POSITIVE", "amazing": "POSITIVE", "tasty": "POSITIVE", "wonderful": "POSITIVE",
    "bland": "NEGATIVE", "rude": "NEGATIVE", "terrible": "NEGATIVE", "awful": "NEGATIVE", "stale": "NEGATIVE",
    "horrible": "NEGATIVE", "soggy": "NEGATIVE", "overcook": "NEGATIVE",
}
LEXICON_SCORES = {
    "cold": (0.0, 0.375), "slow": (0.0, 0.25), "helpful": (0.375, 0.0), "loud": (0.125, 0.25),
    "love": (0.625, 0.0), "unpleasant": (0.0, 0.75), "nice": (0.625, 0.0), "dry": (0.0, 0.25), "fresh": (0.5, 0.0),
    "good": (0.75, 0.0), "few": (0.0, 0.125), "pack": (0.0, 0.0), "worth": (0.25, 0.25), "quite": (0.125, 0.0),
    "match": (0.0, 0.0), "very": (0.25, 0.125), "again": (0.0, 0.0),
}
ONTOLOGY_LINKS = [
    ("delicious", "FOOD"), ("tasty", "FOOD"), ("bland", "FOOD"), ("stale", "FOOD"), ("soggy", "FOOD"),
    ("overcook", "FOOD"), ("fresh", "FOOD"), ("friendly", "SERVICE"), ("rude", "SERVICE"), ("helpful", "SERVICE"),
    ("slow", "SERVICE"), ("serve", "SERVICE"), ("lovely", "AMBIENCE"), ("loud", "AMBIENCE"), ("expensive", "RESTAURANT#PRICES"),
    ("terrible", "RESTAURANT#PRICES"), ("eat", "FOOD"), ("order", "FOOD#QUALITY"),
]

POSITIVE_WORDS = {k for k, v in LEXICON_ONTOLOGY.items() if v == "POSITIVE"} | {"helpful", "love", "nice", "good", "fresh", "worth"}
NEGATIVE_WORDS = {k for k, v in LEXICON_ONTOLOGY.items() if v == "NEGATIVE"} | {"cold", "slow", "unpleasant", "dry", "loud"}


def tag(tok) -> str:
    w = tok.surface.lower()
    if not any(ch.isalnum() for ch in w):
        return "." if w in ".!?" else ","
    t = POS_OF.get(w)
    if t is None:
        raise SystemExit(f"no POS for {w!r}; add it to POS")
    return {"VB": "VBZ", "NN": "NN"}.get(t, t)


def heads(tags: list[str]) -> list[int]:
    """Toy attachment: 0-based head per token, -1 for the root."""
    n = len(tags)
    verbs = [i for i, t in enumerate(tags) if t.startswith("VB")]
    nouns = [i for i, t in enumerate(tags) if t.startswith("NN")]
    root = verbs[0] if verbs else (nouns[0] if nouns else 0)
    out = []
    for i, t in enumerate(tags):
        if i == root:
            out.append(-1)
            continue
        right_noun = next((j for j in range(i + 1, n) if tags[j].startswith("NN")), None)
        if t in ("DT", "PRP$", "IN") and right_noun is not None:
            out.append(right_noun)
        elif t == "JJ":
            if i + 1 < n and tags[i + 1].startswith("NN"):
                out.append(i + 1)
            else:
                # predicative: attach to the nearest preceding verb, else the root
                prev_verb = next((j for j in range(i - 1, -1, -1) if tags[j].startswith("VB")), root)
                out.append(prev_verb)
        elif t == "RB":
            nxt = next((j for j in range(i + 1, n) if tags[j] in ("JJ",) or tags[j].startswith("VB")), None)
            out.append(nxt if nxt is not None else root)
        elif t.startswith("NN") and i + 1 < n and tags[i + 1].startswith("NN"):
            out.append(i + 1)
        else:
            out.append(root)
    return out


def write_xml(path: Path, data) -> None:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<Reviews>"]
    by_review: dict[str, list] = {}
    for rid, text, ops in data:
        by_review.setdefault(rid, []).append((text, ops))
    for rid, sents in by_review.items():
        lines.append(f"    <Review rid={quoteattr(rid)}>")
        lines.append("        <sentences>")
        for k, (text, ops) in enumerate(sents):
            lines.append(f'            <sentence id="{rid}:{k}">')
            lines.append(f"                <text>{escape(text)}</text>")
            if ops:
                lines.append("                <Opinions>")
                for target, cat, pol in ops:
                    if target == "NULL":
                        a = b = 0
                    else:
                        a = text.index(target)
                        b = a + len(target)
                    lines.append(
                        f"                    <Opinion target={quoteattr(target)} category={quoteattr(cat)} "
                        f'polarity="{pol}" from="{a}" to="{b}"/>'
                    )
                lines.append("                </Opinions>")
            else:
                lines.append("                <Opinions/>")
            lines.append("            </sentence>")
        lines.append("        </sentences>")
        lines.append("    </Review>")
    lines.append("</Reviews>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def annotation_rows(data):
    rows = []
    by_review: dict[str, int] = {}
    for rid, text, _ in data:
        k = by_review.get(rid, 0)
        by_review[rid] = k + 1
        sid = f"{rid}:{k}"
        toks = tokenize(normalize_chars(text))
        tags = [tag(t) for t in toks]
        hs = heads(tags)
        for i, (tok, tg, h) in enumerate(zip(toks, tags, hs)):
            w = tok.surface.lower()
            lemma = LEMMA.get(w, w)
            dep = "root" if h < 0 else {"DT": "det", "JJ": "amod", "RB": "advmod", "IN": "case", "CC": "cc"}.get(tg, "dep")
            rows.append(f"{sid}\t{i + 1}\t{tok.surface}\t{lemma}\t{tg}\t{h + 1}\t{dep}\t{tok.char_span[0]}\t{tok.char_span[1]}")
    return rows


def vocabulary(data) -> list[str]:
    words = set()
    for _, text, _ in data:
        for tok in tokenize(normalize_chars(text)):
            w = tok.surface.lower()
            words.add(LEMMA.get(w, w))
    return sorted(words)


def write_embeddings(path: Path, vocab: list[str], dim: int = 300) -> None:
    rng = np.random.default_rng(20200601)
    pos_dir = rng.normal(0, 1, dim)
    pos_dir /= np.linalg.norm(pos_dir)
    neg_dir = rng.normal(0, 1, dim)
    neg_dir -= pos_dir * (neg_dir @ pos_dir)
    neg_dir /= np.linalg.norm(neg_dir)
    # a few target words stay out of the table so the OOV path is exercised
    skip = {"thalia", "lasagna", "curry"}
    with open(path, "w", encoding="utf-8") as fh:
        for w in vocab:
            if w in skip:
                continue
            v = rng.normal(0, 0.3, dim)
            if w in POSITIVE_WORDS:
                v += 2.0 * pos_dir
            if w in NEGATIVE_WORDS:
                v += 2.0 * neg_dir
            fh.write(w + " " + " ".join(f"{x:.5f}" for x in v) + "\n")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    write_xml(OUT / "train.xml", TRAIN)
    write_xml(OUT / "test.xml", TEST)
    (OUT / "annotations.tsv").write_text("\n".join(annotation_rows(TRAIN) + annotation_rows(TEST)) + "\n", encoding="utf-8")
    lex = [f"{w}\t{v}" for w, v in sorted(LEXICON_ONTOLOGY.items())]
    lex += [f"{w}\t{p}\t{n}" for w, (p, n) in sorted(LEXICON_SCORES.items())]
    (OUT / "lexicon.tsv").write_text("\n".join(lex) + "\n", encoding="utf-8")
    (OUT / "ontology.tsv").write_text("\n".join(f"{w}\t{c}" for w, c in ONTOLOGY_LINKS) + "\n", encoding="utf-8")
    write_embeddings(OUT / "embeddings.txt", vocabulary(TRAIN + TEST))


if __name__ == "__main__":
    main()
