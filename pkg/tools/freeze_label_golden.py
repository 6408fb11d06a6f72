"""Regenerate tests/golden/demo_label_totals.json from the bundled demo corpus.

Only rerun this after a deliberate labeling change; the test suite compares
against the frozen file.
"""

import json
from pathlib import Path

from rotprobe import corpus, labeling
from rotprobe.config import DEMO_CONFIG

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden" / "demo_label_totals.json"


def totals(annotations) -> dict:
    demo = DEMO_CONFIG.parent
    lexicon = labeling.SentimentLexicon.load(demo / "lexicon.tsv")
    links = labeling.load_ontology_links(demo / "ontology.tsv")
    insts = corpus.build_instances(corpus.parse_semeval(demo / "test.xml"), annotations)
    labels = labeling.label_all(insts, lexicon, links)
    out = {"words": len(labels)}
    for task, classes in labeling.TASKS.items():
        out[task] = {c: sum(lab.get(task) == c for lab in labels) for c in classes}
    return out


def main() -> None:
    ann = corpus.read_annotations(DEMO_CONFIG.parent / "annotations.tsv")
    data = {"fallback": totals(None), "annotated": totals(ann)}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
