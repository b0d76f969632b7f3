"""Independent oracle for the bundled mini-dataset.

Aggregates annotation scores with exact fractions (mean per combination, then
normalize), lays out the 2x2 phrase grid of each spec, and computes the three
fractions with the vertex-mixture LPs of ns_vertices.py. Prints JSON.
"""
import csv, json, os, sys
from collections import defaultdict
from fractions import Fraction as F
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
from ns_vertices import chain_boxes, fraction, local_boxes, pr_boxes, snap

def aggregate(path, drop_neutral=False):
    scores = defaultdict(lambda: defaultdict(list))
    with open(path) as fh:
        for r in csv.DictReader(fh):
            s = int(r["score"])
            if drop_neutral and s == 4:
                continue
            scores[r["phrase_id"]][int(r["combination_id"])].append(s)
    out = {}
    for pid, by_comb in scores.items():
        means = [F(sum(by_comb[c]), len(by_comb[c])) for c in (1, 2, 3, 4)]
        total = sum(means)
        out[pid] = [m / total for m in means]
    return out

def main(data_dir, drop_neutral=False):
    dists = aggregate(os.path.join(data_dir, "annotations.csv"), drop_neutral)
    result = {}
    with open(os.path.join(data_dir, "specs.csv")) as fh:
        for spec in csv.DictReader(fh):
            rows = [dists[spec[c]] for c in ("cell_00", "cell_01", "cell_10", "cell_11")]
            e = np.array([[float(p) for p in row] for row in rows])
            first, second = ("S", "V") if spec["phrase_type"] == "subject_verb" else ("V", "O")
            result[spec["model_id"]] = {
                "rows": [[str(p) for p in row] for row in rows],
                f"{first}->{second}": str(snap(fraction(e, chain_boxes(True)))),
                f"{second}->{first}": str(snap(fraction(e, chain_boxes(False)))),
                "NS": str(snap(fraction(e, local_boxes() + pr_boxes()))),
            }
    print(json.dumps(result, indent=2, sort_keys=True))

if __name__ == "__main__":
    main(sys.argv[1], "--drop-neutral" in sys.argv)
