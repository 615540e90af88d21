"""Measure the regression-locked constants of the acceptance suite from scratch.

Prints the deficiency-form gap, the regular self-deficiency, the conservation
constants per transform and stage, and the sandwich constant.
"""

import argparse
from collections import Counter

from enumdist.core import Lattice, strings_of_length
from enumdist.enumerator import DEFAULT_TMAX, discrete_bound
from enumdist.information import (
    INFO_STAGE,
    SANDWICH_STAGE,
    TRANSFORMS,
    ConditionalCache,
    conservation_harness,
    info_report,
    make_corpus,
    summarize,
)
from enumdist.randomness import deficiency, deficiency_semimeasure, gap_form, ml_test, operator_library, \
    regular_semimeasure
from enumdist.semimeasure import lebesgue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--skip-sandwich", action="store_true", help="skip the slow sandwich measurement")
    args = ap.parse_args()

    b = discrete_bound(DEFAULT_TMAX)
    lam = lebesgue()
    diffs = Counter(abs(deficiency(ml_test(lam, x, b)).value - gap_form(lam, x, b)) for x in strings_of_length(12))
    print(f"deficiency forms, stage {b.stage}, depth 12: |formula - gap| counts {dict(diffs)}")

    worst = max(deficiency_semimeasure(u, u, Lattice(e), b, [A]).value
                for A in operator_library(b.stage, 12) for u in [regular_semimeasure(A)] for e in (0, 4, 8, 12))
    print(f"regular self-deficiency, stage {b.stage}: max {worst}")

    corpus = make_corpus(500, 12, seed=0)
    top = discrete_bound(INFO_STAGE)
    for s in range(INFO_STAGE - 2, INFO_STAGE + 1):
        sums = {n: summarize(conservation_harness(n, corpus, top.restrict(s))) for n in TRANSFORMS}
        print(f"conservation, stage {s}: " + ", ".join(f"{n}={v.constant} ({v.resolved} resolved)"
                                                      for n, v in sums.items()))

    if not args.skip_sandwich:
        cache = ConditionalCache(SANDWICH_STAGE)
        gaps = Counter()
        for a, c in corpus:
            r = info_report(a, c, cache)
            gaps[r.sup_bound - r.i_bound] += 1
        print(f"sandwich, stage {SANDWICH_STAGE}: (sup - i) counts {dict(sorted(gaps.items()))}")


if __name__ == "__main__":
    main()
