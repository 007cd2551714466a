#!/usr/bin/env python3
"""Smoke test for the gendial Python bindings.

Builds the extension module if needed, imports it, and exercises vocabulary
loading, suite generation, gender classification, and a logistic fit.

Run from the repository root:

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import():
    lib = None
    for profile in ("debug", "release"):
        candidate = REPO / "target" / profile / "libgendial_py.so"
        if candidate.exists():
            lib = candidate
            break
    if lib is None:
        print("building gendial-py ...")
        subprocess.run(
            ["cargo", "build", "-p", "gendial-py"], cwd=REPO, check=True
        )
        lib = REPO / "target" / "debug" / "libgendial_py.so"
    stage = Path(tempfile.mkdtemp(prefix="gendial-py-"))
    shutil.copy2(lib, stage / "gendial.so")
    sys.path.insert(0, str(stage))
    import gendial  # noqa: E402

    return gendial


def main():
    gendial = build_and_import()
    fixtures = REPO / "crates" / "core" / "fixtures"

    # vocabulary loading and validation
    vocab = gendial.load_vocabulary(str(fixtures / "vocab"))
    assert vocab["adjectives"] == 18, vocab
    assert vocab["adverbs"] == 6, vocab
    assert vocab["occupations"] == 4, vocab
    assert vocab["violations"] == [], vocab
    print(f"vocabulary ok: {vocab['adjectives']} adjectives, digest {vocab['digest'][:12]}...")

    # suite generation at a size the sample vocabulary supports
    params = {
        "adverbAdjectiveSample": 12,
        "adverbsPerStereotype": 2,
        "charAdjectivesPerBase": 3,
        "dialogueTuplesPerBase": 2,
        "structureTuplesPerBase": 3,
    }
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "suite.jsonl"
        summary = gendial.generate_suite(
            str(fixtures / "vocab"), 42, json.dumps(params), str(out)
        )
        # 12*(1+2+2) + 2*2*2*3*3 + 2*2*4*2 + 4 structure variants
        assert summary["byKind"]["stereo_adverb"] == 60, summary
        assert summary["byKind"]["stereo_char_single"] == 72, summary
        assert summary["byKind"]["stereo_char_dialogue"] == 32, summary
        assert summary["byKind"]["structure_style1_full"] == 48, summary
        sources = (Path(tmp) / "sources.txt").read_text().splitlines()
        assert len(sources) == summary["instances"], "sources misaligned"
        regen = gendial.generate_suite(str(fixtures / "vocab"), 42, json.dumps(params))
        assert regen["digest"] == summary["digest"], "generation not deterministic"
    print(f"generation ok: {summary['instances']} instances, {summary['slots']} slots")

    # classification: dictionary hit, morphology fallback, source copy
    ann = gendial.classify_form("rosa", "es", "pink", str(fixtures / "dict"))
    assert ann["label"] == "N" and ann["stage"] == "DICTIONARY", ann
    ann = gendial.classify_form("víktur", "is", "victorious", str(fixtures / "dict"))
    assert ann["label"] == "M" and ann["stage"] == "MORPHOLOGY", ann
    ann = gendial.classify_form("victorious", "es", "victorious", str(fixtures / "dict"))
    assert ann["label"] == "N" and ann["detail"] == "SOURCE_COPY", ann
    assert gendial.ending_fallback("bonita", "es") == ("F", "OodRegularEnding")
    assert gendial.ending_fallback("xyz", "es") is None
    print("classification ok: rosa/N, víktur/M, source-copy/N")

    # logistic fit: intercept-only MLE equals the logit of the rate
    n, k = 1000, 300
    x = [[1.0] for _ in range(n)]
    y = [1.0 if i < k else 0.0 for i in range(n)]
    fit = gendial.fit_logistic(x, y, ["Intercept"])
    est = fit["coefficients"][0]["estimate"]
    assert fit["converged"], fit
    assert abs(est - math.log(0.3 / 0.7)) < 1e-3, est
    print(f"logistic fit ok: intercept {est:.4f} ~ logit(0.3)")

    print("smoke test passed")


if __name__ == "__main__":
    main()
