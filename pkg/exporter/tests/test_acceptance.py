"""Acceptance: exported matrices round-trip through the scoring toolkit.

The toolkit is exercised strictly through its command-line interface (the
published external surface); UserWarnings in the subprocess are promoted
to errors so any load-time renormalization warning fails the run.
"""

import json
import math
import os
import struct
import subprocess
import sys

import numpy as np

from prob_exporter import ExportJob, export, list_images


def run_scorelab(*argv):
    env = dict(os.environ, PYTHONWARNINGS="error::UserWarning")
    proc = subprocess.run(
        [sys.executable, "-m", "scorelab.cli", *argv],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_export_round_trip(image_corpus, tmp_path):
    out = tmp_path / "corpus.pmat"
    job = ExportJob(
        image_dir=str(image_corpus),
        classifier="torchvision:resnet18",
        weights=None,
        init_seed=0,
        output_path=str(out),
        batch_size=48,
    )
    result = export(job)
    assert result.n_rows >= 100

    # row order is the lexicographic relative-path order
    with open(result.manifest_path) as f:
        manifest = json.load(f)
    rel = [p.relative_to(image_corpus).as_posix() for p in list_images(image_corpus)]
    assert manifest["images"] == rel == sorted(rel)

    # row sums within 1e-5 straight off the wire
    raw = out.read_bytes()
    _, _, n, k = struct.unpack("<4sHQI", raw[:18])
    rows = np.frombuffer(raw[18:], dtype="<f8").reshape(n, k)
    assert np.abs(rows.sum(axis=1) - 1.0).max() <= 1e-5

    # repeated export is row-identical
    out2 = tmp_path / "corpus2.pmat"
    export(ExportJob(
        image_dir=str(image_corpus), classifier="torchvision:resnet18",
        weights=None, init_seed=0, output_path=str(out2), batch_size=48,
    ))
    assert out.read_bytes() == out2.read_bytes()

    # loads through the toolkit CLI with zero validation warnings and the
    # entropy study reports bits within [0, log2 K]
    doc = run_scorelab("entropy-study", "--input", str(out))
    payload = doc["result"]
    top = math.log2(k)
    assert 0.0 <= payload["mean_conditional_entropy_bits"] <= top
    assert 0.0 <= payload["marginal_entropy_bits"] <= top
    assert sum(payload["histogram_counts"]) == result.n_rows

    # the score side works end to end as well
    score = run_scorelab("improved-score", "--input", str(out))
    assert 0.0 <= score["result"]["improved_score_nats"] <= math.log(k) + 1e-9
    print(
        f"[PASS] exporter round-trip: {result.n_rows} images -> {n}x{k} matrix, "
        f"H(y|x) {payload['mean_conditional_entropy_bits']:.3f} bits, "
        f"H(y) {payload['marginal_entropy_bits']:.3f} bits"
    )
