"""Shared fixtures: a 5-pair corpus of tiny images, texts, and vectors.

The corpus lives in a session temp dir: five small PNGs of seeded noise
(different sizes to exercise the resize), a word-vector file in the usual
one-token-per-line text layout, and the input TSV tying them together.
"""

import numpy as np
import pytest
from PIL import Image

from anaexport import ExportJob, run_export

VEC_DIM = 200

VOCAB = (
    "a", "cat", "sits", "on", "the", "mat", "dog", "runs",
    "red", "sky", "blue", "tree", "night",
)

# (id, image file, text, label); p2 and p4 contain out-of-vocabulary words
PAIRS = [
    ("p0", "img0.png", "A cat sits on the mat.", 2),
    ("p1", "img1.png", "The dog runs!", 1),
    ("p2", "img2.png", "red sky at night", 0),
    ("p3", "img3.png", "blue tree, blue tree, blue", 1),
    ("p4", "img4.png", "the cat and the dog", 0),
]

IMAGE_SIZES = [(48, 32), (64, 64), (20, 50), (224, 224), (31, 17)]


def write_vectors(path, vocab=VOCAB, dim=VEC_DIM, seed=7):
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as f:
        for token in vocab:
            vals = " ".join(f"{x:.4f}" for x in rng.standard_normal(dim))
            f.write(f"{token} {vals}\n")


def write_tsv(path, pairs):
    with open(path, "w", encoding="utf-8") as f:
        for pair_id, image, text, label in pairs:
            f.write(f"{pair_id}\t{image}\t{text}\t{label}\n")


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(42)
    for (_, fname, _, _), (w, h) in zip(PAIRS, IMAGE_SIZES):
        arr = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        Image.fromarray(arr, "RGB").save(root / fname)
    write_vectors(root / "vectors.txt")
    write_tsv(root / "pairs.tsv", PAIRS)
    return root


@pytest.fixture(scope="session")
def exported(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("export")
    job = ExportJob(tsv_path=corpus / "pairs.tsv",
                    vectors_path=corpus / "vectors.txt",
                    out_dir=out, split="train", seed=3)
    result = run_export(job)
    return out, result
