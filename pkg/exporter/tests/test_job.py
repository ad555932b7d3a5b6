"""Export jobs: accounting, truncation, skips, invariants, determinism."""

import json
import logging

import numpy as np
import pytest
from PIL import Image

from anaexport import ExportJob, run_export
from anaexport.anafio import read_matrix
from anaexport.errors import ExportError
from conftest import PAIRS, VEC_DIM, write_tsv, write_vectors

SMALL = dict(k=4, n_max=100)  # cheaper backends for the unit tests


def _job(corpus, out, pairs=None, split="train", **overrides):
    tsv = corpus / "pairs.tsv"
    if pairs is not None:
        # subset TSVs live outside the corpus dir, so anchor the image paths
        tsv = out / "subset.tsv"
        write_tsv(tsv, [(pid, img if img.startswith("/") else str(corpus / img),
                         text, label) for pid, img, text, label in pairs])
    kw = dict(SMALL)
    kw.update(overrides)
    return ExportJob(tsv_path=tsv, vectors_path=corpus / "vectors.txt",
                     out_dir=out / "data", split=split, seed=3, **kw)


def _manifest_lines(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_two_pair_tsv_yields_two_manifest_lines_and_six_files(corpus, tmp_path):
    result = run_export(_job(corpus, tmp_path, pairs=PAIRS[:2]))
    lines = _manifest_lines(result.manifest)
    assert result.written == 2 and len(lines) == 2
    files = sorted(p.name for p in (tmp_path / "data" / "train").iterdir())
    assert len(files) == 6
    assert files == sorted(f"{pid}.{kind}.anaf"
                           for pid in ("p0", "p1")
                           for kind in ("reg", "glv", "ctx"))


def test_texts_longer_than_the_cap_store_exactly_the_cap(corpus, tmp_path):
    long_text = " ".join(f"tok{i}" for i in range(150))
    pairs = [("long", "img0.png", long_text, 1)]
    result = run_export(_job(corpus, tmp_path, pairs=pairs))
    (line,) = _manifest_lines(result.manifest)
    assert line["N"] == 100
    glv = read_matrix(tmp_path / "data" / "train" / "long.glv.anaf")
    ctx = read_matrix(tmp_path / "data" / "train" / "long.ctx.anaf")
    assert glv.shape[0] == 100 and ctx.shape[0] == 100


def test_all_oov_text_gives_zero_word_rows_but_nonzero_context(corpus, tmp_path):
    pairs = [("oov", "img1.png", "zzz qqq www", 0)]
    run_export(_job(corpus, tmp_path, pairs=pairs))
    glv = read_matrix(tmp_path / "data" / "train" / "oov.glv.anaf")
    ctx = read_matrix(tmp_path / "data" / "train" / "oov.ctx.anaf")
    assert glv.shape == (3, VEC_DIM)
    assert np.array_equal(glv, np.zeros_like(glv))
    assert np.linalg.norm(ctx) > 0.0


def test_matrix_shapes_match_the_production_contract(exported):
    out, result = exported
    for line in _manifest_lines(result.manifest):
        reg = read_matrix(out / line["region"])
        glv = read_matrix(out / line["words"])
        ctx = read_matrix(out / line["ctx"])
        assert reg.shape == (36, 1024) and line["K"] == 36
        assert glv.shape == (line["N"], 200)
        assert ctx.shape == (line["N"], 768)


def test_duplicate_ids_fail_the_job(corpus, tmp_path):
    pairs = [PAIRS[0], ("p0", "img1.png", "the dog", 1)]
    with pytest.raises(ExportError, match="duplicate id"):
        run_export(_job(corpus, tmp_path, pairs=pairs))


def test_labels_outside_the_class_set_fail_the_job(corpus, tmp_path):
    with pytest.raises(ExportError, match="label 3 not in"):
        run_export(_job(corpus, tmp_path, pairs=[("x", "img0.png", "a cat", 3)]))
    bad = tmp_path / "bad.tsv"
    bad.write_text("x\timg0.png\ta cat\tmaybe\n")
    with pytest.raises(ExportError, match="not an integer"):
        run_export(ExportJob(tsv_path=bad, vectors_path=corpus / "vectors.txt",
                             out_dir=tmp_path / "data", **SMALL))


def test_malformed_rows_fail_the_job(corpus, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("only three\tfields\there\n")
    with pytest.raises(ExportError, match="4 tab-separated fields"):
        run_export(ExportJob(tsv_path=bad, vectors_path=corpus / "vectors.txt",
                             out_dir=tmp_path / "data", **SMALL))
    with pytest.raises(ExportError, match="TSV not found"):
        run_export(ExportJob(tsv_path=tmp_path / "nope.tsv",
                             vectors_path=corpus / "vectors.txt",
                             out_dir=tmp_path / "data", **SMALL))


def test_unreadable_images_are_skipped_and_logged(corpus, tmp_path, caplog):
    (tmp_path / "junk.png").write_bytes(b"this is not an image")
    pairs = [PAIRS[0],
             ("bad-img", str(tmp_path / "junk.png"), "the cat", 1),
             ("gone", str(tmp_path / "missing.png"), "the dog", 2)]
    with caplog.at_level(logging.WARNING, logger="anaexport"):
        result = run_export(_job(corpus, tmp_path, pairs=pairs))
    assert result.written == 1
    assert [pid for pid, _ in result.skipped] == ["bad-img", "gone"]
    assert all("unreadable image" in reason for _, reason in result.skipped)
    assert sum("skipping" in rec.message for rec in caplog.records) == 2
    ids = [line["id"] for line in _manifest_lines(result.manifest)]
    assert ids == ["p0"]


def test_empty_and_punctuation_only_texts_are_skipped(corpus, tmp_path, caplog):
    pairs = [("empty", "img0.png", "", 0),
             ("punct", "img1.png", "?!---", 1),
             PAIRS[2]]
    with caplog.at_level(logging.WARNING, logger="anaexport"):
        result = run_export(_job(corpus, tmp_path, pairs=pairs))
    assert result.written == 1
    assert result.skipped == [("empty", "empty text"), ("punct", "empty text")]


def test_export_is_deterministic_byte_for_byte(corpus, tmp_path):
    outs = []
    for name in ("run_a", "run_b"):
        out = tmp_path / name
        run_export(ExportJob(tsv_path=corpus / "pairs.tsv",
                             vectors_path=corpus / "vectors.txt",
                             out_dir=out, seed=9, **SMALL))
        outs.append(out)
    files_a = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    assert files_a == files_b and len(files_a) == 16  # manifest + 5 pairs x 3
    for rel in files_a:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()


def test_absolute_image_paths_are_honored(corpus, tmp_path):
    img = tmp_path / "abs.png"
    Image.fromarray(np.full((8, 8, 3), 120, dtype=np.uint8), "RGB").save(img)
    result = run_export(_job(corpus, tmp_path, pairs=[("abs", str(img), "a cat", 0)]))
    assert result.written == 1 and result.skipped == []


def test_manifest_paths_are_relative_to_the_manifest_directory(exported):
    out, result = exported
    assert result.manifest.parent == out
    for line in _manifest_lines(result.manifest):
        for key in ("region", "words", "ctx"):
            assert not line[key].startswith("/")
            assert line[key].startswith("train/")
            assert (out / line[key]).is_file()


def test_fresh_vectors_file_helper_round_trips(tmp_path):
    # the fixture writer itself produces a loadable table at the stated width
    from anaexport.vocab import WordVectors
    write_vectors(tmp_path / "v.txt", vocab=("cat", "dog"), dim=8, seed=1)
    vecs = WordVectors.load(tmp_path / "v.txt")
    assert vecs.dim == 8 and set(vecs.table) == {"cat", "dog"}
