"""Manifests, record validation, and the planted-structure generator."""

import json

import numpy as np
import pytest

from ananet.anaf import write_matrix
from ananet.data import (DataError, FeatureRecord, SynthConfig,
                         generate_synthetic, load_dataset, load_manifest,
                         synthesize_pair)
from conftest import TINY_SYNTH


def _write_record_files(root, pair_id, K=2, N=3, d_r=4, d_G=3, d_B=2):
    rng = np.random.default_rng(0)
    paths = {}
    for tag, shape in (("reg", (K, d_r)), ("glv", (N, d_G)), ("ctx", (N, d_B))):
        rel = f"{pair_id}.{tag}.anaf"
        write_matrix(root / rel, rng.standard_normal(shape))
        paths[tag] = rel
    return paths


def _manifest_line(pair_id, paths, label=0, K=2, N=3):
    return json.dumps({"id": pair_id, "label": label, "region": paths["reg"],
                       "words": paths["glv"], "ctx": paths["ctx"], "K": K, "N": N})


def test_manifest_preserves_order(tmp_path):
    lines = []
    for i in range(3):
        paths = _write_record_files(tmp_path, f"p{i}")
        lines.append(_manifest_line(f"p{i}", paths))
    mpath = tmp_path / "train.jsonl"
    mpath.write_text("\n".join(lines) + "\n")
    records = load_dataset(mpath)
    assert [r.id for r in records] == ["p0", "p1", "p2"]


def test_manifest_bad_label_names_line_number(tmp_path):
    paths = _write_record_files(tmp_path, "a")
    lines = [_manifest_line("a", paths), _manifest_line("b", paths, label=4)]
    mpath = tmp_path / "train.jsonl"
    mpath.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError) as exc:
        load_manifest(mpath)
    assert "line 2" in str(exc.value)


def test_manifest_duplicate_id_rejected(tmp_path):
    paths = _write_record_files(tmp_path, "a")
    mpath = tmp_path / "train.jsonl"
    mpath.write_text(_manifest_line("a", paths) + "\n" + _manifest_line("a", paths) + "\n")
    with pytest.raises(DataError) as exc:
        load_manifest(mpath)
    assert "duplicate" in str(exc.value)


def test_dataset_dim_mismatch_rejected(tmp_path):
    paths = _write_record_files(tmp_path, "a", K=2)
    mpath = tmp_path / "train.jsonl"
    mpath.write_text(_manifest_line("a", paths, K=3) + "\n")
    with pytest.raises(DataError) as exc:
        load_dataset(mpath)
    assert "K=2" in str(exc.value)


def test_dataset_missing_file_rejected(tmp_path):
    paths = _write_record_files(tmp_path, "a")
    (tmp_path / paths["glv"]).unlink()
    mpath = tmp_path / "train.jsonl"
    mpath.write_text(_manifest_line("a", paths) + "\n")
    with pytest.raises(DataError) as exc:
        load_dataset(mpath)
    assert "missing file" in str(exc.value)


def test_record_validate_rejects_non_finite():
    rec = FeatureRecord(id="x", label=0,
                        region_feats=np.array([[1.0, np.inf]]),
                        word_vecs=np.ones((2, 2)), ctx_vecs=np.ones((2, 2)))
    with pytest.raises(DataError):
        rec.validate()


def test_record_validate_rejects_token_row_mismatch():
    rec = FeatureRecord(id="x", label=0, region_feats=np.ones((2, 2)),
                        word_vecs=np.ones((3, 2)), ctx_vecs=np.ones((2, 2)))
    with pytest.raises(DataError):
        rec.validate()


def test_synth_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(n_per_class=(0, 1, 1)).validate()
    with pytest.raises(ValueError):
        SynthConfig(noise_sigma=-0.1).validate()
    with pytest.raises(ValueError):
        SynthConfig(association_strength=0.0).validate()


def test_generation_is_byte_deterministic(tmp_path):
    cfg = SynthConfig(n_per_class=(3, 2, 2), K=3, N=4, d_r=6, d_G=4, d_B=5, seed=9)
    out_a = generate_synthetic(cfg, tmp_path / "a")
    out_b = generate_synthetic(cfg, tmp_path / "b")
    for split in ("train", "dev", "test"):
        ma = (tmp_path / "a" / f"{split}.jsonl").read_bytes()
        mb = (tmp_path / "b" / f"{split}.jsonl").read_bytes()
        assert ma == mb
        for line in ma.decode().strip().split("\n"):
            rel = json.loads(line)["region"]
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    assert out_a["pairs"] == out_b["pairs"]


def test_per_class_counts_exact(tiny_dataset, tiny_records):
    counts = TINY_SYNTH.n_per_class
    for split, per_class in zip(("train", "dev", "test"), counts):
        records = tiny_records[split]
        assert len(records) == 3 * per_class
        for label in (0, 1, 2):
            assert sum(1 for r in records if r.label == label) == per_class


def test_ten_per_class_train_manifest_has_thirty_lines(tmp_path):
    cfg = SynthConfig(n_per_class=(10, 10, 10), K=2, N=3, d_r=4, d_G=3, d_B=2, seed=1)
    out = generate_synthetic(cfg, tmp_path)
    text = (tmp_path / "train.jsonl").read_text().strip()
    assert len(text.split("\n")) == 30
    assert out["pairs"]["train"] == 30


def test_noiseless_explicit_pair_anchored_rows_dominate_cosines():
    """With noise off, the planted anchor rows are the unique cosine peaks.

    Each planted region row and its same-anchor token row are scaled
    copies of one bank vector, so their cosine over the shared prefix is
    exactly 1; every other region/token row pair is generic.
    """
    cfg = SynthConfig(n_per_class=(1, 1, 1), K=4, N=5, d_r=8, d_G=6, d_B=7,
                      noise_sigma=0.0, seed=11)
    rec = synthesize_pair(cfg, "train", 0, 2)
    m = min(cfg.d_r, cfg.d_G)
    cos = np.zeros((cfg.K, cfg.N))
    for i in range(cfg.K):
        for j in range(cfg.N):
            u = rec.region_feats[i, :m]
            v = rec.word_vecs[j, :m]
            cos[i, j] = u @ v / (np.linalg.norm(u) * np.linalg.norm(v) + 1e-8)
    anchored = cos > 1.0 - 1e-9
    assert anchored.sum() == 3  # min(3, K) matched anchor id pairs
    assert cos[anchored].min() > cos[~anchored].max()


def test_synthesize_pair_matches_generated_files(tmp_path):
    cfg = SynthConfig(n_per_class=(2, 2, 2), K=3, N=4, d_r=6, d_G=4, d_B=5, seed=21)
    generate_synthetic(cfg, tmp_path)
    records = load_dataset(tmp_path / "train.jsonl")
    for index, rec in enumerate(records):
        direct = synthesize_pair(cfg, "train", index, rec.label)
        assert direct.id == rec.id
        # files store single precision; the direct pair is double
        assert np.array_equal(rec.region_feats,
                              direct.region_feats.astype(np.float32).astype(np.float64))
        assert np.array_equal(rec.word_vecs,
                              direct.word_vecs.astype(np.float32).astype(np.float64))
        assert np.array_equal(rec.ctx_vecs,
                              direct.ctx_vecs.astype(np.float32).astype(np.float64))


def test_synthesize_pair_rejects_bad_split_and_label():
    cfg = SynthConfig(n_per_class=(1, 1, 1), K=2, N=2, d_r=3, d_G=3, d_B=3, seed=0)
    with pytest.raises(DataError):
        synthesize_pair(cfg, "validation", 0, 0)
    with pytest.raises(DataError):
        synthesize_pair(cfg, "train", 0, 5)


def test_implicit_pairs_share_their_shift_across_modalities():
    """Class-1 row means carry one latent on both sides; class-0 means do not."""
    cfg = SynthConfig(n_per_class=(1, 1, 1), K=6, N=8, d_r=10, d_G=8, d_B=6,
                      noise_sigma=0.0, association_strength=2.0, seed=13)
    shared, independent = [], []
    for index in range(40):
        for label, bucket in ((1, shared), (0, independent)):
            rec = synthesize_pair(cfg, "train", index, label)
            # the planted shift survives row-averaging; base rows are zero-mean
            img = rec.region_feats.mean(axis=0)
            txt = rec.word_vecs.mean(axis=0)
            bucket.append((img, txt))
    # for label 1 the image shift prefix and word shift are slices of one
    # latent with amplitude 1; correlate each side against the class mean
    img_mean = np.mean([p[0] for p in shared], axis=0)
    txt_mean = np.mean([p[1] for p in shared], axis=0)
    shared_corr = np.mean([
        (p[0] @ img_mean) * (p[1] @ txt_mean) for p in shared])
    indep_corr = np.mean([
        (p[0] @ img_mean) * (p[1] @ txt_mean) for p in independent])
    assert shared_corr > indep_corr
