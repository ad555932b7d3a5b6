"""Feature records, dataset manifests, and the planted-structure generator.

A dataset on disk is ``<root>/<split>.jsonl`` plus one directory per split
holding three ANAF files per pair: ``<id>.reg.anaf`` (K x d_r region
features), ``<id>.glv.anaf`` (N x d_G word vectors), ``<id>.ctx.anaf``
(N x d_B contextual vectors). Labels: 0 irrelevant, 1 implicit relevant,
2 explicit relevant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anaf import read_matrix, write_matrix

LABELS = (0, 1, 2)
SPLITS = ("train", "dev", "test")

N_ANCHORS = 4        # size of the dataset-level anchor bank for explicit pairs
MAX_PLANTED = 3      # anchors planted per explicit pair (capped by K and N)
N_TOPICS = 6         # size of the dataset-level topic bank for latent shifts
LATENT_JITTER = 0.15  # per-pair spread around the drawn topic direction


class DataError(ValueError):
    """Manifest or feature-file contents violate the dataset contract."""


@dataclass
class FeatureRecord:
    id: str
    label: int
    region_feats: np.ndarray  # (K, d_r)
    word_vecs: np.ndarray     # (N, d_G)
    ctx_vecs: np.ndarray      # (N, d_B)

    @property
    def K(self) -> int:
        return self.region_feats.shape[0]

    @property
    def N(self) -> int:
        return self.word_vecs.shape[0]

    def validate(self):
        if self.label not in LABELS:
            raise DataError(f"record {self.id}: label {self.label} not in {LABELS}")
        if self.word_vecs.shape[0] != self.ctx_vecs.shape[0]:
            raise DataError(
                f"record {self.id}: word rows {self.word_vecs.shape[0]} != "
                f"ctx rows {self.ctx_vecs.shape[0]}"
            )
        for name, mat in (("region", self.region_feats), ("words", self.word_vecs),
                          ("ctx", self.ctx_vecs)):
            if mat.ndim != 2:
                raise DataError(f"record {self.id}: {name} matrix has rank {mat.ndim}")
            if not np.all(np.isfinite(mat)):
                raise DataError(f"record {self.id}: non-finite values in {name} matrix")
        return self


@dataclass
class ManifestEntry:
    id: str
    label: int
    region_path: str
    words_path: str
    ctx_path: str
    K: int
    N: int


@dataclass
class DatasetManifest:
    split: str
    entries: list = field(default_factory=list)


@dataclass
class SynthConfig:
    """Generator knobs; counts are per class for (train, dev, test)."""
    n_per_class: tuple = (300, 50, 50)
    K: int = 8
    N: int = 12
    d_r: int = 64
    d_G: int = 32
    d_B: int = 48
    alignment_strength: float = 4.0
    association_strength: float = 1.2
    noise_sigma: float = 0.1
    seed: int = 17

    def validate(self):
        if len(self.n_per_class) != 3 or any(n < 1 for n in self.n_per_class):
            raise ValueError(f"n_per_class needs three counts >= 1, got {self.n_per_class}")
        if self.alignment_strength <= 0 or self.association_strength <= 0:
            raise ValueError("alignment/association strengths must be > 0")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        for name in ("K", "N", "d_r", "d_G", "d_B"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        return self


# ---------------------------------------------------------------------------
# manifests

def load_manifest(manifest_path) -> DatasetManifest:
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"manifest not found: {manifest_path}")
    manifest = DatasetManifest(split=manifest_path.stem)
    seen = set()
    with open(manifest_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{manifest_path} line {lineno}: bad JSON ({e})") from e
            try:
                entry = ManifestEntry(
                    id=str(obj["id"]), label=int(obj["label"]),
                    region_path=obj["region"], words_path=obj["words"],
                    ctx_path=obj["ctx"], K=int(obj["K"]), N=int(obj["N"]),
                )
            except KeyError as e:
                raise DataError(f"{manifest_path} line {lineno}: missing key {e}") from e
            if entry.label not in LABELS:
                raise DataError(
                    f"{manifest_path} line {lineno}: label {entry.label} not in {LABELS}"
                )
            if entry.id in seen:
                raise DataError(f"{manifest_path} line {lineno}: duplicate id {entry.id!r}")
            seen.add(entry.id)
            manifest.entries.append(entry)
    return manifest


def load_dataset(manifest_path) -> list:
    """Read every record referenced by a JSON-lines manifest, in order."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    records = []
    for lineno, entry in enumerate(manifest.entries, start=1):
        mats = {}
        for name, rel in (("region", entry.region_path), ("words", entry.words_path),
                          ("ctx", entry.ctx_path)):
            path = root / rel
            if not path.exists():
                raise DataError(f"{manifest_path} line {lineno}: missing file {path}")
            mats[name] = read_matrix(path).astype(np.float64)
        if mats["region"].shape[0] != entry.K:
            raise DataError(
                f"{manifest_path} line {lineno}: region matrix has K={mats['region'].shape[0]} "
                f"but manifest says {entry.K}"
            )
        if mats["words"].shape[0] != entry.N or mats["ctx"].shape[0] != entry.N:
            raise DataError(
                f"{manifest_path} line {lineno}: token matrices have "
                f"{mats['words'].shape[0]}/{mats['ctx'].shape[0]} rows "
                f"but manifest says N={entry.N}"
            )
        record = FeatureRecord(
            id=entry.id, label=entry.label, region_feats=mats["region"],
            word_vecs=mats["words"], ctx_vecs=mats["ctx"],
        )
        record.validate()
        records.append(record)
    return records


# ---------------------------------------------------------------------------
# synthetic generation

def _latent_slices(cfg: SynthConfig):
    """Disjoint coordinate ranges of the latent space per feature kind.

    Disjointness matters: a shared latent then correlates the modalities
    without planting any raw coordinate both sides literally contain,
    so only a pooled cross-modal readout can see it.
    """
    lo_w = cfg.d_r
    lo_c = cfg.d_r + cfg.d_G
    total = lo_c + cfg.d_B
    return slice(0, cfg.d_r), slice(lo_w, lo_c), slice(lo_c, total), total


def _dataset_bank(cfg: SynthConfig):
    """Dataset-level draws shared by every pair: anchor vectors for the
    explicit class and a bank of topic directions for latent shifts."""
    d_max = max(cfg.d_r, cfg.d_G, cfg.d_B)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    anchors = rng.normal(0.0, 1.0, size=(N_ANCHORS, d_max))
    _, _, _, total = _latent_slices(cfg)
    topics = rng.normal(0.0, 1.0, size=(N_TOPICS, total))
    return anchors, topics


def _make_pair(cfg: SynthConfig, label: int, rng, anchors, topics):
    reg_sl, word_sl, ctx_sl, total = _latent_slices(cfg)
    region = rng.normal(0.0, 1.0, size=(cfg.K, cfg.d_r))
    words = rng.normal(0.0, 1.0, size=(cfg.N, cfg.d_G))
    ctx = rng.normal(0.0, 1.0, size=(cfg.N, cfg.d_B))

    if label == 1:
        # one latent shared by both modalities: unit amplitude along a
        # topic drawn for the pair, plus shared jitter
        z = topics[rng.integers(N_TOPICS)] + LATENT_JITTER * rng.normal(
            0.0, 1.0, size=total)
        shift_img = cfg.association_strength * z
        shift_txt = shift_img
    else:
        # independent latents per modality, drawn from the same family:
        # a random amplitude along a random topic plus jitter. Telling
        # these apart from the shared case needs a precise joint
        # amplitude readout, not just "some topic is present"
        tid_img, tid_txt = rng.integers(N_TOPICS, size=2)
        c_img = rng.normal()
        c_txt = rng.normal()
        shift_img = cfg.association_strength * (
            c_img * topics[tid_img] + LATENT_JITTER * rng.normal(0.0, 1.0, size=total))
        shift_txt = cfg.association_strength * (
            c_txt * topics[tid_txt] + LATENT_JITTER * rng.normal(0.0, 1.0, size=total))
    region += shift_img[reg_sl]
    words += shift_txt[word_sl]
    ctx += shift_txt[ctx_sl]

    if label == 2:
        # same anchor identities replace a few rows on both sides
        n_r = min(MAX_PLANTED, cfg.K)
        n_t = min(MAX_PLANTED, cfg.N)
        ids = rng.choice(N_ANCHORS, size=max(n_r, n_t), replace=False)
        r_pos = rng.choice(cfg.K, size=n_r, replace=False)
        t_pos = rng.choice(cfg.N, size=n_t, replace=False)
        for pos, aid in zip(r_pos, ids[:n_r]):
            region[pos] = cfg.alignment_strength * anchors[aid, : cfg.d_r]
        for pos, aid in zip(t_pos, ids[:n_t]):
            words[pos] = cfg.alignment_strength * anchors[aid, : cfg.d_G]
            ctx[pos] = cfg.alignment_strength * anchors[aid, : cfg.d_B]

    region += rng.normal(0.0, cfg.noise_sigma, size=region.shape)
    words += rng.normal(0.0, cfg.noise_sigma, size=words.shape)
    ctx += rng.normal(0.0, cfg.noise_sigma, size=ctx.shape)
    return region, words, ctx


def synthesize_pair(cfg: SynthConfig, split: str, index: int, label: int) -> FeatureRecord:
    """Deterministically build one pair (pure function of its arguments)."""
    if split not in SPLITS:
        raise DataError(f"unknown split {split!r}, expected one of {SPLITS}")
    if label not in LABELS:
        raise DataError(f"label {label} not in {LABELS}")
    anchors, topics = _dataset_bank(cfg)
    split_idx = SPLITS.index(split)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, split_idx + 1, index]))
    region, words, ctx = _make_pair(cfg, label, rng, anchors, topics)
    return FeatureRecord(id=f"{split}-{index:05d}", label=label,
                         region_feats=region, word_vecs=words, ctx_vecs=ctx)


def generate_synthetic(cfg: SynthConfig, out_dir) -> dict:
    """Write train/dev/test splits under ``out_dir``; returns manifest paths.

    Byte-level deterministic in ``cfg``: every random draw derives from
    cfg.seed, the split index, and the pair index.
    """
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    anchors, topics = _dataset_bank(cfg)

    manifests = {}
    counts = {}
    for split_idx, (split, per_class) in enumerate(zip(SPLITS, cfg.n_per_class)):
        split_dir = out_dir / split
        split_dir.mkdir(exist_ok=True)
        lines = []
        index = 0
        for label in LABELS:
            for _ in range(per_class):
                rng = np.random.default_rng(
                    np.random.SeedSequence([cfg.seed, split_idx + 1, index])
                )
                region, words, ctx = _make_pair(cfg, label, rng, anchors, topics)
                pair_id = f"{split}-{index:05d}"
                write_matrix(split_dir / f"{pair_id}.reg.anaf", region)
                write_matrix(split_dir / f"{pair_id}.glv.anaf", words)
                write_matrix(split_dir / f"{pair_id}.ctx.anaf", ctx)
                lines.append(json.dumps({
                    "id": pair_id, "label": label,
                    "region": f"{split}/{pair_id}.reg.anaf",
                    "words": f"{split}/{pair_id}.glv.anaf",
                    "ctx": f"{split}/{pair_id}.ctx.anaf",
                    "K": cfg.K, "N": cfg.N,
                }))
                index += 1
        manifest_path = out_dir / f"{split}.jsonl"
        with open(manifest_path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        manifests[split] = str(manifest_path)
        counts[split] = index
    return {"manifests": manifests, "pairs": counts}
