"""Batch export: a TSV of (id, image path, text, label) rows in, an ANAF
feature dataset out.

The output layout matches the classifier's data loader exactly: one
``<split>.jsonl`` manifest whose lines point at
``<split>/<id>.{reg,glv,ctx}.anaf`` files, paths relative to the manifest's
own directory. Rows with unreadable images or no usable tokens are skipped
and logged rather than failing the job; contract violations (duplicate
ids, labels outside {0, 1, 2}, malformed rows) fail it up front.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .anafio import write_matrix
from .backends import GridPatchRegions, HashContextual
from .errors import ExportError
from .images import load_rgb
from .vocab import WordVectors, tokenize

log = logging.getLogger("anaexport")

LABELS = (0, 1, 2)


@dataclass
class ExportJob:
    """One export run. Relative image paths resolve against the TSV's directory."""

    tsv_path: str
    vectors_path: str
    out_dir: str
    split: str = "train"
    k: int = 36
    n_max: int = 100
    seed: int = 0
    region_backend: object = None  # defaults to GridPatchRegions(k, seed=seed)
    ctx_backend: object = None     # defaults to HashContextual(seed=seed)


@dataclass
class ExportResult:
    manifest: Path
    written: int
    skipped: list = field(default_factory=list)  # (id, reason) pairs


def _read_rows(tsv_path: Path) -> list:
    if not tsv_path.exists():
        raise ExportError(f"input TSV not found: {tsv_path}")
    rows = []
    seen = set()
    with open(tsv_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ExportError(
                    f"{tsv_path} line {lineno}: expected 4 tab-separated fields "
                    f"(id, image, text, label), got {len(parts)}"
                )
            pair_id, image_path, text, label_str = parts
            try:
                label = int(label_str)
            except ValueError:
                raise ExportError(
                    f"{tsv_path} line {lineno}: label {label_str!r} is not an integer"
                ) from None
            if label not in LABELS:
                raise ExportError(
                    f"{tsv_path} line {lineno}: label {label} not in {LABELS}"
                )
            if pair_id in seen:
                raise ExportError(
                    f"{tsv_path} line {lineno}: duplicate id {pair_id!r}"
                )
            seen.add(pair_id)
            rows.append((pair_id, image_path, text, label))
    return rows


def run_export(job: ExportJob) -> ExportResult:
    """Validate the TSV, extract features per pair, write files and manifest."""
    if job.n_max < 1:
        raise ExportError(f"n_max must be >= 1, got {job.n_max}")
    tsv_path = Path(job.tsv_path)
    rows = _read_rows(tsv_path)
    vectors = WordVectors.load(job.vectors_path)
    regions = job.region_backend or GridPatchRegions(k=job.k, seed=job.seed)
    ctx = job.ctx_backend or HashContextual(seed=job.seed)

    out_dir = Path(job.out_dir)
    split_dir = out_dir / job.split
    split_dir.mkdir(parents=True, exist_ok=True)

    lines = []
    skipped = []
    for pair_id, image_path, text, label in rows:
        img_path = Path(image_path)
        if not img_path.is_absolute():
            img_path = tsv_path.parent / img_path
        try:
            image = load_rgb(img_path)
        except OSError as e:
            log.warning("skipping %s: unreadable image (%s)", pair_id, e)
            skipped.append((pair_id, f"unreadable image: {e}"))
            continue
        tokens = tokenize(text)[: job.n_max]
        if not tokens:
            log.warning("skipping %s: no usable tokens", pair_id)
            skipped.append((pair_id, "empty text"))
            continue
        region_mat = regions.extract(image)
        word_mat = vectors.lookup(tokens)
        ctx_mat = ctx.encode(tokens)
        write_matrix(split_dir / f"{pair_id}.reg.anaf", region_mat)
        write_matrix(split_dir / f"{pair_id}.glv.anaf", word_mat)
        write_matrix(split_dir / f"{pair_id}.ctx.anaf", ctx_mat)
        lines.append(json.dumps({
            "id": pair_id, "label": label,
            "region": f"{job.split}/{pair_id}.reg.anaf",
            "words": f"{job.split}/{pair_id}.glv.anaf",
            "ctx": f"{job.split}/{pair_id}.ctx.anaf",
            "K": int(region_mat.shape[0]), "N": len(tokens),
        }))
    manifest_path = out_dir / f"{job.split}.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as f:
        if lines:
            f.write("\n".join(lines) + "\n")
    log.info("%s: wrote %d pairs, skipped %d", manifest_path, len(lines), len(skipped))
    return ExportResult(manifest=manifest_path, written=len(lines), skipped=skipped)
