"""Feature backends: weight-free deterministic extractors plus guarded
adapters around pretrained models.

The grid-patch region backend and the hashed contextual backend need no
downloaded weights. They are deterministic in (input, seed) and emit the
same shapes as the pretrained stack, which keeps the whole export pipeline
runnable and testable offline. The pretrained adapters (a two-stage
detector for region features, a masked language model for contextual
vectors) only activate when local weights are supplied; they raise
ExportError otherwise and never attempt a download.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .errors import ExportError

REGION_DIM = 1024
CTX_DIM = 768

_BLOCK = 8  # patches are average-pooled to _BLOCK x _BLOCK x 3 before projection


def _stable_hash64(token: str) -> int:
    """Process-independent 64-bit token hash (unlike builtin hash())."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _pool_to_block(patch: np.ndarray, side: int) -> np.ndarray:
    """Average-pool an (h, w, 3) patch down to (side, side, 3)."""
    h, w = patch.shape[:2]
    rows = np.linspace(0, h, side + 1).astype(int)
    cols = np.linspace(0, w, side + 1).astype(int)
    out = np.empty((side, side, 3))
    for i in range(side):
        lo_r = min(rows[i], h - 1)
        hi_r = max(rows[i + 1], lo_r + 1)
        for j in range(side):
            lo_c = min(cols[j], w - 1)
            hi_c = max(cols[j + 1], lo_c + 1)
            out[i, j] = patch[lo_r:hi_r, lo_c:hi_c].mean(axis=(0, 1))
    return out


class GridPatchRegions:
    """K region vectors from a fixed grid of image patches.

    The image is cut into the smallest g x g grid with g*g >= k and the
    first k patches in row-major order each yield one vector: the patch is
    pooled to a small block and pushed through a seeded random projection
    with a ReLU (detector box features are nonnegative too). No learned
    weights; byte-deterministic in (image, k, dim, seed).
    """

    def __init__(self, k: int = 36, dim: int = REGION_DIM, seed: int = 0):
        if k < 1:
            raise ExportError(f"region count k must be >= 1, got {k}")
        self.k = k
        self.dim = dim
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x9E61]))
        flat = _BLOCK * _BLOCK * 3
        self._proj = rng.standard_normal((flat, dim)) / np.sqrt(flat)

    def extract(self, image: np.ndarray) -> np.ndarray:
        if image.ndim != 3 or image.shape[2] != 3:
            raise ExportError(f"expected an (H, W, 3) image, got shape {image.shape}")
        g = 1
        while g * g < self.k:
            g += 1
        pixels = image.astype(np.float64) / 255.0
        h, w = image.shape[:2]
        feats = np.empty((self.k, self.dim))
        for idx in range(self.k):
            r, c = divmod(idx, g)
            patch = pixels[r * h // g:max((r + 1) * h // g, r * h // g + 1),
                           c * w // g:max((c + 1) * w // g, c * w // g + 1)]
            block = _pool_to_block(patch, _BLOCK)
            feats[idx] = np.maximum(block.reshape(-1) @ self._proj, 0.0)
        return feats.astype(np.float32)


class HashContextual:
    """Deterministic stand-in for a contextual token encoder.

    Every token hashes to a fixed unit vector and each output row mixes
    the token's own vector with its neighbors', so the same token in
    different company produces different rows (the property separating a
    contextual matrix from a word-vector table). Any token hashes
    somewhere, which is why an all-out-of-vocabulary text still gets a
    nonzero contextual matrix.
    """

    def __init__(self, dim: int = CTX_DIM, seed: int = 0, mix: float = 0.5):
        self.dim = dim
        self.seed = seed
        self.mix = mix

    def _token_vec(self, token: str) -> np.ndarray:
        rng = np.random.default_rng(
            np.random.SeedSequence([self.seed, _stable_hash64(token)])
        )
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)

    def encode(self, tokens) -> np.ndarray:
        if not tokens:
            raise ExportError("cannot encode an empty token list")
        base = np.stack([self._token_vec(t) for t in tokens])
        out = base.copy()
        for i in range(len(tokens)):
            if i > 0:
                out[i] += self.mix * base[i - 1]
            if i + 1 < len(tokens):
                out[i] += self.mix * base[i + 1]
        out /= np.linalg.norm(out, axis=1, keepdims=True)
        return out.astype(np.float32)


class DetectorRegions:
    """Region features from a pretrained two-stage detector (local weights).

    Hooks the detector's box head to capture pooled per-proposal features
    and its box predictor to score proposals, keeps the k best-scoring
    rows, and pads by repeating the last row when fewer survive. Requires
    torch and torchvision plus a locally stored checkpoint; nothing is
    downloaded.
    """

    def __init__(self, weights_path, k: int = 36):
        try:
            import torch
            import torchvision
        except ImportError as e:
            raise ExportError(
                "DetectorRegions needs torch and torchvision installed "
                "(pip install 'anaexport[detector]')"
            ) from e
        weights_path = Path(weights_path)
        if not weights_path.is_file():
            raise ExportError(
                f"detector checkpoint not found: {weights_path}; pass the path "
                "to a locally stored state dict (downloads are never attempted)"
            )
        self.k = k
        self.dim = REGION_DIM
        self._torch = torch
        model = torchvision.models.detection.fasterrcnn_resnet50_fpn(
            weights=None, weights_backbone=None
        )
        try:
            model.load_state_dict(torch.load(weights_path, map_location="cpu"))
        except Exception as e:
            raise ExportError(f"could not load checkpoint {weights_path}: {e}") from e
        model.eval()
        self._model = model
        self._feats = []
        self._logits = []
        model.roi_heads.box_head.register_forward_hook(
            lambda mod, inp, out: self._feats.append(out.detach())
        )
        model.roi_heads.box_predictor.register_forward_hook(
            lambda mod, inp, out: self._logits.append(out[0].detach())
        )

    def extract(self, image: np.ndarray) -> np.ndarray:
        torch = self._torch
        tensor = torch.from_numpy(image.astype(np.float32) / 255.0).permute(2, 0, 1)
        self._feats.clear()
        self._logits.clear()
        with torch.no_grad():
            self._model([tensor])
        feats = self._feats[-1].numpy()
        logits = self._logits[-1]
        # best non-background class probability per proposal
        scores = torch.softmax(logits, dim=1)[:, 1:].max(dim=1).values.numpy()
        order = np.argsort(-scores)[: self.k]
        picked = feats[order]
        if picked.shape[0] < self.k:
            pad = np.repeat(picked[-1:], self.k - picked.shape[0], axis=0)
            picked = np.concatenate([picked, pad], axis=0)
        return picked.astype(np.float32)


class MaskedLMContextual:
    """Contextual token vectors from a locally stored masked language model.

    Runs the encoder and averages the sub-token vectors belonging to each
    whitespace token, so the output has one row per input token no matter
    how the model's tokenizer splits words. Requires transformers and
    torch plus a local model directory; local_files_only is forced so
    nothing is downloaded.
    """

    def __init__(self, model_dir):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as e:
            raise ExportError(
                "MaskedLMContextual needs torch and transformers installed "
                "(pip install 'anaexport[contextual]')"
            ) from e
        model_dir = Path(model_dir)
        if not model_dir.is_dir():
            raise ExportError(
                f"encoder directory not found: {model_dir}; point at a locally "
                "stored model (downloads are never attempted)"
            )
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(
                str(model_dir), local_files_only=True
            )
            self._model = AutoModel.from_pretrained(
                str(model_dir), local_files_only=True
            )
        except Exception as e:
            raise ExportError(f"could not load encoder from {model_dir}: {e}") from e
        self._model.eval()
        self._torch = torch
        self.dim = int(self._model.config.hidden_size)

    def encode(self, tokens) -> np.ndarray:
        if not tokens:
            raise ExportError("cannot encode an empty token list")
        torch = self._torch
        enc = self._tokenizer(
            list(tokens), is_split_into_words=True, return_tensors="pt",
            truncation=True,
        )
        with torch.no_grad():
            hidden = self._model(**enc).last_hidden_state[0].numpy()
        out = np.zeros((len(tokens), self.dim))
        counts = np.zeros(len(tokens))
        for pos, word_id in enumerate(enc.word_ids(0)):
            if word_id is None or word_id >= len(tokens):
                continue
            out[word_id] += hidden[pos]
            counts[word_id] += 1
        counts[counts == 0] = 1.0  # tokens the model dropped stay zero rows
        return (out / counts[:, None]).astype(np.float32)
