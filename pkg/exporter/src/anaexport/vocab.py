"""Tokenizer and pretrained word-vector table.

The vector file uses the common plain-text layout: one token per line, the
token followed by its space-separated float components. Tokens missing
from the table map to zero rows, so a record keeps one row per token no
matter how much of the text is out of vocabulary.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ExportError

_TOKEN = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list:
    """Lowercase and split into alphanumeric runs (apostrophes kept)."""
    return _TOKEN.findall(text.lower())


class WordVectors:
    """In-memory token -> vector table loaded from a text file."""

    def __init__(self, table: dict, dim: int):
        self.table = table
        self.dim = dim

    @classmethod
    def load(cls, path) -> "WordVectors":
        path = Path(path)
        if not path.exists():
            raise ExportError(f"word-vector file not found: {path}")
        table = {}
        dim = None
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise ExportError(
                        f"{path} line {lineno}: token with no vector components"
                    )
                token = parts[0]
                try:
                    vec = np.array([float(x) for x in parts[1:]], dtype=np.float32)
                except ValueError as e:
                    raise ExportError(
                        f"{path} line {lineno}: bad vector component ({e})"
                    ) from e
                if dim is None:
                    dim = vec.size
                elif vec.size != dim:
                    raise ExportError(
                        f"{path} line {lineno}: {vec.size} components, expected {dim}"
                    )
                table[token] = vec
        if not table:
            raise ExportError(f"word-vector file {path} has no entries")
        return cls(table, dim)

    def lookup(self, tokens) -> np.ndarray:
        """(N, dim) float32 matrix; out-of-vocabulary tokens become zero rows."""
        out = np.zeros((len(tokens), self.dim), dtype=np.float32)
        for i, token in enumerate(tokens):
            vec = self.table.get(token)
            if vec is not None:
                out[i] = vec
        return out
