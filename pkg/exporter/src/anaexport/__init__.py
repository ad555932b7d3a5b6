"""Feature exporter: turns (image, text, label) rows into the ANAF dataset
layout the image-text correlation classifier trains on.

``job`` drives a whole export, ``images``/``vocab`` handle raw inputs,
``backends`` supplies the feature extractors (offline deterministic ones
and guarded pretrained adapters), and ``anafio`` writes the container
format. The consumer package is deliberately not imported anywhere; the
two sides meet only at the files on disk.
"""

from .anafio import read_matrix, write_matrix
from .backends import (
    CTX_DIM,
    REGION_DIM,
    DetectorRegions,
    GridPatchRegions,
    HashContextual,
    MaskedLMContextual,
)
from .errors import ExportError
from .job import ExportJob, ExportResult, run_export
from .vocab import WordVectors, tokenize

__version__ = "0.1.0"

__all__ = [
    "CTX_DIM", "DetectorRegions", "ExportError", "ExportJob", "ExportResult",
    "GridPatchRegions", "HashContextual", "MaskedLMContextual", "REGION_DIM",
    "WordVectors", "read_matrix", "run_export", "tokenize", "write_matrix",
    "__version__",
]
