"""Two-stream image-text correlation classifier on a hand-rolled autodiff core.

The package splits along the network's structure: ``tensor`` holds the
reverse-mode tape, ``encoders`` the modal feature extractors, ``association``
the shared/unique subspace stream, ``alignment`` the region-word attention
stream, ``fusion`` the late combination and losses, ``model``/``trainer``
the assembled network and its optimization, ``data``/``anaf`` the dataset
and file formats, and ``cli`` the command-line workflow.
"""

from .anaf import FormatError, read_matrix, write_matrix
from .config import ConfigError, RunConfig, load_config
from .data import DataError, FeatureRecord, SynthConfig, generate_synthetic, load_dataset
from .gradcheck import finite_diff_check
from .model import Model
from .tensor import ShapeError, Tensor, no_grad
from .trainer import MetricsReport, ablate, evaluate, sweep, train

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "FeatureRecord", "FormatError", "MetricsReport",
    "Model", "RunConfig", "ShapeError", "SynthConfig", "Tensor",
    "ablate", "evaluate", "finite_diff_check", "generate_synthetic",
    "load_config", "load_dataset", "no_grad", "read_matrix", "sweep",
    "train", "write_matrix", "__version__",
]
