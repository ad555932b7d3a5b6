"""Image loading: decode, force RGB, resize to the fixed square input."""

from __future__ import annotations

import numpy as np
from PIL import Image

SIDE = 224


def load_rgb(path, side: int = SIDE) -> np.ndarray:
    """Decode an image file into a (side, side, 3) uint8 array.

    Any PIL-readable format works; grayscale and alpha images are converted
    to RGB. Missing or undecodable files raise OSError, which the export
    job turns into a skip rather than a failure.
    """
    with Image.open(path) as img:
        rgb = img.convert("RGB").resize((side, side), Image.Resampling.BILINEAR)
    return np.asarray(rgb, dtype=np.uint8)
