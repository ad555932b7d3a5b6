"""Shared fixtures: a small generated dataset and a matching model config."""

import numpy as np
import pytest

from ananet.config import RunConfig
from ananet.data import SynthConfig, generate_synthetic, load_dataset


TINY_SYNTH = SynthConfig(
    n_per_class=(6, 2, 2), K=3, N=4, d_r=10, d_G=6, d_B=7,
    alignment_strength=4.0, association_strength=1.2,
    noise_sigma=0.1, seed=5,
)


def tiny_run_config(**overrides) -> RunConfig:
    base = dict(d=8, d_r=10, d_G=6, d_B=7, d_inv=2, d_var=2,
                K=3, N_max=6, batch=8, epochs=2, seed=3)
    base.update(overrides)
    return RunConfig(**base)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Generate the small fixture dataset once per session."""
    root = tmp_path_factory.mktemp("tiny_data")
    out = generate_synthetic(TINY_SYNTH, root)
    return {"root": root, **out}


@pytest.fixture(scope="session")
def tiny_records(tiny_dataset):
    return {split: load_dataset(path)
            for split, path in tiny_dataset["manifests"].items()}


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
