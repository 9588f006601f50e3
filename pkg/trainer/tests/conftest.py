"""Shared fixtures: corpora and kernel fixtures built with the prior CLI.

The trainer only ever sees the prior toolkit through its command line
and the files it writes, so these fixtures shell out to `gbpc` to
build a small patch corpus and the kernel parity dumps, exactly as a
user would.
"""

import pytest

from trainer_synth import run_gbpc, write_pair

from gbpc_trainer.train import TrainConfig, train


@pytest.fixture(scope="session")
def fixtures32(tmp_path_factory):
    """20 kernel parity cases on 32x32 planes."""
    out = tmp_path_factory.mktemp("fixtures") / "fx32.json"
    run_gbpc("kernels", "--out", out, "--size", "32", "--cases", "20",
             "--seed", "7")
    return out


@pytest.fixture(scope="session")
def fixtures16(tmp_path_factory):
    """3 kernel parity cases on 16x16 planes, for gradient checks."""
    out = tmp_path_factory.mktemp("fixtures") / "fx16.json"
    run_gbpc("kernels", "--out", out, "--size", "16", "--cases", "3",
             "--seed", "11")
    return out


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """10-pair patch corpus (one 32x32 patch per pair); returns the manifest."""
    root = tmp_path_factory.mktemp("corpus")
    images = []
    for i in range(10):
        images.extend(write_pair(root, f"p{i}", seed=i))
    out = root / "dataset"
    run_gbpc("dataset", *images, "--out", out, "--size", "32",
             "--stride", "32", "--seed", "5", "--jobs", "1")
    return out / "manifest.jsonl"


@pytest.fixture(scope="session")
def trained(tmp_path_factory, toy_corpus, fixtures32):
    """One full 100-epoch training run, shared across tests."""
    out_dir = tmp_path_factory.mktemp("run")
    config = TrainConfig(manifest=str(toy_corpus), fixtures=str(fixtures32),
                         out_dir=str(out_dir), epochs=100)
    return train(config)
