"""Shared fixtures for the harness test tree."""

import pytest

from semcom import write_ppm

from oracle_utils import make_test_image


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """Eight 64x64 synthetic PPM images, the desk-scale corpus."""
    d = tmp_path_factory.mktemp("dataset")
    for i in range(8):
        write_ppm(d / f"img{i:02d}.ppm", make_test_image(100 + i))
    return d
