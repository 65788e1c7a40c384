import sys

import pytest


@pytest.fixture
def fake_interpreter(tmp_path):
    """Factory writing a tiny executable interpreter script for executor tests."""

    def make(body: str, name: str = "fake-interp"):
        path = tmp_path / name
        path.write_text(f"#!{sys.executable}\n{body}", encoding="utf-8")
        path.chmod(0o755)
        return path

    return make


@pytest.fixture
def png_factory(tmp_path):
    """Write deterministic RGB PNGs for image-comparison tests."""
    import numpy as np
    from PIL import Image

    def make(name: str, width: int, height: int, seed: int = 0):
        rng = np.random.RandomState(seed)
        pixels = rng.randint(0, 256, size=(height, width, 3), dtype=np.uint8)
        # Keep channels away from the inversion fixed point so a flipped pixel
        # always exceeds the comparison tolerance.
        mask = (pixels > 123) & (pixels < 132)
        pixels[mask] = 100
        path = tmp_path / name
        Image.fromarray(pixels, "RGB").save(path)
        return path

    return make
