import numpy as np
import pytest
from PIL import Image, ImageDraw

# 120 deterministic synthetic photos: noise fields, gradients, and simple
# shapes, written in a scrambled order so creation order differs from
# lexicographic order. A few live in a subdirectory.
CORPUS_SIZE = 120


def _make_image(rng: np.random.Generator, idx: int) -> Image.Image:
    h, w = 48 + idx % 3 * 8, 48 + idx % 5 * 8
    kind = idx % 3
    if kind == 0:
        arr = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
        return Image.fromarray(arr)
    if kind == 1:
        ramp = np.linspace(0, 255, w, dtype=np.uint8)
        arr = np.stack([np.tile(ramp, (h, 1))] * 3, axis=2)
        arr[:, :, idx % 3] //= 2
        return Image.fromarray(arr)
    img = Image.new("RGB", (w, h), tuple(int(v) for v in rng.integers(0, 256, 3)))
    draw = ImageDraw.Draw(img)
    x0, y0 = int(rng.integers(0, w // 2)), int(rng.integers(0, h // 2))
    draw.ellipse(
        (x0, y0, x0 + w // 3, y0 + h // 3),
        fill=tuple(int(v) for v in rng.integers(0, 256, 3)),
    )
    return img


@pytest.fixture(scope="session")
def image_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    (root / "sub").mkdir()
    rng = np.random.default_rng(91)
    names = []
    for i in range(CORPUS_SIZE):
        prefix = ["a", "m", "z"][i % 3]
        folder = root / "sub" if i % 7 == 0 else root
        names.append(folder / f"{prefix}_{i:03d}.png")
    order = rng.permutation(CORPUS_SIZE)  # creation order != lexicographic order
    for i in order:
        _make_image(rng, int(i)).save(names[int(i)])
    return root
