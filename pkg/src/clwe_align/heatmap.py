"""Similarity-matrix heatmaps as binary PPM (P6) images.

Cells are gray in proportion to the min-max normalized cosine. Overlays:
filled green square for a sure gold link, hollow green square for a
possible one, red dot for a predicted link.
"""

from __future__ import annotations

import numpy as np

RED = (220, 30, 30)
GREEN = (40, 200, 60)


def normalize(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 0:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def render(values: np.ndarray, predicted=(), sure=(), possible=(), cell: int = 24) -> np.ndarray:
    """Return an (n*cell, m*cell, 3) uint8 image for an n x m similarity matrix."""
    n, m = values.shape
    gray = np.rint(255 * normalize(values)).astype(np.uint8)
    img = np.repeat(np.repeat(gray, cell, axis=0), cell, axis=1)
    img = np.stack([img] * 3, axis=-1)

    inset = max(cell // 4, 1)
    for i, j in sure:
        y0, x0 = i * cell + inset, j * cell + inset
        img[y0:(i + 1) * cell - inset, x0:(j + 1) * cell - inset] = GREEN
    for i, j in possible:
        y0, y1 = i * cell + inset, (i + 1) * cell - inset - 1
        x0, x1 = j * cell + inset, (j + 1) * cell - inset - 1
        img[y0, x0:x1 + 1] = GREEN
        img[y1, x0:x1 + 1] = GREEN
        img[y0:y1 + 1, x0] = GREEN
        img[y0:y1 + 1, x1] = GREEN

    radius = max(cell / 6, 1.0)
    yy, xx = np.mgrid[0:cell, 0:cell]
    centre = (cell - 1) / 2
    disc = (yy - centre) ** 2 + (xx - centre) ** 2 <= radius ** 2
    for i, j in predicted:
        block = img[i * cell:(i + 1) * cell, j * cell:(j + 1) * cell]
        block[disc] = RED
    return img


def ppm_bytes(image: np.ndarray) -> bytes:
    h, w, _ = image.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def write_ppm(path, image: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(ppm_bytes(image))


def read_ppm(path) -> np.ndarray:
    # only reads the header layout written by ppm_bytes
    with open(path, "rb") as f:
        magic = f.readline().strip()
        w, h = map(int, f.readline().split())
        maxval = int(f.readline())
        pixels = f.read()
    if magic != b"P6" or maxval != 255:
        raise ValueError(f"{path}: unsupported PPM header")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w, 3)


def labels_text(source, target) -> str:
    lines = [f"row\t{i}\t{tok}" for i, tok in enumerate(source)]
    lines += [f"col\t{j}\t{tok}" for j, tok in enumerate(target)]
    return "".join(line + "\n" for line in lines)
