import numpy as np

from clwe_align.heatmap import GREEN, RED, normalize, read_ppm, render, write_ppm


def test_geometry(tmp_path):
    img = render(np.random.default_rng(0).random((3, 4)), cell=24)
    assert img.shape == (72, 96, 3)
    write_ppm(tmp_path / "x.ppm", img)
    assert (tmp_path / "x.ppm").read_bytes().startswith(b"P6\n96 72\n255\n")
    np.testing.assert_array_equal(read_ppm(tmp_path / "x.ppm"), img)


def test_constant_matrix_is_mid_gray():
    img = render(np.full((2, 2), 0.3), cell=4)
    assert np.all(img == 128)


def test_min_max_extremes():
    img = render(np.array([[-0.2, 0.6]]), cell=4)
    assert np.all(img[:, :4] == 0) and np.all(img[:, 4:] == 255)
    np.testing.assert_allclose(normalize(np.array([1.0, 2.0, 3.0])), [0, 0.5, 1])


def test_overlays():
    cell = 24
    img = render(np.zeros((2, 2)), predicted={(0, 0)}, sure={(0, 1)}, possible={(1, 0)}, cell=cell)
    mid = cell // 2
    assert tuple(img[mid, mid]) == RED
    assert tuple(img[mid, cell + mid]) == GREEN
    # possible: hollow, so the centre keeps the cell colour and the outline is green
    assert tuple(img[cell + mid, mid]) == (128, 128, 128)
    assert tuple(img[cell + cell // 4, cell // 4 + 2]) == GREEN
    assert tuple(img[cell + mid, cell + mid]) == (128, 128, 128)
