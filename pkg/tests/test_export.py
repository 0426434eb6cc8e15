import numpy as np
import numpy.testing as npt
import pytest

from multires.core.errors import ContractViolation
from multires.core.image import Image2D
from multires.services.export import export, load_float, load_image, quantize, save_image


def test_quantize_clips_and_rounds():
    img = Image2D(np.array([[-0.5, 0.0, 0.2, 1.0, 3.0]]))
    npt.assert_array_equal(quantize(img), [[0, 0, 51, 255, 255]])


def test_png_keeps_8bit_values(tmp_path, rng):
    img = Image2D(rng.random((8, 12, 3)))
    path = save_image(img, tmp_path / "a.png")
    loaded = load_image(path)
    npt.assert_array_equal(np.round(loaded.data * 255.0).astype(np.uint8), quantize(img))


def test_grayscale_ppm_is_rgb(tmp_path):
    img = Image2D(np.linspace(0.0, 1.0, 64).reshape(8, 8))
    loaded = load_image(save_image(img, tmp_path / "gray.ppm"))
    assert loaded.channels == 3
    npt.assert_array_equal(loaded.data[..., 0], loaded.data[..., 2])


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ContractViolation):
        save_image(Image2D(np.zeros((8, 8))), tmp_path / "a.bmp")


def test_export_writes_lossless_sidecar(tmp_path, rng):
    img = Image2D(rng.random((8, 8)))
    written = export(img, tmp_path / "out", "layer")
    assert [p.name for p in written] == ["layer.png", "layer.npy"]
    npt.assert_array_equal(load_float(tmp_path / "out" / "layer.npy").data, img.data)
    assert [p.name for p in export(img, tmp_path, "mask", sidecar=False)] == ["mask.png"]
