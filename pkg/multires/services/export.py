import logging
from pathlib import Path

import numpy as np
from PIL import Image

from multires.core.errors import ContractViolation
from multires.core.image import Image2D

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".ppm")


def quantize(img: Image2D) -> np.ndarray:
    """8-bit values: round(clip(v, 0, 1) * 255)"""
    return np.round(np.clip(img.as_float(), 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(img: Image2D, path: str | Path) -> Path:
    """
    Сохранить изображение в PNG или PPM.

    :param img: скалярное или RGB изображение со значениями в [0, 1].
    :param path: путь, формат по расширению.
    """
    path = Path(path)
    if path.suffix.lower() not in IMAGE_SUFFIXES:
        raise ContractViolation(f"Неизвестный формат изображения: {path.suffix}")
    if img.channels not in (1, 3):
        raise ContractViolation(f"Сохраняются только 1 или 3 канала, получено {img.channels}")
    pixels = quantize(img)
    # PPM бывает только цветным
    if pixels.ndim == 2 and path.suffix.lower() == ".ppm":
        pixels = np.repeat(pixels[..., None], 3, axis=2)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels).save(path)
    return path


def load_image(path: str | Path) -> Image2D:
    with Image.open(path) as im:
        pixels = np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB") else im)
    return Image2D(pixels.astype(np.float64) / 255.0)


def save_float(img: Image2D, path: str | Path) -> Path:
    """Float-копия без потерь"""
    path = Path(path).with_suffix(".npy")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, img.as_float())
    return path


def load_float(path: str | Path) -> Image2D:
    return Image2D(np.load(Path(path).with_suffix(".npy")))


def export(img: Image2D, out_dir: Path, name: str, sidecar: bool = True) -> list[Path]:
    """name.png и name.npy"""
    written = [save_image(img, out_dir / f"{name}.png")]
    if sidecar:
        written.append(save_float(img, out_dir / f"{name}.npy"))
    logger.debug(f"Записано: {', '.join(p.name for p in written)}")
    return written
