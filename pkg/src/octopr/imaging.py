"""8-band spectral image container, bit-exact file I/O, and packing.

File format "OCT8", all little-endian:

    bytes 0..3    magic b"OCT8"
    bytes 4..5    version, uint16 (currently 1)
    bytes 6..9    width, uint32
    bytes 10..13  height, uint32
    bytes 14..45  8 band wavelengths in nm, float32
    bytes 46..    8 planar bands of float64, band-major, row-major pixels

The payload length must be exactly 8 * width * height doubles.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .linalg import OctVector

__all__ = [
    "SpectralImage",
    "pack",
    "unpack",
    "save",
    "load",
    "crop_and_select",
    "equispaced_band_indices",
    "synthetic_image",
    "write_signatures_csv",
]

MAGIC = b"OCT8"
VERSION = 1
DEFAULT_WAVELENGTHS_NM = tuple(400.0 + i * 300.0 / 7.0 for i in range(8))


@dataclass
class SpectralImage:
    """Planar 8-band image: bands[k, row, col] is band k at that pixel."""

    width: int
    height: int
    bands: np.ndarray
    wavelengths_nm: np.ndarray = field(
        default_factory=lambda: np.array(DEFAULT_WAVELENGTHS_NM, dtype=np.float64)
    )

    def __post_init__(self) -> None:
        self.bands = np.asarray(self.bands, dtype=np.float64)
        self.wavelengths_nm = np.asarray(self.wavelengths_nm, dtype=np.float64)
        if self.bands.shape != (8, self.height, self.width):
            raise ValueError(
                f"expected 8 bands of {self.height}x{self.width}, got {self.bands.shape}"
            )
        if self.wavelengths_nm.shape != (8,):
            raise ValueError("need exactly 8 band wavelengths")
        if not np.all(np.isfinite(self.bands)):
            raise ValueError("image samples must be finite")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def allclose(self, other: "SpectralImage", atol: float = 0.0) -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and np.allclose(self.bands, other.bands, rtol=0.0, atol=atol)
        )


def pack(img: SpectralImage) -> OctVector:
    """One octonion per pixel (row-major); band k becomes coefficient k."""
    return OctVector(img.bands.reshape(8, -1).T)


def unpack(
    x: OctVector, width: int, height: int, wavelengths_nm=None
) -> SpectralImage:
    if len(x) != width * height:
        raise ValueError(f"vector length {len(x)} does not match {width}x{height}")
    bands = x.coeffs.T.reshape(8, height, width)
    if wavelengths_nm is None:
        wavelengths_nm = np.array(DEFAULT_WAVELENGTHS_NM)
    return SpectralImage(width=width, height=height, bands=bands, wavelengths_nm=wavelengths_nm)


def save(img: SpectralImage, path) -> None:
    header = MAGIC + struct.pack("<HII", VERSION, img.width, img.height)
    header += np.asarray(img.wavelengths_nm, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(img.bands, dtype="<f8").tobytes())


def load(path) -> SpectralImage:
    """Read an OCT8 file back, coercing samples into [0, 1].

    Values inside [0, 1] round-trip bit-exactly; negatives are clamped
    to 0 and, if the peak exceeds 1, all bands are rescaled by it.  The
    unit peak is what the reconstruction metrics assume.
    """
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 46 or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not an OCT8 file (bad magic)")
    version, width, height = struct.unpack("<HII", raw[4:14])
    if version != VERSION:
        raise ValueError(f"{path}: unsupported OCT8 version {version}")
    wavelengths = np.frombuffer(raw[14:46], dtype="<f4").astype(np.float64)
    expected = 8 * width * height * 8
    payload = raw[46:]
    if len(payload) != expected:
        kind = "truncated" if len(payload) < expected else "oversized"
        raise ValueError(f"{path}: {kind} payload ({len(payload)} of {expected} bytes)")
    bands = np.frombuffer(payload, dtype="<f8").reshape(8, height, width).copy()
    if bands.size and bands.min() < 0.0:
        bands = np.clip(bands, 0.0, None)
    peak = bands.max() if bands.size else 0.0
    if peak > 1.0:
        bands = bands / peak
    return SpectralImage(width=width, height=height, bands=bands, wavelengths_nm=wavelengths)


def equispaced_band_indices(total_bands: int) -> list[int]:
    """8 equispaced indices into ``total_bands``: round(i*(B-1)/7)."""
    if total_bands < 8:
        raise ValueError(f"need at least 8 source bands, got {total_bands}")
    return [int(round(i * (total_bands - 1) / 7.0)) for i in range(8)]


def crop_and_select(
    cube: np.ndarray,
    crop: tuple[int, int, int, int],
    band_indices,
    wavelengths_nm=None,
) -> SpectralImage:
    """Extract a crop and an 8-band selection from a (B, H, W) cube.

    ``crop`` is (x0, y0, width, height); ``band_indices`` must be 8
    strictly increasing indices below B.
    """
    cube = np.asarray(cube, dtype=np.float64)
    if cube.ndim != 3:
        raise ValueError(f"expected a (bands, height, width) cube, got {cube.shape}")
    B, H, W = cube.shape
    idx = list(band_indices)
    if len(idx) != 8 or any(i < 0 or i >= B for i in idx):
        raise ValueError(f"need 8 band indices below {B}, got {idx}")
    if any(b >= a for a, b in zip(idx[1:], idx[:-1])):
        raise ValueError(f"band indices must be strictly increasing, got {idx}")
    x0, y0, w, h = crop
    if w < 1 or h < 1 or x0 < 0 or y0 < 0 or x0 + w > W or y0 + h > H:
        raise ValueError(f"crop {crop} out of bounds for {W}x{H}")
    bands = cube[np.asarray(idx), y0 : y0 + h, x0 : x0 + w]
    if wavelengths_nm is None:
        wavelengths_nm = np.array(DEFAULT_WAVELENGTHS_NM)
    return SpectralImage(width=w, height=h, bands=bands.copy(), wavelengths_nm=wavelengths_nm)


def synthetic_image(width: int, height: int, seed: int = 0) -> SpectralImage:
    """Deterministic smooth 8-band test image with samples in [0, 1].

    Bands share a seeded base pattern plus band-specific low-frequency
    modulations, mimicking spectrally correlated scenes; the global
    range is affinely mapped onto [0, 1], so saving and reloading is
    bit-exact.
    """
    if width < 1 or height < 1:
        raise ValueError("image must have at least one pixel")
    rng = np.random.default_rng(np.random.SeedSequence([0x0C78, seed]))
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, height), np.linspace(0.0, 1.0, width), indexing="ij"
    )
    base = np.zeros((height, width))
    for _ in range(3):
        fx, fy = rng.uniform(0.5, 2.5, size=2)
        ph = rng.uniform(0, 2 * np.pi)
        base += rng.uniform(0.4, 1.0) * np.sin(2 * np.pi * (fx * xx + fy * yy) + ph)
    bands = np.zeros((8, height, width))
    for k in range(8):
        fx, fy = rng.uniform(0.5, 3.0, size=2)
        ph = rng.uniform(0, 2 * np.pi)
        ripple = np.cos(2 * np.pi * (fx * xx - fy * yy) + ph)
        bands[k] = base * (0.6 + 0.4 * np.cos(k / 3.0)) + 0.5 * ripple
    lo, hi = bands.min(), bands.max()
    span = hi - lo if hi > lo else 1.0
    bands = (bands - lo) / span
    return SpectralImage(width=width, height=height, bands=bands)


def write_signatures_csv(path, images: dict[str, SpectralImage], pixels) -> None:
    """Per-pixel spectral signatures, one row per (pixel, source).

    ``images`` maps a source label (ref / owf / gd) to an image;
    ``pixels`` is an iterable of (x, y) coordinates.
    """
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["pixel_x", "pixel_y"] + [f"band{k}" for k in range(8)] + ["source"])
        for px, py in pixels:
            for label, img in images.items():
                if not (0 <= px < img.width and 0 <= py < img.height):
                    raise ValueError(f"pixel ({px}, {py}) outside {img.width}x{img.height}")
                vals = [repr(float(img.bands[k, py, px])) for k in range(8)]
                w.writerow([px, py] + vals + [label])
