"""Image loading, color handling and patch extraction.

All fusion math runs on 8-bit luminance planes.  Color inputs are split
into luma + chroma with a full-range BT.601 transform (integer rounding,
no studio swing); grayscale inputs get neutral chroma (128) so the rest
of the pipeline never branches on mode.  Registration is assumed: a pair
must share dimensions exactly, there is no alignment or resampling logic
beyond the size cap.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "DecodeError",
    "DimensionMismatch",
    "LumaPlane",
    "ChromaPlanes",
    "ImagePair",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "quantize",
    "load_luma",
    "load_pair",
    "resize_to_cap",
    "extract_patches",
    "patch_grid_shape",
    "save_luma_png",
    "atomic_write_bytes",
    "atomic_write_text",
]


class DecodeError(ValueError):
    """Raised when a file cannot be decoded as an 8-bit image."""


class DimensionMismatch(ValueError):
    """Raised when the two images of a pair disagree in size."""


def _check_plane(data: np.ndarray, name: str) -> np.ndarray:
    data = np.asarray(data)
    if data.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {data.dtype}")
    if data.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {data.shape}")
    if data.size == 0:
        raise ValueError(f"{name} is empty")
    return np.ascontiguousarray(data)


@dataclass(frozen=True)
class LumaPlane:
    """8-bit luminance plane, row-major, values in 0..255."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _check_plane(self.data, "luma plane"))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def normalized(self) -> np.ndarray:
        """Plane as float64 in [0, 1]."""
        return self.data.astype(np.float64) / 255.0


@dataclass(frozen=True)
class ChromaPlanes:
    """Cb/Cr planes matching a luma plane's geometry (no subsampling)."""

    cb: np.ndarray
    cr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cb", _check_plane(self.cb, "cb plane"))
        object.__setattr__(self, "cr", _check_plane(self.cr, "cr plane"))
        if self.cb.shape != self.cr.shape:
            raise ValueError("cb and cr shapes differ")

    @classmethod
    def neutral(cls, height: int, width: int) -> "ChromaPlanes":
        flat = np.full((height, width), 128, dtype=np.uint8)
        return cls(flat, flat.copy())


@dataclass(frozen=True)
class ImagePair:
    """Two registered luminance planes plus their chroma.

    Invariant: a and b share dimensions; chroma planes, when present,
    match them.  `pair_id` names the pair in manifests and reports.
    """

    a: LumaPlane
    b: LumaPlane
    chroma_a: ChromaPlanes | None = None
    chroma_b: ChromaPlanes | None = None
    pair_id: str = ""

    def __post_init__(self):
        if self.a.data.shape != self.b.data.shape:
            raise DimensionMismatch(
                f"pair {self.pair_id or '<unnamed>'}: image A is "
                f"{self.a.width}x{self.a.height} but image B is "
                f"{self.b.width}x{self.b.height}")
        for name, ch in (("chroma_a", self.chroma_a), ("chroma_b", self.chroma_b)):
            if ch is not None and ch.cb.shape != self.a.data.shape:
                raise DimensionMismatch(f"{name} does not match luma dimensions")

    @property
    def width(self) -> int:
        return self.a.width

    @property
    def height(self) -> int:
        return self.a.height


def rgb_to_ycbcr(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-range BT.601 RGB -> (Y, Cb, Cr), each uint8.

    Coefficients are the analog BT.601 ones mapped to the full 0..255
    range; each plane is rounded to nearest and clipped independently.
    """
    rgb = np.asarray(rgb)
    if rgb.dtype != np.uint8 or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected uint8 array of shape (h, w, 3)")
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return quantize(y), quantize(cb), quantize(cr)


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Inverse full-range BT.601: (Y, Cb, Cr) uint8 -> RGB uint8 (h, w, 3)."""
    yf = np.asarray(y).astype(np.float64)
    cbf = np.asarray(cb).astype(np.float64) - 128.0
    crf = np.asarray(cr).astype(np.float64) - 128.0
    r = yf + 1.402 * crf
    g = yf - 0.344136 * cbf - 0.714136 * crf
    b = yf + 1.772 * cbf
    return np.stack([quantize(r), quantize(g), quantize(b)], axis=-1)


def quantize(plane: np.ndarray) -> np.ndarray:
    """Round a real-valued plane to nearest and clip into 0..255 uint8."""
    return np.clip(np.rint(np.asarray(plane, dtype=np.float64)), 0, 255).astype(np.uint8)


def _decode(path: str | os.PathLike) -> Image.Image:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input image not found: {p}")
    try:
        img = Image.open(p)
        img.load()
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {p}: {exc}") from exc
    return img


def load_luma(path: str | os.PathLike) -> tuple[LumaPlane, ChromaPlanes]:
    """Load an image file as (luma, chroma).

    Color inputs go through the full-range BT.601 split; grayscale
    inputs (or paletted images that decode to grayscale) get neutral
    chroma.  Only 8-bit inputs are supported; higher bit depths raise
    DecodeError rather than being silently truncated.
    """
    img = _decode(path)
    if img.mode in ("L", "1"):
        arr = np.asarray(img.convert("L"))
        return LumaPlane(arr), ChromaPlanes.neutral(*arr.shape)
    if img.mode in ("I;16", "I;16B", "I;16L", "I", "F"):
        raise DecodeError(f"{path}: unsupported bit depth (mode {img.mode})")
    rgb = np.asarray(img.convert("RGB"))
    y, cb, cr = rgb_to_ycbcr(rgb)
    return LumaPlane(y), ChromaPlanes(cb, cr)


def load_pair(path_a: str | os.PathLike, path_b: str | os.PathLike,
              pair_id: str | None = None) -> ImagePair:
    """Load two registered source images as an ImagePair.

    The pair id defaults to the stem of the first path.  A size
    disagreement raises DimensionMismatch naming both dimensions.
    """
    luma_a, chroma_a = load_luma(path_a)
    luma_b, chroma_b = load_luma(path_b)
    pid = pair_id if pair_id is not None else Path(path_a).stem
    return ImagePair(luma_a, luma_b, chroma_a, chroma_b, pid)


def _resize_plane(data: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    return np.asarray(Image.fromarray(data).resize(size, Image.BILINEAR))


def resize_to_cap(pair: ImagePair, cap_w: int = 640, cap_h: int = 480) -> ImagePair:
    """Bilinearly resize a pair to exactly (cap_w, cap_h) when it exceeds the cap.

    Downscaling triggers when width > cap_w or height > cap_h; smaller
    images pass through untouched (no upscaling).
    """
    if cap_w <= 0 or cap_h <= 0:
        raise ValueError("size cap must be positive")
    if pair.width <= cap_w and pair.height <= cap_h:
        return pair
    size = (cap_w, cap_h)

    def shrink(luma: LumaPlane, chroma: ChromaPlanes | None):
        y = LumaPlane(_resize_plane(luma.data, size))
        if chroma is None:
            return y, None
        return y, ChromaPlanes(_resize_plane(chroma.cb, size),
                               _resize_plane(chroma.cr, size))

    a, ca = shrink(pair.a, pair.chroma_a)
    b, cb = shrink(pair.b, pair.chroma_b)
    return ImagePair(a, b, ca, cb, pair.pair_id)


def patch_grid_shape(width: int, height: int, size: int, stride: int) -> tuple[int, int]:
    """Number of (columns, rows) of full patch windows; no partial windows."""
    if size <= 0 or stride <= 0:
        raise ValueError("patch size and stride must be positive")
    if size > width or size > height:
        raise ValueError(
            f"patch size {size} exceeds image dimensions {width}x{height}")
    return (width - size) // stride + 1, (height - size) // stride + 1


@dataclass(frozen=True)
class Patch:
    """One patch window cut from a pair, with its provenance."""

    pair: ImagePair
    origin: tuple[int, int]
    flip_h: bool = False
    flip_v: bool = False
    source_id: str = ""


def _flip(data: np.ndarray, flip_h: bool, flip_v: bool) -> np.ndarray:
    if flip_h:
        data = data[:, ::-1]
    if flip_v:
        data = data[::-1, :]
    return np.ascontiguousarray(data)


def extract_patches(pair: ImagePair, size: int, stride: int,
                    flips: bool = False,
                    rng: np.random.Generator | None = None) -> list[Patch]:
    """Cut a pair into full patch windows in raster order.

    Windows start at multiples of `stride`; trailing pixels that cannot
    fill a complete window are dropped.  With `flips` enabled each patch
    independently draws horizontal and vertical flips at p = 0.5, and a
    draw applies to both sides of the pair so registration survives.
    Flip draws come from `rng` (a fresh default_rng() if omitted) in
    patch raster order, two draws per patch, h then v.
    """
    cols, rows = patch_grid_shape(pair.width, pair.height, size, stride)
    if flips and rng is None:
        rng = np.random.default_rng()
    patches = []
    for row in range(rows):
        oy = row * stride
        for col in range(cols):
            ox = col * stride
            flip_h = flip_v = False
            if flips:
                flip_h = bool(rng.random() < 0.5)
                flip_v = bool(rng.random() < 0.5)
            window = np.s_[oy:oy + size, ox:ox + size]

            def cut(luma: LumaPlane, chroma: ChromaPlanes | None):
                y = LumaPlane(_flip(luma.data[window], flip_h, flip_v))
                if chroma is None:
                    return y, None
                return y, ChromaPlanes(_flip(chroma.cb[window], flip_h, flip_v),
                                       _flip(chroma.cr[window], flip_h, flip_v))

            a, ca = cut(pair.a, pair.chroma_a)
            b, cb = cut(pair.b, pair.chroma_b)
            pid = f"{pair.pair_id}_x{ox}_y{oy}"
            patches.append(Patch(ImagePair(a, b, ca, cb, pid), (ox, oy),
                                 flip_h, flip_v, pair.pair_id))
    return patches


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    """Write bytes via a temp file + rename so readers never see partials."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=p.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, p)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_luma_png(plane: LumaPlane | np.ndarray, path: str | os.PathLike) -> None:
    """Write an 8-bit grayscale PNG atomically."""
    data = plane.data if isinstance(plane, LumaPlane) else _check_plane(plane, "plane")
    import io

    buf = io.BytesIO()
    Image.fromarray(data, mode="L").save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())
