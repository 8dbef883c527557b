"""Dense tensors, layer geometry, and the two reference deconvolution routes.

Transposed convolution (deconvolution) is computed here by two independent
software algorithms that must agree element-exactly in integer mode:

* zero-padding route: insert stride-1 zeros between input pixels, add a
  zero border, then run a stride-1 valid correlation with the kernel;
* padding-free route: rotate the kernel by 180 degrees, scatter each input
  pixel's kernel-sized product block onto a full canvas with overlap-add,
  then crop the canvas edges.

Both serve as oracles for the crossbar dataflow simulations.  The module
also hosts the zero-redundancy analyzer, which counts how many of the
zero-padding route's multiplications consume an inserted or border zero.

Coordinate convention: (row, column) a.k.a. (y, x), row-major throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tensor3",
    "Kernel4",
    "DeconvLayerSpec",
    "output_shape",
    "dilate_and_pad",
    "conv2d_valid",
    "rotate180",
    "deconv_oracle_zero_padding",
    "deconv_oracle_padding_free",
    "zero_redundancy_ratio",
]


def _canonical(data, ndim: int, what: str) -> np.ndarray:
    """Validate rank and dims >= 1; coerce to int64 (default) or float64."""
    arr = np.asarray(data)
    if arr.ndim != ndim:
        raise ValueError(f"{what} must have {ndim} dimensions, got shape {arr.shape}")
    if any(d < 1 for d in arr.shape):
        raise ValueError(f"{what} dimensions must all be >= 1, got shape {arr.shape}")
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64, copy=False)
    if arr.dtype.kind == "f":
        return arr.astype(np.float64, copy=False)
    raise TypeError(f"{what} must be integer or float data, got dtype {arr.dtype}")


class Tensor3:
    """A height x width x channels feature map.

    Integer data is held as int64 so equivalence checks stay exact; float
    data is held as float64 and compared with a relative tolerance.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = _canonical(data, 3, "Tensor3")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def __repr__(self):
        return f"Tensor3(h={self.height}, w={self.width}, c={self.channels}, dtype={self.data.dtype})"


class Kernel4:
    """A kh x kw x channels x filters weight tensor, laid out (i, j, c, m)."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = _canonical(data, 4, "Kernel4")

    @property
    def kh(self) -> int:
        return self.data.shape[0]

    @property
    def kw(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def filters(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def __repr__(self):
        return f"Kernel4(kh={self.kh}, kw={self.kw}, c={self.channels}, m={self.filters})"


@dataclass(frozen=True)
class DeconvLayerSpec:
    """Hyper-parameters of one deconvolution layer.

    Cropping is carried as four independent per-side pixel counts because
    some benchmark layers need a total crop that no symmetric padding value
    can produce.  Each side's crop must stay below the kernel extent so the
    implied border padding (k - 1 - crop) is never negative.  Degenerate
    configurations that shrink the output (e.g. stride 1 with full crops,
    which reduces to a plain valid convolution) are allowed as long as the
    output dimensions stay positive.
    """

    input_h: int
    input_w: int
    channels: int
    kh: int
    kw: int
    filters: int
    stride: int
    crop_top: int = 0
    crop_bottom: int = 0
    crop_left: int = 0
    crop_right: int = 0

    def __post_init__(self):
        for name in ("input_h", "input_w", "channels", "kh", "kw", "filters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.stride < 1:
            raise ValueError("stride must be ≥ 1")
        for name in ("crop_top", "crop_bottom"):
            c = getattr(self, name)
            if not 0 <= c <= self.kh - 1:
                raise ValueError(f"{name} must be in [0, kh-1], got {c} for kh={self.kh}")
        for name in ("crop_left", "crop_right"):
            c = getattr(self, name)
            if not 0 <= c <= self.kw - 1:
                raise ValueError(f"{name} must be in [0, kw-1], got {c} for kw={self.kw}")
        if self.output_h < 1 or self.output_w < 1:
            raise ValueError(
                f"computed output size {self.output_h}x{self.output_w} must be >= 1x1"
            )

    # --- derived geometry -------------------------------------------------

    @property
    def output_h(self) -> int:
        return self.stride * (self.input_h - 1) + self.kh - self.crop_top - self.crop_bottom

    @property
    def output_w(self) -> int:
        return self.stride * (self.input_w - 1) + self.kw - self.crop_left - self.crop_right

    @property
    def pad_top(self) -> int:
        return self.kh - 1 - self.crop_top

    @property
    def pad_bottom(self) -> int:
        return self.kh - 1 - self.crop_bottom

    @property
    def pad_left(self) -> int:
        return self.kw - 1 - self.crop_left

    @property
    def pad_right(self) -> int:
        return self.kw - 1 - self.crop_right

    @property
    def dilated_h(self) -> int:
        return self.stride * (self.input_h - 1) + 1

    @property
    def dilated_w(self) -> int:
        return self.stride * (self.input_w - 1) + 1

    @property
    def padded_h(self) -> int:
        return self.dilated_h + self.pad_top + self.pad_bottom

    @property
    def padded_w(self) -> int:
        return self.dilated_w + self.pad_left + self.pad_right

    @property
    def full_h(self) -> int:
        """Uncropped scatter-canvas height of the padding-free route."""
        return self.stride * (self.input_h - 1) + self.kh

    @property
    def full_w(self) -> int:
        return self.stride * (self.input_w - 1) + self.kw

    def is_upsampling(self) -> bool:
        return self.output_h >= self.input_h and self.output_w >= self.input_w


def output_shape(spec: DeconvLayerSpec) -> tuple[int, int, int]:
    """(output_h, output_w, filters) implied by the layer hyper-parameters."""
    oh, ow = spec.output_h, spec.output_w
    if oh < 1 or ow < 1:
        raise ValueError(f"computed output size {oh}x{ow} must be >= 1x1")
    return oh, ow, spec.filters


def _check_input(input: Tensor3, spec: DeconvLayerSpec):
    if input.shape != (spec.input_h, spec.input_w, spec.channels):
        raise ValueError(
            f"input shape {input.shape} does not match layer "
            f"({spec.input_h}, {spec.input_w}, {spec.channels})"
        )


def _check_kernel(kernel: Kernel4, spec: DeconvLayerSpec):
    if kernel.shape != (spec.kh, spec.kw, spec.channels, spec.filters):
        raise ValueError(
            f"kernel shape {kernel.shape} does not match layer "
            f"({spec.kh}, {spec.kw}, {spec.channels}, {spec.filters})"
        )


def dilate_and_pad(input: Tensor3, spec: DeconvLayerSpec) -> Tensor3:
    """Insert stride-1 zeros between pixels and add the zero border.

    Original pixel (a, b, c) lands at (pad_top + a*stride, pad_left + b*stride, c).
    Sliding a kh x kw window with stride 1 over the result visits exactly
    output_h x output_w positions.
    """
    _check_input(input, spec)
    s = spec.stride
    canvas = np.zeros((spec.padded_h, spec.padded_w, spec.channels), dtype=input.data.dtype)
    canvas[
        spec.pad_top : spec.pad_top + spec.dilated_h : s,
        spec.pad_left : spec.pad_left + spec.dilated_w : s,
        :,
    ] = input.data
    return Tensor3(canvas)


def conv2d_valid(image: Tensor3, kernel: Kernel4) -> Tensor3:
    """Stride-1 valid cross-correlation (no kernel flip).

    out(y, x, m) = sum_{i,j,c} image(y+i, x+j, c) * kernel(i, j, c, m)
    """
    if image.channels != kernel.channels:
        raise ValueError(
            f"channel mismatch: image has {image.channels}, kernel has {kernel.channels}"
        )
    if image.height < kernel.kh or image.width < kernel.kw:
        raise ValueError(
            f"image {image.height}x{image.width} smaller than kernel "
            f"{kernel.kh}x{kernel.kw}"
        )
    oh = image.height - kernel.kh + 1
    ow = image.width - kernel.kw + 1
    img, w = image.data, kernel.data
    out = np.zeros((oh * ow, kernel.filters), dtype=np.result_type(img, w))
    for i in range(kernel.kh):
        for j in range(kernel.kw):
            patch = img[i : i + oh, j : j + ow, :].reshape(oh * ow, image.channels)
            out += patch @ w[i, j]
    return Tensor3(out.reshape(oh, ow, kernel.filters))


def rotate180(kernel: Kernel4) -> Kernel4:
    """Spatially rotated kernel: out(i, j) = in(kh-1-i, kw-1-j), channels kept."""
    return Kernel4(kernel.data[::-1, ::-1, :, :].copy())


def deconv_oracle_zero_padding(
    input: Tensor3, kernel: Kernel4, spec: DeconvLayerSpec
) -> Tensor3:
    """Deconvolution as zero insertion followed by valid correlation."""
    _check_input(input, spec)
    _check_kernel(kernel, spec)
    out = conv2d_valid(dilate_and_pad(input, spec), kernel)
    assert out.shape == output_shape(spec)
    return out


def deconv_oracle_padding_free(
    input: Tensor3, kernel: Kernel4, spec: DeconvLayerSpec
) -> Tensor3:
    """Deconvolution as rotate / per-pixel MAC / overlap-add / crop.

    Each input pixel (a, b) scatters, for every kernel position (i, j), the
    channel-mixed product onto full-canvas position (a*stride + i, b*stride + j).
    Under the cross-correlation convention of `conv2d_valid` the scattered
    block is the 180-degree-rotated kernel, which makes this route agree
    with the zero-padding route bit-exactly in integer mode.
    """
    _check_input(input, spec)
    _check_kernel(kernel, spec)
    s = spec.stride
    rot = rotate180(kernel).data
    flat = input.data.reshape(spec.input_h * spec.input_w, spec.channels)
    full = np.zeros(
        (spec.full_h, spec.full_w, spec.filters), dtype=np.result_type(flat, rot)
    )
    for i in range(spec.kh):
        for j in range(spec.kw):
            block = (flat @ rot[i, j]).reshape(spec.input_h, spec.input_w, spec.filters)
            full[
                i : i + spec.dilated_h : s,
                j : j + spec.dilated_w : s,
                :,
            ] += block
    oh, ow, _ = output_shape(spec)
    cropped = full[
        spec.crop_top : spec.crop_top + oh,
        spec.crop_left : spec.crop_left + ow,
        :,
    ]
    return Tensor3(np.ascontiguousarray(cropped))


# ---------------------------------------------------------------------------
# Zero-redundancy analysis
# ---------------------------------------------------------------------------


def _window_live_counts(n_in: int, k: int, stride: int, pad_lead: int, padded: int, n_out: int):
    """Per window position along one axis, how many of its k slots sit on an
    original (non-inserted, non-border) pixel site."""
    live = np.zeros(padded + 1, dtype=np.int64)
    sites = pad_lead + stride * np.arange(n_in)
    live[sites + 1] = 1
    csum = np.cumsum(live)
    ys = np.arange(n_out)
    return csum[ys + k] - csum[ys]


def zero_redundancy_ratio(spec: DeconvLayerSpec) -> float:
    """Fraction of zero-padding-route multiplications fed a padded zero.

    Counts exactly, over every output window position and kernel slot, the
    multiplications whose image operand is an inserted or border zero.  The
    count separates by axis (a window's live slots are live-rows x live-cols),
    and the channel and filter counts cancel.
    """
    rows = _window_live_counts(
        spec.input_h, spec.kh, spec.stride, spec.pad_top, spec.padded_h, spec.output_h
    )
    cols = _window_live_counts(
        spec.input_w, spec.kw, spec.stride, spec.pad_left, spec.padded_w, spec.output_w
    )
    nonzero = int(rows.sum()) * int(cols.sum())
    total = spec.output_h * spec.output_w * spec.kh * spec.kw
    return 1.0 - nonzero / total
