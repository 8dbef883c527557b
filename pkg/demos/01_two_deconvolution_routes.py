"""Two software routes to the same transposed convolution.

The zero-padding route inserts stride-1 zeros between input pixels, adds a
zero border, and runs a stride-1 valid correlation.  The padding-free route
rotates the kernel 180 degrees, scatters one kernel-sized product block per
input pixel onto a canvas with overlap-add, and crops the edges.  In integer
mode the two agree element-exactly, which is what makes them usable as
oracles for the crossbar simulations.
"""

import numpy as np

from red_sim import (
    DeconvLayerSpec,
    Kernel4,
    Tensor3,
    deconv_oracle_padding_free,
    deconv_oracle_zero_padding,
    dilate_and_pad,
    zero_redundancy_ratio,
)

rng = np.random.default_rng(7)

# a small stride-2 up-sampling layer: 3x3 -> 7x7
spec = DeconvLayerSpec(input_h=3, input_w=3, channels=2, kh=3, kw=3,
                       filters=2, stride=2)
x = Tensor3(rng.integers(-4, 5, (3, 3, 2)))
k = Kernel4(rng.integers(-4, 5, (3, 3, 2, 2)))

print(f"layer: {spec.input_h}x{spec.input_w}x{spec.channels} -> "
      f"{spec.output_h}x{spec.output_w}x{spec.filters}, stride {spec.stride}")

padded = dilate_and_pad(x, spec)
print(f"\npadded image is {padded.height}x{padded.width}; channel 0:")
print(padded.data[:, :, 0])
print("every white cell above is a wasted multiplication slot for a crossbar")
print(f"zero redundancy ratio of this layer: {zero_redundancy_ratio(spec):.3f}")

zp = deconv_oracle_zero_padding(x, k, spec)
pf = deconv_oracle_padding_free(x, k, spec)
print(f"\nzero-padding route output (channel 0):\n{zp.data[:, :, 0]}")
print(f"routes agree exactly: {np.array_equal(zp.data, pf.data)}")

# a unit impulse shows the geometry: the response is the rotated kernel
# slice of the impulse's channel, placed at the stride offset
impulse = np.zeros((3, 3, 2), dtype=np.int64)
impulse[1, 1, 0] = 1
resp = deconv_oracle_zero_padding(Tensor3(impulse), k, spec)
print(f"\nimpulse at (1,1,0) -> response (channel 0):\n{resp.data[:, :, 0]}")
print("(the 180-degree-rotated kernel slice, centered at stride * (1,1))")
