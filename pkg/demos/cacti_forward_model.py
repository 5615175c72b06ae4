"""
Coded snapshots and the effective dictionary
============================================

A CACTI camera multiplexes T video frames into one image through a mask
that translates between frames. In coefficient space this becomes one
wide matrix, the effective dictionary.
"""

import numpy as np

from boundlab import assemble, dct2_basis, random_code, sense

# an 8x8 mask with uniform (0, 1] values, moved by (dy, dx) for each of two frames
code = random_code(8, 8, shifts=[(5, 3), (6, 0)], seed=1)
print("frames:", code.T, " pixels:", code.n, " shifts:", code.shifts)

# each frame sees a circularly shifted copy of the mask
masks = code.frame_codes()
print("frame 1 mask, top-left corner:\n", masks[1].reshape(8, 8, order="F")[:3, :3].round(3))

# the sparsifying basis is the orthonormal 2-D DCT, one copy per frame
D = dct2_basis(8, 8)
ed = assemble(code, D)
print("effective dictionary:", ed.matrix.shape)

# sensing frames directly agrees with applying the dictionary to their DCT coefficients
rng = np.random.default_rng(0)
frames = [rng.random(64) for _ in range(code.T)]
coeffs = np.concatenate([D.T @ f for f in frames])
snapshot = sense(code, frames)
print("max |snapshot - A c|:", np.abs(snapshot - ed.matrix @ coeffs).max())
