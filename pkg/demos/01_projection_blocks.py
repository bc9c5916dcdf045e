#!/usr/bin/env python3
"""Fastfood projection blocks: structure, O(d log d) application, and the
dense oracle they are checked against.

A block replaces an explicit d_out x m_in Gaussian matrix with four
length-d vectors per stack (signs, permutation, Gaussian diagonal, row
rescaling); the Hadamard factor is applied on the fly by the fast
Walsh-Hadamard transform.
"""

import numpy as np

from fastfood_ensemble import dense_materialize, project, sample_block
from fastfood_ensemble.rng import Stream

m_in, d_out = 7168, 1000  # six pooled CNN backbones -> 1000 dims
block = sample_block(seed=7, m_in=m_in, d_out=d_out, sigma=1.0)

print(f"input width          {block.m_in}")
print(f"padded to            {block.d_pad} (next power of two)")
print(f"projection width     {block.d_out}")
print(f"stacks               {block.n_stacks}")
print(f"stored scalars       {block.stored_scalars}")
print(f"dense equivalent     {m_in * d_out} scalars "
      f"({m_in * d_out / block.stored_scalars:.0f}x more)")

x = Stream(1).normals(m_in)
z = project(block, x)
print(f"\nprojected one vector: {x.shape} -> {z.shape}")

# the same projection, done the slow explicit way on a smaller block
small = sample_block(seed=7, m_in=500, d_out=300, sigma=1.0)
xs = Stream(2).normals(500)
V = dense_materialize(small)  # explicit Hadamard + matmuls, no shared code
rel = np.linalg.norm(project(small, xs) - V @ xs) / np.linalg.norm(V @ xs)
print(f"fast path vs explicit matrix, relative error: {rel:.2e}")

# determinism: blocks regenerate bit-identically from their seed
again = sample_block(seed=7, m_in=500, d_out=300, sigma=1.0)
same = all(
    np.array_equal(a.g_gauss, b.g_gauss)
    for a, b in zip(small.stacks, again.stacks)
)
print(f"same seed regenerates identical factors: {same}")
