#!/usr/bin/env python3
"""Fastfood vs dense projection: wall clock, stored scalars, multiplies.

The dense side is the package's own matrix multiply on an explicitly
sampled Gaussian matrix, so ratios reflect algorithmic structure, not
BLAS vendor tuning. Absolute times are machine noise; compare ratios.
"""

from fastfood_ensemble import bench_projection

for m in (1024, 4096, 8192):
    r = bench_projection(m_in=m, d_out=m, repetitions=5, seed=1,
                         dense_cap_override=True)
    print(f"m_in = d_out = {m}")
    print(f"  wall clock   fastfood {r.fastfood_time * 1e3:8.3f} ms   "
          f"dense {r.dense_time * 1e3:8.3f} ms   "
          f"({r.dense_time / r.fastfood_time:.0f}x)")
    print(f"  scalars      fastfood {r.fastfood_scalars:>12,}   "
          f"dense {r.dense_scalars:>12,}   "
          f"({r.dense_scalars / r.fastfood_scalars:.0f}x)")
    print(f"  multiplies   fastfood {r.fastfood_mults:>12,}   "
          f"dense {r.dense_mults:>12,}   "
          f"({r.dense_mults / r.fastfood_mults:.0f}x)")
    print(f"  add/subs     fastfood {r.fastfood_addsubs:>12,}   "
          f"dense {r.dense_addsubs:>12,}")
