"""Generators for 2**a antennas and the two-group split they induce.

Run with ``python demos/01_clifford_partition.py``.
"""

import numpy as np

from stbc_lab import clifford

# The base family acts on two antennas: three 2x2 unitary, anti-Hermitian,
# mutually anticommuting matrices.
gens = clifford.generate(1)
for i in range(1, len(gens) + 1):
    print(f"R{i} =\n{np.round(gens[i], 3)}")

# Each tensor step doubles the size and adds two generators.
for a in (2, 3, 4):
    g = clifford.generate(a)
    worst = max(g.invariant_violations().values())
    print(f"a={a}: {len(g)} generators of size {g.size}, worst violation {worst:.1e}")

# Products of generators, tagged with a power of j, give the weight
# matrices of two symbol groups.  Any matrix of the first group is
# Hurwitz-Radon orthogonal to any matrix of the second one.
for a in (2, 3, 4):
    g1, g2 = clifford.build_partition(clifford.generate(a))
    res = clifford.check_intergroup(g1, g2)
    print(f"a={a}: |G1|={len(g1)}, |G2|={len(g2)}, cross-group violation {res.max_violation:.1e}")

t1, _ = clifford.partition_terms(2)
print("first group for four antennas:", t1)
