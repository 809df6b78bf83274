"""Exhaustive, sphere and conditional decoders on one noisy block."""

import numpy as np

from stbc_lab.decoder import exhaustive_ml, fast_decode_x2, sphere_decode
from stbc_lab.mimo import build_equivalent, complex_gaussian, pattern_check, x2_pattern
from stbc_lab.stbc import constellation, worst_case_complexity, x2_code

rng = np.random.default_rng(7)
code = x2_code()
qpsk = constellation(4)

# Transmit 16 real PAM symbols through a 4x2 Rayleigh channel at 10 dB.
s = rng.choice(qpsk.pam_levels, size=code.twoK)
H = complex_gaussian(rng, (4, 2))
N0 = 4 * code.mean_entry_power(qpsk.scale**2 * (qpsk.M - 1) / 3) / 10
Y = qpsk.scale * code.encode(s) @ H + complex_gaussian(rng, (4, 2), N0)

# The real equivalent channel has a QR factor with a fixed zero pattern:
# once the eight outer symbols are fixed, the rest splits into small groups.
eq = build_equivalent(code, H)
print("R follows the block pattern:", pattern_check(eq, x2_pattern()).passed)
y = eq.reduce(Y) / qpsk.scale

for name, fn in (("exhaustive", exhaustive_ml), ("sphere", sphere_decode), ("fast", fast_decode_x2)):
    res = fn(y, eq.r, qpsk)
    print(f"{name:>10}: nodes={res.visited_nodes:6d}  errors={np.count_nonzero(res.s_hat != s)}")

print("worst case for the fast decoder:", worst_case_complexity(code.structure))
