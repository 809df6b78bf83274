"""Fast-group-decodable space-time block codes for 2**a transmit antennas.

Modules
-------
numkernel  dense complex/real linear algebra helpers
clifford   anticommuting generator families and decodability checks
stbc       the X1 / X2 / X3/2 codes, QAM, coding gain, worst-case complexity
mimo       real equivalent channel, QR and R-structure checks
decoder    exhaustive, sphere and fast conditional ML decoders
harness    Monte Carlo BER / complexity campaigns
"""

from . import clifford, decoder, harness, mimo, numkernel, stbc
from .decoder import exhaustive_ml, fast_decode_x1, fast_decode_x2, fast_decode_x32, sphere_decode
from .harness import SimConfig, run_campaign, run_trial
from .mimo import build_equivalent, draw_channel
from .stbc import coding_gain, constellation, worst_case_complexity, x1_code, x2_code, x32_code

__version__ = "0.1.0"
