"""A short BER and complexity campaign.

The full curves take much longer; the command line tool writes the same
numbers to CSV (``stbc-lab simulate --help``).
"""

from stbc_lab.harness import SimConfig, run_campaign

cfg = SimConfig(code="x1", M=4, Nr=2, snr_db=(0, 4, 8, 12), max_trials=200_000, target_errors=100, seed=1)
for p in run_campaign(cfg).points:
    print(f"x1  {p.snr_db:5.1f} dB  BER={p.ber:.3e}  trials={p.trials}")

# The rate-2 code is decoded conditionally; its average node count drops
# quickly with SNR while the worst case stays at 2*M**4.5.
cfg = SimConfig(code="x2", M=4, Nr=2, snr_db=(0, 10, 20), max_trials=2000, min_trials=2000, seed=1)
for p in run_campaign(cfg).points:
    print(f"x2  {p.snr_db:5.1f} dB  BER={p.ber:.3e}  mean nodes={p.mean_nodes:.1f}")
