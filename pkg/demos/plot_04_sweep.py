"""
Sum rate versus SNR
===================

A small Monte-Carlo sweep with paired channel seeds. The same numbers come
out of ``hybridbf sweep``; this script just prints them as a table.
"""

from hybridbf.experiments import Scenario, run_sweep

scenario = Scenario.from_dict({
    "dims": {"K": 1, "N": 16, "M": 3, "d": 2},
    "snr_grid_db": [-10, 0, 10, 20],
    "n_trials": 10,
})

table = {}
for rec in run_sweep(scenario):
    table.setdefault(rec.snr_db, {})[rec.scheme] = rec.mean_sum_rate

print("snr_db  identity_cov  proposed  fully_digital   proposed gain")
for snr, row in table.items():
    gain = row["proposed"] - row["identity_cov"]
    print(f"{snr:6.0f}  {row['identity_cov']:12.3f}  {row['proposed']:8.3f}  {row['fully_digital']:13.3f}"
          f"   (+{gain:.2e})")

# With d=2 streams and M=3 receive antennas the proposed curve tracks the
# 2-stream capacity, while the fully digital receiver may use all 3 modes.
