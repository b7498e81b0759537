"""Qudit schemes built from GHZ-class and generalized Bell channels.

Both reach the classical fidelity limit 2/(D+1) when the controller holds
back, so the control power sits on the bound.

    python demos/qudit_schemes.py
"""

from crsp_power import analysis

rows = [("P6", {"d": d}) for d in (2, 3, 4, 5)]
rows += [("P6", {"d": 2, "N": 2}), ("P6", {"d": 3, "N": 2, "M": 2})]
rows += [("P7", {"d": d}) for d in (2, 3)]

print(f"{'scheme':24} {'D':>3} {'f':>9} {'2/(D+1)':>9} {'power':>8}  verdict")
for pid, params in rows:
    rep = analysis.analyze(pid, params, samples=10_000, seed=5)
    label = pid + " " + ",".join(f"{k}={v}" for k, v in params.items())
    print(f"{label:24} {rep.dimension:3d} {rep.average_ncf:9.6f} {rep.classical_limit:9.6f} "
          f"{rep.control_power:8.5f}  {rep.verdict}")
