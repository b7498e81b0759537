"""Control power of the maximal-slice channel as its entanglement is tuned.

Walks through one run of the three-qubit scheme by hand, then sweeps the
controller weight b^2 and compares the closed form, Monte Carlo and the
classical bound.

    python demos/ms_control_power.py
"""

import numpy as np

from crsp_power import analysis, builtin, mixer_rho, reduce_receiver, run_conditioned
from crsp_power.tensor import haar_random_pure, fidelity

# One target, step by step.
bundle = builtin("P1", b2=0.2)
phi = haar_random_pure(2, seed=3)
joint = run_conditioned(bundle.channel, bundle.script, phi)
rho_b = reduce_receiver(joint)

print("target amplitudes      ", np.round(phi.amplitudes, 4))
print("success probability    ", joint.success_probability)
print("receiver state without the controller:")
print(np.round(rho_b.matrix, 4))
print("same state from the mixer model agrees:",
      np.allclose(rho_b.matrix, mixer_rho(bundle.mixer, phi).matrix))
print("fidelity with the target", round(fidelity(phi, rho_b), 6))
print()

# Sweep the controller weight.
print(f"{'b^2':>5} {'f analytic':>11} {'f MC':>9} {'+-':>8} {'power':>8}  verdict")
for b2 in np.linspace(0.0, 0.5, 6):
    rep = analysis.analyze("P1", {"b2": float(b2)}, samples=50_000, seed=1)
    print(f"{b2:5.2f} {rep.average_ncf_analytic:11.6f} {rep.average_ncf_mc:9.6f} "
          f"{rep.average_ncf_stderr:8.1e} {rep.control_power:8.4f}  {rep.verdict}")
print(f"bound for a single qubit: {analysis.power_bound(2):.4f}")
