"""Which channels give the controller enough entropy to hold full authority?

A controller needs at least log2(D) bits of entropy in its share of the
channel. The table compares three-qubit channels, then audits the larger
channels used by the multi-qubit and qudit schemes.

    python demos/entropy_audit.py
"""

from crsp_power import channels as ch
from crsp_power.analysis import controller_entropy_audit, table_one
from crsp_power.report import entropy_table_text
from crsp_power.tensor import CONTROLLER, controller

print(entropy_table_text(table_one()))

audits = [
    ("GHZ, one qubit", ch.make_ghz(3), CONTROLLER, 2),
    ("MS (c=0.8, d=0.6), one qubit", ch.make_ms3(0.8, 0.6), CONTROLLER, 2),
    ("Brown state, two qubits", ch.make_brown(), CONTROLLER, 4),
    ("GGC d=3, one qutrit", ch.make_ggc([3 ** -0.5] * 3, 1), controller(1), 3),
]
for label, chan, who, D in audits:
    a = controller_entropy_audit(chan, who, D)
    print(f"{label:32} S = {a.entropy:.4f} bits, need {a.required:.4f}: {'pass' if a.passed else 'fail'}")
