"""First-order jump of the separatrix coordinate B, quadrature vs printed formula.

The quadrature is the ground truth. The printed closed form drifts away from
it as omega moves off 1; the table makes that visible.
"""
import numpy as np

from seplab import melnikov

print(f"{'omega':>6} {'printed':>14} {'quadrature':>14} {'rel':>8}")
for r in melnikov.discrepancy_report(np.round(np.linspace(0.25, 3.0, 12), 2)):
    print(f"{r.omega:6.2f} {r.closed_form:14.10f} {r.quadrature:14.10f} {r.rel_discrepancy:8.4f}")

# the A-jump needs regularisation; show the sequence settling down.
# delta_a1 itself is -sin(Phi0) times this amplitude.
seq = melnikov.delta_a1_sequence(1.0, (6, 8, 10, 12))
print("\ndelta A1 amplitude (omega=1) along s-schedule:", np.array2string(np.asarray(seq), precision=12))
print("delta A1 at Phi0=pi/2:", melnikov.delta_a1(1.0, np.pi / 2))
