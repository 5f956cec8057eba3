"""Admissible delta = -omega ln eps sets, generation by generation.

Each generation keeps the deltas whose map orbit survives one more lobe.
The sets nest and their measure falls; for the idealised model every 4*pi
window keeps exactly two thirds of the previous generation.
"""
import math

from seplab import cantor

sets = cantor.admissible_sets(6, (cantor.default_delta0(1.0), 40.0), 1.0, (-0.1, 0.0))
for s in sets:
    print(f"N={s.generation}: {len(s.intervals):4d} intervals, measure {s.measure():.4f}")
print("nested:", all(cantor.is_refinement(a, b) for a, b in zip(sets, sets[1:])))

ideal = cantor.admissible_sets(3, (2 * math.pi, 26 * math.pi), 1.0, model=cantor.IdealizedModel(1.0))
ratios = [r for _, _, r in cantor.window_ratios(ideal[1], ideal[2])]
print("idealised window ratios:", [round(r, 5) for r in ratios])
