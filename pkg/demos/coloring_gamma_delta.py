"""Three-colouring two groups with the same Cayley graph.

gamma and delta share a Cayley graph, yet on delta every proper colouring
of full orbits is forced into a rigid sign pattern. On gamma, augmenting
chains drive the uncoloured fraction down round by round.
"""

from cayleylift import ball, make_group
from cayleylift.coloring import augmenting_3coloring, full_orbit_colorings, parity_analysis
from cayleylift.fiid import draw_seeds

delta = ball(make_group("preset:delta"), 2)
reps = [parity_analysis(delta, f) for f in full_orbit_colorings(delta)]
print(f"delta B_2: {len(reps)} colourings, all obey parity: {all(r.ok for r in reps)}")

gamma = ball(make_group("preset:gamma"), 2)
reps = [parity_analysis(gamma, f) for f in full_orbit_colorings(gamma)]
print(f"gamma B_2: {len(reps)} colourings, any obey parity: {any(r.ok for r in reps)}")

b = ball(make_group("preset:gamma"), 6)
for s in range(3):
    r = augmenting_3coloring(b, draw_seeds(b, 5, 1, s), 4)
    print(f"sample {s}: missed fractions", [round(float(x), 3) for x in r.missed_fraction])
