"""Turning a label-reading rule into one that needs no labels.

On C2*C3 every b-edge lies in a triangle. Orienting each triangle by its
seeds recovers a valid Cayley diagram, and any rule that reads standard
labels can then run on top of it.
"""

from cayleylift import make_group
from cayleylift.diagrams import cayley_constraint
from cayleylift.fiid import invariance_check, simulate
from cayleylift.balls import ball
from cayleylift.lifting import lift_rule
from cayleylift.rules import edge_echo, triangle_orientation

G = make_group("preset:c2*c3")
dr = triangle_orientation()
print("diagram rule alone:",
      simulate(G, dr, 4, cayley_constraint(G, 3), 200, seed=1).to_dict()["estimate"])

lifted = lift_rule(dr, edge_echo(G), G)
rep = simulate(G, lifted, lifted.radius + 3, cayley_constraint(G, 3), 200, seed=2)
print(f"{lifted.name}: {rep.failures} failures in {rep.samples} samples")
print("invariant under ball automorphisms:",
      bool(invariance_check(lifted, ball(G, 3), 300, seed=3)))
