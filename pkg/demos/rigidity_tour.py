"""Which Cayley graphs remember their group?

Counts root-fixing automorphisms of B_n that extend to B_{n+k}. A count of 1
means the local picture pins down the labelling; larger counts mean labels
must be chosen, which is where random seeds come in.
"""

from cayleylift import ball, make_group
from cayleylift.balls import diestel_leader_ball
from cayleylift.rigidity import extendable_automorphisms
from cayleylift.search import ball_isomorphic

for name in ("dinf-grr", "f2-grr", "c2*c3"):
    G = make_group(f"preset:{name}")
    counts = [len(extendable_automorphisms(G, n, 2)) for n in (1, 2)]
    print(f"{name:10s} extendable at (1,2), (2,2): {counts}")

gamma, delta = make_group("preset:gamma"), make_group("preset:delta")
same = ball_isomorphic(ball(gamma, 3), ball(delta, 3)) is not None
print(f"B_3(gamma) and B_3(delta) isomorphic: {same}")

dl = make_group("preset:lamplighter-DL")
same = ball_isomorphic(ball(dl, 2), diestel_leader_ball(2)) is not None
print(f"B_2(lamplighter) and the Diestel-Leader 2-ball isomorphic: {same}")

heis = make_group("preset:heis-c2")
print(f"heis-c2    extendable at (1,2): {len(extendable_automorphisms(heis, 1, 2))}")
