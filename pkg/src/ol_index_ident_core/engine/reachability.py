from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from ol_index_ident_core.models import Scenario
from ol_index_ident_core.topology.graphs import components_overlap_graph, g_overlap


@dataclass(frozen=True)
class Reachability:
    x_ids: frozenset[str]
    z_ids: frozenset[str]


def brute_force_identified_set(
    scenario: Scenario, *, z_pass: Sequence[str] | None = None
) -> Reachability:
    """
    Transitive closure of the true overlap relation seeded at x0: within a reached z,
    every A(x, z)-overlap component holding an identified x is identified; a retained z
    is reached once an identified x of a reached z has overlapping G(x, ·) there.
    """
    retained = [z for z in scenario.z_ids if z_pass is None or z in z_pass]
    st = scenario.seed_triple
    identified = {st.x0}
    if st.z0 not in retained:
        return Reachability(x_ids=frozenset(identified), z_ids=frozenset())
    reached = {st.z0}
    components = {z: components_overlap_graph(scenario, z).components() for z in retained}
    changed = True
    while changed:
        changed = False
        for z in sorted(reached):
            for component in components[z]:
                if identified.intersection(component) and not identified.issuperset(component):
                    identified.update(component)
                    changed = True
        for z in sorted(reached):
            for x in scenario.xs_in(z):
                if x not in identified:
                    continue
                for other in retained:
                    if other in reached or x not in scenario.xs_in(other):
                        continue
                    if not g_overlap(scenario, x, z, other).is_empty():
                        reached.add(other)
                        changed = True
    return Reachability(x_ids=frozenset(identified), z_ids=frozenset(reached))
