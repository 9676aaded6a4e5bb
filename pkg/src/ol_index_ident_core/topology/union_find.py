from __future__ import annotations

from collections.abc import Hashable, Iterable


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, elements: Iterable[Hashable]) -> None:
        items = list(elements)
        self.parent: dict[Hashable, Hashable] = {el: el for el in items}
        self.rank: dict[Hashable, int] = dict.fromkeys(items, 0)
        self._order = {el: i for i, el in enumerate(items)}

    def find(self, i: Hashable) -> Hashable:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: Hashable, j: Hashable) -> None:
        root_i = self.find(i)
        root_j = self.find(j)
        if root_i == root_j:
            return
        if self.rank[root_i] < self.rank[root_j]:
            self.parent[root_i] = root_j
        elif self.rank[root_i] > self.rank[root_j]:
            self.parent[root_j] = root_i
        else:
            self.parent[root_j] = root_i
            self.rank[root_i] += 1

    def connected(self, i: Hashable, j: Hashable) -> bool:
        return self.find(i) == self.find(j)

    def components(self) -> list[list[Hashable]]:
        """Components in first-seen element order; members keep insertion order."""
        groups: dict[Hashable, list[Hashable]] = {}
        for el in sorted(self.parent, key=self._order.__getitem__):
            groups.setdefault(self.find(el), []).append(el)
        return list(groups.values())

    def labels(self) -> dict[Hashable, int]:
        out: dict[Hashable, int] = {}
        for label, members in enumerate(self.components()):
            for el in members:
                out[el] = label
        return out
