"""Balanced m-ary trees and agent placements on them.

Trees are complete and heap-indexed: node 0 is the root and the children of
node ``i`` are ``m*i + 1 .. m*i + m``. A placement (bijection) maps every
agent to one node. Changing the bijection repositions agents without
touching the tree itself.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np

from .metrics import RankingScore
from .seeding import derive_rng


class SortOrder(str, Enum):
    ASCENDING = "ASC"
    DESCENDING = "DESC"


@dataclass(frozen=True)
class TreeTopology:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a tree needs at least one node")
        if self.m < 2:
            raise ValueError("branching factor must be >= 2")

    @cached_property
    def parent(self) -> np.ndarray:
        """Parent node per node; -1 for the root."""
        idx = np.arange(self.n)
        parent = (idx - 1) // self.m
        parent[0] = -1
        parent.setflags(write=False)
        return parent

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(range(self.m * i + 1, min(self.m * i + self.m, self.n - 1) + 1)) for i in range(self.n)
        )

    @cached_property
    def depth(self) -> np.ndarray:
        depth = np.zeros(self.n, dtype=np.int64)
        for i in range(1, self.n):
            depth[i] = depth[(i - 1) // self.m] + 1
        depth.setflags(write=False)
        return depth

    @property
    def edges(self) -> int:
        return self.n - 1

    @cached_property
    def is_leaf(self) -> np.ndarray:
        leaf = self.m * np.arange(self.n) + 1 >= self.n
        leaf.setflags(write=False)
        return leaf

    @property
    def leaf_count(self) -> int:
        return int(self.is_leaf.sum())

    @cached_property
    def fill_order(self) -> np.ndarray:
        """Bottom-up breadth-first positions: deepest level first, left to right."""
        order = np.lexsort((np.arange(self.n), -self.depth))
        order.setflags(write=False)
        return order


def build_balanced_tree(n: int, m: int = 2) -> TreeTopology:
    return TreeTopology(int(n), int(m))


@dataclass(frozen=True, eq=False)
class Bijection:
    """``position_of[agent] = node``."""

    position_of: np.ndarray

    def __post_init__(self):
        pos = np.array(self.position_of, dtype=np.int64)
        n = pos.size
        if pos.ndim != 1 or n == 0 or not np.array_equal(np.sort(pos), np.arange(n)):
            raise ValueError("position_of must be a permutation of 0..n-1")
        pos.setflags(write=False)
        object.__setattr__(self, "position_of", pos)

    @property
    def n(self) -> int:
        return self.position_of.size

    @cached_property
    def agent_at(self) -> np.ndarray:
        """Inverse map: ``agent_at[node] = agent``."""
        inv = np.empty_like(self.position_of)
        inv[self.position_of] = np.arange(self.n)
        inv.setflags(write=False)
        return inv

    @classmethod
    def identity(cls, n: int) -> "Bijection":
        return cls(np.arange(n))

    def compose(self, other: "Bijection") -> "Bijection":
        """Apply ``other`` first, then relabel its nodes through ``self``."""
        if other.n != self.n:
            raise ValueError("bijections of different size")
        return Bijection(self.position_of[other.position_of])

    def __eq__(self, other):
        if not isinstance(other, Bijection):
            return NotImplemented
        return np.array_equal(self.position_of, other.position_of)

    def __hash__(self):
        return hash(self.position_of.tobytes())


def place_sorted_agents(tree: TreeTopology, agents_in_order: Sequence[int]) -> Bijection:
    agents = np.asarray(agents_in_order, dtype=np.int64)
    if agents.size != tree.n:
        raise ValueError(f"expected {tree.n} agents, got {agents.size}")
    position = np.empty(tree.n, dtype=np.int64)
    position[agents] = tree.fill_order
    return Bijection(position)


def place_by_ranking(tree: TreeTopology, scores: Sequence[RankingScore], order: SortOrder | str) -> Bijection:
    """Sort agents by score (ties by agent id) and fill the tree bottom-up breadth-first."""
    order = SortOrder(order)
    if len(scores) != tree.n:
        raise ValueError(f"expected {tree.n} scores, got {len(scores)}")
    ids = np.array([s.agent_id for s in scores], dtype=np.int64)
    values = np.array([s.score for s in scores], dtype=np.float64)
    if not np.array_equal(np.sort(ids), np.arange(tree.n)):
        raise ValueError("scores must cover agent ids 0..n-1 exactly once")
    key = values if order is SortOrder.ASCENDING else -values
    ranked = ids[np.lexsort((ids, key))]
    return place_sorted_agents(tree, ranked)


def random_bijection(tree: TreeTopology, seed: int) -> Bijection:
    """Uniform random placement: a random ranking pushed through the fill order."""
    ranked = derive_rng(seed, "bijection").permutation(tree.n)
    return place_sorted_agents(tree, ranked)


@dataclass(frozen=True)
class AgentView:
    """Tree adjacency seen from the agents' side under one bijection."""

    parent: np.ndarray  # parent agent per agent, -1 for the root agent
    children: tuple[tuple[int, ...], ...]
    is_leaf: np.ndarray
    root: int


def apply_bijection(tree: TreeTopology, b: Bijection) -> AgentView:
    if b.n != tree.n:
        raise ValueError(f"bijection covers {b.n} agents, tree has {tree.n} nodes")
    at = b.agent_at
    pos = b.position_of
    parent_node = tree.parent[pos]
    parent = np.where(parent_node < 0, -1, at[np.maximum(parent_node, 0)])
    children = tuple(tuple(int(at[c]) for c in tree.children[pos[a]]) for a in range(tree.n))
    return AgentView(parent=parent, children=children, is_leaf=tree.is_leaf[pos].copy(), root=int(at[0]))


def write_topology_csv(path, tree: TreeTopology, b: Bijection, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "parent", "depth", "agent_id"])
        for node in range(tree.n):
            parent = tree.parent[node]
            writer.writerow([node, "" if parent < 0 else int(parent), int(tree.depth[node]), int(b.agent_at[node])])
