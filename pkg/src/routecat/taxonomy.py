"""Category tree plus the ancestor/descendant/sibling relations used everywhere else.

The file format is one ``parent<TAB>child`` edge per line (UTF-8, LF).
Lines starting with ``#`` and blank lines are ignored.  The root is the
unique node that never appears as a child.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

NodeId = str


class TaxonomyError(Exception):
    """Structurally invalid taxonomy."""


class UnknownNodeError(TaxonomyError):
    """Node id not present in the taxonomy."""


@dataclass(frozen=True, eq=True)
class Taxonomy:
    """Rooted tree of category nodes.

    The root is a pure dispatch node: it carries no classifier, no documents,
    and never appears in a route.  Child order is the first-appearance order
    from the source file and is the tie-break order for every downstream
    decision, so two parses of the same bytes behave identically.
    """

    root: NodeId
    parent_of: Mapping[NodeId, NodeId]
    children_of: Mapping[NodeId, tuple[NodeId, ...]]

    def __post_init__(self) -> None:
        if self.root in self.parent_of:
            raise TaxonomyError(f"root {self.root!r} has a parent")
        node_count = len(self.children_of)
        for node in self.children_of:
            if node != self.root and node not in self.parent_of:
                raise TaxonomyError(f"non-root node {node!r} has no parent")
            # every parent chain must reach the root without revisiting a node
            steps = 0
            cursor = node
            while cursor != self.root:
                cursor = self.parent_of[cursor]
                steps += 1
                if steps > node_count:
                    raise TaxonomyError(f"cycle detected at node {node!r}")

    def __contains__(self, node: NodeId) -> bool:
        return node in self.children_of

    def _require(self, node: NodeId) -> None:
        if node not in self.children_of:
            raise UnknownNodeError(f"unknown node {node!r}")

    @cached_property
    def nodes(self) -> tuple[NodeId, ...]:
        """All nodes in depth-first pre-order, children in file order."""
        out: list[NodeId] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(self.children_of[node]))
        return tuple(out)

    @cached_property
    def leaves(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.nodes if not self.children_of[n])

    @cached_property
    def max_depth(self) -> int:
        return max(self.depth(leaf) for leaf in self.leaves)

    def parent(self, node: NodeId) -> NodeId:
        self._require(node)
        if node == self.root:
            raise TaxonomyError("root has no parent")
        return self.parent_of[node]

    def children(self, node: NodeId) -> tuple[NodeId, ...]:
        self._require(node)
        return self.children_of[node]

    def is_leaf(self, node: NodeId) -> bool:
        self._require(node)
        return not self.children_of[node]

    def depth(self, node: NodeId) -> int:
        """Edge distance from the root (root itself is at depth 0)."""
        return len(self.path(node))

    def path(self, node: NodeId) -> tuple[NodeId, ...]:
        """Path from a child of the root down to ``node``, root excluded."""
        self._require(node)
        chain: list[NodeId] = []
        while node != self.root:
            chain.append(node)
            node = self.parent_of[node]
        return tuple(reversed(chain))

    def ancestors(self, node: NodeId) -> frozenset[NodeId]:
        """Strict ancestors of ``node``, including the root; never ``node`` itself."""
        self._require(node)
        out: set[NodeId] = set()
        while node != self.root:
            node = self.parent_of[node]
            out.add(node)
        return frozenset(out)

    def descendants(self, node: NodeId) -> frozenset[NodeId]:
        """Strict descendants of ``node``; never ``node`` itself."""
        self._require(node)
        out: set[NodeId] = set()
        stack = list(self.children_of[node])
        while stack:
            child = stack.pop()
            out.add(child)
            stack.extend(self.children_of[child])
        return frozenset(out)

    def siblings(self, node: NodeId) -> frozenset[NodeId]:
        """Nodes sharing ``node``'s parent, excluding ``node``."""
        self._require(node)
        if node == self.root:
            raise TaxonomyError("root has no siblings")
        group = self.children_of[self.parent_of[node]]
        return frozenset(n for n in group if n != node)

    def route_to(self, leaf: NodeId) -> tuple[NodeId, ...]:
        """Unique root-to-leaf path, root excluded."""
        self._require(leaf)
        if self.children_of[leaf]:
            raise TaxonomyError(f"node {leaf!r} is not a leaf")
        return self.path(leaf)


def parse_taxonomy(text: str) -> Taxonomy:
    """Parse ``parent<TAB>child`` edge lines into a validated Taxonomy.

    Rejects duplicate edges, nodes with two distinct parents, cyclic input,
    and input with zero or multiple roots.  Child order is first-appearance
    order, making the parse deterministic byte-for-byte.
    """
    parent_of: dict[NodeId, NodeId] = {}
    children_of: dict[NodeId, list[NodeId]] = {}
    edges: set[tuple[NodeId, NodeId]] = set()

    def note(node: NodeId) -> None:
        children_of.setdefault(node, [])

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise TaxonomyError(f"line {lineno}: malformed edge line {line!r}")
        parent, child = parts
        if (parent, child) in edges:
            raise TaxonomyError(f"line {lineno}: duplicate edge {parent!r} -> {child!r}")
        edges.add((parent, child))
        if child in parent_of and parent_of[child] != parent:
            raise TaxonomyError(
                f"line {lineno}: two parents for {child!r}: {parent_of[child]!r} and {parent!r}"
            )
        parent_of[child] = parent
        note(parent)
        note(child)
        children_of[parent].append(child)

    if not children_of:
        raise TaxonomyError("empty taxonomy")
    roots = [n for n in children_of if n not in parent_of]
    if not roots:
        raise TaxonomyError("cycle detected: every node appears as a child")
    if len(roots) > 1:
        raise TaxonomyError(f"multiple roots: {sorted(roots)}")

    frozen = {node: tuple(kids) for node, kids in children_of.items()}
    return Taxonomy(root=roots[0], parent_of=parent_of, children_of=frozen)


def format_taxonomy(t: Taxonomy) -> str:
    """Render a taxonomy back to edge lines (breadth-first, child order kept)."""
    lines: list[str] = []
    queue: list[NodeId] = [t.root]
    while queue:
        node = queue.pop(0)
        for child in t.children_of[node]:
            lines.append(f"{node}\t{child}")
            queue.append(child)
    return "\n".join(lines) + "\n"
