"""Ordered dependency trees: construction, mirroring and the traversal primitives."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .corpus import Sentence, Token


class Traversal(enum.Enum):
    PRE = "pre"
    IN = "in"
    POST = "post"


@dataclass(frozen=True)
class DepNode:
    token: Token
    left: tuple["DepNode", ...]
    right: tuple["DepNode", ...]


@dataclass(frozen=True)
class DepTree:
    root: DepNode
    size: int
    projective: bool


def build_tree(sentence: Sentence) -> DepTree:
    """Build the ordered tree over the sentence body (pinned punct excluded)."""
    body = sentence.body
    children: dict[int, list[Token]] = {t.index: [] for t in body}
    root_tok = None
    for tok in body:
        if tok.head == 0:
            root_tok = tok
        else:
            children[tok.head].append(tok)
    for deps in children.values():
        deps.sort(key=lambda t: t.index)

    def build(tok: Token) -> DepNode:
        left = tuple(build(d) for d in children[tok.index] if d.index < tok.index)
        right = tuple(build(d) for d in children[tok.index] if d.index > tok.index)
        return DepNode(token=tok, left=left, right=right)

    root = build(root_tok)
    in_order = traverse_node(root, Traversal.IN)
    projective = [t.index for t in in_order] == [t.index for t in body]
    return DepTree(root=root, size=len(body), projective=projective)


def mirror(tree: DepTree) -> DepTree:
    """Swap the left and right dependent lists at every node.

    Each list keeps its original ascending-surface-index internal order; only
    the side changes.  Applying mirror twice restores the original tree.
    """

    def flip(node: DepNode) -> DepNode:
        return DepNode(token=node.token,
                       left=tuple(flip(c) for c in node.right),
                       right=tuple(flip(c) for c in node.left))

    return DepTree(root=flip(tree.root), size=tree.size, projective=tree.projective)


def traverse_node(node: DepNode, order: Traversal) -> list[Token]:
    out: list[Token] = []

    def walk(n: DepNode):
        if order is Traversal.PRE:
            out.append(n.token)
        for c in n.left:
            walk(c)
        if order is Traversal.IN:
            out.append(n.token)
        for c in n.right:
            walk(c)
        if order is Traversal.POST:
            out.append(n.token)

    walk(node)
    return out


def traverse(tree: DepTree, order: Traversal) -> list[Token]:
    return traverse_node(tree.root, order)


def rightmost_spine(tree: DepTree) -> list[DepNode]:
    """Chain from the root along maximal-surface-index dependents.

    The chain extends while the chosen dependent lies to the right of the
    current node and stops otherwise.
    """
    spine = [tree.root]
    node = tree.root
    while True:
        deps = node.left + node.right
        if not deps:
            break
        best = max(deps, key=lambda d: d.token.index)
        if best.token.index <= node.token.index:
            break
        spine.append(best)
        node = best
    return spine
