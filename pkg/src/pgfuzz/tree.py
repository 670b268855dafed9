"""Derivation trees, their textual rendering and JSON form.

Traversals are iterative: parsed trees of long left-recursive inputs are far
deeper than the interpreter's recursion limit.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Union

from .grammar import Grammar


class TreeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Leaf:
    literal: str


@dataclass(frozen=True, slots=True, eq=False, repr=False)
class Node:
    symbol: str
    alt: int
    children: tuple["DerivationTree", ...] = ()

    # generated comparison would recurse once per level
    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is not type(b):
                return False
            if isinstance(a, Leaf):
                if a != b:
                    return False
                continue
            if a.symbol != b.symbol or a.alt != b.alt or len(a.children) != len(b.children):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    def __repr__(self):
        parts = []
        stack = [self]
        while stack:
            t = stack.pop()
            if isinstance(t, str):
                parts.append(t)
            elif isinstance(t, Leaf):
                parts.append(repr(t))
            else:
                parts.append(f"Node({t.symbol!r}, {t.alt}, (")
                stack.append("))" if len(t.children) != 1 else ",))")
                for i, c in enumerate(reversed(t.children)):
                    stack.append(c)
                    if i < len(t.children) - 1:
                        stack.append(", ")
        return "".join(parts)

    def __hash__(self):
        h = 0
        for t in _preorder(self):
            h = hash((h, t.literal) if isinstance(t, Leaf) else (h, t.symbol, t.alt, len(t.children)))
        return h


def _preorder(tree):
    stack = [tree]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Node):
            stack.extend(reversed(t.children))


DerivationTree = Union[Node, Leaf]


def iter_nodes(tree: DerivationTree) -> Iterator[Node]:
    """Pre-order walk over the nonterminal nodes."""
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            yield t
            stack.extend(reversed(t.children))


def frontier(tree: DerivationTree) -> list[str]:
    out = []
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Leaf):
            out.append(t.literal)
        else:
            stack.extend(reversed(t.children))
    return out


def size(tree: DerivationTree) -> int:
    """Number of expansions (nonterminal nodes)."""
    return sum(1 for _ in iter_nodes(tree))


def check_tree(tree: DerivationTree, g: Grammar) -> None:
    """Raise TreeError unless every node matches its grammar alternative."""
    for node in iter_nodes(tree):
        if node.symbol not in g:
            raise TreeError(f"unknown nonterminal {node.symbol}")
        rule = g[node.symbol]
        if not 0 <= node.alt < len(rule):
            raise TreeError(f"{node.symbol} has no alternative {node.alt}")
        symbols = rule.alternatives[node.alt].symbols
        if len(symbols) != len(node.children):
            raise TreeError(f"{node.symbol}/{node.alt}: expected {len(symbols)} children, "
                            f"got {len(node.children)}")
        for sym, child in zip(symbols, node.children):
            if sym.terminal:
                ok = isinstance(child, Leaf) and child.literal == sym.name
            else:
                ok = isinstance(child, Node) and child.symbol == sym.name
            if not ok:
                raise TreeError(f"{node.symbol}/{node.alt}: child {child!r} does not match {sym}")


def _wordy(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c == "_")


def serialize_tree(tree: DerivationTree, g: Grammar, check: bool = True) -> str:
    """Render the frontier as input text.

    With whitespace skipping on, a single space separates adjacent terminals
    whose touching characters are both word characters, so they cannot fuse.
    """
    if check:
        check_tree(tree, g)
    parts = frontier(tree)
    if not g.skip_whitespace:
        return "".join(parts)
    out = []
    prev = ""
    for lit in parts:
        if prev and _wordy(prev[-1]) and _wordy(lit[0]):
            out.append(" ")
        out.append(lit)
        prev = lit
    return "".join(out)


def to_obj(tree: DerivationTree):
    """Plain JSON-ready structure: ``{"t": lit}`` or ``{"n", "alt", "c"}``."""
    def shell(t):
        if isinstance(t, Leaf):
            return {"t": t.literal}
        return {"n": t.symbol, "alt": t.alt, "c": []}

    root = shell(tree)
    stack = [(tree, root)]
    while stack:
        t, obj = stack.pop()
        if isinstance(t, Node):
            for child in t.children:
                sub = shell(child)
                obj["c"].append(sub)
                if isinstance(child, Node):
                    stack.append((child, sub))
    return root


def _leaf_from(obj) -> Leaf:
    if not isinstance(obj["t"], str) or not obj["t"]:
        raise TreeError("terminal 't' must be a non-empty string")
    return Leaf(obj["t"])


def from_obj(obj) -> DerivationTree:
    # post-order rebuild with an explicit stack; frozen nodes need their
    # children first
    def kind(o):
        if not isinstance(o, dict):
            raise TreeError(f"tree node must be an object, got {type(o).__name__}")
        keys = set(o)
        if keys == {"t"}:
            return "t"
        if keys == {"n", "alt", "c"}:
            name, alt, kids = o["n"], o["alt"], o["c"]
            if not isinstance(name, str) or isinstance(alt, bool) or not isinstance(alt, int) \
                    or not isinstance(kids, list):
                raise TreeError(f"malformed nonterminal node {o!r}")
            return "n"
        raise TreeError(f"unrecognized tree node keys {sorted(o)}")

    if kind(obj) == "t":
        return _leaf_from(obj)
    frames = [(obj, [], iter(obj["c"]))]
    while True:
        o, kids, rest = frames[-1]
        for c in rest:
            if kind(c) == "t":
                kids.append(_leaf_from(c))
            else:
                frames.append((c, [], iter(c["c"])))
                break
        else:
            frames.pop()
            node = Node(o["n"], o["alt"], tuple(kids))
            if not frames:
                return node
            frames[-1][1].append(node)


@contextmanager
def _recursion_room(levels: int):
    # the json codec recurses once per nesting level (dict and list each)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 2 * levels + 200))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def depth(tree: DerivationTree) -> int:
    best = 0
    stack = [(tree, 1)]
    while stack:
        t, d = stack.pop()
        best = max(best, d)
        if isinstance(t, Node):
            stack.extend((c, d + 1) for c in t.children)
    return best


def tree_to_json(tree: DerivationTree, indent=None) -> str:
    obj = to_obj(tree)
    with _recursion_room(depth(tree)):
        return json.dumps(obj, indent=indent, ensure_ascii=False)


def json_to_tree(text: str) -> DerivationTree:
    try:
        with _recursion_room(text.count("[")):
            obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise TreeError(f"malformed JSON: {e}") from None
    return from_obj(obj)


def pretty(tree: DerivationTree) -> str:
    """Indented one-node-per-line rendering."""
    lines = []
    stack = [(tree, 0)]
    while stack:
        t, depth = stack.pop()
        pad = "  " * depth
        if isinstance(t, Leaf):
            lines.append(f"{pad}{json.dumps(t.literal, ensure_ascii=False)}")
        else:
            lines.append(f"{pad}{t.symbol} [{t.alt}]")
            stack.extend((c, depth + 1) for c in reversed(t.children))
    return "\n".join(lines)
