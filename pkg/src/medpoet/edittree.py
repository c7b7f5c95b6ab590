"""Edit trees over the longest common substring, and Levenshtein distance.

An edit tree splits a (source, target) pair around their longest common
substring, keeps the substring as a copy, and recurses into the prefix pair
and the suffix pair.  Pairs without any common character become
substitution leaves.  The tree only stores lengths of the source parts, so it
can be applied to other strings with the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union


@dataclass(frozen=True)
class Substitution:
    source: str
    target: str


@dataclass(frozen=True)
class Node:
    prefix_len: int
    suffix_len: int
    left: Optional["EditTree"] = None
    right: Optional["EditTree"] = None


EditTree = Union[Node, Substitution]


def lcs(a: str, b: str) -> tuple[int, int, int]:
    """Longest common substring as ``(start_a, start_b, length)``.

    Ties go to the smallest ``start_a``, then the smallest ``start_b``.
    Returns ``(0, 0, 0)`` if the strings share no character.
    """
    best = (0, 0, 0)
    if not a or not b:
        return best
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                n = prev[j - 1] + 1
                cur[j] = n
                start_a, start_b = i - n, j - n
                if n > best[2] or (
                    n == best[2] and (start_a, start_b) < (best[0], best[1])
                ):
                    best = (start_a, start_b, n)
        prev = cur
    return best


def build_edit_tree(src: str, trg: str) -> EditTree:
    return _build(src, trg)


@lru_cache(maxsize=65536)
def _build(src: str, trg: str) -> EditTree:
    i, j, n = lcs(src, trg)
    if n == 0:
        return Substitution(src, trg)
    left = right = None
    if i or j:
        left = _build(src[:i], trg[:j])
    if i + n < len(src) or j + n < len(trg):
        right = _build(src[i + n:], trg[j + n:])
    return Node(i, len(src) - i - n, left, right)


def _apply_child(tree: Optional[EditTree], s: str) -> Optional[str]:
    if tree is None:
        return "" if s == "" else None
    return apply_edit_tree(tree, s)


def apply_edit_tree(tree: EditTree, src: str) -> Optional[str]:
    """Apply ``tree`` to ``src``; ``None`` if the tree does not fit."""
    if isinstance(tree, Substitution):
        return tree.target if src == tree.source else None
    p, s = tree.prefix_len, tree.suffix_len
    if len(src) < p + s:
        return None
    left = _apply_child(tree.left, src[:p])
    if left is None:
        return None
    right = _apply_child(tree.right, src[len(src) - s:])
    if right is None:
        return None
    return left + src[p:len(src) - s] + right


_ESCAPED = "\\,()ε"


def _escape(text: str) -> str:
    return "".join("\\" + c if c in _ESCAPED else c for c in text)


def canonical_key(tree: Optional[EditTree]) -> str:
    """Stable textual form of a tree, e.g. ``node(0,0,sub(,ge),ε)``.

    Characters with a meaning in the notation are backslash-escaped, which
    keeps the encoding injective for arbitrary strings.
    """
    if tree is None:
        return "ε"
    if isinstance(tree, Substitution):
        return f"sub({_escape(tree.source)},{_escape(tree.target)})"
    return (
        f"node({tree.prefix_len},{tree.suffix_len},"
        f"{canonical_key(tree.left)},{canonical_key(tree.right)})"
    )


class _KeyParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def expect(self, token: str):
        if not self.text.startswith(token, self.pos):
            raise ValueError(f"malformed edit tree key at offset {self.pos}: {self.text!r}")
        self.pos += len(token)

    def string(self, stop: str) -> str:
        out = []
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "\\":
                if self.pos + 1 >= len(self.text):
                    break
                out.append(self.text[self.pos + 1])
                self.pos += 2
            elif c == stop:
                return "".join(out)
            elif c in _ESCAPED:
                break
            else:
                out.append(c)
                self.pos += 1
        raise ValueError(f"malformed edit tree key at offset {self.pos}: {self.text!r}")

    def number(self) -> int:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ValueError(f"malformed edit tree key at offset {start}: {self.text!r}")
        return int(self.text[start:self.pos])

    def tree(self, allow_empty: bool) -> Optional[EditTree]:
        if allow_empty and self.text.startswith("ε", self.pos):
            self.pos += 1
            return None
        if self.text.startswith("sub(", self.pos):
            self.pos += 4
            source = self.string(",")
            self.expect(",")
            target = self.string(")")
            self.expect(")")
            return Substitution(source, target)
        self.expect("node(")
        p = self.number()
        self.expect(",")
        s = self.number()
        self.expect(",")
        left = self.tree(True)
        self.expect(",")
        right = self.tree(True)
        self.expect(")")
        return Node(p, s, left, right)


def parse_key(key: str) -> EditTree:
    """Inverse of :func:`canonical_key`."""
    parser = _KeyParser(key)
    tree = parser.tree(False)
    if parser.pos != len(key):
        raise ValueError(f"trailing characters in edit tree key: {key!r}")
    return tree


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insertions, deletions, substitutions)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]
