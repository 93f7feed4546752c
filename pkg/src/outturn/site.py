"""Hierarchical site model: loading, dialog generation, pruning, mining.

A site is a labeled tree whose edges are hyperlink labels and whose
leaves carry webpage references.  Sites become dialogs (browsing or
out-of-turn form), are pruned against tokens by a forward pass (find the
leaf pages reachable under the matched label) followed by a backward
pass (retain only the paths reaching them), and yield functional
dependencies between labels that always co-occur on root-to-leaf paths.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ElementTree
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .dialog import (
    DEFAULT_STATE_CAP,
    Composite,
    DialogNode,
    Prompt,
    Stager,
    enumerate_sequences,
    normalize_token,
    simplify,
)


class SiteError(ValueError):
    """Raised for malformed or inconsistent site documents."""


class UnknownTokenError(SiteError):
    """Raised when a pruning token is not in the site's token universe."""


MAX_REF_DEPTH = 32


@dataclass(frozen=True, slots=True)
class SiteNode:
    """One node of a site tree; ``page`` is present exactly on leaves."""

    label: str
    children: tuple["SiteNode", ...] = ()
    page: str | None = None
    stager: Stager | None = None

    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True, slots=True)
class SiteTree:
    """A validated site: root node plus derived label universe and depth."""

    root: SiteNode
    token_universe: frozenset[str]
    depth: int

    @classmethod
    def from_root(cls, root: SiteNode) -> "SiteTree":
        _validate(root, is_root=True)
        labels: set[str] = set()
        depth = 0
        for path, _leaf in _walk_paths(root):
            labels.update(path)
            depth = max(depth, len(path))
        return cls(root, frozenset(labels), depth)

    def leaves(self) -> list[SiteNode]:
        return [leaf for _path, leaf in _walk_paths(self.root)]

    def paths(self) -> list[tuple[tuple[str, ...], str | None]]:
        """Root-to-leaf label sequences (root label excluded) with pages."""
        return [(path, leaf.page) for path, leaf in _walk_paths(self.root)]


@dataclass(frozen=True, slots=True)
class FunctionalDependency:
    """Label implication valid on every root-to-leaf path of a site."""

    lhs: frozenset[str]
    rhs: frozenset[str]

    def __post_init__(self) -> None:
        if not self.lhs or not self.rhs:
            raise ValueError("functional dependency sides must be non-empty")
        if self.lhs & self.rhs:
            raise ValueError("functional dependency sides must be disjoint")


@dataclass(frozen=True, slots=True)
class PruneResult:
    """Outcome of pruning; rejected input leaves the tree untouched.

    ``collapsed_page`` is set exactly when one leaf remains, realizing
    the collapsing transformation: the page can be returned directly
    instead of walking the remaining links.
    """

    accepted: bool
    tree: SiteTree
    consumed: frozenset[str]
    collapsed_page: str | None


def _validate(node: SiteNode, is_root: bool) -> None:
    if node.is_leaf():
        if node.page is None:
            raise SiteError(f"leaf node {node.label!r} has no page")
    else:
        if node.page is not None:
            raise SiteError(f"internal node {node.label!r} carries a page")
        seen: set[str] = set()
        for child in node.children:
            if child.label in seen:
                raise SiteError(f"duplicate sibling label {child.label!r} under {node.label!r}")
            seen.add(child.label)
            _validate(child, is_root=False)


def _walk_paths(root: SiteNode) -> Iterator[tuple[tuple[str, ...], SiteNode]]:
    def walk(node: SiteNode, path: tuple[str, ...]) -> Iterator[tuple[tuple[str, ...], SiteNode]]:
        if node.is_leaf():
            yield path, node
            return
        for child in node.children:
            yield from walk(child, path + (child.label,))

    yield from walk(root, ())


# --------------------------------------------------------------------------
# Loading

def load_site(document: str | bytes, max_ref_depth: int = MAX_REF_DEPTH) -> SiteTree:
    """Load a site document, auto-detecting XML or JSON encoding.

    id/refid references are expanded into a tree (cycles rejected, chain
    depth capped); sibling labels must be unique and leaves must carry
    pages.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    head = document.lstrip()[:1]
    if head == "<":
        raw = _parse_xml(document)
    elif head == "{":
        raw = _parse_json(document)
    else:
        raise SiteError("site document must be XML (<site ...>) or JSON ({...})")
    root = _expand_refs(raw, _index_ids(raw), max_ref_depth)
    return SiteTree.from_root(root)


@dataclass
class _RawNode:
    label: str
    children: list["_RawNode"] = field(default_factory=list)
    page: str | None = None
    stager: Stager | None = None
    node_id: str | None = None
    refid: str | None = None


def _parse_stager(value: str | None) -> Stager | None:
    if value is None:
        return None
    try:
        return Stager(value)
    except ValueError:
        raise SiteError(f"unknown stager {value!r}; expected one of I, PE, C, A") from None


def _parse_xml(document: str) -> _RawNode:
    try:
        elem = ElementTree.fromstring(document)
    except ElementTree.ParseError as exc:
        raise SiteError(f"malformed XML site document: {exc}") from exc
    if elem.tag != "site":
        raise SiteError(f"root element must be <site>, got <{elem.tag}>")
    name = elem.get("name")
    if not name:
        raise SiteError("<site> requires a name attribute")

    def convert(e: ElementTree.Element) -> _RawNode:
        if e.tag != "node":
            raise SiteError(f"unexpected element <{e.tag}> in site document")
        label = e.get("label")
        if not label:
            raise SiteError("<node> requires a label attribute")
        return _RawNode(
            label=normalize_token(label),
            children=[convert(c) for c in e],
            page=e.get("page"),
            stager=_parse_stager(e.get("stager")),
            node_id=e.get("id"),
            refid=e.get("refid"),
        )

    # A site may be a single page: <site name=".." page=".."/> has depth 0.
    return _RawNode(label=normalize_token(name), page=elem.get("page"),
                    children=[convert(c) for c in elem])


def _parse_json(document: str) -> _RawNode:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SiteError(f"malformed JSON site document: {exc}") from exc
    if not isinstance(data, dict) or "name" not in data:
        raise SiteError('JSON site document requires a top-level "name"')

    def convert(obj: dict) -> _RawNode:
        if not isinstance(obj, dict) or "label" not in obj:
            raise SiteError('every JSON node requires a "label"')
        return _RawNode(
            label=normalize_token(obj["label"]),
            children=[convert(c) for c in obj.get("children", [])],
            page=obj.get("page"),
            stager=_parse_stager(obj.get("stager")),
            node_id=obj.get("id"),
            refid=obj.get("refid"),
        )

    nodes = data.get("node")
    if nodes is None and data.get("page") is None:
        raise SiteError('JSON site document requires a "node" entry (or a root "page")')
    if isinstance(nodes, dict):
        nodes = [nodes]
    return _RawNode(label=normalize_token(data["name"]), page=data.get("page"),
                    children=[convert(n) for n in (nodes or [])])


def _index_ids(root: _RawNode) -> dict[str, _RawNode]:
    index: dict[str, _RawNode] = {}

    def walk(node: _RawNode) -> None:
        if node.node_id is not None:
            if node.node_id in index:
                raise SiteError(f"duplicate node id {node.node_id!r}")
            index[node.node_id] = node
        for child in node.children:
            walk(child)

    walk(root)
    return index


def _expand_refs(node: _RawNode, index: dict[str, _RawNode], budget: int,
                 active: frozenset[str] = frozenset()) -> SiteNode:
    if node.refid is not None:
        # The budget counts reference hops, not tree depth: plain nesting
        # is unbounded, chains of refids are not.
        if budget <= 0:
            raise SiteError(f"reference expansion exceeded depth cap of {MAX_REF_DEPTH}")
        if node.children or node.page is not None:
            raise SiteError(f"refid node {node.label!r} must not carry children or a page")
        target = index.get(node.refid)
        if target is None:
            raise SiteError(f"refid {node.refid!r} does not resolve to any id")
        if node.refid in active:
            raise SiteError(f"cycle detected through refid {node.refid!r}")
        expanded = _expand_refs(target, index, budget - 1, active | {node.refid})
        return SiteNode(node.label, expanded.children, expanded.page,
                        node.stager or expanded.stager)
    children = tuple(_expand_refs(c, index, budget, active) for c in node.children)
    return SiteNode(node.label, children, node.page, node.stager)


def site_to_json(tree: SiteTree, name: str | None = None) -> dict:
    """Canonical JSON form of a site tree (round-trips through load_site)."""

    def convert(node: SiteNode) -> dict:
        out: dict = {"label": node.label}
        if node.is_leaf():
            out["page"] = node.page
        else:
            out["children"] = [convert(c) for c in node.children]
        if node.stager is not None:
            out["stager"] = node.stager.value
        return out

    root = tree.root
    return {"name": name or root.label,
            "node": [convert(c) for c in root.children] if not root.is_leaf()
            else [{"label": root.label, "page": root.page}]}


# --------------------------------------------------------------------------
# Dialog generation

def site_to_dialog(tree: SiteTree, mode: str = "out_of_turn") -> DialogNode:
    """Render a site as a stageable dialog.

    Browsing mode composes each link under an interpreter (strict
    top-down clicking); out_of_turn mode uses partial evaluators, which
    is the whole trick: the same structure now accepts any level's label
    at any time.  Prefix stagers (I, C) carry the link label to the left
    of the page subdialog, PE and A to the right (the page-description
    form that lets a PE skim over alternator subdialogs).  Leaves become
    bare prompts.  The result is not simplified.
    """
    if mode not in ("browsing", "out_of_turn"):
        raise ValueError(f"mode must be 'browsing' or 'out_of_turn', got {mode!r}")
    default = Stager.I if mode == "browsing" else Stager.PE

    def convert_child(node: SiteNode) -> DialogNode:
        if node.is_leaf():
            return Prompt(node.label)
        subdialog = Composite(Stager.A, tuple(convert_child(c) for c in node.children))
        stager = node.stager or default
        if stager in (Stager.I, Stager.C):
            return Composite(stager, (Prompt(node.label), subdialog))
        return Composite(stager, (subdialog, Prompt(node.label)))

    root = tree.root
    if root.is_leaf():
        return Prompt(root.label)
    return Composite(Stager.A, tuple(convert_child(c) for c in root.children))


# --------------------------------------------------------------------------
# Pruning (forward slice, backward slice, splice)

def prune_site(tree: SiteTree, token: str) -> PruneResult:
    """Prune the site against one token.

    Forward: collect every leaf lying under a node labeled with the
    token.  Backward: retain exactly the root-to-leaf paths reaching
    those leaves.  Finally every retained matching node is spliced out,
    its children promoted in place (the facet is now filled); equal-label
    siblings produced by promotion merge their subtrees.
    """
    tok = normalize_token(token)
    if tok not in tree.token_universe:
        raise UnknownTokenError(f"token {tok!r} is not in the site's universe")
    filtered = _retain_matching_paths(tree.root, tok)
    assert filtered is not None  # token in universe guarantees survivors
    replacements, salvaged = _splice(filtered, tok, is_root=True)
    root = replacements[0]
    if not root.children and root.page is None:
        root = SiteNode(root.label, (), salvaged, root.stager)
    pruned = SiteTree.from_root(root)
    leaves = pruned.leaves()
    collapsed = leaves[0].page if len(leaves) == 1 else None
    return PruneResult(True, pruned, frozenset((tok,)), collapsed)


def _retain_matching_paths(root: SiteNode, tok: str) -> SiteNode | None:
    """Keep exactly the root-to-leaf paths whose labels include ``tok``."""

    def walk(node: SiteNode, under: bool) -> SiteNode | None:
        hit = under or node.label == tok
        if node.is_leaf():
            return node if hit else None
        kept = tuple(c2 for c in node.children if (c2 := walk(c, hit)) is not None)
        if not kept:
            return None
        return SiteNode(node.label, kept, None, node.stager)

    # The root label is the site name, never a hyperlink, so it cannot match.
    kept = tuple(c2 for c in root.children if (c2 := walk(c, False)) is not None)
    if not kept:
        return None
    return SiteNode(root.label, kept, None, root.stager)


def _splice(node: SiteNode, tok: str, is_root: bool = False) -> tuple[list[SiteNode], str | None]:
    """Remove ``tok``-labeled nodes, promoting children; returns
    (replacement nodes, page salvaged from a consumed leaf)."""
    if node.is_leaf():
        if node.label == tok and not is_root:
            return [], node.page
        return [node], None
    new_children: list[SiteNode] = []
    salvaged: str | None = None
    for child in node.children:
        replacements, page = _splice(child, tok)
        new_children.extend(replacements)
        if page is not None:
            salvaged = page
    merged = _merge_by_label(new_children)
    if not merged:
        rebuilt = SiteNode(node.label, (), salvaged, node.stager)
    else:
        rebuilt = SiteNode(node.label, tuple(merged), None, node.stager)
    if rebuilt.label == tok and not is_root:
        if rebuilt.is_leaf():
            return [], rebuilt.page
        return list(rebuilt.children), None
    return [rebuilt], None


def _merge_by_label(nodes: list[SiteNode]) -> list[SiteNode]:
    by_label: dict[str, SiteNode] = {}
    order: list[str] = []
    for node in nodes:
        if node.label not in by_label:
            by_label[node.label] = node
            order.append(node.label)
            continue
        existing = by_label[node.label]
        children = _merge_by_label(list(existing.children) + list(node.children))
        if children:
            merged = SiteNode(node.label, tuple(children), None, existing.stager)
        else:
            page = existing.page if existing.page is not None else node.page
            merged = SiteNode(node.label, (), page, existing.stager)
        by_label[node.label] = merged
    return [by_label[label] for label in order]


# --------------------------------------------------------------------------
# Functional dependencies and input expansion

def mine_fds(tree: SiteTree) -> list[FunctionalDependency]:
    """Mine all singleton-lhs functional dependencies.

    {a} -> R where R is the maximal set of labels co-occurring with a on
    every root-to-leaf path containing a; dependencies with empty R are
    omitted.  Sorted by lhs for determinism.
    """
    path_sets = [frozenset(path) for path, _page in tree.paths()]
    out: list[FunctionalDependency] = []
    for token in sorted(tree.token_universe):
        containing = [p for p in path_sets if token in p]
        if not containing:
            continue
        rhs = frozenset.intersection(*containing) - {token}
        if rhs:
            out.append(FunctionalDependency(frozenset((token,)), rhs))
    return out


def expand_input(tokens: Iterable[str], fds: Iterable[FunctionalDependency]) -> frozenset[str]:
    """Close a token set under the given dependencies (to fixpoint)."""
    current = set(tokens)
    rules = list(fds)
    changed = True
    while changed:
        changed = False
        for fd in rules:
            if fd.lhs <= current and not fd.rhs <= current:
                current |= fd.rhs
                changed = True
    return frozenset(current)


def prune_with_expansion(tree: SiteTree, utterance: Sequence[str],
                         fds: Iterable[FunctionalDependency] = ()) -> PruneResult:
    """Prune against a whole utterance, with input expansion, atomically.

    The utterance's token set is closed under the dependencies; the
    utterance tokens are applied in order, then the inferred extras in
    sorted order.  If any token (supplied or inferred) is absent from the
    then-current universe the whole utterance is rejected and the tree
    returned unchanged.
    """
    tokens = [normalize_token(t) for t in utterance]
    if not tokens:
        raise ValueError("utterance must contain at least one token")
    expanded = expand_input(tokens, fds)
    sequence = tokens + sorted(expanded - set(tokens))
    current = tree
    for tok in sequence:
        if tok not in current.token_universe:
            return PruneResult(False, tree, frozenset(), None)
        current = prune_site(current, tok).tree
    leaves = current.leaves()
    collapsed = leaves[0].page if len(leaves) == 1 else None
    return PruneResult(True, current, frozenset(sequence), collapsed)


# --------------------------------------------------------------------------
# Sequence counting

def _ordered_partition_count(n: int) -> int:
    counts = [1]
    for size in range(1, n + 1):
        counts.append(sum(math.comb(size, k) * counts[size - k] for k in range(1, size + 1)))
    return counts[n]


def is_level_uniform(tree: SiteTree) -> bool:
    """True iff every root-to-leaf path has the same length."""
    lengths = {len(path) for path, _page in tree.paths()}
    return len(lengths) == 1


def count_sequences(tree: SiteTree, multi_token: bool = False, mode: str = "out_of_turn",
                    state_cap: int | None = None) -> int:
    """Count input sequences that fully specify a leaf.

    Browsing mode admits one click path per leaf; with multi-token turns
    the only extra freedom is merging the final click into the turn
    before it (the leaf level is a bare alternator, every earlier level
    an interpreter), giving two groupings per leaf beyond depth one.
    Out-of-turn mode on a level-uniform tree has the closed form
    leaves x depth! (each leaf's labels in any order; ordered set
    partitions of them for multi-token turns); non-uniform trees fall
    back to brute-force enumeration over the generated dialog, subject
    to the state cap.
    """
    cap = state_cap if state_cap is not None else DEFAULT_STATE_CAP
    n_leaves = len(tree.leaves())
    if mode == "browsing":
        if multi_token:
            return sum(1 if len(path) <= 1 else 2 for path, _pg in tree.paths())
        return n_leaves
    if mode != "out_of_turn":
        raise ValueError(f"mode must be 'browsing' or 'out_of_turn', got {mode!r}")
    if is_level_uniform(tree):
        if multi_token:
            return n_leaves * _ordered_partition_count(tree.depth)
        return n_leaves * math.factorial(tree.depth)
    dialog = simplify(site_to_dialog(tree, "out_of_turn"))
    return enumerate_sequences(dialog, multi_token=multi_token, state_cap=cap)


def closed_form_used(tree: SiteTree, mode: str = "out_of_turn") -> str | None:
    """Human-readable closed form applied by count_sequences, if any."""
    n_leaves = len(tree.leaves())
    if mode == "browsing":
        return f"{n_leaves} leaves (one browsing sequence per leaf)"
    if is_level_uniform(tree):
        return f"{n_leaves} leaves x {tree.depth}! = {n_leaves * math.factorial(tree.depth)}"
    return None
