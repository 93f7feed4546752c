from __future__ import annotations

import random
from pathlib import Path

import pytest

from outturn.dialog import Composite, DialogNode, Prompt, Stager, THETA, simplify
from outturn.site import SiteNode, SiteTree, load_site

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def mini_congress_doc() -> str:
    return (FIXTURES / "mini_congress.xml").read_text()


@pytest.fixture(scope="session")
def mini_congress(mini_congress_doc) -> SiteTree:
    return load_site(mini_congress_doc)


@pytest.fixture(scope="session")
def mini_congress_ext_doc() -> str:
    return (FIXTURES / "mini_congress_extended.xml").read_text()


@pytest.fixture(scope="session")
def mini_congress_ext(mini_congress_ext_doc) -> SiteTree:
    return load_site(mini_congress_ext_doc)


@pytest.fixture(scope="session")
def dc_directory_doc() -> str:
    return (FIXTURES / "dc_directory.json").read_text()


@pytest.fixture(scope="session")
def dc_directory(dc_directory_doc) -> SiteTree:
    return load_site(dc_directory_doc)


def uniform_site_doc(branching: tuple[int, ...] = (15, 6, 3, 2)) -> dict:
    """Facet-grid site: level k offers branching[k] labels shared across
    branches, so leaves = product(branching) and depth = len(branching)."""
    prefixes = "abcdefg"

    def build(level: int) -> list[dict]:
        labels = [f"{prefixes[level]}{i}" for i in range(branching[level])]
        if level == len(branching) - 1:
            return [{"label": lab, "page": f"{lab}.html"} for lab in labels]
        return [{"label": lab, "children": build(level + 1)} for lab in labels]

    return {"name": "grid", "node": build(0)}


# ---------------------------------------------------------------------------
# Random structure generators (plain seeded random; hypothesis strategies
# live next to the property tests that use them)

def random_script(rnd: random.Random, max_prompts: int = 12,
                  alphabet_size: int = 8) -> DialogNode:
    """A random simplified dialog script with at most max_prompts prompts."""
    alphabet = [f"t{i}" for i in range(alphabet_size)]
    budget = [rnd.randint(1, max_prompts)]

    def build(depth: int) -> DialogNode:
        if budget[0] <= 0:
            return THETA
        if depth >= 3 or rnd.random() < 0.45:
            budget[0] -= 1
            return Prompt(rnd.choice(alphabet))
        n_children = rnd.randint(1, 3)
        children = tuple(build(depth + 1) for _ in range(n_children))
        children = tuple(c for c in children if c is not THETA)
        if not children:
            budget[0] -= 1
            return Prompt(rnd.choice(alphabet))
        stager = rnd.choice(list(Stager))
        return Composite(stager, children)

    node = build(0)
    if node is THETA:
        node = Prompt(rnd.choice(alphabet))
    return simplify(node)


def random_site(rnd: random.Random, max_nodes: int = 30, alphabet_size: int = 8,
                distinct_per_path: bool = False, level_labels: bool = False) -> SiteTree:
    """A random site; labels repeat across branches but never among siblings.

    With distinct_per_path, a label never repeats along one root-to-leaf
    path.  With level_labels, each depth draws from its own vocabulary
    (the faceted-hierarchy regime the site-model guarantees, where the
    staged dialog and the splice-all-occurrences slicing view coincide).
    """
    counter = [0]

    def pool_for(depth: int, forbidden: frozenset[str]) -> list[str]:
        if level_labels:
            return [f"l{depth}x{i}" for i in range(alphabet_size)]
        alphabet = [f"t{i}" for i in range(alphabet_size)]
        if distinct_per_path:
            return [lab for lab in alphabet if lab not in forbidden]
        return alphabet

    def build(depth: int, forbidden: frozenset[str]) -> tuple:
        counter[0] += 1
        if depth >= 4 or (depth > 0 and rnd.random() < 0.4) or counter[0] >= max_nodes:
            return ("leaf",)
        pool = pool_for(depth, forbidden)
        if not pool:
            return ("leaf",)
        n = rnd.randint(1, min(3, len(pool)))
        labels = rnd.sample(pool, n)
        return ("node", [(lab, build(depth + 1, forbidden | {lab})) for lab in labels])

    def to_site(shape: tuple, label: str, path: list[str]) -> SiteNode:
        if shape[0] == "leaf":
            return SiteNode(label, (), f"page-{'-'.join(path) or 'root'}.html")
        return SiteNode(label, tuple(to_site(s, lab, path + [lab])
                                     for lab, s in shape[1]), None)

    while True:
        counter[0] = 0
        shape = build(0, frozenset())
        if shape[0] == "node":
            return SiteTree.from_root(to_site(shape, "root", []))


def canonical_labels(node: SiteNode) -> tuple:
    """Label-only canonical form for label-isomorphism comparisons."""
    if node.is_leaf():
        return ("leaf", node.label)
    return ("node", node.label, tuple(sorted(canonical_labels(c) for c in node.children)))
