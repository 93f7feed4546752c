"""Dialog scripts, stagers, and the reduction engine.

A dialog script is a tree of prompts composed under stagers:

* ``PE`` (partial evaluator) accepts its children's inputs in any order,
  which is what enables out-of-turn interaction.
* ``C`` (currier) accepts inputs only as a consecutive prefix of its
  children.
* ``I`` (interpreter) is the currier restricted to a single consumed
  token per utterance: strict sequential, one step per turn.
* ``A`` (alternator) models mutually exclusive choices; an accepted
  input prunes the alternatives that do not accept it.

``theta`` (rendered ``THETA``) is the empty dialog; reducing a script to
theta means the dialog has completed.  All operations here are pure
functions over immutable values: reducing never mutates and rejected
input returns the original node unchanged.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence, Union


class ScriptError(ValueError):
    """Raised for malformed script notation; carries the offending position."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EnumerationLimitError(RuntimeError):
    """Raised when sequence enumeration exceeds its state cap."""


def normalize_token(text: str) -> str:
    """Normalize a raw label into a token.

    Case-folds, trims, and collapses internal whitespace runs to single
    spaces.  Idempotent; two tokens are equal iff their normalized texts
    are equal.
    """
    token = re.sub(r"\s+", " ", text.strip()).casefold()
    if not token:
        raise ValueError("token text must be non-empty")
    return token


class Stager(Enum):
    """Transformation policy attached to a composite dialog node."""

    I = "I"
    PE = "PE"
    C = "C"
    A = "A"


@dataclass(frozen=True, slots=True)
class Theta:
    """The empty (completed) dialog."""

    def __repr__(self) -> str:
        return "Theta()"


@dataclass(frozen=True, slots=True)
class Prompt:
    """A single solicitation for one token."""

    token: str


@dataclass(frozen=True, slots=True)
class Composite:
    """A staged composition of subdialogs; children order is significant."""

    stager: Stager
    children: tuple["DialogNode", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("composite dialog requires at least one child")


DialogNode = Union[Theta, Prompt, Composite]

THETA = Theta()


@dataclass(frozen=True, slots=True)
class ReductionOutcome:
    """Result of feeding input to a dialog.

    ``accepted`` is False exactly when no reduction rule fired; in that
    case ``result`` is the input node itself, so invalid input is never
    destructive.
    """

    accepted: bool
    result: DialogNode
    consumed: str | tuple[str, ...]


# --------------------------------------------------------------------------
# Script notation

_STAGER_NAMES = {s.value for s in Stager}
_BARE_TOKEN = re.compile(r'[^\s\[\]"\\]+')


def _lex(text: str) -> Iterator[tuple[str, str, int]]:
    """Yield (kind, value, position) with kind in {'[', ']', 'word', 'quoted'}."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "[]":
            yield ch, ch, i
            i += 1
            continue
        if ch == '"':
            start = i
            i += 1
            parts: list[str] = []
            while i < n and text[i] != '"':
                if text[i] == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise ScriptError("bad escape in quoted token", i)
                    parts.append(text[i + 1])
                    i += 2
                else:
                    parts.append(text[i])
                    i += 1
            if i >= n:
                raise ScriptError("unterminated quoted token", start)
            i += 1
            yield "quoted", "".join(parts), start
            continue
        m = _BARE_TOKEN.match(text, i)
        if not m:
            raise ScriptError(f"unexpected character {ch!r}", i)
        yield "word", m.group(), i
        i = m.end()


def tokenize_utterance(text: str) -> tuple[str, ...]:
    """Split free text into utterance tokens using the script quoting rules.

    Double quotes group a multi-word label into one token; backslash
    escapes ``"`` and ``\\``.  Brackets are ordinary input here and are
    rejected, since no site label contains them.
    """
    tokens = []
    for kind, value, pos in _lex(text):
        if kind in ("word", "quoted"):
            tokens.append(_normalize_at(value, pos))
        else:
            raise ScriptError("brackets are not valid in utterances", pos)
    return tuple(tokens)


def _normalize_at(value: str, pos: int) -> str:
    try:
        return normalize_token(value)
    except ValueError as exc:
        raise ScriptError(str(exc), pos) from exc


def parse_script(text: str) -> DialogNode:
    """Parse script notation into a dialog tree.

    Grammar: ``node := TOKEN | ('I'|'PE'|'C'|'A') '[' node+ ']' | 'THETA'``
    with whitespace-separated children.  The result is NOT simplified, so
    pre-simplification shapes are representable.
    """
    tokens = list(_lex(text))
    pos = 0

    def parse_node() -> DialogNode:
        nonlocal pos
        if pos >= len(tokens):
            raise ScriptError("unexpected end of script", len(text))
        kind, value, at = tokens[pos]
        if kind == "]":
            raise ScriptError("unexpected ']'", at)
        if kind == "[":
            raise ScriptError("unexpected '['", at)
        pos += 1
        if kind == "word":
            if value == "THETA":
                return THETA
            if value in _STAGER_NAMES and pos < len(tokens) and tokens[pos][0] == "[":
                pos += 1  # consume '['
                children: list[DialogNode] = []
                while pos < len(tokens) and tokens[pos][0] != "]":
                    children.append(parse_node())
                if pos >= len(tokens):
                    raise ScriptError("missing ']'", at)
                pos += 1  # consume ']'
                if not children:
                    raise ScriptError("composite requires at least one child", at)
                return Composite(Stager(value), tuple(children))
        return Prompt(_normalize_at(value, at))

    node = parse_node()
    if pos < len(tokens):
        raise ScriptError("trailing input after script", tokens[pos][2])
    return node


def _render_token(token: str) -> str:
    if _BARE_TOKEN.fullmatch(token) and token != "THETA" and token not in _STAGER_NAMES:
        return token
    escaped = token.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render_script(node: DialogNode) -> str:
    """Render a dialog tree back to script notation (parse round-trips)."""
    if isinstance(node, Theta):
        return "THETA"
    if isinstance(node, Prompt):
        return _render_token(node.token)
    inner = " ".join(render_script(child) for child in node.children)
    return f"{node.stager.value}[{inner}]"


# --------------------------------------------------------------------------
# Structure queries

def contains_alternator(node: DialogNode) -> bool:
    """True iff the node or any descendant composite is staged with A."""
    if isinstance(node, Composite):
        if node.stager is Stager.A:
            return True
        return any(contains_alternator(child) for child in node.children)
    return False


def prompt_tokens(node: DialogNode) -> frozenset[str]:
    """All prompt tokens appearing anywhere in the node."""
    if isinstance(node, Prompt):
        return frozenset((node.token,))
    if isinstance(node, Composite):
        return frozenset().union(*(prompt_tokens(c) for c in node.children))
    return frozenset()


def prompt_count(node: DialogNode) -> int:
    if isinstance(node, Prompt):
        return 1
    if isinstance(node, Composite):
        return sum(prompt_count(c) for c in node.children)
    return 0


def is_complete(node: DialogNode) -> bool:
    """True iff the dialog has reduced to theta."""
    return isinstance(node, Theta)


# --------------------------------------------------------------------------
# Simplification

def simplify(node: DialogNode) -> DialogNode:
    """Normalize a dialog bottom-up to a fixpoint.

    Theta children are dropped from every composite; a composite whose
    children all vanish becomes theta; a composite with a single
    *composite* child collapses to that child.  A composite holding one
    remaining prompt (``PE[ga]``) is already normal: it still solicits
    that prompt and is consumed as a unit.
    """
    if not isinstance(node, Composite):
        return node
    children = [simplify(child) for child in node.children]
    children = [child for child in children if not isinstance(child, Theta)]
    if not children:
        return THETA
    if len(children) == 1 and isinstance(children[0], Composite):
        return children[0]
    return Composite(node.stager, tuple(children))


# --------------------------------------------------------------------------
# Reduction

def _reduce_raw(node: DialogNode, token: str) -> tuple[bool, DialogNode, bool]:
    """Apply the first applicable reduction rule.

    Returns (accepted, raw result, routed-through-interpreter).  The raw
    result is not simplified; callers simplify once at the top.  Rule
    order follows the precedence listing: the sole-prompt rule, then the
    stager-specific prompt rules, then the subdialog rules, and finally
    rejection (identity).
    """
    if isinstance(node, Theta):
        return False, node, False
    if isinstance(node, Prompt):
        # Degenerate top-level prompt: behaves like a one-prompt composite.
        if node.token == token:
            return True, THETA, False
        return False, node, False

    kids = node.children
    stager = node.stager

    # Sole remaining prompt matches, irrespective of stager.
    if len(kids) == 1 and isinstance(kids[0], Prompt) and kids[0].token == token:
        return True, THETA, stager is Stager.I

    if stager is Stager.PE:
        # Any matching prompt child is removed (leftmost on duplicates).
        for i, kid in enumerate(kids):
            if isinstance(kid, Prompt) and kid.token == token:
                return True, Composite(Stager.PE, kids[:i] + kids[i + 1:]), False
        # In-place rewrite, cued by alternators on the far left: scan while
        # the prefix consists of subdialogs, rewriting the first one that
        # accepts; a rejecting subdialog without an alternator breaks the
        # cue.  Page descriptions sit leftmost, so specifying a facet deep
        # inside one never locks the rest of the dialog.
        for i, kid in enumerate(kids):
            if not isinstance(kid, Composite):
                break
            accepted, result, via_i = _reduce_raw(kid, token)
            if accepted:
                return True, Composite(Stager.PE, kids[:i] + (result,) + kids[i + 1:]), via_i
            if not contains_alternator(kid):
                break
        # Entering a subdialog past a broken cue restructures: the entered
        # child must be completed before the rest becomes available again.
        for i, kid in enumerate(kids):
            if isinstance(kid, Composite):
                accepted, result, via_i = _reduce_raw(kid, token)
                if accepted:
                    rest = kids[:i] + kids[i + 1:]
                    if not rest:
                        return True, result, via_i
                    return True, Composite(Stager.C, (result, Composite(Stager.PE, rest))), via_i
        return False, node, False

    if stager in (Stager.C, Stager.I):
        head = kids[0]
        if isinstance(head, Prompt) and head.token == token:
            return True, Composite(stager, kids[1:]), stager is Stager.I
        if isinstance(head, Composite):
            accepted, result, via_i = _reduce_raw(head, token)
            if accepted:
                return True, Composite(stager, (result,) + kids[1:]), via_i or stager is Stager.I
        return False, node, False

    # Alternator: a matching prompt child completes the whole choice.
    if any(isinstance(kid, Prompt) and kid.token == token for kid in kids):
        return True, THETA, False
    # Otherwise the token is offered to every subdialog child; children
    # unchanged by it (prompts included) are pruned away.
    survivors: list[DialogNode] = []
    via_any = False
    for kid in kids:
        if isinstance(kid, Composite):
            accepted, result, via_i = _reduce_raw(kid, token)
            if accepted:
                survivors.append(result)
                via_any = via_any or via_i
    if survivors:
        return True, Composite(Stager.A, tuple(survivors)), via_any
    return False, node, False


def reduce(node: DialogNode, token: str) -> ReductionOutcome:
    """Feed one token to a simplified dialog.

    Applies the highest-precedence applicable rule, simplifies, and
    returns the outcome.  Invalid input is a rejected outcome carrying
    the original node, not an error: in-turn and out-of-turn input are
    handled uniformly and rejection is identity.
    """
    tok = normalize_token(token)
    accepted, raw, _ = _reduce_raw(node, tok)
    return ReductionOutcome(accepted, simplify(raw) if accepted else node, tok)


def apply_utterance(node: DialogNode, utterance: Sequence[str]) -> ReductionOutcome:
    """Fold a whole utterance over the dialog, atomically.

    Tokens are applied left to right; if any token is rejected the whole
    utterance is rejected and the original node is returned.  At most one
    token per utterance may be consumed through an interpreter composite
    (I admits exactly one step per turn).
    """
    tokens = tuple(normalize_token(t) for t in utterance)
    if not tokens:
        raise ValueError("utterance must contain at least one token")
    current = node
    interpreter_steps = 0
    for tok in tokens:
        accepted, raw, via_i = _reduce_raw(current, tok)
        if not accepted:
            return ReductionOutcome(False, node, tokens)
        if via_i:
            interpreter_steps += 1
            if interpreter_steps > 1:
                return ReductionOutcome(False, node, tokens)
        current = simplify(raw)
    return ReductionOutcome(True, current, tokens)


def valid_tokens(node: DialogNode) -> frozenset[str]:
    """The set of tokens the dialog currently accepts ("What may I say?").

    Computed structurally per stager semantics; coincides with
    ``{t | reduce(node, t).accepted}`` over any token universe.
    """
    if isinstance(node, Theta):
        return frozenset()
    if isinstance(node, Prompt):
        return frozenset((node.token,))
    if node.stager in (Stager.C, Stager.I):
        head = node.children[0]
        if isinstance(head, Prompt):
            return frozenset((head.token,))
        return valid_tokens(head)
    # PE and A: matching prompts anywhere, plus whatever subdialogs accept.
    out: set[str] = set()
    for kid in node.children:
        if isinstance(kid, Prompt):
            out.add(kid.token)
        elif isinstance(kid, Composite):
            out |= valid_tokens(kid)
    return frozenset(out)


def solicitation(node: DialogNode) -> tuple[str, ...]:
    """The labels currently being solicited (the clickable level).

    Unlike :func:`valid_tokens` this reports only the head solicitation:
    an alternator shows all alternatives' labels, prefix stagers show
    their head child's, and a PE shows its own prompt children when it
    has any (the link labels of a page form).
    """
    out: list[str] = []

    def walk(n: DialogNode) -> None:
        if isinstance(n, Prompt):
            if n.token not in out:
                out.append(n.token)
            return
        if isinstance(n, Theta):
            return
        if n.stager is Stager.A:
            for kid in n.children:
                walk(kid)
            return
        if n.stager is Stager.PE:
            prompts = [k for k in n.children if isinstance(k, Prompt)]
            if prompts:
                for p in prompts:
                    walk(p)
            else:
                for kid in n.children:
                    walk(kid)
            return
        walk(n.children[0])

    walk(node)
    return tuple(out)


# --------------------------------------------------------------------------
# Sequence enumeration

DEFAULT_STATE_CAP = 200_000


def _group_successor(node: DialogNode, group: tuple[str, ...]) -> DialogNode | None:
    """Successor for a multi-token group, if some ordering is accepted.

    Orderings are tried lexicographically; the first accepted one defines
    the successor, keeping the move deterministic.
    """
    for perm in itertools.permutations(sorted(group)):
        outcome = apply_utterance(node, perm)
        if outcome.accepted:
            return outcome.result
    return None


def _count_single(node: DialogNode, memo: dict, cap: int) -> int:
    if isinstance(node, Theta):
        return 1
    if node in memo:
        return memo[node]
    if len(memo) >= cap:
        raise EnumerationLimitError(f"enumeration exceeded state cap of {cap}")
    total = 0
    for tok in sorted(valid_tokens(node)):
        total += _count_single(reduce(node, tok).result, memo, cap)
    memo[node] = total
    return total


def _count_groups(node: DialogNode, universe: tuple[str, ...], memo: dict, cap: int) -> int:
    if isinstance(node, Theta):
        return 1
    if node in memo:
        return memo[node]
    if len(memo) >= cap:
        raise EnumerationLimitError(f"enumeration exceeded state cap of {cap}")
    remaining = tuple(t for t in universe if t in prompt_tokens(node))
    total = 0
    for size in range(1, len(remaining) + 1):
        for group in itertools.combinations(remaining, size):
            successor = _group_successor(node, group)
            if successor is not None:
                total += _count_groups(successor, universe, memo, cap)
    memo[node] = total
    return total


def enumerate_sequences(node: DialogNode, multi_token: bool = False,
                        state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Count the input sequences that complete the dialog.

    With ``multi_token=False``, counts sequences of single tokens ending
    at theta.  With ``multi_token=True``, counts sequences of non-empty
    token groups (each group one utterance): for a flat PE these are the
    ordered set partitions of its prompts.  Exceeding ``state_cap``
    distinct explored states raises, never truncates.
    """
    simplified = simplify(node)
    if multi_token:
        universe = tuple(sorted(prompt_tokens(simplified)))
        return _count_groups(simplified, universe, {}, state_cap)
    return _count_single(simplified, {}, state_cap)


def completing_sequences(node: DialogNode, multi_token: bool = False,
                         state_cap: int = DEFAULT_STATE_CAP) -> list[tuple]:
    """List every completing sequence explicitly (small dialogs only).

    Single-token mode yields tuples of tokens; group mode yields tuples
    of frozensets.
    """
    simplified = simplify(node)
    results: list[tuple] = []
    seen_states: set = set()

    def walk_single(n: DialogNode, prefix: tuple[str, ...]) -> None:
        if isinstance(n, Theta):
            results.append(prefix)
            return
        seen_states.add(n)
        if len(seen_states) > state_cap or len(results) > state_cap:
            raise EnumerationLimitError(f"enumeration exceeded state cap of {state_cap}")
        for tok in sorted(valid_tokens(n)):
            walk_single(reduce(n, tok).result, prefix + (tok,))

    def walk_groups(n: DialogNode, prefix: tuple) -> None:
        if isinstance(n, Theta):
            results.append(prefix)
            return
        seen_states.add(n)
        if len(seen_states) > state_cap or len(results) > state_cap:
            raise EnumerationLimitError(f"enumeration exceeded state cap of {state_cap}")
        remaining = sorted(prompt_tokens(n))
        for size in range(1, len(remaining) + 1):
            for group in itertools.combinations(remaining, size):
                successor = _group_successor(n, group)
                if successor is not None:
                    walk_groups(successor, prefix + (frozenset(group),))

    if multi_token:
        walk_groups(simplified, ())
    else:
        walk_single(simplified, ())
    return results
