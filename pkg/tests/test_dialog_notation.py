"""Script notation: parsing, rendering, token normalization."""

from __future__ import annotations

import random

import pytest

from outturn.dialog import (
    Composite,
    Prompt,
    ScriptError,
    Stager,
    THETA,
    normalize_token,
    parse_script,
    render_script,
    tokenize_utterance,
)
from conftest import random_script


class TestNormalization:
    def test_case_folds_and_trims(self):
        assert normalize_token("  Georgia ") == "georgia"

    def test_collapses_internal_whitespace(self):
        assert normalize_token("Ice  Cream\tMaker") == "ice cream maker"

    def test_idempotent(self):
        for raw in ["  A  B ", "Washington, D.C.", "x"]:
            once = normalize_token(raw)
            assert normalize_token(once) == once

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize_token("   ")


class TestParse:
    def test_flat_pe(self):
        node = parse_script("PE[a b c]")
        assert node == Composite(Stager.PE, (Prompt("a"), Prompt("b"), Prompt("c")))

    def test_breakfast_tree(self):
        node = parse_script("PE[C[e1 e2] C[c1 c2] C[b1 b2]]")
        assert isinstance(node, Composite) and node.stager is Stager.PE
        assert [child.stager for child in node.children] == [Stager.C] * 3
        assert node.children[1] == Composite(Stager.C, (Prompt("c1"), Prompt("c2")))

    def test_empty_composite_rejected(self):
        with pytest.raises(ScriptError):
            parse_script("PE[]")

    def test_theta(self):
        assert parse_script("THETA") is THETA

    def test_not_simplified(self):
        # Single-child composites and theta children must survive parsing.
        node = parse_script("A[THETA]")
        assert node == Composite(Stager.A, (THETA,))

    def test_quoted_multiword_token(self):
        node = parse_script('PE["ice cream maker" x]')
        assert node.children[0] == Prompt("ice cream maker")

    def test_quoted_escapes(self):
        assert parse_script(r'"say \"hi\" \\"') == Prompt('say "hi" \\')

    def test_lowercase_stager_words_are_tokens(self):
        assert parse_script("pe") == Prompt("pe")

    def test_stager_without_bracket_is_token(self):
        assert parse_script("C[PE c]") == Composite(Stager.C, (Prompt("pe"), Prompt("c")))

    def test_error_positions(self):
        with pytest.raises(ScriptError) as info:
            parse_script("PE[a ]]")
        assert info.value.position is not None

    def test_unterminated_quote(self):
        with pytest.raises(ScriptError):
            parse_script('"abc')

    def test_empty_quoted_token(self):
        with pytest.raises(ScriptError):
            parse_script('PE[a ""]')
        with pytest.raises(ScriptError):
            tokenize_utterance('a "  "')

    def test_trailing_input(self):
        with pytest.raises(ScriptError):
            parse_script("PE[a b] c")

    def test_missing_close(self):
        with pytest.raises(ScriptError):
            parse_script("PE[a b")


class TestRender:
    def test_single_prompt_composite(self):
        assert render_script(Composite(Stager.C, (Prompt("c2"),))) == "C[c2]"

    def test_theta(self):
        assert render_script(THETA) == "THETA"

    def test_breakfast(self):
        text = "PE[C[e1 e2] C[c1 c2] C[b1 b2]]"
        assert render_script(parse_script(text)) == text

    def test_quotes_where_needed(self):
        assert render_script(Prompt("ice cream maker")) == '"ice cream maker"'
        assert render_script(Prompt("plain")) == "plain"

    def test_round_trip_random_scripts(self):
        rnd = random.Random(7)
        for _ in range(200):
            node = random_script(rnd)
            assert parse_script(render_script(node)) == node


class TestTokenizeUtterance:
    def test_whitespace_split(self):
        assert tokenize_utterance("d  s GA") == ("d", "s", "ga")

    def test_quoted_label(self):
        assert tokenize_utterance('"Ice Cream Maker" x') == ("ice cream maker", "x")

    def test_brackets_rejected(self):
        with pytest.raises(ScriptError):
            tokenize_utterance("a [b]")


class TestParserRobustness:
    def test_arbitrary_input_never_escapes_script_error(self):
        rnd = random.Random(3)
        glyphs = 'PE C A I THETA [ ] " \\ a b1 "x y" \t'
        pool = glyphs.split(" ") + ["", " "]
        for _ in range(2000):
            text = "".join(rnd.choice(pool) for _ in range(rnd.randint(0, 12)))
            try:
                node = parse_script(text)
            except ScriptError:
                continue
            # anything that parses must round-trip
            assert parse_script(render_script(node)) == node
