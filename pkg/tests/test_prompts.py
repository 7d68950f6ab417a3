"""Tests for prompt construction and code extraction."""

import pytest

from planforge.synthesis.errors import MissingInstance, NoCodeBlock
from planforge.synthesis.models import Phase, PromptBundle
from planforge.synthesis.prompts import (GUIDELINES, HEURISTIC_SIGNATURE, build_prompts,
                                         extract_code)

SOURCE = "class CountersDomain:\n    name = 'counters'\n"


def test_all_phases_in_order():
    bundle = build_prompts(SOURCE, '{"domain": "counters"}', strategize=True, refine=True)
    assert [phase for phase, _ in bundle.turns()] == [Phase.STRATEGIZE, Phase.UNREFINED,
                                                     Phase.REFINED]
    assert bundle.final_phase is Phase.REFINED
    assert SOURCE in bundle.phase1_strategize
    assert SOURCE not in bundle.phase2_unrefined
    assert '{"domain": "counters"}' in bundle.phase3_refine


def test_without_strategize_domain_goes_into_phase_two():
    bundle = build_prompts(SOURCE, strategize=False)
    assert bundle.phase1_strategize is None
    assert SOURCE in bundle.phase2_unrefined
    assert [phase for phase, _ in bundle.turns()] == [Phase.UNREFINED]
    assert bundle.final_phase is Phase.UNREFINED


def test_code_phases_carry_signature_and_guidelines():
    bundle = build_prompts(SOURCE, "{}", refine=True)
    for prompt in (bundle.phase2_unrefined, bundle.phase3_refine):
        assert HEURISTIC_SIGNATURE in prompt
        for guideline in GUIDELINES:
            assert guideline in prompt


def test_refine_without_instance():
    with pytest.raises(MissingInstance):
        build_prompts(SOURCE, None, refine=True)


def test_empty_domain_source():
    with pytest.raises(ValueError):
        build_prompts("   ")


def test_bundle_requires_instance_for_refine():
    with pytest.raises(ValueError):
        PromptBundle(phase2_unrefined="p2", phase3_refine="p3", domain_source=SOURCE)


class TestExtractCode:
    def test_last_block_wins(self):
        response = ("Sketch:\n```python\nx = 1\n```\nFinal:\n"
                    "```python\ndef heuristic(state, task):\n    return 0.0\n```\n")
        assert extract_code(response) == "def heuristic(state, task):\n    return 0.0"

    def test_info_string_is_dropped(self):
        assert extract_code("```py title=h.py\nreturn_value = 2\n```") == "return_value = 2"

    def test_tilde_fences(self):
        assert extract_code("~~~\nx = 3\n~~~") == "x = 3"

    def test_inner_shorter_fence_is_content(self):
        response = "````python\ns = '```'\n````"
        assert extract_code(response) == "s = '```'"

    def test_longer_closing_fence_closes(self):
        assert extract_code("```python\nx = 1\n````\n") == "x = 1"

    def test_shorter_closing_fence_does_not_close(self):
        with pytest.raises(NoCodeBlock):
            extract_code("````python\nx = 1\n```\n")

    def test_closing_fence_must_use_the_same_character(self):
        assert extract_code("```\ny = 2\n~~~\nz = 3\n```") == "y = 2\n~~~\nz = 3"

    @pytest.mark.parametrize("response", ["", "def heuristic(state, task): return 0",
                                          "```python\nunterminated"])
    def test_no_block(self, response):
        with pytest.raises(NoCodeBlock):
            extract_code(response)
