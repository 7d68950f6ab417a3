"""
prompts.py

Prompt construction for the three-phase heuristic conversation and extraction of code
from model responses.

Phase 1 (optional) shows the domain implementation and asks for an English heuristic
strategy. Phase 2 shows the exact heuristic signature and the guideline list and asks
for the implementation. Phase 3 (optional) adds the instance JSON and asks for a
refinement, strategizing first and then coding.
"""

import re
from typing import Optional

from .errors import MissingInstance, NoCodeBlock
from .models import PromptBundle

HEURISTIC_SIGNATURE = "def heuristic(state, task) -> float:"

SIGNATURE_BLOCK = f"""```python
{HEURISTIC_SIGNATURE}
    ...
```

`state` is the domain's state object exactly as constructed by the domain code above.
`task` is the loaded planning task: `task.parameters` is the domain's parameter object,
`task.goal` is the list of goal conditions and `task.initial` is the initial state."""

GUIDELINES = [
    "Ignore admissibility and other strict theoretical properties; the heuristic only "
    "needs to guide greedy best-first search well.",
    "Aim for values approximating monotonous decrease as the given state gets closer to "
    "the goal.",
    "Return a finite float; never return NaN and never raise for a reachable state.",
    "Write a complete module: define `heuristic` at top level with exactly the two "
    "positional parameters shown, plus any helpers it needs.",
    "Only import from the Python standard library.",
    "Avoid compilation errors: no placeholders, no ellipses, no pseudo-code.",
    "Do not ask for clarification or further specification, and do not ask us to "
    "complete the heuristic; make reasonable assumptions and state them in comments.",
    "Keep the function fast; it runs once per generated state.",
    "Put the final, complete code in a single fenced ```python code block at the end of "
    "your answer.",
]

_STRATEGIZE_TEMPLATE = """You are helping a greedy best-first search planner solve tasks from a planning domain.
The domain is simulated by the following Python implementation of its successor generator and goal test:

```python
{domain_source}
```

Describe in English a heuristic function that would make greedy best-first search on this domain effective.
Ignore strict theoretical properties such as admissibility; focus on a heuristic whose value approximates a
monotonous decrease as the given state gets closer to the goal. Do not write code yet."""

_UNREFINED_INTRO_WITH_STRATEGY = "Now implement the heuristic you described above."

_UNREFINED_INTRO_WITHOUT_STRATEGY = """You are helping a greedy best-first search planner solve tasks from a planning domain.
The domain is simulated by the following Python implementation of its successor generator and goal test:

```python
{domain_source}
```

Write a heuristic function for greedy best-first search on this domain."""

_UNREFINED_TEMPLATE = """{intro}

The heuristic must have precisely this signature:

{signature}

Follow these guidelines:
{guidelines}"""

_REFINE_TEMPLATE = """Here is the JSON file of the specific problem instance that will be solved:

```json
{instance_json}
```

Refine your heuristic for this instance, using its details and parameters. First explain how you would
change the heuristic, then give the full refined implementation with the same signature:

{signature}

The same guidelines apply:
{guidelines}"""


def _guideline_list() -> str:
    return "\n".join(f"- {g}" for g in GUIDELINES)


def build_prompts(domain_source: str,
                  instance_json: Optional[str] = None,
                  strategize: bool = True,
                  refine: bool = False) -> PromptBundle:
    """
    Build the prompts of one heuristic request.

    Args:
        domain_source: Source text of the domain's successor generator and goal test.
        instance_json: The instance document, required when ``refine`` is set.
        strategize: Include the phase 1 strategy prompt.
        refine: Include the phase 3 refinement prompt.

    Returns:
        PromptBundle with only the enabled phases present.

    Raises:
        ValueError: If domain_source is empty.
        MissingInstance: If refine is requested without an instance.
    """
    if not domain_source.strip():
        raise ValueError("domain_source cannot be empty")
    if refine and not instance_json:
        raise MissingInstance("the refine phase needs the instance JSON")

    guidelines = _guideline_list()
    phase1 = _STRATEGIZE_TEMPLATE.format(domain_source=domain_source) if strategize else None
    if strategize:
        intro = _UNREFINED_INTRO_WITH_STRATEGY
    else:
        intro = _UNREFINED_INTRO_WITHOUT_STRATEGY.format(domain_source=domain_source)
    phase2 = _UNREFINED_TEMPLATE.format(intro=intro,
                                        signature=SIGNATURE_BLOCK,
                                        guidelines=guidelines)
    phase3 = None
    if refine:
        phase3 = _REFINE_TEMPLATE.format(instance_json=instance_json,
                                         signature=SIGNATURE_BLOCK,
                                         guidelines=guidelines)

    return PromptBundle(phase1_strategize=phase1,
                        phase2_unrefined=phase2,
                        phase3_refine=phase3,
                        domain_source=domain_source,
                        instance_json=instance_json or None)


# A closing fence repeats the opening character at least as many times.
_FENCE = re.compile(r"^[ \t]*(?P<fence>(?P<ch>[`~])(?P=ch){2,})(?!(?P=ch))[^\n]*\n(?P<body>.*?)"
                    r"^[ \t]*(?P=fence)(?P=ch)*[ \t]*$",
                    re.DOTALL | re.MULTILINE)


def extract_code(response: str) -> str:
    """
    Return the contents of the last fenced code block, without its info string.

    Raises:
        NoCodeBlock: If the response has no fenced block.
    """
    blocks = [m.group("body") for m in _FENCE.finditer(response)]
    if not blocks:
        raise NoCodeBlock("response contains no fenced code block")
    return blocks[-1].rstrip("\n")
