"""Versioned prompt templates for the judge backends.

Template ids enter the response cache key, so any wording change must bump
the version suffix. The extraction templates demand a strict line-per-element
output; the entailment template demands a strict one-token answer.
"""

from __future__ import annotations

OBJECT_EXTRACT_TEMPLATE_ID = "object_extract.v1"
EVENT_EXTRACT_TEMPLATE_ID = "event_extract.v1"
ENTAILMENT_TEMPLATE_ID = "entailment.v1"

OBJECT_EXTRACT_TEMPLATE = """\
You will be given a video description. List every distinct static object it \
mentions, one per line, each with at most one attribute.

Rules:
- One object with one attribute per line. If an object has several \
attributes, repeat the object once per attribute. For example, \
"an elderly man wearing glasses and a blue suit" becomes two lines: \
"an elderly man wearing glasses" and "an elderly man wearing a blue suit".
- Keep each line a short noun phrase taken from the description.
- Do not number the lines. Do not add commentary. Output only the lines.

Description:
{caption}
"""

EVENT_EXTRACT_TEMPLATE = """\
You will be given a video description. List every distinct action or event \
it mentions, one per line, preserving the order in which they happen.

Rules:
- One event per line, as a short clause with its subject.
- Preserve temporal order; do not merge separate actions into one line.
- Do not number the lines. Do not add commentary. Output only the lines.

Description:
{caption}
"""

ENTAILMENT_TEMPLATE = """\
Decide whether the description below logically entails the statement. \
The statement is entailed only if the description supports it being true.

Description:
{description}

Statement:
{element}

Answer with exactly one word: ENTAILED or NOT_ENTAILED.
"""

# Appended verbatim on the single reprompt after an unparseable answer.
STRICT_REMINDER = (
    "\nYour previous answer could not be parsed. "
    "Follow the output format exactly, with no extra text."
)


def extraction_template_id(aspect: str) -> str:
    if aspect == "object":
        return OBJECT_EXTRACT_TEMPLATE_ID
    if aspect == "event":
        return EVENT_EXTRACT_TEMPLATE_ID
    raise ValueError(f"unknown aspect {aspect!r}")


def render_extraction_prompt(caption: str, aspect: str) -> str:
    template = OBJECT_EXTRACT_TEMPLATE if aspect == "object" else EVENT_EXTRACT_TEMPLATE
    extraction_template_id(aspect)  # validates the aspect
    return template.format(caption=caption)


def render_entailment_prompt(description: str, element: str) -> str:
    return ENTAILMENT_TEMPLATE.format(description=description, element=element)
