"""Exporter configuration: prompts, frame sampling, runtime passthrough."""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_CAPTION_PROMPT = "Describe the video in detail."
DEFAULT_EOL_TEMPLATE = "<sent> Summary of the above sentence in one word:"
SENTENCE_SLOT = "<sent>"


@dataclass
class ExporterConfig:
    model: str = "stub"
    frames_per_video: int = 32
    caption_prompt: str = DEFAULT_CAPTION_PROMPT
    eol_template: str = DEFAULT_EOL_TEMPLATE
    runtime_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frames_per_video < 1:
            raise ValueError("frames_per_video must be >= 1")
        if not self.caption_prompt:
            raise ValueError("caption_prompt must be non-empty")
        if self.eol_template.count(SENTENCE_SLOT) != 1:
            raise ValueError(
                f"eol_template must contain the {SENTENCE_SLOT!r} slot exactly once"
            )


def render_eol_prompt(template: str, sentence: str) -> str:
    """Substitute the sentence slot exactly once, all other text verbatim."""
    if template.count(SENTENCE_SLOT) != 1:
        raise ValueError(f"template must contain {SENTENCE_SLOT!r} exactly once")
    return template.replace(SENTENCE_SLOT, sentence, 1)


def frame_times_s(duration_s: float, frames_per_video: int) -> list[float]:
    """Uniform midpoint sampling over the clip duration."""
    if duration_s < 0:
        raise ValueError("duration must be non-negative")
    step = duration_s / frames_per_video
    return [(i + 0.5) * step for i in range(frames_per_video)]
