from .audio import (
    SAMPLE_RATE,
    UnknownNoteError,
    dominant_frequency,
    encode_wav,
    note_frequency,
    synthesize_audio,
    write_wav,
)
from .frames import (
    ICON_GLYPHS,
    MELODY_COLORS,
    encode_png,
    render_arena,
    render_icon_grid,
    render_maze_view,
    render_melody_blocks,
    render_tactical_map,
    raycast_distances,
)
from .prompts import (
    MINIMAL_TURN_PROMPT,
    MissingPlaceholderError,
    PromptTemplate,
    assemble_prompt,
)

__all__ = [
    "SAMPLE_RATE",
    "UnknownNoteError",
    "dominant_frequency",
    "encode_wav",
    "note_frequency",
    "synthesize_audio",
    "write_wav",
    "ICON_GLYPHS",
    "MELODY_COLORS",
    "encode_png",
    "render_arena",
    "render_icon_grid",
    "render_maze_view",
    "render_melody_blocks",
    "render_tactical_map",
    "raycast_distances",
    "MINIMAL_TURN_PROMPT",
    "MissingPlaceholderError",
    "PromptTemplate",
    "assemble_prompt",
]
