"""Deterministic flat-shaded frame rendering for all five games.

Every function here is a pure function of plain data (wall grids, unit
lists, ...) and returns an HxWx3 uint8 array. Identical inputs produce
byte-identical frames; nothing in this module mutates game state.
"""

from __future__ import annotations

import io
from typing import Optional, Sequence

import numpy as np
from PIL import Image

# Fixed per-game resolutions.
PATHFINDING_SIZE = (240, 320)  # (H, W) first-person raycast
ECHOES_SIZE = 288              # square grid canvas
MELODY_SIZE = (96, 336)        # 7 blocks of 48 px
PHANTOM_SIZE = 240             # square tactical map
SHOWDOWN_CELL = 18             # 13 cells -> 234 px square

FOV_DEG = 66.0

MELODY_COLORS: dict[str, tuple[int, int, int]] = {
    "red": (208, 49, 45),
    "orange": (235, 138, 32),
    "yellow": (240, 210, 50),
    "green": (70, 170, 70),
    "blue": (55, 110, 210),
    "indigo": (75, 60, 160),
    "violet": (150, 70, 180),
}

PLAYER_COLORS = [(210, 60, 50), (60, 120, 210), (60, 180, 90), (230, 190, 60)]


def encode_png(frame: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def _canvas(h: int, w: int, color: tuple[int, int, int]) -> np.ndarray:
    frame = np.empty((h, w, 3), dtype=np.uint8)
    frame[:, :] = color
    return frame


def _fill(frame: np.ndarray, y0: int, x0: int, y1: int, x1: int, color) -> None:
    frame[max(y0, 0):max(y1, 0), max(x0, 0):max(x1, 0)] = color


# ---------------------------------------------------------------------------
# Icon glyphs (16 fixed monochrome shapes drawn from coordinate masks)
# ---------------------------------------------------------------------------

def _uv(size: int) -> tuple[np.ndarray, np.ndarray]:
    axis = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    return np.meshgrid(axis, axis)


def _glyph_mask(name: str, size: int) -> np.ndarray:
    u, v = _uv(size)
    r = np.sqrt(u * u + v * v)
    if name == "circle":
        return r <= 0.68
    if name == "ring":
        return (r <= 0.70) & (r >= 0.42)
    if name == "square":
        return np.maximum(np.abs(u), np.abs(v)) <= 0.62
    if name == "frame":
        m = np.maximum(np.abs(u), np.abs(v))
        return (m <= 0.66) & (m >= 0.40)
    if name == "diamond":
        return np.abs(u) + np.abs(v) <= 0.85
    if name == "delta":
        return (v <= 0.65) & (v >= -0.65) & (np.abs(u) <= (0.65 - v) * 0.55)
    if name == "nabla":
        return (v <= 0.65) & (v >= -0.65) & (np.abs(u) <= (0.65 + v) * 0.55)
    if name == "cross":
        return ((np.abs(u - v) <= 0.24) | (np.abs(u + v) <= 0.24)) & (np.maximum(np.abs(u), np.abs(v)) <= 0.70)
    if name == "plus":
        return ((np.abs(u) <= 0.20) & (np.abs(v) <= 0.70)) | ((np.abs(v) <= 0.20) & (np.abs(u) <= 0.70))
    if name == "dash":
        return (np.abs(v) <= 0.22) & (np.abs(u) <= 0.68)
    if name == "pillar":
        return (np.abs(u) <= 0.22) & (np.abs(v) <= 0.68)
    if name == "star":
        return (np.abs(u) * np.abs(v) <= 0.075) & (r <= 0.78)
    if name == "dots":
        out = np.zeros_like(u, dtype=bool)
        for cu in (-0.38, 0.38):
            for cv in (-0.38, 0.38):
                out |= (u - cu) ** 2 + (v - cv) ** 2 <= 0.22 ** 2
        return out
    if name == "moon":
        return (r <= 0.70) & ((u - 0.32) ** 2 + v * v >= 0.52 ** 2)
    if name == "glass":
        return (np.abs(u) <= np.abs(v) * 0.85 + 0.06) & (np.abs(v) <= 0.68)
    if name == "target":
        return (r <= 0.26) | ((r <= 0.72) & (r >= 0.52))
    raise ValueError(f"unknown glyph: {name!r}")


ICON_GLYPHS: tuple[str, ...] = (
    "circle", "ring", "square", "frame", "diamond", "delta", "nabla", "cross",
    "plus", "dash", "pillar", "star", "dots", "moon", "glass", "target",
)


def render_icon_grid(
    rows: int,
    cols: int,
    icons: Sequence[Sequence[str]],
    highlight: Optional[tuple[int, int]] = None,
    size: int = ECHOES_SIZE,
) -> np.ndarray:
    """Static icon grid; one cell optionally highlighted (the active item)."""
    frame = _canvas(size, size, (24, 26, 32))
    cell = size // rows
    pad = max(cell // 10, 2)
    for rr in range(rows):
        for cc in range(cols):
            y0, x0 = rr * cell, cc * cell
            bg = (244, 212, 70) if highlight == (rr, cc) else (56, 60, 70)
            _fill(frame, y0 + pad, x0 + pad, y0 + cell - pad, x0 + cell - pad, bg)
            inner = cell - 4 * pad
            mask = _glyph_mask(icons[rr][cc], inner)
            fg = (20, 20, 24) if highlight == (rr, cc) else (225, 228, 235)
            block = frame[y0 + 2 * pad:y0 + 2 * pad + inner, x0 + 2 * pad:x0 + 2 * pad + inner]
            block[mask] = fg
    return frame


# ---------------------------------------------------------------------------
# Pathfinding: first-person corridor raycast
# ---------------------------------------------------------------------------

def raycast_distances(
    walls: np.ndarray, pos: tuple[float, float], angles_deg: np.ndarray
) -> np.ndarray:
    """Distance from `pos` to the first wall along each compass angle.

    Compass convention: 0 deg = north (-y), 90 deg = east (+x). Uses a grid
    DDA walked in lockstep across all rays; cells outside the grid count as
    walls (the generated mazes are wall-bordered anyway).
    """
    theta = np.radians(angles_deg)
    ray_x = np.sin(theta)
    ray_y = -np.cos(theta)
    return _dda(walls, pos, ray_x, ray_y)[0]


def _dda(walls, pos, ray_x, ray_y):
    h, w = walls.shape
    px, py = pos
    n = len(ray_x)
    map_x = np.full(n, int(np.floor(px)), dtype=np.int64)
    map_y = np.full(n, int(np.floor(py)), dtype=np.int64)
    with np.errstate(divide="ignore"):
        delta_x = np.abs(np.divide(1.0, ray_x, where=ray_x != 0))
        delta_y = np.abs(np.divide(1.0, ray_y, where=ray_y != 0))
    delta_x[ray_x == 0] = np.inf
    delta_y[ray_y == 0] = np.inf
    step_x = np.where(ray_x < 0, -1, 1)
    step_y = np.where(ray_y < 0, -1, 1)
    side_x = np.where(ray_x < 0, (px - map_x) * delta_x, (map_x + 1.0 - px) * delta_x)
    side_y = np.where(ray_y < 0, (py - map_y) * delta_y, (map_y + 1.0 - py) * delta_y)

    active = np.ones(n, dtype=bool)
    side_hit = np.zeros(n, dtype=np.int8)  # 0: x-side, 1: y-side
    for _ in range(w + h + 2):
        if not active.any():
            break
        go_x = active & (side_x < side_y)
        go_y = active & ~go_x
        side_x[go_x] += delta_x[go_x]
        map_x[go_x] += step_x[go_x]
        side_hit[go_x] = 0
        side_y[go_y] += delta_y[go_y]
        map_y[go_y] += step_y[go_y]
        side_hit[go_y] = 1
        inside = (map_x >= 0) & (map_x < w) & (map_y >= 0) & (map_y < h)
        hit = np.where(inside, walls[np.clip(map_y, 0, h - 1), np.clip(map_x, 0, w - 1)], True)
        active &= ~hit

    with np.errstate(divide="ignore", invalid="ignore"):
        dist_x = (map_x - px + (1 - step_x) / 2.0) / ray_x
        dist_y = (map_y - py + (1 - step_y) / 2.0) / ray_y
    dist = np.where(side_hit == 0, dist_x, dist_y)
    # Distances are geometric: a position flush against a wall is 0 away
    # (collision callers rely on this; rendering guards its own division).
    return np.maximum(dist, 0.0), side_hit


def render_maze_view(
    walls: np.ndarray,
    pos: tuple[float, float],
    heading_deg: float,
    target: tuple[float, float],
    arrow: Optional[str] = None,
) -> np.ndarray:
    """First-person flat-shaded corridor view with an on-screen guidance arrow.

    The arrow ("forward" | "left" | "right" | "around") is the visual cue
    channel; it is drawn from truthful guidance regardless of what any
    audio intervention does to the transcript.
    """
    h_px, w_px = PATHFINDING_SIZE
    frame = _canvas(h_px, w_px, (196, 200, 208))
    frame[h_px // 2:, :] = (92, 88, 84)  # floor

    theta = np.radians(heading_deg)
    dir_x, dir_y = np.sin(theta), -np.cos(theta)
    plane_scale = np.tan(np.radians(FOV_DEG) / 2.0)
    plane_x, plane_y = np.cos(theta) * plane_scale, np.sin(theta) * plane_scale
    cam = np.linspace(-1.0, 1.0, w_px)
    ray_x = dir_x + plane_x * cam
    ray_y = dir_y + plane_y * cam
    dist, side_hit = _dda(walls, pos, ray_x, ray_y)

    heights = np.minimum(h_px / np.maximum(dist, 0.05), h_px).astype(np.int64)
    tops = (h_px - heights) // 2
    fade = np.clip(1.0 - dist / 14.0, 0.25, 1.0)
    base = np.where(side_hit == 0, 170.0, 130.0) * fade

    # Column tint where the ray passes near the target before hitting a wall.
    tx, ty = target
    ray_len = np.sqrt(ray_x * ray_x + ray_y * ray_y)
    along = ((tx - pos[0]) * ray_x + (ty - pos[1]) * ray_y) / ray_len
    lateral = np.abs((tx - pos[0]) * ray_y - (ty - pos[1]) * ray_x) / ray_len
    sees_target = (along > 0.0) & (lateral < 0.45) & (along < dist * ray_len)

    rows = np.arange(h_px)[:, None]
    in_wall = (rows >= tops[None, :]) & (rows < tops[None, :] + heights[None, :])
    col_rgb = np.stack([base, base, base + 18.0], axis=-1)
    col_rgb[sees_target] = [225.0, 176.0, 48.0]
    wall_img = np.clip(col_rgb, 0, 255).astype(np.uint8)
    frame = np.where(
        in_wall[:, :, None], np.broadcast_to(wall_img[None, :, :], frame.shape), frame
    )

    if arrow is not None:
        _draw_arrow(frame, arrow)
    return frame


def _draw_arrow(frame: np.ndarray, direction: str) -> None:
    h_px, w_px = frame.shape[:2]
    size = 22
    cy, cx = h_px - 34, w_px // 2
    yy, xx = np.mgrid[cy - size:cy + size + 1, cx - size:cx + size + 1]
    u = (xx - cx) / size
    v = (yy - cy) / size
    if direction == "forward":
        mask = np.abs(u) <= (1 - v) * 0.5
    elif direction == "around":
        mask = np.abs(u) <= (1 + v) * 0.5
    elif direction == "left":
        mask = np.abs(v) <= (1 + u) * 0.5
    elif direction == "right":
        mask = np.abs(v) <= (1 - u) * 0.5
    else:
        return
    box = frame[cy - size:cy + size + 1, cx - size:cx + size + 1]
    box[mask] = (52, 200, 70)


# ---------------------------------------------------------------------------
# Melody: clickable colored blocks
# ---------------------------------------------------------------------------

def render_melody_blocks(colors: Sequence[str], progress: int, scale_len: int) -> np.ndarray:
    h_px, w_px = MELODY_SIZE
    frame = _canvas(h_px, w_px, (28, 28, 34))
    block = w_px // len(colors)
    for i, color in enumerate(colors):
        _fill(frame, 8, i * block + 4, h_px - 20, (i + 1) * block - 4, MELODY_COLORS[color])
    # Progress bar along the bottom: filled segments = notes locked in.
    seg = w_px // scale_len
    for i in range(scale_len):
        color = (90, 220, 110) if i < progress else (70, 72, 80)
        _fill(frame, h_px - 14, i * seg + 3, h_px - 6, (i + 1) * seg - 3, color)
    return frame


# ---------------------------------------------------------------------------
# Phantom: top-down tactical map with fog of war
# ---------------------------------------------------------------------------

def render_tactical_map(
    passable: np.ndarray,
    fog: np.ndarray,
    units: Sequence[tuple[str, tuple[int, int]]],
    objectives: Sequence[tuple[tuple[int, int], bool, bool]],
) -> np.ndarray:
    """Tactical map frame.

    units: (kind, (x, y)); objectives: ((x, y), discovered, completed).
    Undiscovered objectives are simply not drawn (fog hides them).
    """
    h, w = passable.shape
    cell = PHANTOM_SIZE // max(h, w)
    size = cell * max(h, w)
    frame = _canvas(size, size, (18, 20, 24))
    terrain = np.where(passable, 150, 52).astype(np.uint8)
    terrain = np.where(fog, terrain, (terrain * 0.38).astype(np.uint8))
    img = np.repeat(np.repeat(terrain, cell, axis=0), cell, axis=1)
    frame[:img.shape[0], :img.shape[1], 0] = img
    frame[:img.shape[0], :img.shape[1], 1] = img
    frame[:img.shape[0], :img.shape[1], 2] = (img * 0.92).astype(np.uint8)

    def cell_rect(x: int, y: int, pad: int) -> tuple[int, int, int, int]:
        return y * cell + pad, x * cell + pad, (y + 1) * cell - pad, (x + 1) * cell - pad

    for (x, y), discovered, completed in objectives:
        if not discovered:
            continue
        color = (80, 210, 110) if completed else (235, 190, 60)
        _fill(frame, *cell_rect(x, y, 1), color)
    for kind, (x, y) in units:
        color = (80, 220, 235) if kind == "scout" else (70, 110, 225)
        _fill(frame, *cell_rect(x, y, 2), color)
    return frame


# ---------------------------------------------------------------------------
# Showdown: top-down arena
# ---------------------------------------------------------------------------

def render_arena(
    cells: np.ndarray,
    players: Sequence[tuple[int, tuple[int, int], bool]],
    bombs: Sequence[tuple[tuple[int, int], int]],
    blasts: Sequence[tuple[int, int]],
    powerups: Sequence[tuple[int, int]],
) -> np.ndarray:
    """Arena frame. cells: 0 empty, 1 destructible, 2 solid. Only alive
    players are drawn."""
    h, w = cells.shape
    cell = SHOWDOWN_CELL
    frame = _canvas(h * cell, w * cell, (150, 150, 150))
    palette = {0: (196, 196, 188), 1: (165, 120, 70), 2: (70, 72, 78)}
    for val, color in palette.items():
        ys, xs = np.where(cells == val)
        for y, x in zip(ys, xs):
            _fill(frame, y * cell + 1, x * cell + 1, (y + 1) * cell - 1, (x + 1) * cell - 1, color)
    for x, y in powerups:
        _fill(frame, y * cell + 5, x * cell + 5, (y + 1) * cell - 5, (x + 1) * cell - 5, (70, 220, 230))
    for (x, y), fuse in bombs:
        shade = 30 + 16 * max(fuse, 0)
        _fill(frame, y * cell + 4, x * cell + 4, (y + 1) * cell - 4, (x + 1) * cell - 4, (shade, 24, 24))
    for x, y in blasts:
        _fill(frame, y * cell + 2, x * cell + 2, (y + 1) * cell - 2, (x + 1) * cell - 2, (245, 140, 30))
    for pid, (x, y), alive in players:
        if not alive:
            continue
        _fill(frame, y * cell + 3, x * cell + 3, (y + 1) * cell - 3, (x + 1) * cell - 3, PLAYER_COLORS[pid])
    return frame
