// Per-game input mapping: keyboard and clicks become action lines. The
// server parses the same grammar it shows the agents; the UI never
// interprets game rules.

import { LegalActions } from "./api.js";

export interface ColorChoice {
  kind: "click_color";
  colors: string[];
}

export interface GridChoice {
  kind: "click_grid" | "transcription";
  rows: number;
  cols: number;
}

/** Arrow keys rotate/advance; holding Shift halves the rotation. */
export function navActionForKey(key: string, shift = false): string | null {
  switch (key) {
    case "ArrowUp":
      return "ACTION: rotate=0 move=1";
    case "ArrowDown":
      return "ACTION: rotate=180 move=0";
    case "ArrowLeft":
      return shift ? "ACTION: rotate=-45 move=0" : "ACTION: rotate=-90 move=0";
    case "ArrowRight":
      return shift ? "ACTION: rotate=45 move=0" : "ACTION: rotate=90 move=0";
    default:
      return null;
  }
}

export function arenaActionForKey(key: string): string | null {
  switch (key) {
    case "ArrowUp":
      return "ACTION: move_north";
    case "ArrowDown":
      return "ACTION: move_south";
    case "ArrowLeft":
      return "ACTION: move_west";
    case "ArrowRight":
      return "ACTION: move_east";
    case " ":
      return "ACTION: place_bomb";
    case ".":
      return "ACTION: wait";
    default:
      return null;
  }
}

export function keyboardAction(game: string, key: string, shift = false): string | null {
  if (game === "pathfinding") return navActionForKey(key, shift);
  if (game === "showdown") return arenaActionForKey(key);
  return null;
}

export function gridClickAction(row: number, col: number): string {
  return `CLICK: (${row},${col})`;
}

export function colorClickAction(color: string): string {
  return `CLICK: ${color}`;
}

export interface UnitCommand {
  unit: string;
  op: "move_to" | "capture" | "scout";
  x?: number;
  y?: number;
}

export function commandSheet(commands: UnitCommand[]): string {
  return commands
    .map((c) =>
      c.op === "move_to"
        ? `COMMAND: unit=${c.unit} move_to=(${c.x},${c.y})`
        : `COMMAND: unit=${c.unit} ${c.op}`,
    )
    .join("\n");
}

/** Sequence transcription for the echoes phase-1 reply. */
export function transcriptionAction(items: Array<{ row: number; col: number; icon: string }>): string {
  const body = items.map((i) => `(${i.row},${i.col})=${i.icon}`).join("; ");
  return `SEQUENCE: ${body}`;
}

export function describeControls(game: string, legal?: LegalActions): string {
  switch (game) {
    case "pathfinding":
      return "Arrow keys: ↑ step forward, ←/→ turn 90° (Shift: 45°), ↓ turn around.";
    case "showdown":
      return "Arrow keys move, Space drops a bomb, '.' waits.";
    case "melody":
      return "Click a colored block to play its note.";
    case "echoes":
      return legal?.kind === "transcription"
        ? "Watch the sequence, then click cells in order to build your transcription and submit."
        : "Click the cells in the remembered order.";
    case "phantom":
      return "Fill in one command per unit, then send the round.";
    default:
      return "";
  }
}
