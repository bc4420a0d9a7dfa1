// DOM rendering. Every value shown here comes from a service response;
// nothing is computed client-side beyond presentation.

import { GamesListing, LegalActions, Observation, Progress, SessionApi } from "./api.js";
import { playWav, speak } from "./audio.js";
import {
  colorClickAction,
  commandSheet,
  describeControls,
  gridClickAction,
  transcriptionAction,
  UnitCommand,
} from "./input.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderDashboard(
  container: HTMLElement,
  listing: GamesListing,
  progress: Progress,
  onStart: (game: string, difficulty: string, mode: "warmup" | "recorded") => void,
): void {
  container.textContent = "";
  const table = el("table", "dashboard");
  const head = el("tr");
  for (const title of ["game", "warm-ups", "recorded", "", ""]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);

  for (const [game, difficulties] of Object.entries(listing.games)) {
    const row = el("tr");
    row.appendChild(el("td", "game-name", game));
    const stats = progress.games[game];
    const warmups = el("td");
    warmups.textContent = `${stats.warmup_count}/${stats.warmup_required}`;
    row.appendChild(warmups);
    const recorded = el("td");
    recorded.textContent = `${stats.recorded_count}/${stats.recorded_target}`;
    row.appendChild(recorded);

    const pick = el("td");
    const select = el("select") as HTMLSelectElement;
    select.dataset.game = game;
    for (const difficulty of difficulties) {
      const option = el("option", undefined, difficulty) as HTMLOptionElement;
      option.value = difficulty;
      select.appendChild(option);
    }
    pick.appendChild(select);
    row.appendChild(pick);

    const actions = el("td");
    const warmupBtn = el("button", "warmup-btn", "warm-up") as HTMLButtonElement;
    warmupBtn.addEventListener("click", () => onStart(game, select.value, "warmup"));
    actions.appendChild(warmupBtn);
    const recordedBtn = el("button", "recorded-btn", "recorded") as HTMLButtonElement;
    recordedBtn.disabled = !stats.recorded_unlocked;
    recordedBtn.title = stats.recorded_unlocked
      ? "collect a recorded episode"
      : `locked until ${stats.warmup_required} warm-ups`;
    recordedBtn.addEventListener("click", () => onStart(game, select.value, "recorded"));
    actions.appendChild(recordedBtn);
    row.appendChild(actions);
    table.appendChild(row);
  }
  container.appendChild(table);
}

export interface ObservationView {
  cleanup: () => void;
}

export function renderObservation(
  container: HTMLElement,
  obs: Observation,
  api: SessionApi,
  withSound: boolean,
): ObservationView {
  container.textContent = "";
  let timer: ReturnType<typeof setInterval> | null = null;

  const media = el("div", "media");
  if (obs.frame_url) {
    const img = el("img", "frame") as HTMLImageElement;
    img.src = api.absolute(obs.frame_url);
    img.alt = "game view";
    media.appendChild(img);
  }
  if (obs.video && obs.video.frame_urls.length > 0) {
    const img = el("img", "frame video") as HTMLImageElement;
    img.alt = "game video";
    const urls = obs.video.frame_urls.map((u) => api.absolute(u));
    let index = 0;
    img.src = urls[0];
    if (urls.length > 1) {
      const periodMs = Math.max(1000 / obs.video.fps, 120);
      timer = setInterval(() => {
        index = (index + 1) % urls.length;
        img.src = urls[index];
      }, periodMs);
    }
    media.appendChild(img);
  }
  container.appendChild(media);

  if (obs.transcript) {
    const transcriptBox = el("div", "transcript");
    transcriptBox.appendChild(el("strong", undefined, "audio transcript: "));
    transcriptBox.appendChild(el("span", "transcript-text", obs.transcript));
    container.appendChild(transcriptBox);
    if (withSound) speak(obs.transcript);
  }
  if (obs.audio_url && withSound) {
    playWav(api.absolute(obs.audio_url));
  }

  if (obs.prompt) {
    const promptBox = el("details", "prompt");
    promptBox.appendChild(el("summary", undefined, `turn prompt (step ${obs.step})`));
    promptBox.appendChild(el("pre", "prompt-text", obs.prompt));
    container.appendChild(promptBox);
  }

  return {
    cleanup: () => {
      if (timer !== null) clearInterval(timer);
    },
  };
}

export function renderControls(
  container: HTMLElement,
  game: string,
  legal: LegalActions | undefined,
  submit: (rawText: string) => void,
): void {
  container.textContent = "";
  container.appendChild(el("p", "controls-hint", describeControls(game, legal)));

  if (!legal) return;

  if (legal.kind === "click_color") {
    const palette = el("div", "palette");
    for (const color of legal.colors as string[]) {
      const button = el("button", `color-btn color-${color}`) as HTMLButtonElement;
      button.dataset.color = color;
      button.title = color;
      button.addEventListener("click", () => submit(colorClickAction(color)));
      palette.appendChild(button);
    }
    container.appendChild(palette);
    return;
  }

  if (legal.kind === "click_grid" || legal.kind === "transcription") {
    const rows = legal.rows as number;
    const cols = legal.cols as number;
    const picked: Array<{ row: number; col: number; icon: string }> = [];
    const grid = el("div", "click-grid");
    grid.style.gridTemplateColumns = `repeat(${cols}, 2.2rem)`;
    for (let r = 0; r < rows; r += 1) {
      for (let c = 0; c < cols; c += 1) {
        const cell = el("button", "grid-cell", `${r},${c}`) as HTMLButtonElement;
        cell.dataset.row = String(r);
        cell.dataset.col = String(c);
        cell.addEventListener("click", () => {
          if (legal.kind === "click_grid") {
            submit(gridClickAction(r, c));
          } else {
            picked.push({ row: r, col: c, icon: "unknown" });
            tally.textContent = `${picked.length} cells picked`;
          }
        });
        grid.appendChild(cell);
      }
    }
    container.appendChild(grid);
    const tally = el("p", "picked-tally", "");
    if (legal.kind === "transcription") {
      container.appendChild(tally);
      const send = el("button", "send-btn", "submit transcription") as HTMLButtonElement;
      send.addEventListener("click", () => submit(transcriptionAction(picked)));
      container.appendChild(send);
      const clear = el("button", "clear-btn", "clear") as HTMLButtonElement;
      clear.addEventListener("click", () => {
        picked.length = 0;
        tally.textContent = "";
      });
      container.appendChild(clear);
    }
    return;
  }

  if (legal.kind === "command_sheet") {
    const units = legal.units as string[];
    const gridSize = legal.grid as number;
    const rows: Array<() => UnitCommand> = [];
    const form = el("div", "command-form");
    for (const unit of units) {
      const line = el("div", "command-line");
      line.appendChild(el("span", "unit-name", unit));
      const op = el("select") as HTMLSelectElement;
      for (const name of ["move_to", "capture", "scout"]) {
        const option = el("option", undefined, name) as HTMLOptionElement;
        option.value = name;
        op.appendChild(option);
      }
      const x = el("input") as HTMLInputElement;
      x.type = "number";
      x.min = "0";
      x.max = String(gridSize - 1);
      x.value = "0";
      const y = x.cloneNode() as HTMLInputElement;
      y.value = "0";
      line.appendChild(op);
      line.appendChild(x);
      line.appendChild(y);
      form.appendChild(line);
      rows.push(() => ({
        unit,
        op: op.value as UnitCommand["op"],
        x: Number(x.value),
        y: Number(y.value),
      }));
    }
    container.appendChild(form);
    const send = el("button", "send-btn", "send round") as HTMLButtonElement;
    send.addEventListener("click", () => submit(commandSheet(rows.map((r) => r()))));
    container.appendChild(send);
    return;
  }

  // Keyboard-driven games (continuous nav, arena choice) plus a free-form
  // fallback for anything else.
  const free = el("input", "free-action") as HTMLInputElement;
  free.placeholder = legal.form;
  free.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && free.value.trim()) {
      submit(free.value.trim());
      free.value = "";
    }
  });
  container.appendChild(free);
}

export function renderOutcome(container: HTMLElement, outcome: string | null, mode: string): void {
  container.textContent = "";
  const banner = el("div", `outcome outcome-${outcome ?? "unknown"}`);
  banner.appendChild(el("strong", undefined, `episode over: ${outcome ?? "?"}`));
  banner.appendChild(el("span", "mode-note", mode === "recorded" ? " (recorded)" : " (warm-up)"));
  container.appendChild(banner);
}

export function renderModeBadge(container: HTMLElement, mode: string, game: string, difficulty: string): void {
  container.textContent = "";
  const badge = el("span", `mode-badge mode-${mode}`, mode === "recorded" ? "REC" : "warm-up");
  container.appendChild(badge);
  container.appendChild(el("span", "session-label", ` ${game} / ${difficulty}`));
}
