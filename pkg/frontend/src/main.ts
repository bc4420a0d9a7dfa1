// Page wiring: dashboard, session lifecycle, keyboard routing.

import { SessionApi } from "./api.js";
import { unlockAudio } from "./audio.js";
import { keyboardAction } from "./input.js";
import { EpisodeFlow } from "./session.js";
import {
  el,
  renderControls,
  renderDashboard,
  renderModeBadge,
  renderObservation,
  renderOutcome,
} from "./views.js";

const api = new SessionApi("");

function mount(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";

  const header = el("header");
  header.appendChild(el("h1", undefined, "playbench — human sessions"));
  const participantInput = el("input", "participant") as HTMLInputElement;
  participantInput.placeholder = "participant id";
  const loadBtn = el("button", undefined, "load") as HTMLButtonElement;
  header.appendChild(participantInput);
  header.appendChild(loadBtn);
  root.appendChild(header);

  const dashboard = el("section", "dashboard-area");
  const badge = el("div", "badge-area");
  const status = el("p", "status-line");
  const observationArea = el("section", "observation-area");
  const controlsArea = el("section", "controls-area");
  root.appendChild(dashboard);
  root.appendChild(badge);
  root.appendChild(status);
  root.appendChild(observationArea);
  root.appendChild(controlsArea);

  let activeView: { cleanup: () => void } | null = null;
  let activeGame: string | null = null;
  const flow = new EpisodeFlow(api, {
    onStateChange: (state) => {
      status.textContent = `state: ${state}`;
    },
    onResult: (result) => {
      status.textContent = `${result.valid ? "ok" : "invalid"}: ${result.note}`;
    },
    onError: (message) => {
      status.textContent = `error: ${message}`;
    },
  });

  async function refreshDashboard(): Promise<void> {
    const participant = participantInput.value.trim();
    if (!participant) return;
    const [listing, progress] = await Promise.all([api.games(), api.progress(participant)]);
    renderDashboard(dashboard, listing, progress, (game, difficulty, mode) => {
      void startEpisode(game, difficulty, mode);
    });
  }

  async function paint(): Promise<void> {
    activeView?.cleanup();
    const obs = flow.observation;
    if (!obs || !flow.session) return;
    if (obs.done || flow.state === "finished") {
      renderOutcome(observationArea, flow.outcome, flow.session.mode);
      controlsArea.textContent = "";
      await flow.close();
      await refreshDashboard();
      return;
    }
    activeView = renderObservation(observationArea, obs, api, true);
    renderControls(controlsArea, flow.session.game, obs.legal_actions, (raw) => {
      void flow.submit(raw).then(paint, () => paint());
    });
  }

  async function startEpisode(
    game: string,
    difficulty: string,
    mode: "warmup" | "recorded",
  ): Promise<void> {
    unlockAudio(); // explicit user gesture: autoplay is now allowed
    const participant = participantInput.value.trim();
    if (!participant) {
      status.textContent = "enter a participant id first";
      return;
    }
    try {
      await flow.start({ game, difficulty, participant_id: participant, mode });
    } catch {
      return; // onError already surfaced the message (e.g. warm-up gate)
    }
    activeGame = game;
    renderModeBadge(badge, mode, game, difficulty);
    await paint();
  }

  document.addEventListener("keydown", (event) => {
    if (flow.state !== "awaiting_input" || !activeGame) return;
    const action = keyboardAction(activeGame, event.key, event.shiftKey);
    if (action) {
      event.preventDefault();
      void flow.submit(action).then(paint, () => paint());
    }
  });

  loadBtn.addEventListener("click", () => void refreshDashboard());
  participantInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void refreshDashboard();
  });
}

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", mount);
  } else {
    mount();
  }
}

export { mount };
