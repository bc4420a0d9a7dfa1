// Audio playback: synthesized waveforms by URL, transcripts via the
// browser's speech synthesis when available. Transcript text is always
// shown alongside; sound is an addition, never the only carrier.

let unlocked = false;

/** Browsers gate autoplay behind a user gesture; the start-episode click
 * calls this. */
export function unlockAudio(): void {
  unlocked = true;
}

export function audioUnlocked(): boolean {
  return unlocked;
}

export function playWav(url: string): void {
  if (!unlocked || typeof Audio === "undefined") return;
  try {
    const element = new Audio(url);
    void element.play().catch(() => undefined);
  } catch {
    // Playback is best-effort; the UI stays usable without sound.
  }
}

export function speak(text: string): void {
  if (!unlocked) return;
  const synth = (globalThis as { speechSynthesis?: SpeechSynthesis }).speechSynthesis;
  if (!synth || typeof SpeechSynthesisUtterance === "undefined") return;
  try {
    synth.cancel();
    synth.speak(new SpeechSynthesisUtterance(text));
  } catch {
    // Speech synthesis is an optional extension.
  }
}
