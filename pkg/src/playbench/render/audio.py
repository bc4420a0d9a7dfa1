"""Tone and cue waveform synthesis plus WAV encoding.

Tones are sine waves at 12-tone equal temperament pitches (A4 = 440 Hz),
rendered 16-bit mono at 22 050 Hz. Cues are short fixed percussive bursts,
one recognizable shape per cue id. Transcript audio has no waveform here:
the transcript text is the canonical payload and is delivered as a labeled
audio-channel attachment (an external speech-synthesis hook may voice it).
"""

from __future__ import annotations

import io
import wave

import numpy as np

from ..types import AudioKind, AudioPayload

SAMPLE_RATE = 22050

_NOTE_OFFSETS = {
    "C": 0, "C#": 1, "Db": 1, "D": 2, "D#": 3, "Eb": 3, "E": 4, "F": 5,
    "F#": 6, "Gb": 6, "G": 7, "G#": 8, "Ab": 8, "A": 9, "A#": 10, "Bb": 10, "B": 11,
}

# Fixed percussive recipes: (base frequency Hz, duration ms, decay rate).
_CUE_RECIPES = {
    "bomb_placed": (180.0, 120, 30.0),
    "explosion": (70.0, 300, 10.0),
    "powerup": (1200.0, 150, 12.0),
    "click_correct": (880.0, 100, 20.0),
    "click_wrong": (110.0, 220, 12.0),
}


class UnknownNoteError(ValueError):
    pass


def note_to_midi(note_id: str) -> int:
    """Parse a scientific-pitch note id like 'A4' or 'C#5' to a MIDI number."""
    name = note_id.strip()
    idx = 1
    if len(name) > 1 and name[1] in "#b":
        idx = 2
    pitch, octave_str = name[:idx], name[idx:]
    if pitch not in _NOTE_OFFSETS or not octave_str.lstrip("-").isdigit():
        raise UnknownNoteError(f"unknown note id: {note_id!r}")
    return (int(octave_str) + 1) * 12 + _NOTE_OFFSETS[pitch]


def note_frequency(note_id: str) -> float:
    """12-TET frequency with A4 = 440 Hz."""
    return 440.0 * 2.0 ** ((note_to_midi(note_id) - 69) / 12.0)


def _sine_tone(freq: float, duration_ms: int, amplitude: float = 0.6) -> np.ndarray:
    n = int(round(SAMPLE_RATE * duration_ms / 1000.0))
    t = np.arange(n, dtype=np.float64) / SAMPLE_RATE
    samples = amplitude * np.sin(2.0 * np.pi * freq * t)
    # 5 ms linear attack/release so concatenated tones do not click.
    edge = min(int(0.005 * SAMPLE_RATE), max(n // 2, 1))
    env = np.ones(n)
    env[:edge] = np.linspace(0.0, 1.0, edge)
    env[n - edge:] = np.linspace(1.0, 0.0, edge)
    return samples * env


def _cue_burst(cue_id: str) -> np.ndarray:
    if cue_id not in _CUE_RECIPES:
        raise UnknownNoteError(f"unknown cue id: {cue_id!r}")
    freq, duration_ms, decay = _CUE_RECIPES[cue_id]
    n = int(round(SAMPLE_RATE * duration_ms / 1000.0))
    t = np.arange(n, dtype=np.float64) / SAMPLE_RATE
    body = np.sin(2.0 * np.pi * freq * t) + 0.35 * np.sin(2.0 * np.pi * 2.7 * freq * t)
    return 0.7 * body * np.exp(-decay * t)


def synthesize_audio(payload: AudioPayload) -> np.ndarray:
    """Render an audio payload to float64 samples in [-1, 1].

    Transcript payloads render to an empty waveform (text is the payload);
    tone/cue payloads place each event at its onset, summing overlaps.
    """
    if payload.kind is AudioKind.TRANSCRIPT:
        return np.zeros(0, dtype=np.float64)

    events: list[tuple[int, np.ndarray]] = []
    if payload.kind is AudioKind.TONES:
        for note_id, onset_ms, duration_ms in payload.tone_events or []:
            events.append((onset_ms, _sine_tone(note_frequency(note_id), duration_ms)))
    else:
        for cue_id, onset_ms in payload.cue_events or []:
            events.append((onset_ms, _cue_burst(cue_id)))

    if not events:
        return np.zeros(0, dtype=np.float64)

    total = max(int(round(SAMPLE_RATE * onset / 1000.0)) + len(chunk) for onset, chunk in events)
    out = np.zeros(total, dtype=np.float64)
    for onset_ms, chunk in events:
        start = int(round(SAMPLE_RATE * onset_ms / 1000.0))
        out[start:start + len(chunk)] += chunk
    peak = np.max(np.abs(out))
    if peak > 1.0:
        out /= peak
    return out


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    return np.clip(np.round(samples * 32767.0), -32768, 32767).astype(np.int16)


def encode_wav(samples: np.ndarray) -> bytes:
    """PCM 16-bit mono WAV bytes at the platform sample rate."""
    pcm = to_pcm16(samples)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(SAMPLE_RATE)
        wav.writeframes(pcm.tobytes())
    return buf.getvalue()


def write_wav(path: str, samples: np.ndarray) -> None:
    data = encode_wav(samples)
    with open(path, "wb") as f:
        f.write(data)


def dominant_frequency(samples: np.ndarray) -> float:
    """Frequency of the strongest spectral peak (test oracle helper)."""
    if len(samples) == 0:
        return 0.0
    spectrum = np.abs(np.fft.rfft(samples))
    freqs = np.fft.rfftfreq(len(samples), d=1.0 / SAMPLE_RATE)
    return float(freqs[int(np.argmax(spectrum))])
