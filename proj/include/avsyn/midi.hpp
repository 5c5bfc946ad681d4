// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "avsyn/melody.hpp"

namespace avsyn {

inline constexpr int kTicksPerQuarter = 480;
inline constexpr int kTicksPerStep = kTicksPerQuarter / 4;  // 120, one 16th
inline constexpr int kTempoMicrosPerQuarter = 500000;       // 120 BPM
inline constexpr int kNoteVelocity = 80;

struct MidiData {
  int ticks_per_quarter = kTicksPerQuarter;
  long duration_ticks = 0;  // latest end-of-track position across tracks
  std::vector<NoteEvent> events;  // sorted by onset tick
};

// Parse a Standard MIDI File, format 0 or 1. Tracks are merged on the tick
// grid; tempo events are consumed but melodies stay tick-based. Note-offs
// without a matching note-on are ignored; note-ons left open are closed at
// the end of their track.
MidiData parse_midi(std::span<const std::uint8_t> bytes);

// Write a format-0 SMF at 480 ticks per quarter, tempo 120 BPM, program 0,
// velocity 80. NOTE + following HOLDs become one note of proportional
// duration; the end-of-track lands on the grid's final tick.
std::vector<std::uint8_t> write_midi(const TokenGrid& grid);

// Same writer over a raw step sequence (used for concatenated segments).
// tempo_bpm only changes the embedded tempo meta event.
std::vector<std::uint8_t> write_midi_steps(std::span<const Token> steps, int tempo_bpm = 120);

}  // namespace avsyn
