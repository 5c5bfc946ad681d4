// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avsyn/error.hpp"
#include "avsyn/rng.hpp"

namespace avsyn {

inline constexpr int kStepsPerBar = 16;  // 16th-note grid, 4/4
inline constexpr int kPitchMin = 36;     // C2 under the C4=60 convention
inline constexpr int kPitchMax = 83;     // B5
inline constexpr int kPitchCount = kPitchMax - kPitchMin + 1;  // 48
inline constexpr int kAlphabetSize = kPitchCount + 2;          // REST, HOLD, 48 pitches

// A single grid step: REST, HOLD (continuation of the previous note), or the
// onset of a note with a pitch in [36, 83]. Stored as the one-hot index:
// 0 = REST, 1 = HOLD, 2 + (pitch - 36) = NOTE.
class Token {
 public:
  Token() : code_(0) {}

  static Token rest() { return Token(0); }
  static Token hold() { return Token(1); }
  static Token note(int pitch) {
    if (pitch < kPitchMin || pitch > kPitchMax)
      throw DomainError("note pitch " + std::to_string(pitch) + " outside [36, 83]");
    return Token(static_cast<std::int8_t>(2 + pitch - kPitchMin));
  }
  static Token from_index(int index) {
    if (index < 0 || index >= kAlphabetSize)
      throw DomainError("token index " + std::to_string(index) + " outside alphabet");
    return Token(static_cast<std::int8_t>(index));
  }

  bool is_rest() const { return code_ == 0; }
  bool is_hold() const { return code_ == 1; }
  bool is_note() const { return code_ >= 2; }
  int pitch() const {
    if (!is_note()) throw DomainError("pitch() on a non-note token");
    return kPitchMin + code_ - 2;
  }
  int index() const { return code_; }

  bool operator==(const Token&) const = default;

 private:
  explicit Token(std::int8_t code) : code_(code) {}
  std::int8_t code_;
};

// A fixed-length monophonic melody on the 16th grid. Model-facing grids use
// bars in {2, 16}; the type itself allows any positive bar count so that
// concatenated sequences (e.g. interpolation tracks) reuse the same code.
struct TokenGrid {
  int bars = 2;
  std::vector<Token> steps;

  int step_count() const { return bars * kStepsPerBar; }
  bool operator==(const TokenGrid&) const = default;
};

// True iff steps has length 16*bars, HOLD never opens the grid or follows
// REST, and every note pitch is in range (guaranteed by Token already).
bool is_valid_grid(const TokenGrid& grid);

// Rewrites invariant-breaking HOLDs (leading, or directly after REST) to REST.
TokenGrid normalize_tokens(int bars, std::vector<Token> steps);

// A parsed note: onset and duration on the source file's tick grid.
struct NoteEvent {
  long onset_tick = 0;
  long duration_ticks = 1;
  int pitch = 60;
  int velocity = 80;
};

// Quantize events onto the 16th grid starting at `step_offset` 16th steps
// from tick 0. A step is covered by a note if the note sounds at the step's
// start instant; the highest sounding pitch wins, octave-folded into range.
TokenGrid quantize_window(std::span<const NoteEvent> events, int ticks_per_quarter,
                          long step_offset, int bars);

TokenGrid quantize(std::span<const NoteEvent> events, int ticks_per_quarter, int bars);

// Consecutive non-overlapping windows of 16*bars steps from time 0, each
// quantized independently. The trailing partial window is dropped.
std::vector<TokenGrid> segment_midi(std::span<const NoteEvent> events, int ticks_per_quarter,
                                    int bars);

// Procedural random-walk melodies standing in for a pretrained generator:
// start pitch uniform in [48, 71]; semitone intervals in {-7..7} weighted by
// exp(-|d|/2); durations {1,2,4,8} sixteenths weighted {4,3,2,1}; each slot is
// a rest with probability 0.1; pitches reflected back into [36, 83].
std::vector<TokenGrid> procedural_generate(std::uint64_t seed, int bars, int count);

}  // namespace avsyn
