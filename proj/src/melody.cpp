// SPDX-License-Identifier: Apache-2.0
#include "avsyn/melody.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace avsyn {

bool is_valid_grid(const TokenGrid& grid) {
  if (grid.bars < 1) return false;
  if (static_cast<int>(grid.steps.size()) != grid.step_count()) return false;
  for (std::size_t i = 0; i < grid.steps.size(); ++i) {
    if (grid.steps[i].is_hold()) {
      if (i == 0) return false;
      if (grid.steps[i - 1].is_rest()) return false;
    }
  }
  return true;
}

TokenGrid normalize_tokens(int bars, std::vector<Token> steps) {
  if (bars < 1) throw DomainError("normalize_tokens: bars must be >= 1");
  steps.resize(static_cast<std::size_t>(bars) * kStepsPerBar, Token::rest());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].is_hold() && (i == 0 || steps[i - 1].is_rest())) steps[i] = Token::rest();
  }
  return TokenGrid{bars, std::move(steps)};
}

namespace {

int fold_into_range(int pitch) {
  while (pitch < kPitchMin) pitch += 12;
  while (pitch > kPitchMax) pitch -= 12;
  return pitch;
}

}  // namespace

TokenGrid quantize_window(std::span<const NoteEvent> events, int ticks_per_quarter,
                          long step_offset, int bars) {
  if (ticks_per_quarter < 24) throw DomainError("quantize: ticks per quarter must be >= 24");
  if (bars < 1) throw DomainError("quantize: bars must be >= 1");
  const int n_steps = bars * kStepsPerBar;
  const std::int64_t tpq = ticks_per_quarter;

  // Work in quarter-tick units so step instants stay exact: step g starts at
  // g*tpq/4, i.e. at g*tpq quarter-ticks; a note occupies [4*onset, 4*end).
  const std::int64_t window_begin = step_offset * tpq;
  const std::int64_t window_end = (step_offset + n_steps) * tpq;
  std::vector<const NoteEvent*> local;
  for (const auto& e : events) {
    const std::int64_t lo = 4 * e.onset_tick;
    const std::int64_t hi = 4 * (e.onset_tick + std::max<long>(e.duration_ticks, 1));
    if (hi > window_begin && lo < window_end) local.push_back(&e);
  }

  std::vector<Token> steps(n_steps, Token::rest());
  const NoteEvent* previous = nullptr;
  for (int s = 0; s < n_steps; ++s) {
    const std::int64_t instant = (step_offset + s) * tpq;
    const NoteEvent* best = nullptr;
    for (const NoteEvent* e : local) {
      const std::int64_t lo = 4 * e->onset_tick;
      const std::int64_t hi = 4 * (e->onset_tick + std::max<long>(e->duration_ticks, 1));
      if (lo <= instant && instant < hi) {
        if (!best || e->pitch > best->pitch ||
            (e->pitch == best->pitch && e->onset_tick > best->onset_tick))
          best = e;
      }
    }
    if (!best) {
      steps[s] = Token::rest();
      previous = nullptr;
    } else if (best == previous) {
      steps[s] = Token::hold();
    } else {
      steps[s] = Token::note(fold_into_range(best->pitch));
      previous = best;
    }
  }
  return TokenGrid{bars, std::move(steps)};
}

TokenGrid quantize(std::span<const NoteEvent> events, int ticks_per_quarter, int bars) {
  return quantize_window(events, ticks_per_quarter, 0, bars);
}

std::vector<TokenGrid> segment_midi(std::span<const NoteEvent> events, int ticks_per_quarter,
                                    int bars) {
  if (events.empty()) throw DomainError("segment_midi: no events");
  if (ticks_per_quarter < 24) throw DomainError("segment_midi: ticks per quarter must be >= 24");
  const std::int64_t tpq = ticks_per_quarter;
  std::int64_t last_end = 0;
  for (const auto& e : events)
    last_end = std::max<std::int64_t>(last_end, e.onset_tick + std::max<long>(e.duration_ticks, 1));

  // Number of 16th steps needed to contain the stream, then whole windows.
  const std::int64_t total_steps = (4 * last_end + tpq - 1) / tpq;
  const int window_steps = bars * kStepsPerBar;
  const std::int64_t windows = total_steps / window_steps;

  std::vector<TokenGrid> result;
  result.reserve(static_cast<std::size_t>(windows));
  for (std::int64_t w = 0; w < windows; ++w)
    result.push_back(quantize_window(events, ticks_per_quarter, w * window_steps, bars));
  return result;
}

namespace {

// Interval distribution for the random walk: {-7..7} weighted exp(-|d|/2).
int draw_interval(Rng& rng) {
  static const std::array<double, 15> weights = [] {
    std::array<double, 15> w{};
    for (int d = -7; d <= 7; ++d) w[d + 7] = std::exp(-std::abs(d) / 2.0);
    return w;
  }();
  static const double total = [] {
    double t = 0;
    for (double w : weights) t += w;
    return t;
  }();
  double u = rng.uniform() * total;
  for (int i = 0; i < 15; ++i) {
    u -= weights[i];
    if (u < 0) return i - 7;
  }
  return 7;
}

int draw_duration(Rng& rng) {
  // {1,2,4,8} sixteenths with weights {4,3,2,1}
  const std::uint64_t r = rng.uniform_int(10);
  if (r < 4) return 1;
  if (r < 7) return 2;
  if (r < 9) return 4;
  return 8;
}

int reflect_into_range(int pitch) {
  while (pitch < kPitchMin || pitch > kPitchMax) {
    if (pitch < kPitchMin) pitch = 2 * kPitchMin - pitch;
    if (pitch > kPitchMax) pitch = 2 * kPitchMax - pitch;
  }
  return pitch;
}

}  // namespace

std::vector<TokenGrid> procedural_generate(std::uint64_t seed, int bars, int count) {
  if (count < 1) throw DomainError("procedural_generate: count must be >= 1");
  if (bars < 1) throw DomainError("procedural_generate: bars must be >= 1");
  Rng rng = Rng(seed).split("procedural-melodies");
  const int n_steps = bars * kStepsPerBar;

  std::vector<TokenGrid> melodies;
  melodies.reserve(count);
  for (int m = 0; m < count; ++m) {
    std::vector<Token> steps;
    steps.reserve(n_steps);
    int pitch = 48 + static_cast<int>(rng.uniform_int(24));  // uniform in [48, 71]
    bool walk_started = false;
    while (static_cast<int>(steps.size()) < n_steps) {
      const bool rest_slot = rng.uniform() < 0.1;
      const int duration = draw_duration(rng);
      const int emit = std::min<int>(duration, n_steps - static_cast<int>(steps.size()));
      if (rest_slot) {
        for (int i = 0; i < emit; ++i) steps.push_back(Token::rest());
      } else {
        if (walk_started) pitch = reflect_into_range(pitch + draw_interval(rng));
        walk_started = true;
        steps.push_back(Token::note(pitch));
        for (int i = 1; i < emit; ++i) steps.push_back(Token::hold());
      }
    }
    melodies.push_back(TokenGrid{bars, std::move(steps)});
  }
  return melodies;
}

}  // namespace avsyn
