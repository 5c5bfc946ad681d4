// SPDX-License-Identifier: Apache-2.0
#include "avsyn/midi.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace avsyn {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t stack[5];
  int n = 0;
  stack[n++] = static_cast<std::uint8_t>(v & 0x7f);
  v >>= 7;
  while (v) {
    stack[n++] = static_cast<std::uint8_t>(0x80 | (v & 0x7f));
    v >>= 7;
  }
  while (n) out.push_back(stack[--n]);
}

struct Cursor {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;

  bool eof() const { return pos >= data.size(); }
  std::size_t remaining() const { return data.size() - pos; }

  std::uint8_t u8() {
    if (eof()) throw ParseError("unexpected end of MIDI data", pos);
    return data[pos++];
  }
  std::uint16_t u16() {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7f);
      if (!(b & 0x80)) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", pos);
  }
  void skip(std::size_t n) {
    if (remaining() < n) throw ParseError("chunk runs past end of data", pos);
    pos += n;
  }
  bool match(const char* tag) {
    if (remaining() < 4) return false;
    for (int i = 0; i < 4; ++i)
      if (data[pos + i] != static_cast<std::uint8_t>(tag[i])) return false;
    pos += 4;
    return true;
  }
};

// Note-ons waiting for their note-off, keyed by (channel, pitch). LIFO per
// key so overlapping retriggers close in reverse order.
using OpenNotes = std::map<int, std::vector<std::pair<long, int>>>;

void close_note(OpenNotes& open, std::vector<NoteEvent>& events, int key, long tick) {
  auto it = open.find(key);
  if (it == open.end() || it->second.empty()) return;  // orphan note-off: tolerated
  const auto [onset, velocity] = it->second.back();
  it->second.pop_back();
  events.push_back(NoteEvent{onset, std::max<long>(tick - onset, 1), key & 0xff, velocity});
}

// Returns the track's final tick (the end-of-track position).
long parse_track(Cursor& c, std::uint32_t length, std::vector<NoteEvent>& events) {
  const std::size_t track_end = c.pos + length;
  if (track_end > c.data.size()) throw ParseError("track chunk runs past end of data", c.pos);

  OpenNotes open;
  long tick = 0;
  int running_status = -1;
  bool done = false;
  while (!done && c.pos < track_end) {
    tick += c.vlq();
    if (c.eof()) throw ParseError("event truncated at end of data", c.pos);
    std::uint8_t status = c.data[c.pos];
    if (status < 0x80) {
      if (running_status < 0) throw ParseError("data byte with no running status", c.pos);
      status = static_cast<std::uint8_t>(running_status);
    } else {
      ++c.pos;
    }

    if (status == 0xff) {
      running_status = -1;
      const std::uint8_t type = c.u8();
      const std::uint32_t len = c.vlq();
      c.skip(len);  // tempo and friends are read but melodies stay on ticks
      if (type == 0x2f) done = true;
    } else if (status == 0xf0 || status == 0xf7) {
      running_status = -1;
      c.skip(c.vlq());
    } else {
      const int kind = status >> 4;
      const int channel = status & 0x0f;
      running_status = status;
      switch (kind) {
        case 0x9: {  // note on (velocity 0 means off)
          const int pitch = c.u8() & 0x7f;
          const int velocity = c.u8() & 0x7f;
          const int key = (channel << 8) | pitch;
          if (velocity > 0)
            open[key].emplace_back(tick, velocity);
          else
            close_note(open, events, key, tick);
          break;
        }
        case 0x8: {  // note off
          const int pitch = c.u8() & 0x7f;
          c.u8();  // release velocity
          close_note(open, events, (channel << 8) | pitch, tick);
          break;
        }
        case 0xa:
        case 0xb:
        case 0xe:
          c.skip(2);
          break;
        case 0xc:
        case 0xd:
          c.skip(1);
          break;
        default:
          throw ParseError("unexpected status byte " + std::to_string(status), c.pos - 1);
      }
    }
    if (c.pos > track_end) throw ParseError("event runs past declared track length", c.pos);
  }
  // Anything still sounding closes at the end of the track.
  for (auto& [key, list] : open)
    while (!list.empty()) close_note(open, events, key, tick);
  c.pos = track_end;
  return tick;
}

}  // namespace

MidiData parse_midi(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  if (!c.match("MThd")) throw ParseError("not a Standard MIDI File (missing MThd)", 0);
  const std::uint32_t header_len = c.u32();
  if (header_len < 6) throw ParseError("MThd chunk too short", c.pos);
  const std::uint16_t format = c.u16();
  const std::uint16_t declared_tracks = c.u16();
  const std::uint16_t division = c.u16();
  c.skip(header_len - 6);
  if (format > 1) throw ParseError("unsupported MIDI format " + std::to_string(format), 8);
  if (division & 0x8000) throw ParseError("SMPTE time division is not supported", 12);
  if (division == 0) throw ParseError("zero ticks per quarter", 12);

  MidiData midi;
  midi.ticks_per_quarter = division;
  std::uint16_t tracks_seen = 0;
  while (!c.eof() && tracks_seen < declared_tracks) {
    if (c.match("MTrk")) {
      midi.duration_ticks = std::max(midi.duration_ticks, parse_track(c, c.u32(), midi.events));
      ++tracks_seen;
    } else {
      if (c.remaining() < 8) throw ParseError("trailing bytes are not a chunk", c.pos);
      c.skip(4);
      c.skip(c.u32());  // unknown chunk types are skipped
    }
  }
  if (tracks_seen < declared_tracks)
    throw ParseError("file ends before all declared tracks", c.pos);

  std::stable_sort(midi.events.begin(), midi.events.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset_tick != b.onset_tick) return a.onset_tick < b.onset_tick;
    if (a.pitch != b.pitch) return a.pitch < b.pitch;
    return a.duration_ticks < b.duration_ticks;
  });
  return midi;
}

namespace {

std::vector<std::uint8_t> write_midi_impl(std::span<const Token> steps, int tempo_bpm) {
  if (tempo_bpm <= 0) throw DomainError("write_midi: tempo must be positive");
  const int micros_per_quarter = 60000000 / tempo_bpm;
  std::vector<std::uint8_t> track;
  // Tempo meta event, then program change to piano on channel 0.
  put_vlq(track, 0);
  track.insert(track.end(), {0xff, 0x51, 0x03});
  track.push_back((micros_per_quarter >> 16) & 0xff);
  track.push_back((micros_per_quarter >> 8) & 0xff);
  track.push_back(micros_per_quarter & 0xff);
  put_vlq(track, 0);
  track.insert(track.end(), {0xc0, 0x00});

  long cursor = 0;
  std::size_t i = 0;
  while (i < steps.size()) {
    if (!steps[i].is_note()) {
      ++i;
      continue;
    }
    const int pitch = steps[i].pitch();
    std::size_t j = i + 1;
    while (j < steps.size() && steps[j].is_hold()) ++j;
    const long on_tick = static_cast<long>(i) * kTicksPerStep;
    const long off_tick = static_cast<long>(j) * kTicksPerStep;
    put_vlq(track, static_cast<std::uint32_t>(on_tick - cursor));
    track.insert(track.end(),
                 {0x90, static_cast<std::uint8_t>(pitch), static_cast<std::uint8_t>(kNoteVelocity)});
    put_vlq(track, static_cast<std::uint32_t>(off_tick - on_tick));
    track.insert(track.end(), {0x80, static_cast<std::uint8_t>(pitch), 0x40});
    cursor = off_tick;
    i = j;
  }
  // End of track on the grid's final tick so file duration equals the grid.
  const long total = static_cast<long>(steps.size()) * kTicksPerStep;
  put_vlq(track, static_cast<std::uint32_t>(total - cursor));
  track.insert(track.end(), {0xff, 0x2f, 0x00});

  std::vector<std::uint8_t> out;
  out.reserve(14 + 8 + track.size());
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  put_u32(out, 6);
  put_u16(out, 0);  // format 0
  put_u16(out, 1);  // one track
  put_u16(out, kTicksPerQuarter);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> write_midi(const TokenGrid& grid) {
  if (!is_valid_grid(grid)) throw DomainError("write_midi: invalid token grid");
  return write_midi_impl(grid.steps, 120);
}

std::vector<std::uint8_t> write_midi_steps(std::span<const Token> steps, int tempo_bpm) {
  return write_midi_impl(steps, tempo_bpm);
}

}  // namespace avsyn
