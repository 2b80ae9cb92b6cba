#pragma once

#include "podkit/midi.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace podkit {

struct RowLabel {
    std::string instrument;
    int pitch = 0;

    auto operator<=>(const RowLabel&) const = default;
};

/// Pitch x time intensity matrix, column-major (a frame is contiguous).
/// Cell values are MIDI velocities, 0 meaning note off.
struct PianoRoll {
    std::vector<RowLabel> labels;     // one per row, unique, sorted
    int frames_per_quarter = 8;
    std::size_t frames = 0;
    std::vector<std::uint8_t> cells;  // labels.size() * frames, cells[t*D + r]

    std::size_t rows() const { return labels.size(); }
    std::uint8_t at(std::size_t row, std::size_t frame) const {
        return cells[frame * labels.size() + row];
    }
    std::uint8_t& at(std::size_t row, std::size_t frame) {
        return cells[frame * labels.size() + row];
    }
    std::span<const std::uint8_t> frame(std::size_t t) const {
        return {cells.data() + t * labels.size(), labels.size()};
    }

    bool operator==(const PianoRoll&) const = default;
};

/// Same layout with {0,1} cells.
struct BinaryRoll {
    std::vector<RowLabel> labels;
    int frames_per_quarter = 8;
    std::size_t frames = 0;
    std::vector<std::uint8_t> cells;

    std::size_t rows() const { return labels.size(); }
    std::uint8_t at(std::size_t row, std::size_t frame) const {
        return cells[frame * labels.size() + row];
    }
    std::uint8_t& at(std::size_t row, std::size_t frame) {
        return cells[frame * labels.size() + row];
    }
    std::span<const std::uint8_t> frame(std::size_t t) const {
        return {cells.data() + t * labels.size(), labels.size()};
    }

    bool operator==(const BinaryRoll&) const = default;
};

/// Which rows of a roll survived pruning, with enough context to undo it.
struct PitchPruneMap {
    std::vector<std::size_t> kept_rows;      // strictly increasing
    std::vector<RowLabel> original_labels;   // full pre-prune label set

    std::size_t original_dimension() const { return original_labels.size(); }
};

/// The frames where a roll's column changes, plus where they came from.
struct EventSequence {
    std::vector<std::size_t> indices;              // t_e, first is 0 when non-empty
    std::vector<std::vector<std::uint8_t>> frames; // columns at those indices
    std::size_t source_length = 0;
    std::vector<RowLabel> labels;
    int frames_per_quarter = 8;

    std::size_t size() const { return indices.size(); }
};

/// Quantize a normalized score onto a frame grid. Frame f covers ticks
/// [f*q, (f+1)*q) with q = ticks_per_quarter / frames_per_quarter; a note
/// sounding anywhere inside a frame marks it, overlaps keep the max
/// velocity. One 128-row block per track, instruments in alphabetical
/// order. Throws NonIntegerQuantum when fpq does not divide the tick
/// resolution.
PianoRoll build_roll(const MidiScore& score, int frames_per_quarter);

/// Stack rolls along the pitch axis; rows come out sorted by
/// (instrument, pitch). All inputs must share frame count and grid
/// (LengthMismatch) and no (instrument, pitch) may repeat.
PianoRoll concat_orchestra(std::span<const PianoRoll> rolls);

BinaryRoll binarize(const PianoRoll& roll);

PianoRoll to_intensity_roll(const BinaryRoll& roll); // 1 -> velocity 1

/// Drop rows that are zero across the whole collection. All rolls must
/// share labels; the map allows expand() to restore the original shape.
std::pair<PitchPruneMap, std::vector<BinaryRoll>> prune_pitches(std::span<const BinaryRoll> rolls);

/// Inverse of prune_pitches for one roll: removed rows come back as zeros.
BinaryRoll expand(const BinaryRoll& pruned, const PitchPruneMap& map);

/// Reorder/grow a roll onto a superset label set, zero-filling new rows.
/// Every existing label must appear in target_labels.
BinaryRoll align_rows(const BinaryRoll& roll, std::span<const RowLabel> target_labels);

/// Indices t with column(t) != column(t-1), plus 0; the event-level view.
EventSequence extract_events(const BinaryRoll& roll);

/// Hold every event frame until the next index; exact inverse of
/// extract_events.
BinaryRoll reconstruct(const EventSequence& events);

/// CSV with header frame,<instrument:pitch>,... and one row per frame.
void write_roll_csv(const PianoRoll& roll, const std::filesystem::path& path);
void write_roll_csv(const BinaryRoll& roll, const std::filesystem::path& path);
PianoRoll read_roll_csv(const std::filesystem::path& path, int frames_per_quarter);

/// Notes back out of a binary roll (maximal runs of 1s), one track per
/// instrument, fixed velocity. Tick quantum is 60 ticks per frame.
MidiScore roll_to_score(const BinaryRoll& roll, int velocity = 80);

} // namespace podkit
