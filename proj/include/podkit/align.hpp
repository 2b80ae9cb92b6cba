#pragma once

#include "podkit/pianoroll.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace podkit {

/// A chord folded to one octave: on[c] is 1 iff some sounding pitch is
/// congruent to c mod 12 (0 = C).
struct PitchClassVector {
    std::array<std::uint8_t, 12> on{};

    bool silent() const {
        for (auto v : on)
            if (v)
                return false;
        return true;
    }
    bool operator==(const PitchClassVector&) const = default;
};

struct AlignParams {
    double similarity_scale = 10.0; // C
    double gap_open = 3.0;
    double gap_extend = 1.0;
};

enum class AlignStepKind {
    Match,       // x[i] paired with y[j]
    GapInFirst,  // y[j] consumed, x gets a gap
    GapInSecond, // x[i] consumed, y gets a gap
};

struct AlignStep {
    AlignStepKind kind;
    std::ptrdiff_t i = -1; // -1 on the gapped side
    std::ptrdiff_t j = -1;

    bool operator==(const AlignStep&) const = default;
};

struct AlignmentResult {
    std::vector<AlignStep> steps;
    double total_score = 0.0;
};

PitchClassVector to_pitch_class(std::span<const std::uint8_t> frame,
                                std::span<const RowLabel> labels);

/// Chord similarity: 0 when either side is silence, otherwise
/// C * sum(delta(a_i + b_i)) / max(|a+b|_1, 1) with delta(0)=0,
/// delta(1)=-1, delta(2)=+1.
double similarity(const PitchClassVector& a, const PitchClassVector& b, const AlignParams& params);

/// Global alignment maximizing matched similarity minus affine gap costs
/// (a run of L gaps costs gap_open + (L-1)*gap_extend). Ties in the
/// traceback prefer Match, then GapInSecond, then GapInFirst.
AlignmentResult align(std::span<const PitchClassVector> x, std::span<const PitchClassVector> y,
                      const AlignParams& params);

/// Align two event sequences on their pitch-class reductions. Step
/// indices are event positions; EventSequence::indices maps them back to
/// frames.
AlignmentResult align_pair(const EventSequence& piano, const EventSequence& orch,
                           const AlignParams& params);

/// Sum similarity over Match steps minus gap-run costs; equals
/// total_score up to rounding and is used to cross-check results.
double replay_score(const AlignmentResult& result, std::span<const PitchClassVector> x,
                    std::span<const PitchClassVector> y, const AlignParams& params);

std::vector<PitchClassVector> to_pitch_class_sequence(const EventSequence& events);

} // namespace podkit
