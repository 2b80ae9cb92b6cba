#include "podkit/align.hpp"

#include "podkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace podkit {

namespace {

constexpr double kNegInf = -1e300;

void check_params(const AlignParams& p) {
    if (!std::isfinite(p.similarity_scale) || !std::isfinite(p.gap_open) ||
        !std::isfinite(p.gap_extend))
        throw PodError(Err::InvalidArgument, "alignment parameters must be finite");
    if (p.gap_open < 0 || p.gap_extend < 0)
        throw PodError(Err::InvalidArgument, "gap costs must be non-negative");
    if (p.gap_extend > p.gap_open)
        throw PodError(Err::InvalidArgument, "gap_extend must not exceed gap_open");
}

enum State : std::uint8_t { StateM = 0, StateX = 1, StateY = 2 };

// Highest value wins; ties fall to Match, then GapInSecond, then GapInFirst.
State best_state(double m, double x, double y) {
    if (m >= x && m >= y)
        return StateM;
    if (x >= y)
        return StateX;
    return StateY;
}

} // namespace

PitchClassVector to_pitch_class(std::span<const std::uint8_t> frame,
                                std::span<const RowLabel> labels) {
    if (frame.size() != labels.size())
        throw PodError(Err::DimensionMismatch, "frame width differs from label count");
    PitchClassVector pc;
    for (std::size_t r = 0; r < frame.size(); ++r)
        if (frame[r])
            pc.on[static_cast<std::size_t>(labels[r].pitch % 12)] = 1;
    return pc;
}

double similarity(const PitchClassVector& a, const PitchClassVector& b, const AlignParams& params) {
    if (a.silent() || b.silent())
        return 0.0;
    int delta_sum = 0;
    int norm = 0;
    for (std::size_t c = 0; c < 12; ++c) {
        const int s = a.on[c] + b.on[c];
        delta_sum += s == 2 ? 1 : s == 1 ? -1 : 0;
        norm += s;
    }
    return params.similarity_scale * delta_sum / std::max(norm, 1);
}

AlignmentResult align(std::span<const PitchClassVector> x, std::span<const PitchClassVector> y,
                      const AlignParams& params) {
    check_params(params);
    const std::size_t n = x.size();
    const std::size_t m = y.size();

    AlignmentResult result;
    if (n == 0 && m == 0)
        return result;

    // Gotoh three-state recurrence; scores kept in rolling rows, the
    // predecessor of every (cell, state) packed into one byte for the
    // traceback.
    const std::size_t width = m + 1;
    std::vector<std::uint8_t> from((n + 1) * width, 0);
    auto pack = [](State fm, State fx, State fy) {
        return static_cast<std::uint8_t>(fm | fx << 2 | fy << 4);
    };
    auto from_m = [&](std::size_t i, std::size_t j) { return static_cast<State>(from[i * width + j] & 0x3); };
    auto from_x = [&](std::size_t i, std::size_t j) { return static_cast<State>(from[i * width + j] >> 2 & 0x3); };
    auto from_y = [&](std::size_t i, std::size_t j) { return static_cast<State>(from[i * width + j] >> 4 & 0x3); };

    std::vector<double> prev_m(width), prev_x(width), prev_y(width);
    std::vector<double> cur_m(width), cur_x(width), cur_y(width);

    prev_m[0] = 0.0;
    prev_x[0] = prev_y[0] = kNegInf;
    for (std::size_t j = 1; j <= m; ++j) {
        prev_m[j] = prev_x[j] = kNegInf;
        prev_y[j] = -(params.gap_open + static_cast<double>(j - 1) * params.gap_extend);
        from[j] = pack(StateM, StateM, j == 1 ? StateM : StateY);
    }

    for (std::size_t i = 1; i <= n; ++i) {
        cur_m[0] = cur_y[0] = kNegInf;
        cur_x[0] = -(params.gap_open + static_cast<double>(i - 1) * params.gap_extend);
        from[i * width] = pack(StateM, i == 1 ? StateM : StateX, StateM);

        for (std::size_t j = 1; j <= m; ++j) {
            const double sim = similarity(x[i - 1], y[j - 1], params);

            const State fm = best_state(prev_m[j - 1], prev_x[j - 1], prev_y[j - 1]);
            cur_m[j] = sim + (fm == StateM ? prev_m[j - 1] : fm == StateX ? prev_x[j - 1] : prev_y[j - 1]);

            const double xm = prev_m[j] - params.gap_open;
            const double xx = prev_x[j] - params.gap_extend;
            const double xy = prev_y[j] - params.gap_open;
            const State fx = best_state(xm, xx, xy);
            cur_x[j] = fx == StateM ? xm : fx == StateX ? xx : xy;

            const double ym = cur_m[j - 1] - params.gap_open;
            const double yx = cur_x[j - 1] - params.gap_open;
            const double yy = cur_y[j - 1] - params.gap_extend;
            const State fy = best_state(ym, yx, yy);
            cur_y[j] = fy == StateM ? ym : fy == StateX ? yx : yy;

            from[i * width + j] = pack(fm, fx, fy);
        }
        std::swap(prev_m, cur_m);
        std::swap(prev_x, cur_x);
        std::swap(prev_y, cur_y);
    }

    State state = best_state(prev_m[m], prev_x[m], prev_y[m]);
    result.total_score = state == StateM ? prev_m[m] : state == StateX ? prev_x[m] : prev_y[m];

    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        switch (state) {
        case StateM:
            result.steps.push_back({AlignStepKind::Match, static_cast<std::ptrdiff_t>(i - 1),
                                    static_cast<std::ptrdiff_t>(j - 1)});
            state = from_m(i, j);
            --i;
            --j;
            break;
        case StateX:
            result.steps.push_back({AlignStepKind::GapInSecond,
                                    static_cast<std::ptrdiff_t>(i - 1), -1});
            state = from_x(i, j);
            --i;
            break;
        case StateY:
            result.steps.push_back({AlignStepKind::GapInFirst, -1,
                                    static_cast<std::ptrdiff_t>(j - 1)});
            state = from_y(i, j);
            --j;
            break;
        }
    }
    std::reverse(result.steps.begin(), result.steps.end());
    return result;
}

std::vector<PitchClassVector> to_pitch_class_sequence(const EventSequence& events) {
    std::vector<PitchClassVector> out;
    out.reserve(events.frames.size());
    for (const auto& frame : events.frames)
        out.push_back(to_pitch_class(frame, events.labels));
    return out;
}

AlignmentResult align_pair(const EventSequence& piano, const EventSequence& orch,
                           const AlignParams& params) {
    const auto px = to_pitch_class_sequence(piano);
    const auto oy = to_pitch_class_sequence(orch);
    return align(px, oy, params);
}

double replay_score(const AlignmentResult& result, std::span<const PitchClassVector> x,
                    std::span<const PitchClassVector> y, const AlignParams& params) {
    double score = 0.0;
    bool in_run = false;
    AlignStepKind run_kind = AlignStepKind::Match;
    for (const auto& step : result.steps) {
        if (step.kind == AlignStepKind::Match) {
            score += similarity(x[static_cast<std::size_t>(step.i)],
                                y[static_cast<std::size_t>(step.j)], params);
            in_run = false;
        } else {
            score -= (in_run && run_kind == step.kind) ? params.gap_extend : params.gap_open;
            in_run = true;
            run_kind = step.kind;
        }
    }
    return score;
}

} // namespace podkit
