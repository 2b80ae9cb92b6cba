#include "podkit/eval.hpp"

#include "podkit/errors.hpp"
#include "podkit/parallel.hpp"
#include "podkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace podkit {

namespace {

bool is_silent(std::span<const std::uint8_t> frame) {
    return std::all_of(frame.begin(), frame.end(), [](std::uint8_t v) { return v == 0; });
}

void check_order(int order) {
    if (order < 1)
        throw PodError(Err::InvalidArgument, "model order must be at least 1");
}

std::vector<std::size_t> orch_event_positions(const BinaryRoll& orch) {
    std::vector<std::size_t> positions;
    for (std::size_t t = 0; t < orch.frames; ++t) {
        auto col = orch.frame(t);
        if (t == 0 || !std::equal(col.begin(), col.end(), orch.frame(t - 1).begin()))
            positions.push_back(t);
    }
    return positions;
}

std::string format_accuracy(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

} // namespace

AlignedPair project_matches(std::string id, const EventSequence& piano,
                            const EventSequence& orch, const AlignmentResult& alignment) {
    AlignedPair pair;
    pair.id = std::move(id);
    pair.piano.labels = piano.labels;
    pair.piano.frames_per_quarter = piano.frames_per_quarter;
    pair.orch.labels = orch.labels;
    pair.orch.frames_per_quarter = orch.frames_per_quarter;

    for (const auto& step : alignment.steps) {
        if (step.kind != AlignStepKind::Match)
            continue;
        const auto& pf = piano.frames[static_cast<std::size_t>(step.i)];
        const auto& of = orch.frames[static_cast<std::size_t>(step.j)];
        pair.piano.cells.insert(pair.piano.cells.end(), pf.begin(), pf.end());
        pair.orch.cells.insert(pair.orch.cells.end(), of.begin(), of.end());
        pair.piano_source_frames.push_back(piano.indices[static_cast<std::size_t>(step.i)]);
        pair.orch_source_frames.push_back(orch.indices[static_cast<std::size_t>(step.j)]);
    }
    pair.piano.frames = pair.piano_source_frames.size();
    pair.orch.frames = pair.orch_source_frames.size();
    return pair;
}

CorpusSplit split_corpus(std::size_t count, const SplitSpec& spec) {
    if (count == 0)
        throw PodError(Err::EmptyTestSet, "corpus is empty");
    if (!(spec.test_fraction > 0.0) || !(spec.test_fraction < 1.0))
        throw PodError(Err::InvalidArgument, "test_fraction must lie in (0,1)");

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix64(spec.seed));
    deterministic_shuffle(order, rng);

    auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(count)));
    n_test = std::clamp<std::size_t>(n_test, 1, count);

    CorpusSplit split;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

FrameTally tally_frame(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted) {
    if (truth.size() != predicted.size())
        throw PodError(Err::DimensionMismatch,
                       "truth has " + std::to_string(truth.size()) + " rows, prediction " +
                           std::to_string(predicted.size()));
    FrameTally tally;
    for (std::size_t r = 0; r < truth.size(); ++r) {
        const bool t = truth[r] != 0;
        const bool p = predicted[r] != 0;
        if (t && p)
            ++tally.tp;
        else if (!t && p)
            ++tally.fp;
        else if (t && !p)
            ++tally.fn;
    }
    return tally;
}

double accuracy_from(const FrameTally& t) {
    const long denom = t.tp + t.fp + t.fn;
    if (denom == 0)
        return 100.0;
    return 100.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
}

double accuracy_frame(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted) {
    return accuracy_from(tally_frame(truth, predicted));
}

AccuracyReport evaluate(const Predictor& predictor, std::span<const AlignedPair> corpus,
                        const SplitSpec& split_spec, int order, EvalLevel level, int jobs) {
    check_order(order);
    const CorpusSplit split = split_corpus(corpus.size(), split_spec);
    const auto n = static_cast<std::size_t>(order);

    std::vector<std::vector<EventAccuracy>> per_score(split.test.size());
    parallel_for(split.test.size(), jobs, [&](std::size_t k) {
        const AlignedPair& pair = corpus[split.test[k]];
        if (pair.piano.frames != pair.orch.frames)
            throw PodError(Err::LengthMismatch,
                           "pair " + pair.id + ": piano and orchestra timelines differ");

        // the column positions to score, and the past positions they see
        std::vector<std::size_t> positions;
        if (level == EvalLevel::Frame) {
            if (pair.orch.frames <= n)
                throw PodError(Err::OrderTooLarge,
                               "pair " + pair.id + " has " + std::to_string(pair.orch.frames) +
                                   " frames, order is " + std::to_string(order));
            positions.resize(pair.orch.frames - n);
            std::iota(positions.begin(), positions.end(), n);
        } else {
            positions = orch_event_positions(pair.orch);
            if (positions.size() <= n)
                throw PodError(Err::OrderTooLarge,
                               "pair " + pair.id + " has " + std::to_string(positions.size()) +
                                   " events, order is " + std::to_string(order));
        }

        auto& results = per_score[k];
        results.reserve(positions.size());
        // frame-level positions already start at n; event positions do not
        const std::size_t first = level == EvalLevel::Frame ? 0 : n;
        for (std::size_t p = first; p < positions.size(); ++p) {
            const std::size_t t = positions[p];

            PredictionContext ctx;
            ctx.order = order;
            ctx.score_index = split.test[k];
            ctx.time_index = t;
            auto piano_col = pair.piano.frame(t);
            ctx.piano_now.assign(piano_col.begin(), piano_col.end());
            ctx.orch_past.reserve(n);
            for (std::size_t back = 1; back <= n; ++back) {
                const std::size_t src = level == EvalLevel::Frame ? t - back : positions[p - back];
                auto col = pair.orch.frame(src);
                ctx.orch_past.emplace_back(col.begin(), col.end());
            }

            const auto predicted = predictor.predict(ctx);
            const FrameTally tally = tally_frame(pair.orch.frame(t), predicted);
            const std::size_t reported_t =
                pair.orch_source_frames.empty() ? t : pair.orch_source_frames[t];
            results.push_back({pair.id, reported_t, tally.tp, tally.fp, tally.fn,
                               accuracy_from(tally)});
        }
    });

    AccuracyReport report;
    double sum = 0.0;
    for (auto& score_results : per_score) {
        for (auto& r : score_results) {
            sum += r.accuracy;
            report.per_event.push_back(std::move(r));
        }
    }
    report.event_count = report.per_event.size();
    report.mean_accuracy =
        report.event_count ? sum / static_cast<double>(report.event_count) : 0.0;
    return report;
}

std::vector<TrainingPoint> extract_training_points(const AlignedPair& pair, int order) {
    check_order(order);
    if (pair.piano.frames != pair.orch.frames)
        throw PodError(Err::LengthMismatch,
                       "pair " + pair.id + ": piano and orchestra timelines differ");

    std::vector<TrainingPoint> points;
    const auto n = static_cast<std::size_t>(order);
    for (std::size_t t = n; t < pair.piano.frames; ++t) {
        auto piano_col = pair.piano.frame(t);
        if (is_silent(piano_col))
            continue; // silences are never orchestration targets
        TrainingPoint point;
        point.context.order = order;
        point.context.time_index = t;
        point.context.piano_now.assign(piano_col.begin(), piano_col.end());
        for (std::size_t back = 1; back <= n; ++back) {
            auto col = pair.orch.frame(t - back);
            point.context.orch_past.emplace_back(col.begin(), col.end());
        }
        auto target = pair.orch.frame(t);
        point.target.assign(target.begin(), target.end());
        points.push_back(std::move(point));
    }
    return points;
}

BinaryRoll generate(const Predictor& predictor, const BinaryRoll& piano,
                    std::span<const RowLabel> orch_labels, int order, std::uint64_t seed) {
    check_order(order);
    if (predictor.dim() != orch_labels.size())
        throw PodError(Err::DimensionMismatch,
                       "predictor emits " + std::to_string(predictor.dim()) + " rows, labels have " +
                           std::to_string(orch_labels.size()));

    const EventSequence events = extract_events(piano);
    const std::size_t dim = orch_labels.size();
    const auto n = static_cast<std::size_t>(order);
    const std::vector<std::uint8_t> silence(dim, 0);

    std::vector<std::vector<std::uint8_t>> generated;
    generated.reserve(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (is_silent(events.frames[e])) {
            generated.push_back(silence);
            continue;
        }
        PredictionContext ctx;
        ctx.order = order;
        ctx.score_index = static_cast<std::size_t>(seed);
        ctx.time_index = events.indices[e];
        ctx.piano_now = events.frames[e];
        for (std::size_t back = 1; back <= n; ++back)
            ctx.orch_past.push_back(back <= e ? generated[e - back] : silence);

        auto out = predictor.predict(ctx);
        if (out.size() != dim)
            throw PodError(Err::DimensionMismatch, "predictor output has wrong dimension");
        for (auto& v : out)
            v = v ? 1 : 0;
        generated.push_back(std::move(out));
    }

    EventSequence out_events;
    out_events.indices = events.indices;
    out_events.frames = std::move(generated);
    out_events.source_length = piano.frames;
    out_events.labels.assign(orch_labels.begin(), orch_labels.end());
    out_events.frames_per_quarter = piano.frames_per_quarter;
    return reconstruct(out_events);
}

std::vector<std::uint8_t> RepeatPredictor::predict(const PredictionContext& ctx) const {
    if (ctx.orch_past.empty())
        throw PodError(Err::InvalidArgument, "repeat predictor needs at least one past frame");
    return ctx.orch_past.front();
}

std::vector<std::uint8_t> RandomPredictor::predict(const PredictionContext& ctx) const {
    std::mt19937_64 rng(mix_seed(seed_, ctx.score_index, ctx.time_index));
    std::vector<std::uint8_t> out(dim_);
    for (auto& v : out)
        v = coin_flip(rng) ? 1 : 0;
    return out;
}

std::vector<std::uint8_t> OraclePredictor::predict(const PredictionContext& ctx) const {
    const auto& pair = corpus_[ctx.score_index];
    auto col = pair.orch.frame(ctx.time_index);
    return {col.begin(), col.end()};
}

std::size_t OraclePredictor::dim() const {
    return corpus_.empty() ? 0 : corpus_.front().orch.rows();
}

std::unique_ptr<Predictor> make_predictor(const std::string& name, std::size_t dim,
                                          std::uint64_t seed, std::span<const AlignedPair> corpus) {
    if (name == "repeat")
        return std::make_unique<RepeatPredictor>(dim);
    if (name == "random")
        return std::make_unique<RandomPredictor>(dim, seed);
    if (name == "oracle")
        return std::make_unique<OraclePredictor>(corpus);
    throw PodError(Err::InvalidArgument, "unknown predictor '" + name + "'");
}

void write_report_csv(const AccuracyReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw PodError(Err::WriteFailure, "cannot open " + path.string());
    out << "score_id,t_e,TP,FP,FN,accuracy\n";
    for (const auto& r : report.per_event)
        out << r.score_id << ',' << r.t << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
            << format_accuracy(r.accuracy) << '\n';
    out << "(corpus-mean)," << report.event_count << ",,,,"
        << format_accuracy(report.mean_accuracy) << '\n';
    if (!out)
        throw PodError(Err::WriteFailure, "short write to " + path.string());
}

} // namespace podkit
