#pragma once

#include "podkit/align.hpp"
#include "podkit/pianoroll.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace podkit {

/// Everything a model may condition on for one inference: the current
/// piano frame and the last `order` orchestra frames, most recent first.
/// score_index/time_index locate the frame for predictors that need
/// per-position determinism (and let the oracle look up the truth).
struct PredictionContext {
    std::vector<std::uint8_t> piano_now;
    std::vector<std::vector<std::uint8_t>> orch_past;
    int order = 1;
    std::size_t score_index = 0;
    std::size_t time_index = 0;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<std::uint8_t> predict(const PredictionContext& ctx) const = 0;
    virtual std::size_t dim() const = 0;
};

/// A piano/orchestra pair on a common timeline: either full frame rolls of
/// equal length or the Match-only projection of an event alignment.
/// source_frames, when present, map a column back to the frame index it
/// came from in the original roll.
struct AlignedPair {
    std::string id;
    BinaryRoll piano;
    BinaryRoll orch;
    std::vector<std::size_t> piano_source_frames;
    std::vector<std::size_t> orch_source_frames;
};

/// Keep only the Match steps of an event alignment as paired columns.
AlignedPair project_matches(std::string id, const EventSequence& piano,
                            const EventSequence& orch, const AlignmentResult& alignment);

struct SplitSpec {
    std::uint64_t seed = 0;
    double test_fraction = 0.2; // of whole score pairs
};

struct CorpusSplit {
    std::vector<std::size_t> train; // sorted indices
    std::vector<std::size_t> test;
};

/// Disjoint train/test partition over whole pairs, reproducible from the
/// seed. At least one pair always lands in the test set.
CorpusSplit split_corpus(std::size_t count, const SplitSpec& spec);

struct FrameTally {
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

FrameTally tally_frame(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted);

/// 100 * TP / (TP + FP + FN); two silent frames agree and score 100.
double accuracy_from(const FrameTally& t);
double accuracy_frame(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted);

enum class EvalLevel { Frame, Event };

struct EventAccuracy {
    std::string score_id;
    std::size_t t = 0; // frame index in the source roll
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double accuracy = 0.0;
};

struct AccuracyReport {
    std::vector<EventAccuracy> per_event;
    double mean_accuracy = 0.0; // sum of per-event accuracies / K
    std::size_t event_count = 0; // K
};

/// One-step prediction over the test split with ground-truth past
/// (teacher forcing). Frame level walks every t in [order, T); event
/// level walks the orchestra's change points with event-indexed past.
AccuracyReport evaluate(const Predictor& predictor, std::span<const AlignedPair> corpus,
                        const SplitSpec& split, int order, EvalLevel level, int jobs = 1);

struct TrainingPoint {
    PredictionContext context;
    std::vector<std::uint8_t> target;
};

/// Supervised pairs from an aligned pair: one per position t >= order
/// whose piano column is non-silent. Past windows keep their silences.
std::vector<TrainingPoint> extract_training_points(const AlignedPair& pair, int order);

/// Free-running orchestration of a piano roll: predict each non-silent
/// piano event from the model's own previous outputs (zero-padded before
/// the start), map silent piano events to silent frames, and hold every
/// event until the next one so the output shares the piano's rhythm.
BinaryRoll generate(const Predictor& predictor, const BinaryRoll& piano,
                    std::span<const RowLabel> orch_labels, int order, std::uint64_t seed);

class RepeatPredictor : public Predictor {
public:
    explicit RepeatPredictor(std::size_t dim) : dim_(dim) {}
    std::vector<std::uint8_t> predict(const PredictionContext& ctx) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

/// Independent Bernoulli(0.5) per row, reproducible from
/// (seed, score_index, time_index).
class RandomPredictor : public Predictor {
public:
    RandomPredictor(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
    std::vector<std::uint8_t> predict(const PredictionContext& ctx) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Returns the ground-truth frame; the evaluation upper bound.
class OraclePredictor : public Predictor {
public:
    explicit OraclePredictor(std::span<const AlignedPair> corpus) : corpus_(corpus) {}
    std::vector<std::uint8_t> predict(const PredictionContext& ctx) const override;
    std::size_t dim() const override;

private:
    std::span<const AlignedPair> corpus_;
};

std::unique_ptr<Predictor> make_predictor(const std::string& name, std::size_t dim,
                                          std::uint64_t seed, std::span<const AlignedPair> corpus);

/// CSV score_id,t_e,TP,FP,FN,accuracy; the last row carries the corpus
/// mean with K in the t_e column.
void write_report_csv(const AccuracyReport& report, const std::filesystem::path& path);

} // namespace podkit
