#include "podkit/pianoroll.hpp"

#include "podkit/csv.hpp"
#include "podkit/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace podkit {

namespace {

void check_unique_labels(const std::vector<RowLabel>& labels) {
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] == labels[i - 1])
            throw PodError(Err::InvalidArgument,
                           "duplicate row label " + labels[i].instrument + ":" +
                               std::to_string(labels[i].pitch));
}

std::string label_text(const RowLabel& l) {
    return l.instrument + ":" + std::to_string(l.pitch);
}

} // namespace

PianoRoll build_roll(const MidiScore& score, int frames_per_quarter) {
    if (frames_per_quarter <= 0)
        throw PodError(Err::InvalidArgument, "frames_per_quarter must be positive");
    if (score.ticks_per_quarter % frames_per_quarter != 0)
        throw PodError(Err::NonIntegerQuantum,
                       std::to_string(frames_per_quarter) + " frames per quarter does not divide " +
                           std::to_string(score.ticks_per_quarter) + " ticks per quarter");
    const std::int64_t quantum = score.ticks_per_quarter / frames_per_quarter;

    // alphabetical instrument order; duplicate names collapse into one block
    std::map<std::string, std::vector<const MidiTrack*>> by_name;
    std::int64_t last_tick = 0;
    for (const auto& track : score.tracks) {
        by_name[track.name].push_back(&track);
        for (const auto& ev : track.events)
            last_tick = std::max(last_tick, ev.onset + ev.duration);
    }

    PianoRoll roll;
    roll.frames_per_quarter = frames_per_quarter;
    roll.frames = score.tracks.empty()
                      ? 0
                      : static_cast<std::size_t>((last_tick + quantum - 1) / quantum);
    roll.labels.reserve(by_name.size() * 128);
    for (const auto& [name, _] : by_name)
        for (int pitch = 0; pitch < 128; ++pitch)
            roll.labels.push_back({name, pitch});
    roll.cells.assign(roll.labels.size() * roll.frames, 0);

    std::size_t block = 0;
    const std::size_t dim = roll.labels.size();
    for (const auto& [name, tracks] : by_name) {
        for (const MidiTrack* track : tracks) {
            for (const auto& ev : track->events) {
                const std::size_t row = block * 128 + static_cast<std::size_t>(ev.pitch);
                const std::int64_t first = ev.onset / quantum;
                const std::int64_t last = (ev.onset + ev.duration - 1) / quantum;
                for (std::int64_t f = first; f <= last; ++f) {
                    std::uint8_t& cell = roll.cells[static_cast<std::size_t>(f) * dim + row];
                    cell = std::max(cell, static_cast<std::uint8_t>(ev.velocity));
                }
            }
        }
        ++block;
    }
    return roll;
}

PianoRoll concat_orchestra(std::span<const PianoRoll> rolls) {
    if (rolls.empty())
        return {};
    const std::size_t frames = rolls.front().frames;
    const int fpq = rolls.front().frames_per_quarter;
    for (const auto& r : rolls) {
        if (r.frames != frames)
            throw PodError(Err::LengthMismatch,
                           "rolls span " + std::to_string(r.frames) + " and " +
                               std::to_string(frames) + " frames");
        if (r.frames_per_quarter != fpq)
            throw PodError(Err::LengthMismatch, "rolls use different frame grids");
    }

    // gather rows, then emit them in the documented (instrument, pitch) order
    struct SourceRow {
        RowLabel label;
        const PianoRoll* roll;
        std::size_t row;
    };
    std::vector<SourceRow> sources;
    for (const auto& r : rolls)
        for (std::size_t row = 0; row < r.rows(); ++row)
            sources.push_back({r.labels[row], &r, row});
    std::stable_sort(sources.begin(), sources.end(),
                     [](const SourceRow& a, const SourceRow& b) { return a.label < b.label; });

    PianoRoll out;
    out.frames_per_quarter = fpq;
    out.frames = frames;
    out.labels.reserve(sources.size());
    for (const auto& s : sources)
        out.labels.push_back(s.label);
    check_unique_labels(out.labels);
    out.cells.assign(out.labels.size() * frames, 0);
    for (std::size_t r = 0; r < sources.size(); ++r)
        for (std::size_t t = 0; t < frames; ++t)
            out.at(r, t) = sources[r].roll->at(sources[r].row, t);
    return out;
}

BinaryRoll binarize(const PianoRoll& roll) {
    BinaryRoll out;
    out.labels = roll.labels;
    out.frames_per_quarter = roll.frames_per_quarter;
    out.frames = roll.frames;
    out.cells.resize(roll.cells.size());
    std::transform(roll.cells.begin(), roll.cells.end(), out.cells.begin(),
                   [](std::uint8_t v) { return v > 0 ? std::uint8_t{1} : std::uint8_t{0}; });
    return out;
}

PianoRoll to_intensity_roll(const BinaryRoll& roll) {
    PianoRoll out;
    out.labels = roll.labels;
    out.frames_per_quarter = roll.frames_per_quarter;
    out.frames = roll.frames;
    out.cells = roll.cells;
    return out;
}

std::pair<PitchPruneMap, std::vector<BinaryRoll>> prune_pitches(std::span<const BinaryRoll> rolls) {
    PitchPruneMap map;
    std::vector<BinaryRoll> pruned;
    if (rolls.empty())
        return {map, pruned};

    const auto& labels = rolls.front().labels;
    for (const auto& r : rolls)
        if (r.labels != labels)
            throw PodError(Err::InvalidArgument, "prune_pitches requires a shared row label set");

    map.original_labels = labels;
    const std::size_t dim = labels.size();
    std::vector<bool> active(dim, false);
    for (const auto& r : rolls)
        for (std::size_t t = 0; t < r.frames; ++t) {
            auto col = r.frame(t);
            for (std::size_t row = 0; row < dim; ++row)
                if (col[row])
                    active[row] = true;
        }
    for (std::size_t row = 0; row < dim; ++row)
        if (active[row])
            map.kept_rows.push_back(row);

    pruned.reserve(rolls.size());
    for (const auto& r : rolls) {
        BinaryRoll p;
        p.frames_per_quarter = r.frames_per_quarter;
        p.frames = r.frames;
        for (std::size_t row : map.kept_rows)
            p.labels.push_back(labels[row]);
        p.cells.resize(map.kept_rows.size() * r.frames);
        for (std::size_t t = 0; t < r.frames; ++t)
            for (std::size_t k = 0; k < map.kept_rows.size(); ++k)
                p.at(k, t) = r.at(map.kept_rows[k], t);
        pruned.push_back(std::move(p));
    }
    return {map, pruned};
}

BinaryRoll expand(const BinaryRoll& pruned, const PitchPruneMap& map) {
    if (pruned.rows() != map.kept_rows.size())
        throw PodError(Err::DimensionMismatch,
                       "roll has " + std::to_string(pruned.rows()) + " rows, prune map kept " +
                           std::to_string(map.kept_rows.size()));
    BinaryRoll out;
    out.labels = map.original_labels;
    out.frames_per_quarter = pruned.frames_per_quarter;
    out.frames = pruned.frames;
    out.cells.assign(out.labels.size() * out.frames, 0);
    for (std::size_t t = 0; t < out.frames; ++t)
        for (std::size_t k = 0; k < map.kept_rows.size(); ++k)
            out.at(map.kept_rows[k], t) = pruned.at(k, t);
    return out;
}

BinaryRoll align_rows(const BinaryRoll& roll, std::span<const RowLabel> target_labels) {
    std::map<RowLabel, std::size_t> index;
    for (std::size_t r = 0; r < target_labels.size(); ++r)
        index[target_labels[r]] = r;

    BinaryRoll out;
    out.labels.assign(target_labels.begin(), target_labels.end());
    out.frames_per_quarter = roll.frames_per_quarter;
    out.frames = roll.frames;
    out.cells.assign(target_labels.size() * roll.frames, 0);
    for (std::size_t r = 0; r < roll.rows(); ++r) {
        auto it = index.find(roll.labels[r]);
        if (it == index.end())
            throw PodError(Err::DimensionMismatch,
                           "row " + label_text(roll.labels[r]) + " missing from target label set");
        for (std::size_t t = 0; t < roll.frames; ++t)
            out.at(it->second, t) = roll.at(r, t);
    }
    return out;
}

EventSequence extract_events(const BinaryRoll& roll) {
    EventSequence seq;
    seq.labels = roll.labels;
    seq.frames_per_quarter = roll.frames_per_quarter;
    seq.source_length = roll.frames;
    for (std::size_t t = 0; t < roll.frames; ++t) {
        auto col = roll.frame(t);
        if (t == 0 || !std::equal(col.begin(), col.end(), roll.frame(t - 1).begin())) {
            seq.indices.push_back(t);
            seq.frames.emplace_back(col.begin(), col.end());
        }
    }
    return seq;
}

BinaryRoll reconstruct(const EventSequence& events) {
    BinaryRoll out;
    out.labels = events.labels;
    out.frames_per_quarter = events.frames_per_quarter;
    out.frames = events.source_length;
    const std::size_t dim = events.labels.size();
    out.cells.assign(dim * out.frames, 0);
    for (std::size_t e = 0; e < events.indices.size(); ++e) {
        const std::size_t begin = events.indices[e];
        const std::size_t end = e + 1 < events.indices.size() ? events.indices[e + 1] : out.frames;
        if (events.frames[e].size() != dim)
            throw PodError(Err::DimensionMismatch, "event frame width differs from label count");
        for (std::size_t t = begin; t < end; ++t)
            std::copy(events.frames[e].begin(), events.frames[e].end(),
                      out.cells.begin() + static_cast<std::ptrdiff_t>(t * dim));
    }
    return out;
}

namespace {

template <typename Roll>
void write_roll_csv_impl(const Roll& roll, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw PodError(Err::WriteFailure, "cannot open " + path.string());

    std::vector<std::string> header;
    header.reserve(roll.rows() + 1);
    header.emplace_back("frame");
    for (const auto& l : roll.labels)
        header.push_back(label_text(l));
    csv::write_row(out, header);

    for (std::size_t t = 0; t < roll.frames; ++t) {
        out << t;
        auto col = roll.frame(t);
        for (std::size_t r = 0; r < col.size(); ++r)
            out << ',' << static_cast<int>(col[r]);
        out << '\n';
    }
    if (!out)
        throw PodError(Err::WriteFailure, "short write to " + path.string());
}

} // namespace

void write_roll_csv(const PianoRoll& roll, const std::filesystem::path& path) {
    write_roll_csv_impl(roll, path);
}

void write_roll_csv(const BinaryRoll& roll, const std::filesystem::path& path) {
    write_roll_csv_impl(roll, path);
}

PianoRoll read_roll_csv(const std::filesystem::path& path, int frames_per_quarter) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "frame")
        throw PodError(Err::MalformedMetadata, path.string() + ": missing piano-roll header");

    PianoRoll roll;
    roll.frames_per_quarter = frames_per_quarter;
    for (std::size_t c = 1; c < rows[0].size(); ++c) {
        const std::string& text = rows[0][c];
        auto colon = text.rfind(':');
        if (colon == std::string::npos)
            throw PodError(Err::MalformedMetadata,
                           path.string() + ": header cell '" + text + "' is not instrument:pitch");
        roll.labels.push_back({text.substr(0, colon), std::stoi(text.substr(colon + 1))});
    }

    roll.frames = rows.size() - 1;
    roll.cells.assign(roll.labels.size() * roll.frames, 0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != roll.labels.size() + 1)
            throw PodError(Err::MalformedMetadata,
                           path.string() + ": row " + std::to_string(i + 1) + " has wrong width");
        for (std::size_t c = 1; c < rows[i].size(); ++c) {
            int v = std::stoi(rows[i][c]);
            if (v < 0 || v > 127)
                throw PodError(Err::MalformedMetadata, path.string() + ": intensity out of range");
            roll.at(c - 1, i - 1) = static_cast<std::uint8_t>(v);
        }
    }
    return roll;
}

MidiScore roll_to_score(const BinaryRoll& roll, int velocity) {
    if (velocity < 1 || velocity > 127)
        throw PodError(Err::InvalidArgument, "velocity out of range");
    constexpr std::int64_t ticks_per_frame = 60;

    MidiScore score;
    score.ticks_per_quarter = static_cast<int>(ticks_per_frame) * roll.frames_per_quarter;

    std::map<std::string, std::vector<NoteEvent>> tracks;
    for (std::size_t r = 0; r < roll.rows(); ++r) {
        const auto& label = roll.labels[r];
        std::size_t t = 0;
        while (t < roll.frames) {
            if (!roll.at(r, t)) {
                ++t;
                continue;
            }
            std::size_t end = t;
            while (end < roll.frames && roll.at(r, end))
                ++end;
            tracks[label.instrument].push_back({label.pitch,
                                                static_cast<std::int64_t>(t) * ticks_per_frame,
                                                static_cast<std::int64_t>(end - t) * ticks_per_frame,
                                                velocity});
            t = end;
        }
    }
    for (auto& [name, events] : tracks) {
        std::stable_sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
            return a.onset != b.onset ? a.onset < b.onset : a.pitch < b.pitch;
        });
        score.tracks.push_back({name, std::move(events)});
    }
    return score;
}

} // namespace podkit
