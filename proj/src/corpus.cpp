#include "podkit/corpus.hpp"

#include "podkit/csv.hpp"
#include "podkit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

namespace fs = std::filesystem;

namespace podkit {

namespace {

bool parse_folder_id(const std::string& name, long& id) {
    if (name.empty() || name.size() > 18)
        return false;
    for (char c : name)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    id = std::stol(name);
    return true;
}

fs::path instrum_path_for(const fs::path& midi) {
    fs::path p = midi;
    p.replace_filename(midi.stem().string() + "_instrum.csv");
    return p;
}

void require_file(const fs::path& p, long folder_id, const char* what) {
    if (!fs::is_regular_file(p))
        throw PodError(Err::MissingFile, "folder " + std::to_string(folder_id) + ": " + what +
                                             " '" + p.string() + "' not found");
}

} // namespace

std::vector<PairRecord> discover(const fs::path& root) {
    if (!fs::is_directory(root))
        throw PodError(Err::MissingFile, "corpus root '" + root.string() + "' is not a directory");

    std::vector<PairRecord> records;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory())
            continue;
        long id = 0;
        if (!parse_folder_id(entry.path().filename().string(), id))
            continue;

        const fs::path meta_path = entry.path() / (entry.path().filename().string() + ".csv");
        require_file(meta_path, id, "metadata CSV");

        auto rows = csv::read_file(meta_path);
        if (rows.empty() || rows[0].size() < 4)
            throw PodError(Err::MalformedMetadata,
                           meta_path.string() + ": expected header 'role,path,composer,title'");

        PairRecord rec;
        rec.folder_id = id;
        bool have_piano = false, have_orch = false;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (row.size() == 1 && row[0].empty())
                continue;
            if (row.size() < 4)
                throw PodError(Err::MalformedMetadata, meta_path.string() + ": row " +
                                                           std::to_string(i + 1) + " has fewer than 4 columns");
            const fs::path midi = root / row[1];
            if (row[0] == "piano") {
                if (have_piano)
                    throw PodError(Err::MalformedMetadata, meta_path.string() + ": duplicate piano row");
                have_piano = true;
                rec.piano_path = midi;
                rec.piano_composer = row[2];
                rec.piano_title = row[3];
            } else if (row[0] == "orchestra") {
                if (have_orch)
                    throw PodError(Err::MalformedMetadata, meta_path.string() + ": duplicate orchestra row");
                have_orch = true;
                rec.orch_path = midi;
                rec.orch_composer = row[2];
                rec.orch_title = row[3];
            } else {
                throw PodError(Err::MalformedMetadata,
                               meta_path.string() + ": unknown role '" + row[0] + "'");
            }
        }
        if (!have_piano || !have_orch)
            throw PodError(Err::MalformedMetadata,
                           meta_path.string() + ": needs one piano and one orchestra row");

        require_file(rec.piano_path, id, "piano MIDI");
        require_file(rec.orch_path, id, "orchestra MIDI");
        rec.piano_instrum_path = instrum_path_for(rec.piano_path);
        rec.orch_instrum_path = instrum_path_for(rec.orch_path);
        require_file(rec.piano_instrum_path, id, "piano instrumentation CSV");
        require_file(rec.orch_instrum_path, id, "orchestra instrumentation CSV");
        records.push_back(std::move(rec));
    }

    std::sort(records.begin(), records.end(),
              [](const PairRecord& a, const PairRecord& b) { return a.folder_id < b.folder_id; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].folder_id == records[i - 1].folder_id)
            throw PodError(Err::MalformedMetadata,
                           "duplicate folder id " + std::to_string(records[i].folder_id));
    return records;
}

std::vector<double> activation_ratio(std::span<const BinaryRoll> event_rolls) {
    if (event_rolls.empty())
        return {};
    const auto& labels = event_rolls.front().labels;
    for (const auto& r : event_rolls)
        if (r.labels != labels)
            throw PodError(Err::InvalidArgument, "activation_ratio requires a shared row label set");

    std::vector<std::size_t> on(labels.size(), 0);
    std::size_t total_frames = 0;
    for (const auto& r : event_rolls) {
        total_frames += r.frames;
        for (std::size_t t = 0; t < r.frames; ++t) {
            auto col = r.frame(t);
            for (std::size_t row = 0; row < col.size(); ++row)
                if (col[row])
                    ++on[row];
        }
    }

    std::vector<double> ratio(labels.size(), 0.0);
    if (total_frames)
        for (std::size_t row = 0; row < ratio.size(); ++row)
            ratio[row] = static_cast<double>(on[row]) / static_cast<double>(total_frames);
    return ratio;
}

std::vector<ComposerShare> composer_shares(std::span<const PairRecord> records,
                                           std::span<const std::size_t> piano_frames,
                                           std::span<const std::size_t> orch_frames) {
    if (records.size() != piano_frames.size() || records.size() != orch_frames.size())
        throw PodError(Err::LengthMismatch, "one frame count per record is required");

    struct Tally {
        int piano_files = 0;
        int orch_files = 0;
        std::size_t piano_frames = 0;
        std::size_t orch_frames = 0;
    };
    std::map<std::string, Tally> tallies;
    std::size_t piano_total = 0, orch_total = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& piano = tallies[records[i].piano_composer];
        piano.piano_files += 1;
        piano.piano_frames += piano_frames[i];
        auto& orch = tallies[records[i].orch_composer];
        orch.orch_files += 1;
        orch.orch_frames += orch_frames[i];
        piano_total += piano_frames[i];
        orch_total += orch_frames[i];
    }

    std::vector<ComposerShare> shares;
    shares.reserve(tallies.size());
    for (const auto& [composer, tally] : tallies) {
        ComposerShare share;
        share.composer = composer;
        share.piano_files = tally.piano_files;
        share.orch_files = tally.orch_files;
        share.piano_frame_pct =
            piano_total ? 100.0 * static_cast<double>(tally.piano_frames) / static_cast<double>(piano_total) : 0.0;
        share.orch_frame_pct =
            orch_total ? 100.0 * static_cast<double>(tally.orch_frames) / static_cast<double>(orch_total) : 0.0;
        shares.push_back(std::move(share));
    }
    return shares;
}

std::vector<ManifestEntry> export_concatenated(std::span<const PianoRoll> rolls,
                                               std::span<const std::string> ids,
                                               const fs::path& out,
                                               const fs::path& manifest_out) {
    if (rolls.size() != ids.size())
        throw PodError(Err::LengthMismatch, "one id per roll is required");
    for (const auto& r : rolls)
        if (!rolls.empty() && r.labels != rolls.front().labels)
            throw PodError(Err::InvalidArgument, "export requires a shared row label set");

    std::ofstream matrix(out, std::ios::binary | std::ios::trunc);
    if (!matrix)
        throw PodError(Err::WriteFailure, "cannot open " + out.string());

    std::vector<std::string> header;
    header.emplace_back("frame");
    if (!rolls.empty())
        for (const auto& l : rolls.front().labels)
            header.push_back(l.instrument + ":" + std::to_string(l.pitch));
    csv::write_row(matrix, header);

    std::vector<ManifestEntry> manifest;
    manifest.reserve(rolls.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < rolls.size(); ++i) {
        const auto& roll = rolls[i];
        for (std::size_t t = 0; t < roll.frames; ++t) {
            matrix << (cursor + t);
            auto col = roll.frame(t);
            for (std::size_t r = 0; r < col.size(); ++r)
                matrix << ',' << static_cast<int>(col[r]);
            matrix << '\n';
        }
        manifest.push_back({ids[i], cursor, cursor + roll.frames});
        cursor += roll.frames;
    }
    if (!matrix)
        throw PodError(Err::WriteFailure, "short write to " + out.string());
    matrix.close();

    std::ofstream mf(manifest_out, std::ios::binary | std::ios::trunc);
    if (!mf)
        throw PodError(Err::WriteFailure, "cannot open " + manifest_out.string());
    mf << "score_id,start_frame,end_frame\n";
    for (const auto& entry : manifest)
        mf << csv::escape(entry.score_id) << ',' << entry.start_frame << ',' << entry.end_frame
           << '\n';
    if (!mf)
        throw PodError(Err::WriteFailure, "short write to " + manifest_out.string());
    return manifest;
}

PianoRoll slice_concatenated(const fs::path& matrix_csv, const ManifestEntry& entry,
                             int frames_per_quarter) {
    PianoRoll whole = read_roll_csv(matrix_csv, frames_per_quarter);
    if (entry.end_frame < entry.start_frame || entry.end_frame > whole.frames)
        throw PodError(Err::InvalidArgument, "manifest entry outside exported matrix");

    PianoRoll roll;
    roll.labels = whole.labels;
    roll.frames_per_quarter = frames_per_quarter;
    roll.frames = entry.end_frame - entry.start_frame;
    const std::size_t dim = whole.labels.size();
    roll.cells.assign(whole.cells.begin() + static_cast<std::ptrdiff_t>(entry.start_frame * dim),
                      whole.cells.begin() + static_cast<std::ptrdiff_t>(entry.end_frame * dim));
    return roll;
}

} // namespace podkit
