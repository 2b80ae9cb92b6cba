#pragma once

#include "podkit/pianoroll.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace podkit {

/// One numbered corpus folder: a piano score, its orchestration, and
/// their metadata. Paths are absolute after discovery.
struct PairRecord {
    long folder_id = 0;
    std::filesystem::path piano_path;
    std::filesystem::path orch_path;
    std::filesystem::path piano_instrum_path;
    std::filesystem::path orch_instrum_path;
    std::string piano_composer;
    std::string orch_composer;
    std::string piano_title;
    std::string orch_title;
};

/// Scan a corpus root for numbered folders. Each folder <id> must hold
/// <id>.csv (columns role,path,composer,title; role piano|orchestra), the
/// two MIDI files it names, and a <midi-stem>_instrum.csv beside each.
/// Results are sorted by folder id; non-numeric directories are ignored.
std::vector<PairRecord> discover(const std::filesystem::path& root);

/// Per-row fraction of event frames with the pitch on, across the whole
/// collection. All rolls must share labels.
std::vector<double> activation_ratio(std::span<const BinaryRoll> event_rolls);

struct ComposerShare {
    std::string composer;
    int piano_files = 0;
    double piano_frame_pct = 0.0;
    int orch_files = 0;
    double orch_frame_pct = 0.0;
};

/// File counts and frame-share percentages per composer, piano and
/// orchestra tallied separately. frame counts are per record, in record
/// order. Output is sorted by composer name; each percentage column sums
/// to 100 when any frames exist.
std::vector<ComposerShare> composer_shares(std::span<const PairRecord> records,
                                           std::span<const std::size_t> piano_frames,
                                           std::span<const std::size_t> orch_frames);

struct CorpusStats {
    std::vector<RowLabel> activation_labels;
    std::vector<double> activation; // in [0,1], one per orchestra row
    std::vector<ComposerShare> composers;
};

struct ManifestEntry {
    std::string score_id;
    std::size_t start_frame = 0;
    std::size_t end_frame = 0; // exclusive
};

/// Stack rolls end to end into one matrix CSV at `out`, plus a
/// score_id,start_frame,end_frame manifest CSV at `manifest_out`.
/// Slicing the matrix by a manifest row reproduces that roll exactly.
std::vector<ManifestEntry> export_concatenated(std::span<const PianoRoll> rolls,
                                               std::span<const std::string> ids,
                                               const std::filesystem::path& out,
                                               const std::filesystem::path& manifest_out);

/// Read back one roll from an export, using its manifest entry.
PianoRoll slice_concatenated(const std::filesystem::path& matrix_csv, const ManifestEntry& entry,
                             int frames_per_quarter);

} // namespace podkit
