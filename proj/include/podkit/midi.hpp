#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace podkit {

/// One sounding note. Note-offs are folded into `duration`; a velocity-0
/// note-on never survives parsing (it terminates the matching note).
struct NoteEvent {
    int pitch = 0;       // MIDI number, 0..127
    std::int64_t onset = 0;    // ticks
    std::int64_t duration = 1; // ticks, always >= 1
    int velocity = 64;   // 1..127

    bool operator==(const NoteEvent&) const = default;
};

struct MidiTrack {
    std::string name;
    std::vector<NoteEvent> events; // sorted by onset, ties by pitch

    bool operator==(const MidiTrack&) const = default;
};

struct MidiScore {
    std::vector<MidiTrack> tracks;
    int ticks_per_quarter = 480;

    bool operator==(const MidiScore&) const = default;
};

/// Parse a Standard MIDI File (format 0 or 1).
///
/// One output track per MTrk that carries note events. Meta events are
/// ignored except the division and the track name (first name meta wins;
/// unnamed note tracks get "track <n>"). Simultaneous on/off of the same
/// pitch resolves off-before-on, and zero-length notes are dropped.
MidiScore parse_midi(std::span<const std::uint8_t> bytes);

MidiScore read_midi_file(const std::filesystem::path& path);

/// Serialize as SMF format 1, one MTrk per track with a name meta event.
/// parse_midi(write_midi(s)) == s for any score within the invariants.
std::vector<std::uint8_t> write_midi(const MidiScore& score);

void write_midi_file(const MidiScore& score, const std::filesystem::path& path);

/// Raw track name -> canonical instrument, with a conservative ambiguity
/// list. Lookup folds case, punctuation and whitespace first.
class InstrumentMap {
public:
    /// Canonical vocabulary plus the built-in ambiguity aliases
    /// ("bass", "horn"), no per-file entries.
    static InstrumentMap builtin();

    /// builtin() extended with the rows of a track_name,instrument CSV
    /// (header row required). An instrument value of "ambiguous" adds the
    /// track name to the ambiguity list instead of mapping it.
    static InstrumentMap load_csv(const std::filesystem::path& path);

    /// Map raw -> canonical. The canonical name must belong to the vocabulary.
    void add_entry(const std::string& raw, const std::string& canonical);

    void add_ambiguous(const std::string& raw);

    /// Resolve a track name. Explicit entries win over the ambiguity list,
    /// which wins over vocabulary self-lookup. Throws AmbiguousTrackName
    /// when several canonical candidates exist or the name is a known
    /// ambiguous alias, UnknownTrackName when nothing matches.
    std::string resolve(const std::string& track_name) const;

    const std::set<std::string>& vocabulary() const { return vocabulary_; }

    /// Lowercase, strip punctuation, collapse whitespace.
    static std::string fold(std::string_view name);

private:
    std::map<std::string, std::set<std::string>> entries_; // folded raw -> candidates
    std::set<std::string> ambiguous_;                      // folded aliases
    std::set<std::string> vocabulary_;
    std::map<std::string, std::string> folded_vocabulary_;
};

/// Rename every track to its canonical instrument and merge tracks that
/// share one (section grouping). Idempotent; never drops an event.
MidiScore normalize_instruments(const MidiScore& score, const InstrumentMap& map);

} // namespace podkit
