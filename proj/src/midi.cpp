#include "podkit/midi.hpp"

#include "podkit/csv.hpp"
#include "podkit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

namespace podkit {

namespace {

struct ByteReader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    bool done() const { return pos >= data.size(); }
    std::size_t remaining() const { return data.size() - pos; }

    std::uint8_t u8() {
        if (pos >= data.size())
            throw PodError(Err::MalformedFile, "unexpected end of MIDI data");
        return data[pos++];
    }
    std::uint16_t u16() {
        std::uint16_t hi = u8(), lo = u8();
        return static_cast<std::uint16_t>(hi << 8 | lo);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v = v << 8 | u8();
        return v;
    }
    std::uint32_t vlq() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            std::uint8_t b = u8();
            v = v << 7 | (b & 0x7f);
            if (!(b & 0x80))
                return v;
        }
        throw PodError(Err::MalformedFile, "variable-length quantity longer than 4 bytes");
    }
    void skip(std::size_t n) {
        if (remaining() < n)
            throw PodError(Err::MalformedFile, "chunk overruns file");
        pos += n;
    }
    std::string bytes(std::size_t n) {
        if (remaining() < n)
            throw PodError(Err::MalformedFile, "chunk overruns file");
        std::string s(reinterpret_cast<const char*>(data.data() + pos), n);
        pos += n;
        return s;
    }
};

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

struct RawNote {
    std::int64_t tick;
    bool on;
    int pitch;
    int velocity;
};

struct OpenNote {
    std::int64_t onset;
    int velocity;
};

// Pair note-ons with note-offs. Events arrive in tick order; within one
// tick all offs apply before any on, so a re-struck pitch keeps both
// notes. An off with nothing open at an earlier tick cancels an on of the
// same tick (zero-length note, dropped); a fully stray off is ignored.
std::vector<NoteEvent> pair_notes(const std::vector<RawNote>& raw, const std::string& track_label) {
    std::vector<NoteEvent> notes;
    std::deque<OpenNote> open[128];

    std::size_t i = 0;
    while (i < raw.size()) {
        std::size_t j = i;
        while (j < raw.size() && raw[j].tick == raw[i].tick)
            ++j;
        const std::int64_t tick = raw[i].tick;

        std::vector<bool> cancelled(j - i, false);
        for (std::size_t k = i; k < j; ++k) {
            if (raw[k].on)
                continue;
            const int pitch = raw[k].pitch;
            if (!open[pitch].empty()) {
                OpenNote n = open[pitch].front();
                open[pitch].pop_front();
                notes.push_back({pitch, n.onset, tick - n.onset, n.velocity});
            } else {
                // cancel an on that preceded this off at the same tick
                for (std::size_t m = i; m < k; ++m) {
                    if (raw[m].on && raw[m].pitch == pitch && !cancelled[m - i]) {
                        cancelled[m - i] = true;
                        break;
                    }
                }
                // no opener anywhere: stray note-off, ignore
            }
        }
        for (std::size_t k = i; k < j; ++k)
            if (raw[k].on && !cancelled[k - i])
                open[raw[k].pitch].push_back({tick, raw[k].velocity});
        i = j;
    }

    for (int pitch = 0; pitch < 128; ++pitch)
        if (!open[pitch].empty()) {
            std::ostringstream msg;
            msg << track_label << ": note-on pitch " << pitch << " at tick "
                << open[pitch].front().onset << " never terminated";
            throw PodError(Err::DanglingNoteOn, msg.str());
        }

    std::stable_sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        return a.onset != b.onset ? a.onset < b.onset : a.pitch < b.pitch;
    });
    return notes;
}

void write_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> s & 0xff));
}

void write_vlq(std::vector<std::uint8_t>& out, std::int64_t v) {
    if (v < 0 || v > 0x0fffffff)
        throw PodError(Err::InvalidArgument, "tick delta out of SMF range");
    std::uint8_t buf[4];
    int n = 0;
    do {
        buf[n++] = static_cast<std::uint8_t>(v & 0x7f);
        v >>= 7;
    } while (v);
    while (n--)
        out.push_back(static_cast<std::uint8_t>(buf[n] | (n ? 0x80 : 0x00)));
}

} // namespace

MidiScore parse_midi(std::span<const std::uint8_t> bytes) {
    ByteReader r{bytes};

    if (r.bytes(4) != "MThd")
        throw PodError(Err::MalformedFile, "missing MThd header");
    const std::uint32_t header_len = r.u32();
    if (header_len < 6)
        throw PodError(Err::MalformedFile, "MThd shorter than 6 bytes");
    const std::uint16_t format = r.u16();
    const std::uint16_t ntrks = r.u16();
    const std::uint16_t division = r.u16();
    r.skip(header_len - 6);

    if (format > 1)
        throw PodError(Err::UnsupportedFormat, "SMF format " + std::to_string(format));
    if (division & 0x8000)
        throw PodError(Err::UnsupportedFormat, "SMPTE time division");
    if (division == 0)
        throw PodError(Err::MalformedFile, "zero ticks per quarter note");

    MidiScore score;
    score.ticks_per_quarter = division;

    for (int t = 0; t < ntrks; ++t) {
        // skip alien chunks between tracks
        std::string id = r.bytes(4);
        while (id != "MTrk") {
            r.skip(r.u32());
            id = r.bytes(4);
        }
        const std::uint32_t len = r.u32();
        if (r.remaining() < len)
            throw PodError(Err::MalformedFile, "MTrk overruns file");
        ByteReader tr{bytes.subspan(r.pos, len)};
        r.pos += len;

        std::vector<RawNote> raw;
        std::string name;
        std::int64_t tick = 0;
        std::uint8_t running = 0;

        while (!tr.done()) {
            tick += tr.vlq();
            if (tr.done())
                throw PodError(Err::MalformedFile, "event truncated after delta time");
            std::uint8_t status;
            if (tr.data[tr.pos] & 0x80) {
                status = tr.u8();
                if (status < 0xf0)
                    running = status;
            } else {
                if (running == 0)
                    throw PodError(Err::MalformedFile, "data byte without running status");
                status = running;
            }

            if (status == 0xff) {
                std::uint8_t type = tr.u8();
                std::uint32_t n = tr.vlq();
                std::string data = tr.bytes(n);
                if (type == 0x03 && name.empty())
                    name = trim(data);
                if (type == 0x2f)
                    break;
                continue;
            }
            if (status == 0xf0 || status == 0xf7) {
                running = 0;
                tr.skip(tr.vlq());
                continue;
            }
            switch (status & 0xf0) {
            case 0x90: {
                int pitch = tr.u8() & 0x7f;
                int vel = tr.u8() & 0x7f;
                raw.push_back({tick, vel > 0, pitch, vel});
                break;
            }
            case 0x80: {
                int pitch = tr.u8() & 0x7f;
                tr.u8();
                raw.push_back({tick, false, pitch, 0});
                break;
            }
            case 0xa0:
            case 0xb0:
            case 0xe0:
                tr.skip(2);
                break;
            case 0xc0:
            case 0xd0:
                tr.skip(1);
                break;
            default:
                throw PodError(Err::MalformedFile, "unknown status byte");
            }
        }

        if (raw.empty())
            continue;
        if (name.empty())
            name = "track " + std::to_string(t + 1);
        score.tracks.push_back({name, pair_notes(raw, "track '" + name + "' (#" + std::to_string(t + 1) + ")")});
    }
    return score;
}

MidiScore read_midi_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PodError(Err::MissingFile, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return parse_midi(bytes);
    } catch (const PodError& e) {
        throw PodError(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> write_midi(const MidiScore& score) {
    if (score.ticks_per_quarter <= 0 || score.ticks_per_quarter > 0x7fff)
        throw PodError(Err::InvalidArgument, "ticks per quarter out of range");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'M', 'T', 'h', 'd'});
    write_u32(out, 6);
    write_u16(out, 1);
    write_u16(out, static_cast<std::uint16_t>(score.tracks.size()));
    write_u16(out, static_cast<std::uint16_t>(score.ticks_per_quarter));

    struct Edge {
        std::int64_t tick;
        int on; // offs sort before ons at the same tick
        int pitch;
        int velocity;
    };

    for (const auto& track : score.tracks) {
        std::vector<Edge> edges;
        edges.reserve(track.events.size() * 2);
        for (const auto& ev : track.events) {
            if (ev.pitch < 0 || ev.pitch > 127 || ev.velocity < 1 || ev.velocity > 127 ||
                ev.onset < 0 || ev.duration < 1)
                throw PodError(Err::InvalidArgument, "note event outside MIDI ranges");
            edges.push_back({ev.onset, 1, ev.pitch, ev.velocity});
            edges.push_back({ev.onset + ev.duration, 0, ev.pitch, 0});
        }
        std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            if (a.tick != b.tick)
                return a.tick < b.tick;
            if (a.on != b.on)
                return a.on < b.on;
            return a.pitch < b.pitch;
        });

        std::vector<std::uint8_t> body;
        write_vlq(body, 0);
        body.push_back(0xff);
        body.push_back(0x03);
        write_vlq(body, static_cast<std::int64_t>(track.name.size()));
        body.insert(body.end(), track.name.begin(), track.name.end());

        std::int64_t cursor = 0;
        for (const auto& e : edges) {
            write_vlq(body, e.tick - cursor);
            cursor = e.tick;
            body.push_back(e.on ? 0x90 : 0x80);
            body.push_back(static_cast<std::uint8_t>(e.pitch));
            body.push_back(static_cast<std::uint8_t>(e.on ? e.velocity : 0));
        }
        write_vlq(body, 0);
        body.push_back(0xff);
        body.push_back(0x2f);
        body.push_back(0x00);

        out.insert(out.end(), {'M', 'T', 'r', 'k'});
        write_u32(out, static_cast<std::uint32_t>(body.size()));
        out.insert(out.end(), body.begin(), body.end());
    }
    return out;
}

void write_midi_file(const MidiScore& score, const std::filesystem::path& path) {
    auto bytes = write_midi(score);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw PodError(Err::WriteFailure, "cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw PodError(Err::WriteFailure, "short write to " + path.string());
}

std::string InstrumentMap::fold(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char c : name) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            if (pending_space && !out.empty())
                out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(u));
        } else {
            pending_space = true;
        }
    }
    return out;
}

InstrumentMap InstrumentMap::builtin() {
    InstrumentMap map;
    map.vocabulary_ = {
        "piccolo",     "flute",        "alto-flute",   "oboe",          "english-horn",
        "clarinet",    "bass-clarinet", "bassoon",     "contrabassoon", "french-horn",
        "trumpet",     "cornet",       "trombone",     "bass-trombone", "tuba",
        "timpani",     "percussion",   "glockenspiel", "xylophone",     "celesta",
        "harp",        "organ",        "piano",        "violin",        "viola",
        "violoncello", "contrabass",   "voice-soprano", "voice-alto",   "voice-tenor",
        "voice-bass",  "voice-choir",
    };
    for (const auto& name : map.vocabulary_)
        map.folded_vocabulary_[fold(name)] = name;
    map.ambiguous_ = {"bass", "horn"};
    return map;
}

void InstrumentMap::add_entry(const std::string& raw, const std::string& canonical) {
    if (!vocabulary_.count(canonical))
        throw PodError(Err::MalformedMetadata,
                       "'" + canonical + "' is not a canonical instrument name");
    std::string key = fold(raw);
    if (key.empty())
        throw PodError(Err::MalformedMetadata, "empty track name in instrument map");
    entries_[key].insert(canonical);
}

void InstrumentMap::add_ambiguous(const std::string& raw) {
    std::string key = fold(raw);
    if (!key.empty())
        ambiguous_.insert(key);
}

InstrumentMap InstrumentMap::load_csv(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() < 2 || fold(rows[0][0]) != "track name" ||
        fold(rows[0][1]) != "instrument")
        throw PodError(Err::MalformedMetadata,
                       path.string() + ": expected header 'track_name,instrument'");

    InstrumentMap map = builtin();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty())
            continue;
        if (row.size() < 2)
            throw PodError(Err::MalformedMetadata,
                           path.string() + ": row " + std::to_string(i + 1) + " has fewer than 2 columns");
        if (fold(row[1]) == "ambiguous") {
            map.add_ambiguous(row[0]);
            continue;
        }
        try {
            map.add_entry(row[0], row[1]);
        } catch (const PodError& e) {
            throw PodError(e.code(), path.string() + ": " + e.what());
        }
    }
    return map;
}

std::string InstrumentMap::resolve(const std::string& track_name) const {
    const std::string key = fold(track_name);
    if (key.empty())
        throw PodError(Err::UnknownTrackName, "track name '" + track_name + "' is empty after folding");

    auto it = entries_.find(key);
    if (it != entries_.end()) {
        if (it->second.size() > 1) {
            std::string candidates;
            for (const auto& c : it->second)
                candidates += (candidates.empty() ? "" : ", ") + c;
            throw PodError(Err::AmbiguousTrackName,
                           "track '" + track_name + "' matches several instruments: " + candidates);
        }
        return *it->second.begin();
    }
    if (ambiguous_.count(key))
        throw PodError(Err::AmbiguousTrackName,
                       "track '" + track_name + "' is a known ambiguous name");
    auto vit = folded_vocabulary_.find(key);
    if (vit != folded_vocabulary_.end())
        return vit->second;
    throw PodError(Err::UnknownTrackName, "no instrument mapping for track '" + track_name + "'");
}

MidiScore normalize_instruments(const MidiScore& score, const InstrumentMap& map) {
    std::map<std::string, std::vector<NoteEvent>> merged;
    for (const auto& track : score.tracks) {
        auto& bucket = merged[map.resolve(track.name)];
        bucket.insert(bucket.end(), track.events.begin(), track.events.end());
    }

    MidiScore out;
    out.ticks_per_quarter = score.ticks_per_quarter;
    for (auto& [name, events] : merged) {
        std::stable_sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
            return a.onset != b.onset ? a.onset < b.onset : a.pitch < b.pitch;
        });
        out.tracks.push_back({name, std::move(events)});
    }
    return out;
}

} // namespace podkit
