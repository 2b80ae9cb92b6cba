#include "podkit/csv.hpp"

#include "podkit/errors.hpp"

#include <fstream>
#include <sstream>

namespace podkit::csv {

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool quoted = false;
    bool had_content = false; // current row has at least one delimiter or char

    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        had_content = false;
    };

    while (i < n) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                    if (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n')
                        throw PodError(Err::MalformedMetadata,
                                       "text after closing quote in CSV field");
                }
            } else {
                field += c;
                ++i;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty())
                throw PodError(Err::MalformedMetadata, "quote inside unquoted CSV field");
            quoted = true;
            had_content = true;
            ++i;
            break;
        case ',':
            end_field();
            had_content = true;
            ++i;
            break;
        case '\r':
            ++i;
            if (i < n && text[i] == '\n')
                ++i;
            end_row();
            break;
        case '\n':
            ++i;
            end_row();
            break;
        default:
            field += c;
            had_content = true;
            ++i;
            break;
        }
    }
    if (quoted)
        throw PodError(Err::MalformedMetadata, "unterminated quoted CSV field");
    if (had_content || !field.empty() || !row.empty())
        end_row();
    return rows;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PodError(Err::MissingFile, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const PodError& e) {
        throw PodError(e.code(), path.string() + ": " + e.what());
    }
}

std::string escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

} // namespace podkit::csv
