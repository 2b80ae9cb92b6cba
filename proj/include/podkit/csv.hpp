#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace podkit::csv {

using Row = std::vector<std::string>;

/// Parse RFC-4180 text: comma delimiter, optional quoting, "" escapes,
/// CRLF or LF line ends. Throws PodError(MalformedMetadata) on unbalanced
/// quotes or garbage after a closing quote.
std::vector<Row> parse(std::string_view text);

/// parse() over a whole file; MissingFile if it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Quote a field iff it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

} // namespace podkit::csv
