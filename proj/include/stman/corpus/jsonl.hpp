#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stman/corpus/dialogue.hpp"

namespace stman::corpus {

/// Reads a JSON Lines corpus, one dialogue object per line:
///
///   {"id": "...", "satisfaction": "unsatisfied|met|well_satisfied",
///    "utterances": [{"speaker": "user|staff", "tokens": [...],
///                    "sentiment": "negative|neutral|positive"}, ...]}
///
/// Blank lines are skipped. Any violation throws ParseError prefixed with
/// "<source>:<line>:".
std::vector<Dialogue> parse_corpus(const std::filesystem::path& path);
std::vector<Dialogue> parse_corpus(std::istream& in, const std::string& source = "<stream>");

/// Parses a single line; `line_no` is only used in error messages.
Dialogue parse_dialogue_line(const std::string& line, const std::string& source,
                             std::size_t line_no);

/// Serialized form of one dialogue (no trailing newline). Key order is fixed
/// so identical data always yields identical bytes.
std::string to_json_line(const Dialogue& d);

void write_corpus(std::ostream& out, std::span<const Dialogue> dialogues);
void write_corpus(const std::filesystem::path& path, std::span<const Dialogue> dialogues);

}  // namespace stman::corpus
