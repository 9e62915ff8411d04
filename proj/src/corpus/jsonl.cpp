#include "stman/corpus/jsonl.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "stman/errors.hpp"

namespace stman::corpus {

namespace {

using json = nlohmann::ordered_json;

template <std::size_t N>
std::string allowed(const std::array<std::string_view, N>& names) {
  std::string s = "{";
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0) s += ", ";
    s += names[i];
  }
  return s + "}";
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "missing field \"" + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

Dialogue parse_dialogue_line(const std::string& line, const std::string& source,
                             std::size_t line_no) {
  const std::string where = source + ":" + std::to_string(line_no) + ": ";
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw ParseError(where + "expected a JSON object");

  Dialogue d;
  d.id = require_string(obj, "id", where);

  const std::string sat = require_string(obj, "satisfaction", where);
  auto parsed_sat = parse_satisfaction(sat);
  if (!parsed_sat) {
    throw ParseError(where + "unknown satisfaction \"" + sat + "\"; allowed " +
                     allowed(kSatisfactionNames));
  }
  d.satisfaction = *parsed_sat;

  const json& utts = require(obj, "utterances", where);
  if (!utts.is_array()) throw ParseError(where + "field \"utterances\" must be an array");
  if (utts.empty()) throw ParseError(where + "dialogue has no utterances");

  for (std::size_t i = 0; i < utts.size(); ++i) {
    const std::string uwhere = where + "utterance " + std::to_string(i) + ": ";
    const json& u = utts[i];
    if (!u.is_object()) throw ParseError(uwhere + "expected a JSON object");
    Utterance out;

    const std::string speaker = require_string(u, "speaker", uwhere);
    auto role = parse_role(speaker);
    if (!role) {
      throw ParseError(uwhere + "unknown speaker \"" + speaker + "\"; allowed " +
                       allowed(kRoleNames));
    }
    out.speaker = *role;

    const std::string sentiment = require_string(u, "sentiment", uwhere);
    auto sent = parse_sentiment(sentiment);
    if (!sent) {
      throw ParseError(uwhere + "unknown sentiment \"" + sentiment + "\"; allowed " +
                       allowed(kSentimentNames));
    }
    out.sentiment = *sent;

    const json& tokens = require(u, "tokens", uwhere);
    if (!tokens.is_array()) throw ParseError(uwhere + "field \"tokens\" must be an array");
    if (tokens.empty()) throw ParseError(uwhere + "utterance has no tokens");
    for (const auto& tok : tokens) {
      if (!tok.is_string()) throw ParseError(uwhere + "tokens must be strings");
      out.tokens.push_back(tok.get<std::string>());
    }
    d.utterances.push_back(std::move(out));
  }
  return d;
}

std::vector<Dialogue> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Dialogue> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Dialogue d = parse_dialogue_line(line, source, line_no);
    if (!ids.insert(d.id).second) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": duplicate dialogue id \"" +
                       d.id + "\"");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialogue> parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

std::string to_json_line(const Dialogue& d) {
  json obj;
  obj["id"] = d.id;
  obj["satisfaction"] = std::string(to_string(d.satisfaction));
  json utts = json::array();
  for (const auto& u : d.utterances) {
    json ju;
    ju["speaker"] = std::string(to_string(u.speaker));
    ju["tokens"] = u.tokens;
    ju["sentiment"] = std::string(to_string(u.sentiment));
    utts.push_back(std::move(ju));
  }
  obj["utterances"] = std::move(utts);
  return obj.dump();
}

void write_corpus(std::ostream& out, std::span<const Dialogue> dialogues) {
  for (const auto& d : dialogues) out << to_json_line(d) << '\n';
}

void write_corpus(const std::filesystem::path& path, std::span<const Dialogue> dialogues) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write corpus file " + path.string());
  write_corpus(out, dialogues);
}

}  // namespace stman::corpus
