#pragma once

// Text formats:
//   value table   header `coalition,value`; coalition as sorted 1-based
//                 indices joined by '+', the empty set as `0`.
//   allocation    header `player,share,method`; players 1-based.
// Lines starting with '#' are comments. Numbers use 17 significant digits.

#include <bit>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gsa/coalition.hpp"
#include "gsa/numeric.hpp"

namespace gsa {

inline std::string coalition_label(Mask bits) {
  if (bits == 0) return "0";
  std::string out;
  for (Mask m = bits; m != 0; m &= m - 1) {
    if (!out.empty()) out += '+';
    out += std::to_string(std::countr_zero(m) + 1);
  }
  return out;
}

inline std::string coalition_label(const Coalition& a) { return coalition_label(a.bits()); }

/// Parses `1+3` / `0`. Returns the mask and the largest player index seen
/// (0-based, -1 for the empty set).
inline std::pair<Mask, int> parse_coalition_label(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text == "0") return {0, -1};
  if (text.empty()) throw ParseError("empty coalition label");
  Mask bits = 0;
  int top = -1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find('+', pos), text.size());
    const std::string_view token = text.substr(pos, next - pos);
    int index = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (ec != std::errc{} || ptr != token.data() + token.size() || index < 1 ||
        index > kMaxPlayers) {
      throw ParseError("bad player index '" + std::string(token) + "' in coalition '" +
                       std::string(text) + "'");
    }
    const Mask bit = Mask{1} << (index - 1);
    if (bits & bit) throw ParseError("repeated player in coalition '" + std::string(text) + "'");
    bits |= bit;
    top = std::max(top, index - 1);
    pos = next + 1;
  }
  return {bits, top};
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(',', pos);
    fields.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline void write_value_table(std::ostream& out, const GameTable& game,
                              std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "# players=" << game.players() << '\n';
  out << "coalition,value\n";
  for (const Coalition& a : enumerate_coalitions(game.players())) {
    out << coalition_label(a) << ',' << format_double(game[a]) << '\n';
  }
}

/// Reads a value table. The player count comes from a `# players=d`
/// comment when present, otherwise from the largest index seen. Every one
/// of the 2^d coalitions must appear exactly once.
inline GameTable read_value_table(std::istream& in) {
  std::string line;
  std::optional<int> declared;
  bool header_seen = false;
  std::map<Mask, double> rows;
  int top = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      const auto key = view.find("players=");
      if (key != std::string_view::npos) {
        declared = static_cast<int>(parse_double(view.substr(key + 8)));
      }
      continue;
    }
    if (!header_seen) {
      const auto fields = detail::split_csv_line(view);
      if (fields.size() != 2 || detail::trim(fields[0]) != "coalition" ||
          detail::trim(fields[1]) != "value") {
        throw ParseError("value table: expected header 'coalition,value'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv_line(view);
    if (fields.size() != 2) {
      throw ParseError("value table line " + std::to_string(line_no) + ": expected 2 fields");
    }
    const auto [bits, hi] = parse_coalition_label(fields[0]);
    if (rows.count(bits)) {
      throw ParseError("value table: duplicate coalition " + coalition_label(bits));
    }
    rows[bits] = parse_double(fields[1]);
    top = std::max(top, hi);
  }
  if (!header_seen) throw ParseError("value table: missing header");
  const int d = declared ? *declared : top + 1;
  if (d < 1 || d > kMaxPlayers) throw ParseError("value table: cannot determine player count");
  if (top >= d) throw ParseError("value table: player index exceeds declared player count");
  std::vector<double> values(std::size_t{1} << d, 0.0);
  std::vector<std::string> missing;
  for (Mask m = 0; m < values.size(); ++m) {
    auto it = rows.find(m);
    if (it == rows.end()) {
      missing.push_back(coalition_label(m));
    } else {
      values[m] = it->second;
    }
  }
  if (!missing.empty()) {
    std::string msg = "value table: missing coalitions:";
    for (const auto& label : missing) msg += ' ' + label;
    throw ParseError(msg);
  }
  if (values[0] != 0.0) throw ParseError("value table: value of the empty coalition must be 0");
  return GameTable(d, std::move(values));
}

inline GameTable parse_value_table(const std::string& text) {
  std::istringstream in(text);
  return read_value_table(in);
}

inline void write_allocation(std::ostream& out, const Allocation& alloc,
                             std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "player,share,method\n";
  for (int i = 0; i < alloc.players(); ++i) {
    out << (i + 1) << ',' << format_double(alloc[i]) << ',' << to_string(alloc.method) << '\n';
  }
}

}  // namespace gsa
