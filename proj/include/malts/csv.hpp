#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace malts::csv {

// Reads one RFC-4180 record; quoted fields may hold commas, doubled quotes
// and newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields);

std::string quote(const std::string& field);
std::string trim(std::string_view s);

bool parse_double(const std::string& s, double& out);
// Integer-valued numerals such as "3" and "3.0".
bool parse_integer(const std::string& s, std::int64_t& out);

// Header lookup; throws SchemaError naming the column.
std::size_t column(const std::vector<std::string>& header, const std::string& name);

}  // namespace malts::csv
