#pragma once

#include <string>
#include <vector>

#include "farfel/value.hpp"

namespace farfel {

// One expected output record of a corpus entry.
struct ManifestExpect {
    std::string name;
    double value = 0;
    double tol = 0;
    std::string provenance; // where the number comes from: exact, closed-form, oracle
};

struct ManifestEntry {
    std::string name;
    std::string program; // path relative to the manifest file
    std::vector<std::pair<std::string, Value>> sets;
    std::vector<ManifestExpect> expects;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

// Parses a corpus description: one `key = value` pair per line, `#`
// comments, entries introduced by `entry = NAME`. Keys: `program` (one
// per entry), `set` with value `NAME=NUMBER`, and `expect` with value
// `NAME NUMBER TOLERANCE PROVENANCE`. Throws ParseError positioned on
// the offending manifest line.
Manifest parse_manifest(const std::string& text);

// Reads NUMBER as a FARFEL value: an integer unless it has '.', 'E', or
// 'e'. Returns false when the text is not a number.
bool parse_numeric(const std::string& text, Value& out);

} // namespace farfel
