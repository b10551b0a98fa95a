#include "farfel/manifest.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "farfel/diag.hpp"

namespace farfel {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace((unsigned char)s[b])) b++;
    while (e > b && std::isspace((unsigned char)s[e - 1])) e--;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    Diagnostic d;
    d.loc = SrcLoc{line, 1};
    d.message = msg;
    throw ParseError(std::move(d));
}

std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string field;
    while (in >> field) out.push_back(field);
    return out;
}

} // namespace

bool parse_numeric(const std::string& text, Value& out) {
    std::string t = trim(text);
    if (t.empty()) return false;
    bool real = t.find_first_of(".eE") != std::string::npos;
    errno = 0;
    char* end = nullptr;
    if (real) {
        double d = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size() || errno == ERANGE) return false;
        out = Value::real(d);
    } else {
        long long i = std::strtoll(t.c_str(), &end, 10);
        if (end != t.c_str() + t.size() || errno == ERANGE) return false;
        out = Value::integer(i);
    }
    return true;
}

Manifest parse_manifest(const std::string& text) {
    Manifest m;
    ManifestEntry* cur = nullptr;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        lineno++;
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string line = trim(raw);
        if (line.empty()) continue;

        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected `key = value`");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail(lineno, "missing value after `" + key + " =`");

        if (key == "entry") {
            m.entries.push_back(ManifestEntry{});
            cur = &m.entries.back();
            cur->name = value;
            continue;
        }
        if (!cur) fail(lineno, "`" + key + "` before any `entry`");

        if (key == "program") {
            if (!cur->program.empty()) fail(lineno, "entry `" + cur->name + "` already has a program");
            cur->program = value;
        } else if (key == "set") {
            size_t eq2 = value.find('=');
            if (eq2 == std::string::npos) fail(lineno, "`set` needs `NAME=NUMBER`");
            std::string name = trim(value.substr(0, eq2));
            Value v;
            if (name.empty() || !parse_numeric(value.substr(eq2 + 1), v))
                fail(lineno, "`set` needs `NAME=NUMBER`");
            cur->sets.emplace_back(name, v);
        } else if (key == "expect") {
            std::vector<std::string> f = split_fields(value);
            if (f.size() != 4)
                fail(lineno, "`expect` needs `NAME VALUE TOLERANCE PROVENANCE`");
            ManifestExpect ex;
            ex.name = f[0];
            Value v;
            if (!parse_numeric(f[1], v)) fail(lineno, "bad expected value `" + f[1] + "`");
            ex.value = v.is_int() ? (double)v.as_int() : v.as_real();
            if (!parse_numeric(f[2], v)) fail(lineno, "bad tolerance `" + f[2] + "`");
            ex.tol = v.is_int() ? (double)v.as_int() : v.as_real();
            if (f[3] != "exact" && f[3] != "closed-form" && f[3] != "oracle")
                fail(lineno, "provenance must be exact, closed-form, or oracle");
            ex.provenance = f[3];
            cur->expects.push_back(std::move(ex));
        } else {
            fail(lineno, "unknown key `" + key + "`");
        }
    }

    for (const ManifestEntry& e : m.entries)
        if (e.program.empty())
            fail(lineno, "entry `" + e.name + "` has no program");
    return m;
}

} // namespace farfel
