#include "farfel/driver.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "farfel/diag.hpp"
#include "farfel/engine.hpp"
#include "farfel/interp.hpp"
#include "farfel/lexer.hpp"
#include "farfel/manifest.hpp"
#include "farfel/parser.hpp"
#include "farfel/printer.hpp"

namespace farfel {

namespace {

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

std::string upper(std::string s) {
    for (char& c : s) c = (char)std::toupper((unsigned char)c);
    return s;
}

std::string fmt_real(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

// Turns the --set list into the interpreter's override map, rejecting
// names the PROGRAM unit has no scalar for. Later duplicates win.
bool build_overrides(const BoundProgram& bound, const DriverOptions& opt,
                     const std::string& path, std::ostream& err,
                     std::map<std::string, Value>& out) {
    const SubInfo& mi = bound.info(bound.main);
    for (const auto& [name, value] : opt.overrides) {
        std::string key = upper(name);
        if (!mi.scalar_slots.count(key)) {
            err << path << ": error: --set " << key
                << ": the PROGRAM unit has no scalar of that name\n";
            return false;
        }
        out[key] = value;
    }
    return true;
}

// Shared body of run_file and run_capture: one of out/records is null.
int run_bound(const BoundProgram& bound, const std::string& path, const DriverOptions& opt,
              std::ostream* out, std::vector<RunRecord>* records, std::ostream& err) {
    if (!bound.main) {
        err << path << ": error: no PROGRAM unit to run\n";
        return kExitBadInput;
    }

    RunOptions ro;
    if (!build_overrides(bound, opt, path, err, ro.overrides)) return kExitBadInput;
    ro.time_limit_seconds = opt.time_limit_seconds;

    ro.on_print = [&](const std::vector<PrintItem>& items) {
        if (records) {
            for (const PrintItem& it : items)
                if (it.value.is_numeric())
                    records->push_back(RunRecord{it.name, primal_of(it.value)});
            return;
        }
        if (opt.format == OutputFormat::Structured) {
            for (const PrintItem& it : items)
                *out << it.name << ' ' << render_value(it.value) << '\n';
        } else {
            for (size_t i = 0; i < items.size(); i++)
                *out << (i ? " " : "") << render_value(items[i].value);
            *out << '\n';
        }
    };
    if (opt.dump_tapes && out)
        ro.on_tape = [&](const Tape& tape) { *out << tape.dump(); };

    Engine engine;
    try {
        run_program(bound, engine, ro);
    } catch (const RuntimeError& e) {
        err << e.diag().render(path) << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace

std::optional<BoundProgram> load_program(const std::string& path, std::ostream& err) {
    std::string src;
    if (!read_file(path, src)) {
        err << path << ": error: cannot open file\n";
        return std::nullopt;
    }
    try {
        BoundProgram bound = resolve_scopes(parse_program(tokenize(src)));
        std::vector<Diagnostic> bad = validate_ad_blocks(bound);
        if (!bad.empty()) {
            for (const Diagnostic& d : bad) err << d.render(path) << '\n';
            return std::nullopt;
        }
        return bound;
    } catch (const ParseError& e) {
        err << e.diag().render(path) << '\n';
    } catch (const SemaError& e) {
        err << e.diag().render(path) << '\n';
    }
    return std::nullopt;
}

int run_file(const std::string& path, const DriverOptions& opt, std::ostream& out,
             std::ostream& err) {
    std::optional<BoundProgram> bound = load_program(path, err);
    if (!bound) return kExitBadInput;
    return run_bound(*bound, path, opt, &out, nullptr, err);
}

int run_capture(const std::string& path, const DriverOptions& opt,
                std::vector<RunRecord>& records, std::ostream& err) {
    std::optional<BoundProgram> bound = load_program(path, err);
    if (!bound) return kExitBadInput;
    return run_bound(*bound, path, opt, nullptr, &records, err);
}

int dump_ast(const std::string& path, std::ostream& out, std::ostream& err) {
    std::string src;
    if (!read_file(path, src)) {
        err << path << ": error: cannot open file\n";
        return kExitBadInput;
    }
    try {
        out << print_program(parse_program(tokenize(src)));
    } catch (const ParseError& e) {
        err << e.diag().render(path) << '\n';
        return kExitBadInput;
    }
    return kExitOk;
}

int verify_manifest(const std::string& path, std::ostream& out, std::ostream& err) {
    std::string text;
    if (!read_file(path, text)) {
        err << path << ": error: cannot open file\n";
        return kExitBadInput;
    }
    Manifest manifest;
    try {
        manifest = parse_manifest(text);
    } catch (const ParseError& e) {
        err << e.diag().render(path) << '\n';
        return kExitBadInput;
    }

    std::string dir;
    size_t slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);

    int checks = 0;
    int failures = 0;
    for (const ManifestEntry& entry : manifest.entries) {
        DriverOptions opt;
        opt.overrides = entry.sets;
        std::vector<RunRecord> records;
        int rc = run_capture(dir + entry.program, opt, records, err);
        if (rc != kExitOk) {
            out << "FAIL " << entry.name << ": " << entry.program << " exited with code "
                << rc << '\n';
            failures++;
            continue;
        }
        for (const ManifestExpect& ex : entry.expects) {
            checks++;
            const RunRecord* got = nullptr;
            for (const RunRecord& r : records)
                if (r.name == ex.name) got = &r; // last one printed wins
            if (!got) {
                out << "FAIL " << entry.name << ' ' << ex.name << ": never printed\n";
                failures++;
                continue;
            }
            bool ok = std::fabs(got->value - ex.value) <= ex.tol;
            out << (ok ? "ok   " : "FAIL ") << entry.name << ' ' << ex.name << " = "
                << fmt_real(got->value) << " (want " << fmt_real(ex.value) << " +- "
                << fmt_real(ex.tol) << ", " << ex.provenance << ")\n";
            if (!ok) failures++;
        }
    }
    out << manifest.entries.size() << " entries, " << checks << " checks, " << failures
        << " failures\n";
    return failures ? kExitVerifyFail : kExitOk;
}

} // namespace farfel
