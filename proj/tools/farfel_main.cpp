#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "farfel/driver.hpp"
#include "farfel/manifest.hpp"

namespace {

struct RunArgs {
    std::string file;
    std::vector<std::string> sets;
    long long iters = 0;
    std::string format = "text";
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("file", args.file, "FARFEL source file")->required();
    cmd->add_option("--set", args.sets, "Override a PROGRAM-unit scalar, NAME=NUMBER");
    cmd->add_option("--iters", args.iters, "Shorthand for --set N=<count>")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", args.format, "Output format")
        ->check(CLI::IsMember({"text", "structured"}));
}

// Turns parsed flags into driver options; usage errors exit here.
int fill_options(const RunArgs& args, farfel::DriverOptions& opt) {
    for (const std::string& s : args.sets) {
        size_t eq = s.find('=');
        farfel::Value v;
        if (eq == std::string::npos || eq == 0 || !farfel::parse_numeric(s.substr(eq + 1), v)) {
            std::cerr << "farfel: --set needs NAME=NUMBER, got `" << s << "`\n";
            return farfel::kExitUsage;
        }
        opt.overrides.emplace_back(s.substr(0, eq), v);
    }
    // Appended last so --iters wins over an explicit --set N=...
    if (args.iters) opt.overrides.emplace_back("N", farfel::Value::integer(args.iters));
    opt.format = args.format == "structured" ? farfel::OutputFormat::Structured
                                             : farfel::OutputFormat::Text;
    return farfel::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FARFEL: a Fortran-flavored language with differentiation blocks"};
    app.require_subcommand(1);

    RunArgs run_args;
    RunArgs tape_args;
    std::string verify_path;
    std::string ast_path;

    CLI::App* run = app.add_subcommand("run", "Execute a program");
    add_run_options(run, run_args);

    CLI::App* verify = app.add_subcommand("verify", "Check a corpus manifest's expectations");
    verify->add_option("manifest", verify_path, "Manifest file")->required();

    CLI::App* ast = app.add_subcommand("dump-ast", "Parse and print the canonical form");
    ast->add_option("file", ast_path, "FARFEL source file")->required();

    CLI::App* tape = app.add_subcommand("dump-tape", "Run and print every reverse tape");
    add_run_options(tape, tape_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "farfel: " << e.what() << '\n' << app.help();
        return farfel::kExitUsage;
    }

    if (run->parsed() || tape->parsed()) {
        RunArgs& args = run->parsed() ? run_args : tape_args;
        farfel::DriverOptions opt;
        if (int rc = fill_options(args, opt)) return rc;
        opt.dump_tapes = tape->parsed();
        return farfel::run_file(args.file, opt, std::cout, std::cerr);
    }
    if (verify->parsed()) return farfel::verify_manifest(verify_path, std::cout, std::cerr);
    return farfel::dump_ast(ast_path, std::cout, std::cerr);
}
