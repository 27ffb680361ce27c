#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deflate.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Deflation, singular Newton and alpha-theory certificates for multiple roots"};
    std::string command;
    std::string input;
    std::optional<int> order;
    std::optional<int> steps;
    std::optional<std::string> backend;
    std::optional<std::string> gate_norm;
    std::optional<int> max_iters;
    bool pretty = false;
    bool compact = false;

    app.add_option("command", command, "rank | deflate | solve | certify")
        ->required()
        ->check(CLI::IsMember({"rank", "deflate", "solve", "certify"}));
    app.add_option("--input", input, "system or matrix JSON file")->required();
    app.add_option("--order", order, "truncation order")->check(CLI::PositiveNumber);
    app.add_option("--steps", steps, "Newton steps for solve")->check(CLI::PositiveNumber);
    app.add_option("--norm-backend", backend, "complex | appendix")->check(CLI::IsMember({"complex", "appendix"}));
    app.add_option("--gate-norm", gate_norm, "euclidean | leading")->check(CLI::IsMember({"euclidean", "leading"}));
    app.add_option("--max-iters", max_iters, "cap on kerneling rounds")->check(CLI::NonNegativeNumber);
    auto* fp = app.add_flag("--pretty", pretty, "indented JSON");
    app.add_flag("--json", compact, "compact JSON (default)")->excludes(fp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    deflate::CommandOptions opt;
    opt.order = order;
    opt.max_iters = max_iters;
    if (steps) opt.steps = *steps;

    try {
        if (backend) opt.backend = deflate::parse_backend(*backend);
        if (gate_norm) opt.gate_norm = deflate::parse_gate_norm(*gate_norm);
        const deflate::SystemInput in = deflate::parse_system(input, opt);
        if (in.matrix && command != "rank") throw deflate::ParseError("a matrix input only supports the rank command");

        deflate::CommandResult res;
        if (command == "rank") res = deflate::cmd_rank(in);
        else if (command == "deflate") res = deflate::cmd_deflate(in, opt);
        else if (command == "solve") res = deflate::cmd_solve(in, opt);
        else res = deflate::cmd_certify(in, opt);

        std::cout << res.output.dump(pretty ? 2 : -1) << '\n';
        return res.exit_code;
    } catch (const deflate::Error& e) {
        std::cerr << "deflate: " << deflate::to_string(e.kind()) << ": " << e.what() << '\n';
        return deflate::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "deflate: internal error: " << e.what() << '\n';
        return 3;
    }
}
