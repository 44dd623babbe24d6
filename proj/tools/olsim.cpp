// olsim - command line front end: run, preset, validate, list-presets

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "olsim/cli/config.hpp"
#include "olsim/cli/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw olsim::ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int execute(const olsim::cli::ExperimentSpec& spec, const olsim::cli::RunOptions& opt) {
    const auto rep = olsim::cli::run(spec, opt);
    for (const auto& p : rep.points) {
        for (const auto& w : p.warnings)
            std::cerr << "warning: " << (p.label.empty() ? "" : p.label + ": ") << w << '\n';
        if (!p.error.empty())
            std::cerr << "error: " << p.error << '\n';
        for (const auto& f : p.files)
            std::cout << (opt.out_dir / f).string() << '\n';
    }
    std::cout << rep.manifest.string() << '\n';
    return rep.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"olsim: emission of trapped lattice atoms into a free-atom reservoir"};
    app.require_subcommand(1);

    olsim::cli::RunOptions opt;
    std::string spec_path;
    std::string out_dir;
    std::string preset_name;
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--threads", opt.threads, "worker threads for sweep points")->check(CLI::PositiveNumber);
        cmd->add_option("--tolerance-scale", opt.tolerance_scale, "multiplies solver tolerances")
            ->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run an experiment spec");
    run->add_option("--spec", spec_path, "spec file")->required();
    add_run_flags(run);

    auto* preset = app.add_subcommand("preset", "print a figure preset, or run it when --out is given");
    preset->add_option("name", preset_name, "preset name")->required();
    add_run_flags(preset);

    auto* validate = app.add_subcommand("validate", "check a spec without running it");
    validate->add_option("--spec", spec_path, "spec file")->required();

    app.add_subcommand("list-presets", "list the available presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!out_dir.empty())
            opt.out_dir = out_dir;
        if (run->parsed()) {
            const auto spec = olsim::cli::parse_spec(read_file(spec_path), spec_path);
            return execute(spec, opt);
        }
        if (preset->parsed()) {
            const auto& p = olsim::cli::find_preset(preset_name);
            if (out_dir.empty()) {
                std::cout << p.text;
                return 0;
            }
            return execute(olsim::cli::preset(preset_name), opt);
        }
        if (validate->parsed()) {
            const auto d = olsim::cli::validate_text(read_file(spec_path), spec_path);
            for (const auto& w : d.warnings)
                std::cout << "warning: " << w << '\n';
            for (const auto& e : d.errors)
                std::cout << "error: " << e << '\n';
            std::cout << d.errors.size() << " error(s), " << d.warnings.size() << " warning(s)\n";
            return d.ok() ? 0 : 2;
        }
        for (const auto& p : olsim::cli::presets())
            std::cout << p.name << "  " << p.description << '\n';
        return 0;
    } catch (const olsim::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const olsim::UnknownPreset& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
