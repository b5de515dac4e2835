// Command line front end: scene synthesis, voxelization, baseline-vs-pruned
// runs, pruning-ratio sweeps, and foreground statistics.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spsconv/config.hpp"
#include "spsconv/harness.hpp"
#include "spsconv/scene.hpp"
#include "spsconv/voxelize.hpp"

namespace {

using namespace spsconv;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw io_error("cannot open for writing: " + out_path);
    out << text;
    if (!out) throw io_error("write failed: " + out_path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<double> parse_ratios(const std::string& text) {
    std::vector<double> ratios;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) throw config_error("--ratios: empty entry");
        try {
            size_t pos = 0;
            const double v = std::stod(cur, &pos);
            if (pos != cur.size()) throw std::invalid_argument("trailing characters");
            ratios.push_back(v);
        } catch (const std::exception&) {
            throw config_error("--ratios: expected a number, got '" + cur + "'");
        }
        cur.clear();
    };
    for (char ch : text) {
        if (ch == ',')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(ch)))
            cur += ch;
    }
    flush();
    return ratios;
}

KvMap load_config(const std::string& path, bool seed_given, uint64_t seed) {
    KvMap kv = parse_config_file(path);
    if (seed_given) kv["seed"] = std::to_string(seed);
    reject_unknown_keys(kv);
    return kv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse 3D convolution harness with magnitude-based spatial pruning"};
    app.require_subcommand(1);

    std::string config_path, input_path, labels_path, out_path, ratios_text;
    uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        cmd->add_option("--config", config_path, "flat key = value configuration file")
            ->required();
        if (needs_input)
            cmd->add_option("--input", input_path, "point file (.txt or .bin)")->required();
        cmd->add_option("--out", out_path, "output path (default: stdout)");
        cmd->add_option("--seed", seed, "override the config's seed")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene + label sidecar");
    add_common(synth, false);
    CLI::App* voxelize_cmd = app.add_subcommand("voxelize", "quantize a point file onto the grid");
    add_common(voxelize_cmd, true);
    CLI::App* run = app.add_subcommand("run", "compare baseline and pruned backbones");
    add_common(run, true);
    CLI::App* sweep = app.add_subcommand("sweep", "FLOP totals across pruning ratios");
    add_common(sweep, true);
    sweep->add_option("--ratios", ratios_text, "comma separated pruning ratios")->required();
    CLI::App* stats = app.add_subcommand("stats", "foreground fraction per stage");
    add_common(stats, true);
    stats->add_option("--labels", labels_path, "per-point 0/1 label file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        const KvMap kv = load_config(config_path, seed_given, seed);

        if (synth->parsed()) {
            if (out_path.empty())
                throw config_error("synth writes a point file; --out is required");
            if (!has_suffix(out_path, ".txt") && !has_suffix(out_path, ".bin"))
                throw config_error("synth output must end in .txt or .bin");
            const Scene scene = synth_scene(scene_from_config(kv));
            if (has_suffix(out_path, ".txt"))
                write_points_txt(scene.points, out_path);
            else
                write_points_bin(scene.points, out_path);
            write_labels(scene.labels, out_path + ".labels");
        } else if (voxelize_cmd->parsed()) {
            write_output(voxelize_report_json(kv, read_points(input_path), input_path), out_path);
        } else if (run->parsed()) {
            write_output(run_report_json(kv, read_points(input_path), input_path), out_path);
        } else if (sweep->parsed()) {
            write_output(sweep_csv(kv, read_points(input_path), parse_ratios(ratios_text)),
                         out_path);
        } else if (stats->parsed()) {
            write_output(stats_report_json(kv, read_points(input_path), read_labels(labels_path),
                                           input_path, labels_path),
                         out_path);
        }
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
