// Command-line frontend: approximate | loop | probe | realize | complete | tensor
//
// Flags mirror config-file keys one-to-one; --config names an optional JSON
// file whose values fill in any flag not given explicitly. Artifacts are
// deterministic for a fixed seed. LATINAPPROX_THREADS caps verification
// parallelism (results do not depend on it).

#include "latinapprox/serialize.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace latinapprox;

GroupModel parse_group(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "torus") return GroupModel::torus(arg.empty() ? 1 : std::stoi(arg));
    if (kind == "z") return GroupModel::finite(CayleyTable::cyclic(std::stoi(arg)));
    if (kind == "s3") return GroupModel::finite(CayleyTable::symmetric3());
    if (kind == "cayley") return GroupModel::finite(CayleyTable::from_csv(arg));
    if (kind == "real" || kind == "real_line") return GroupModel::real_line();
    if (kind == "affine" || kind == "affine_line") return GroupModel::affine_line();
    throw ConfigError("unknown group spec: " + spec +
                      " (use torus:D, z:N, s3, cayley:FILE, real, affine)");
}

std::vector<Rational> parse_rationals(const std::string& s) {
    std::vector<Rational> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ':' || ch == ',') {
            out.push_back(parse_rational(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(parse_rational(cur));
    return out;
}

CompactWindow parse_window(const GroupModel& model, const std::string& spec) {
    if (spec.empty()) {
        if (model.compact()) return CompactWindow::all();
        Box b;
        if (model.kind() == GroupKind::real_line) {
            b.axes.emplace_back(Rational(-3), Rational(3));
        } else {
            b.axes.emplace_back(Rational(1, 2), Rational(2));   // a
            b.axes.emplace_back(Rational(-1), Rational(1));     // b
        }
        return CompactWindow::of_box(b);
    }
    auto vals = parse_rationals(spec);
    Box b;
    if (vals.size() == 2) {
        b.axes.emplace_back(vals[0], vals[1]);
    } else if (vals.size() == 4) {
        b.axes.emplace_back(vals[0], vals[1]);
        b.axes.emplace_back(vals[2], vals[3]);
    } else {
        throw ConfigError("window spec needs lo:hi or alo:ahi:blo:bhi");
    }
    return CompactWindow::of_box(b);
}

struct Options {
    std::string group = "torus:1";
    int cells = 8;
    std::int64_t t = 2;
    std::int64_t samples = 1000000;
    std::uint64_t seed = 0;
    std::string out;
    std::string square_out;
    std::string window;
    std::string inner = "1";
    std::string amalgam_path;
    std::string input_path;
};

// Fills options from the config file for every flag not given on the line.
void apply_config(const std::string& path, CLI::App* cmd, Options& o) {
    if (path.empty()) return;
    json cfg;
    try {
        cfg = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    auto take = [&](const char* key, const char* flag, auto& dst) {
        if (cfg.contains(key) && cmd->count(flag) == 0) cfg.at(key).get_to(dst);
    };
    take("group", "--group", o.group);
    take("cells", "--cells", o.cells);
    take("t", "--t", o.t);
    take("samples", "--samples", o.samples);
    take("seed", "--seed", o.seed);
    take("out", "--out", o.out);
    take("square_out", "--square-out", o.square_out);
    take("window", "--window", o.window);
    take("inner", "--inner", o.inner);
    take("amalgam", "--amalgam", o.amalgam_path);
    take("in", "--in", o.input_path);
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_text_file(path, content);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite quasigroup approximation of unimodular groups"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its keys");

    Options o;
    int exit_code = 0;

    auto add_common = [&](CLI::App* cmd, bool sampling) {
        cmd->add_option("--group", o.group, "torus:D | z:N | s3 | cayley:FILE | real | affine");
        cmd->add_option("--cells", o.cells, "cells per axis (torus) or in total");
        cmd->add_option("--t", o.t, "group size hint for the amalgam");
        cmd->add_option("--seed", o.seed, "seed for all randomized stages");
        cmd->add_option("--out", o.out, "output path (default stdout)");
        if (sampling) cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
    };

    auto* approx = app.add_subcommand("approximate", "compact or locally compact pipeline");
    add_common(approx, false);
    approx->add_option("--square-out", o.square_out, "also write the Latin square as CSV");
    approx->add_option("--inner", o.inner, "inner target halfwidth (real line)");
    approx->callback([&] {
        apply_config(config_path, approx, o);
        GroupModel model = parse_group(o.group);
        PipelineRun run = model.compact()
                              ? approximate_compact(model, o.cells, o.t, o.seed)
                              : approximate_locally_compact(model, parse_rational(o.inner), o.cells,
                                                            o.t, o.seed);
        emit(o.out, run_to_json(run).dump(2) + "\n");
        if (!o.square_out.empty()) write_text_file(o.square_out, square_to_csv(run.map.square));
    });

    auto* loop = app.add_subcommand("loop", "compact pipeline plus loop conversion");
    add_common(loop, false);
    loop->add_option("--square-out", o.square_out, "also write the loop table as CSV");
    loop->callback([&] {
        apply_config(config_path, loop, o);
        GroupModel model = parse_group(o.group);
        PipelineRun run = loop_approximate(model, o.cells, o.t, o.seed);
        emit(o.out, run_to_json(run).dump(2) + "\n");
        if (!o.square_out.empty()) write_text_file(o.square_out, square_to_csv(run.map.square));
    });

    auto* probe = app.add_subcommand("probe", "line-sum disparity probe (exit 2 on violation)");
    add_common(probe, true);
    probe->add_option("--window", o.window, "lo:hi (real) or alo:ahi:blo:bhi (affine)");
    probe->callback([&] {
        apply_config(config_path, probe, o);
        GroupModel model = parse_group(o.group);
        CompactWindow window = parse_window(model, o.window);
        ProbeReport rep = unimodularity_probe(model, window, o.cells, o.samples, o.seed);
        emit(o.out, probe_to_json(rep).dump(2) + "\n");
        if (rep.exceeds_noise) exit_code = 2;
    });

    auto* realize = app.add_subcommand("realize", "realize an amalgam as a Latin square");
    realize->add_option("--amalgam", o.amalgam_path, "amalgam JSON")->required();
    realize->add_option("--seed", o.seed, "permutes candidate orders");
    realize->add_option("--out", o.out, "CSV output path");
    realize->callback([&] {
        apply_config(config_path, realize, o);
        IntegerAmalgam m = amalgam_from_json(json::parse(read_text_file(o.amalgam_path)));
        auto [sq, groups] = realize_amalgamation(m, o.seed);
        emit(o.out, square_to_csv(sq));
    });

    auto* complete = app.add_subcommand("complete", "embed a partial square into order 2N");
    complete->add_option("--in", o.input_path, "partial square CSV (-1 = empty)")->required();
    complete->add_option("--out", o.out, "CSV output path");
    complete->callback([&] {
        apply_config(config_path, complete, o);
        PartialLatinSquare p = partial_from_csv(read_text_file(o.input_path));
        emit(o.out, square_to_csv(complete_partial(p)));
    });

    auto* tensor = app.add_subcommand("tensor", "measure tensor of a partitioned window");
    add_common(tensor, true);
    tensor->add_option("--window", o.window, "window for non-compact groups");
    std::string mode = "exact";
    tensor->add_option("--mode", mode, "exact | mc");
    tensor->callback([&] {
        apply_config(config_path, tensor, o);
        GroupModel model = parse_group(o.group);
        CompactWindow window = parse_window(model, o.window);
        Partition part;
        switch (model.kind()) {
            case GroupKind::torus: part = lattice_partition(model, o.cells); break;
            case GroupKind::finite: part = finite_partition(model); break;
            default: part = window_partition(model, window, o.cells); break;
        }
        WTensor w = mode == "exact" ? w_exact(part, model, window)
                                    : w_montecarlo(part, model, window, o.samples, o.seed);
        emit(o.out, tensor_to_json(w).dump(2) + "\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
