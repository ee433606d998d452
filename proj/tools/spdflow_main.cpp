// spdflow: curvature-driven flows on fields of 3x3 SPD matrices.
//
// Subcommands: generate, noise, flow, metrics, glyphs.
// Exit codes: 0 success, 1 I/O failure, 2 usage/config error, 3 numerical
// failure (strict SPD violation or detected instability).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdflow/errors.hpp"
#include "spdflow/field_io.hpp"
#include "spdflow/flows.hpp"
#include "spdflow/metrics.hpp"
#include "spdflow/version.hpp"

namespace {

using namespace spdflow;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string format_g17(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// "32x32" or "32x32x16"
std::array<int, 3> parse_dims(const std::string& text) {
    std::array<int, 3> dims = {0, 0, 1};
    std::istringstream stream(text);
    char sep = 'x';
    if (!(stream >> dims[0] >> sep >> dims[1]) || sep != 'x') {
        throw std::invalid_argument("--dims expects NXxNY or NXxNYxNZ, got '" + text + "'");
    }
    if (stream >> sep) {
        if (sep != 'x' || !(stream >> dims[2])) {
            throw std::invalid_argument("--dims expects NXxNY or NXxNYxNZ, got '" + text + "'");
        }
    }
    std::string rest;
    if (stream >> rest) {
        throw std::invalid_argument("--dims has trailing characters: '" + text + "'");
    }
    return dims;
}

// "1,1" or "1,1,2"
std::array<double, 3> parse_spacing(const std::string& text) {
    std::array<double, 3> spacing = {1.0, 1.0, 1.0};
    std::istringstream stream(text);
    std::string token;
    int count = 0;
    while (std::getline(stream, token, ',')) {
        if (count >= 3) {
            throw std::invalid_argument("--spacing takes at most 3 values");
        }
        spacing[static_cast<std::size_t>(count++)] = std::stod(token);
    }
    if (count < 2) {
        throw std::invalid_argument("--spacing takes 2 or 3 comma-separated values");
    }
    return spacing;
}

// Six comma-separated vech values [P11,P22,P33,P12,P23,P13].
Matrix3 parse_tensor(const std::string& text, const char* flag) {
    Vector6 v;
    std::istringstream stream(text);
    std::string token;
    int count = 0;
    while (std::getline(stream, token, ',')) {
        if (count >= 6) {
            throw std::invalid_argument(std::string(flag) + " takes exactly 6 values");
        }
        v[count++] = std::stod(token);
    }
    if (count != 6) {
        throw std::invalid_argument(std::string(flag) + " takes exactly 6 values");
    }
    return unvech(v);
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) {
        throw IoError("cannot open manifest '" + path + "' for writing");
    }
    for (const auto& [key, value] : entries) {
        file << key << "=" << value << "\n";
    }
    if (!file) {
        throw IoError("short write to manifest '" + path + "'");
    }
}

struct GenerateArgs {
    std::string pattern = "constant";
    std::string dims = "32x32";
    std::string spacing;
    std::string tensor_a;
    std::string tensor_b;
    double rotation_rate = 0.5;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    SyntheticSpec spec;
    if (args.pattern == "constant") {
        spec.pattern = SyntheticPattern::constant;
    } else if (args.pattern == "two_region") {
        spec.pattern = SyntheticPattern::two_region;
    } else if (args.pattern == "smooth_rotation") {
        spec.pattern = SyntheticPattern::smooth_rotation;
    } else if (args.pattern == "crossing") {
        spec.pattern = SyntheticPattern::crossing;
    } else {
        throw std::invalid_argument("unknown pattern '" + args.pattern + "'");
    }
    spec.dims = parse_dims(args.dims);
    if (!args.spacing.empty()) {
        spec.spacing = parse_spacing(args.spacing);
    }
    if (!args.tensor_a.empty()) {
        spec.tensor_a = parse_tensor(args.tensor_a, "--tensor-a");
    }
    if (!args.tensor_b.empty()) {
        spec.tensor_b = parse_tensor(args.tensor_b, "--tensor-b");
    }
    spec.rotation_rate = args.rotation_rate;

    TensorField field = [&] {
        try {
            return generate_synthetic(spec);
        } catch (const std::domain_error& err) {
            // Bad region tensors are flag errors, not runtime numerics.
            throw std::invalid_argument(err.what());
        }
    }();
    write_field(field, args.out);
    std::cout << "generated " << args.pattern << " field " << field.dims()[0] << "x"
              << field.dims()[1] << "x" << field.dims()[2] << " (" << field.spatial_dim()
              << "-D) -> " << args.out << "\n";
    return kExitOk;
}

struct NoiseArgs {
    std::string in;
    std::string out;
    double sigma = 0.3;
    std::uint64_t seed = 0;
    std::string model = "congruence_exp";
};

int cmd_noise(const NoiseArgs& args) {
    NoiseModel model;
    if (args.model == "congruence_exp") {
        model = NoiseModel::congruence_exponential;
    } else if (args.model == "additive_reject") {
        model = NoiseModel::additive_rejection;
    } else {
        throw std::invalid_argument("unknown noise model '" + args.model + "'");
    }
    const TensorField field = read_field(args.in);
    const TensorField noisy = add_noise(field, args.sigma, args.seed, model);
    write_field(noisy, args.out);
    std::cout << "noised " << args.in << " (sigma=" << format_g17(args.sigma)
              << ", seed=" << args.seed << ", model=" << args.model << ") -> "
              << args.out << "\n";
    return kExitOk;
}

struct FlowArgs {
    std::string in;
    std::string out;
    std::string kind = "tv";
    double dt = 0.01;
    int steps = 50;
    std::optional<double> k;
    double sigma = 1.0;
    std::string safeguard = "clamp";
    double eig_floor = 1e-8;
    std::uint64_t seed = 0;
    bool verbose = false;
};

int cmd_flow(const FlowArgs& args) {
    FlowConfig config;
    config.kind = flow_kind_from_string(args.kind);
    config.dt = args.dt;
    config.steps = args.steps;
    config.k = args.k;
    config.sigma = args.sigma;
    config.safeguard = safeguard_from_string(args.safeguard);
    config.eig_floor = args.eig_floor;
    config.seed = args.seed;

    const TensorField input = read_field(args.in);
    const auto start = std::chrono::steady_clock::now();
    const FlowResult result = run_flow(input, config);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_field(result.field, args.out);

    if (args.verbose) {
        int step = 0;
        for (const auto& record : result.diagnostics.steps) {
            std::cout << "step " << ++step << " energy=" << format_g17(record.volume_energy)
                      << " max|H|=" << format_g17(record.max_abs_curvature)
                      << " min_eig=" << format_g17(record.min_eigenvalue)
                      << " activations=" << record.safeguard_activations << "\n";
        }
    }

    const auto& d = input.dims();
    std::vector<std::pair<std::string, std::string>> manifest = {
        {"tool", "spdflow"},
        {"version", kVersion},
        {"command", "flow"},
        {"input", args.in},
        {"output", args.out},
        {"kind", to_string(config.kind)},
        {"dt", format_g17(config.dt)},
        {"steps", std::to_string(config.steps)},
        {"k_rule", config.k.has_value() ? "user" : "median_smoothed_magnitude"},
        {"k", std::isnan(result.diagnostics.resolved_k)
                  ? "unused"
                  : format_g17(result.diagnostics.resolved_k)},
        {"sigma", format_g17(config.sigma)},
        {"safeguard", to_string(config.safeguard)},
        {"eig_floor", format_g17(config.eig_floor)},
        {"seed", std::to_string(config.seed)},
        {"dims", std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" +
                     std::to_string(d[2])},
        {"spatial_dim", std::to_string(input.spatial_dim())},
        {"ordering", "vech6:[11,22,33,12,23,13]"},
        {"initial_volume_energy", format_g17(result.diagnostics.initial_volume_energy)},
        {"final_volume_energy",
         format_g17(result.diagnostics.steps.empty()
                        ? result.diagnostics.initial_volume_energy
                        : result.diagnostics.steps.back().volume_energy)},
        {"safeguard_activations",
         std::to_string(result.diagnostics.total_safeguard_activations())},
        {"steps_recorded", std::to_string(result.diagnostics.steps.size())},
        {"wall_seconds", format_g17(wall)},
    };
    write_manifest(args.out + ".manifest", manifest);

    std::cout << "flow " << to_string(config.kind) << " " << config.steps
              << " steps (dt=" << format_g17(config.dt) << ") -> " << args.out
              << " [activations=" << result.diagnostics.total_safeguard_activations()
              << "]\n";
    return kExitOk;
}

struct MetricsArgs {
    std::string field;
    std::string reference;
};

int cmd_metrics(const MetricsArgs& args) {
    const TensorField field = read_field(args.field);
    const TensorField reference = read_field(args.reference);
    const ErrorReport report = field_error(field, reference);
    std::cout << report.to_key_values();
    return kExitOk;
}

struct GlyphArgs {
    std::string in;
    std::string out;
};

int cmd_glyphs(const GlyphArgs& args) {
    const TensorField field = read_field(args.in);
    export_glyphs(field, args.out);
    std::cout << "wrote " << field.voxel_count() << " glyph rows -> " << args.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature-driven flows on SPD(3) tensor fields"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic ground-truth field");
    generate->add_option("--pattern", gen.pattern,
                         "constant|two_region|smooth_rotation|crossing");
    generate->add_option("--dims", gen.dims, "grid extents, NXxNY or NXxNYxNZ");
    generate->add_option("--spacing", gen.spacing, "voxel spacing, comma separated");
    generate->add_option("--tensor-a", gen.tensor_a,
                         "region tensor vech [P11,P22,P33,P12,P23,P13], comma separated");
    generate->add_option("--tensor-b", gen.tensor_b, "secondary region tensor vech");
    generate->add_option("--rotation-rate", gen.rotation_rate,
                         "smooth_rotation: turns across the x extent");
    generate->add_option("--out", gen.out, "output .spdf path")->required();

    NoiseArgs noise;
    CLI::App* noise_cmd = app.add_subcommand("noise", "add geometry-respecting noise");
    noise_cmd->add_option("--in", noise.in, "input .spdf path")->required();
    noise_cmd->add_option("--out", noise.out, "output .spdf path")->required();
    noise_cmd->add_option("--sigma", noise.sigma, "noise amplitude (>= 0)");
    noise_cmd->add_option("--seed", noise.seed, "RNG seed");
    noise_cmd->add_option("--model", noise.model, "congruence_exp|additive_reject");

    FlowArgs flow;
    CLI::App* flow_cmd = app.add_subcommand("flow", "run a curvature flow");
    flow_cmd->add_option("--in", flow.in, "input .spdf path")->required();
    flow_cmd->add_option("--out", flow.out, "output .spdf path")->required();
    flow_cmd->add_option("--kind", flow.kind, "tv|rmc|modified_rmc|self_snakes");
    flow_cmd->add_option("--dt", flow.dt, "time step (default 0.01)");
    flow_cmd->add_option("--steps", flow.steps, "step count (default 50)");
    double k_value = 0.0;
    CLI::Option* k_opt =
        flow_cmd->add_option("--k", k_value,
                             "edge-stopping constant (default: median of the initial "
                             "smoothed magnitude)");
    flow_cmd->add_option("--sigma", flow.sigma, "Gaussian kernel std-dev in voxels");
    flow_cmd->add_option("--safeguard", flow.safeguard, "clamp|reject_step|strict");
    flow_cmd->add_option("--eig-floor", flow.eig_floor, "relative eigenvalue floor");
    flow_cmd->add_option("--seed", flow.seed, "recorded in the manifest");
    flow_cmd->add_flag("--verbose", flow.verbose, "print per-step diagnostics");

    MetricsArgs metrics;
    CLI::App* metrics_cmd = app.add_subcommand("metrics", "compare a field to a reference");
    metrics_cmd->add_option("--field", metrics.field, "field .spdf path")->required();
    metrics_cmd->add_option("--reference", metrics.reference, "reference .spdf path")
        ->required();

    GlyphArgs glyphs;
    CLI::App* glyphs_cmd = app.add_subcommand("glyphs", "export an ellipsoid glyph table");
    glyphs_cmd->add_option("--in", glyphs.in, "input .spdf path")->required();
    glyphs_cmd->add_option("--out", glyphs.out, "output .csv path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the parse diagnostic
        return kExitUsage;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(gen);
        }
        if (noise_cmd->parsed()) {
            return cmd_noise(noise);
        }
        if (flow_cmd->parsed()) {
            if (k_opt->count() > 0) {
                flow.k = k_value;
            }
            return cmd_flow(flow);
        }
        if (metrics_cmd->parsed()) {
            return cmd_metrics(metrics);
        }
        if (glyphs_cmd->parsed()) {
            return cmd_glyphs(glyphs);
        }
    } catch (const IoError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& err) {  // includes NumericalError
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
