// Command-line front end: scoring, simulation, presets, synthetic data,
// estimation, benchmarking and the REST service.

#include "orthoplan/benchmark.hpp"
#include "orthoplan/config.hpp"
#include "orthoplan/presets.hpp"
#include "orthoplan/serialization.hpp"
#include "orthoplan/service.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace orthoplan;

namespace {

void emit(const Json& doc, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << doc.dump(2) << '\n';
    } else {
        write_json_file(out, doc);
    }
}

std::vector<FusionConfig> parse_modes(const std::string& list, const FusionConfig& base) {
    std::vector<FusionConfig> modes;
    std::stringstream in(list);
    std::string name;
    while (std::getline(in, name, ',')) {
        if (!name.empty()) modes.push_back(parse_mode(name, base));
    }
    if (modes.empty()) throw std::invalid_argument("--modes selects nothing");
    return modes;
}

std::optional<CrowdingMetadata> read_crowding(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return crowding_from_json(read_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthoplan: clear-aligner plan scoring, staging and estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "TOML config file (default: $ORTHOPLAN_CONFIG)");

    std::string plan_path;
    std::string arch_path;
    std::string crowding_path;
    std::string out;

    auto* score = app.add_subcommand("score", "Score a movement plan against an arch");
    score->add_option("plan", plan_path, "plan JSON")->required();
    score->add_option("arch", arch_path, "arch JSON")->required();
    score->add_option("--crowding", crowding_path, "crowding metadata JSON");
    score->add_option("--out", out, "write the score here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "Generate the staged frame sequence of a plan");
    simulate->add_option("plan", plan_path, "plan JSON")->required();
    simulate->add_option("arch", arch_path, "arch JSON")->required();
    simulate->add_option("--out", out, "frames JSON output")->required();

    std::string preset_key;
    std::string frames_out;
    auto* demo = app.add_subcommand("demo", "Score and simulate a bundled preset case");
    demo->add_option("preset", preset_key, "preset key")->required()->check(CLI::IsMember(preset_keys()));
    demo->add_option("--out", out, "write the case and score here instead of stdout");
    demo->add_option("--frames", frames_out, "also write the frame sequence");

    ScenarioSpec spec;
    std::string archetype = "ovoid";
    std::string severity = "moderate";
    std::string arch_name = "upper";
    std::string out_dir;
    auto* generate = app.add_subcommand("generate", "Write a synthetic scenario (cloud, arch, plan, heatmaps)");
    generate->add_option("--archetype", archetype, "tapered | ovoid | square | narrow_v");
    generate->add_option("--severity", severity, "mild | moderate | severe");
    generate->add_option("--missing", spec.missing_count, "missing teeth, 0..2")->check(CLI::Range(0, 2));
    generate->add_option("--seed", spec.seed, "scenario seed");
    generate->add_option("--arch", arch_name, "upper | lower");
    generate->add_option("--out-dir", out_dir, "output directory")->required();

    std::string cloud_path;
    std::string heatmap_path;
    std::string mode_name_opt;
    auto* estimate = app.add_subcommand("estimate", "Estimate tooth states from a point cloud");
    estimate->add_option("cloud", cloud_path, "cloud JSON")->required();
    estimate->add_option("--heatmaps", heatmap_path, "landmark heatmap file for the landmark agent");
    estimate->add_option("--mode", mode_name_opt, "parallel | sequential | agent1 | agent2");
    estimate->add_option("--out", out, "arch JSON output (default stdout)");

    int n = 200;
    std::uint64_t seed = 42;
    std::string modes = "parallel,sequential,agent1,agent2";
    std::string csv;
    int workers = -1;
    auto* bench = app.add_subcommand("benchmark", "Run the synthetic benchmark suite");
    bench->add_option("--n", n, "scenario count")->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed, "master seed");
    bench->add_option("--modes", modes, "comma-separated orchestrator modes");
    bench->add_option("--out", out, "report JSON (default stdout)");
    bench->add_option("--csv", csv, "per-scenario CSV");
    bench->add_option("--workers", workers, "worker threads (0 = all cores)");

    int port = -1;
    std::string data_dir;
    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--port", port, "listen port")->check(CLI::Range(0, 65535));
    serve->add_option("--data-dir", data_dir, "document store directory (default: $ORTHOPLAN_DATA_DIR)");

    CLI11_PARSE(app, argc, argv);

    try {
        AppConfig cfg = resolve_config(config_path);

        if (*score) {
            const TreatmentScore result = score_plan(plan_from_json(read_json_file(plan_path)),
                                                     arch_from_json(read_json_file(arch_path)),
                                                     read_crowding(crowding_path), cfg.scoring);
            emit(to_json(result), out);
        } else if (*simulate) {
            const FrameSequence frames = generate_frames(arch_from_json(read_json_file(arch_path)),
                                                         plan_from_json(read_json_file(plan_path)),
                                                         cfg.scoring.staging);
            emit(to_json(frames), out);
            std::cerr << frames.aligners << " aligners, " << frames.frames.size() - 1 << " frames\n";
        } else if (*demo) {
            const PresetCase preset = load_preset(preset_key);
            const TreatmentScore result =
                score_plan(preset.data.target_plan, preset.data.ground_truth, preset.data.crowding, cfg.scoring);
            const FrameSequence frames = generate_frames(preset.data.ground_truth, preset.data.target_plan,
                                                         cfg.scoring.staging);
            emit({{"schema_version", kSchemaVersion},
                  {"preset", preset.key},
                  {"label", preset.label},
                  {"arch", to_json(preset.data.ground_truth)},
                  {"plan", to_json(preset.data.target_plan)},
                  {"crowding", to_json(preset.data.crowding)},
                  {"score", to_json(result)},
                  {"staging", to_json(frames.summary)}},
                 out);
            if (!frames_out.empty()) write_json_file(frames_out, to_json(frames));
        } else if (*generate) {
            spec.archetype = parse_archetype(archetype);
            spec.severity = parse_severity_band(severity);
            spec.arch = parse_arch(arch_name);
            const SyntheticCase sc = generate_scenario(spec, cfg.benchmark.synthetic);
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            write_json_file((dir / "cloud.json").string(), to_json(sc.cloud));
            write_json_file((dir / "arch.json").string(), to_json(sc.ground_truth));
            write_json_file((dir / "plan.json").string(), to_json(sc.target_plan));
            write_json_file((dir / "crowding.json").string(), to_json(sc.crowding));
            SyntheticOracleSource::Options heat = cfg.heatmaps;
            heat.seed = spec.seed;
            write_heatmap_file(dir / "heatmaps.ophm", SyntheticOracleSource(sc.ground_truth, heat).predict(sc.cloud));
            std::cerr << "wrote " << sc.ground_truth.present_count() << "-tooth scenario to " << dir.string() << '\n';
        } else if (*estimate) {
            FusionConfig fusion = mode_name_opt.empty() ? cfg.fusion : parse_mode(mode_name_opt, cfg.fusion);
            std::shared_ptr<const HeatmapSource> source;
            if (!heatmap_path.empty()) {
                source = std::make_shared<FileHeatmapSource>(heatmap_path);
            } else {
                source = service_heatmap_source(cfg);
            }
            const Orchestrator orchestrator(std::make_shared<SegmentationAgent>(cfg.segmentation),
                                            std::make_shared<LandmarkAgent>(source));
            const PipelineResult result = orchestrator.run(fusion, cloud_from_json(read_json_file(cloud_path)));
            emit(to_json(result.arch), out);
            std::cerr << to_json(result.provenance).dump(2) << '\n';
        } else if (*bench) {
            BenchmarkOptions options = benchmark_options(cfg);
            if (workers >= 0) options.workers = workers;
            BenchmarkReport report = run_benchmark(enumerate_suite(n, seed), parse_modes(modes, cfg.fusion), options);
            report.master_seed = seed;
            emit(to_json(report), out);
            if (!csv.empty()) {
                std::ofstream f(csv, std::ios::binary | std::ios::trunc);
                f << report_csv(report);
                if (!f) throw std::runtime_error("cannot write " + csv);
            }
            for (const ModeStats& m : report.modes) {
                std::fprintf(stderr, "%-10s quality %6.2f +- %5.2f  feasible %5.1f%%  failed %zu  time %.4f s\n",
                             m.mode.c_str(), m.mean_quality, m.sd_quality, 100.0 * m.feasibility,
                             m.n - m.succeeded, m.mean_seconds);
            }
        } else if (*serve) {
            if (port >= 0) cfg.service.port = port;
            if (!data_dir.empty()) cfg.service.data_dir = data_dir;
            auto store = std::make_shared<PatientStore>(cfg.service.data_dir);
            auto orchestrator = std::make_shared<const Orchestrator>(
                std::make_shared<SegmentationAgent>(cfg.segmentation),
                std::make_shared<LandmarkAgent>(service_heatmap_source(cfg)));
            ServiceApi api(cfg, store, orchestrator);
            serve_http(api, cfg.service);
        }
    } catch (const PlanValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
