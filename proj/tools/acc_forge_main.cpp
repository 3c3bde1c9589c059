// acc-forge: build audio-editing pair datasets, derive commonality targets,
// emit instruction-tuning manifests, and score caption predictions.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "accforge/harness.hpp"
#include "accforge/infer_client.hpp"

namespace {

accforge::SplitSpec parse_split(const std::string& text, uint64_t seed) {
    accforge::SplitSpec spec;
    spec.seed = seed;
    double parts[3];
    char trailing;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &parts[0], &parts[1], &parts[2], &trailing) !=
        3) {
        accforge::raise(accforge::ErrorCode::InvalidArgument,
                        "--split expects three comma-separated fractions, got \"" + text + "\"");
    }
    spec.train = parts[0];
    spec.validation = parts[1];
    spec.test = parts[2];
    accforge::validate(spec);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acc-forge: audio-editing pair construction and caption scoring toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    accforge::RunConfig config;
    std::string out_dir = "out";
    std::string split_text = "0.8,0.1,0.1";
    accforge::EndpointConfig endpoint;

    app.add_option("--seed", config.seed, "Run seed for sampling, mixing, and splits")
        ->envname("ACCFORGE_SEED")
        ->capture_default_str();
    app.add_option("--out", out_dir, "Output directory")
        ->envname("ACCFORGE_OUT")
        ->capture_default_str();
    app.add_option("--parallelism", config.parallelism,
                   "Worker threads for synthesis / in-flight inference requests")
        ->envname("ACCFORGE_PARALLELISM")
        ->capture_default_str();
    app.add_option("--snr-min", config.snr_min, "Lower bound of the SNR draw (dB)")
        ->envname("ACCFORGE_SNR_MIN")
        ->capture_default_str();
    app.add_option("--snr-max", config.snr_max, "Upper bound of the SNR draw (dB)")
        ->envname("ACCFORGE_SNR_MAX")
        ->capture_default_str();
    app.add_option("--split", split_text, "train,val,test fractions")
        ->envname("ACCFORGE_SPLIT")
        ->capture_default_str();
    app.add_option("--endpoint", endpoint.url, "Inference endpoint URL")
        ->envname("ACCFORGE_ENDPOINT");
    app.set_config("--config", "", "Read defaults from a TOML/INI config file")
        ->envname("ACCFORGE_CONFIG");

    // build-pairs
    auto* build = app.add_subcommand(
        "build-pairs", "Mix event sounds into base clips and write the edit-pair manifest");
    std::string bases_path;
    std::string events_path;
    size_t triple_count = 0;
    bool lenient = false;
    build->add_option("--bases", bases_path, "Captioned base corpus manifest (jsonl)")
        ->required();
    build->add_option("--events", events_path, "Event sound library manifest (jsonl)")
        ->required();
    build->add_option("--triples", triple_count, "Number of (base, event, event) triples")
        ->required();
    build->add_option("--sample-rate", config.sample_rate, "Working sample rate (Hz)")
        ->capture_default_str();
    build->add_flag("--lenient", lenient, "Collect malformed manifest rows instead of failing");

    // derive-acc
    auto* derive = app.add_subcommand(
        "derive-acc", "Attach the commonality target to each pair row");
    std::string pairs_path;
    derive->add_option("--pairs", pairs_path, "Pair manifest from build-pairs")->required();

    // emit-manifests
    auto* emit = app.add_subcommand(
        "emit-manifests", "Write AC/ADC/ACC instruction manifests with group-aware splits");
    emit->add_option("--pairs", pairs_path, "Pair manifest from build-pairs or derive-acc")
        ->required();
    emit->add_option("--ac-prompt", config.ac_prompt, "Prompt for captioning samples")
        ->capture_default_str();
    emit->add_option("--adc-prompt", config.adc_prompt, "Prompt for difference samples")
        ->capture_default_str();
    emit->add_option("--acc-prompt", config.acc_prompt, "Prompt for commonality samples")
        ->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score caption predictions against references");
    std::string predictions_path;
    std::string references_path;
    std::string external_path;
    evaluate->add_option("--predictions", predictions_path, "Predictions jsonl (id, candidate)")
        ->required();
    evaluate
        ->add_option("--references", references_path, "References jsonl (id, references[])")
        ->required();
    evaluate->add_option("--external", external_path,
                         "JSON file with externally computed scores (spice, fense)");

    // score-labels
    auto* score = app.add_subcommand(
        "score-labels", "Classification accuracy over predicted/true label rows");
    std::string labels_path;
    score->add_option("--labels", labels_path, "Labels jsonl (id, predicted_label, true_label)")
        ->required();

    // infer
    auto* infer = app.add_subcommand(
        "infer", "Send instruction samples to a generation endpoint");
    std::string samples_path;
    std::string audio_root = ".";
    infer->add_option("--samples", samples_path, "Instruction manifest jsonl")->required();
    infer->add_option("--audio-root", audio_root, "Directory audio refs are relative to")
        ->capture_default_str();
    infer->add_option("--auth-env", endpoint.auth_env,
                      "Env var holding a bearer token for the Authorization header");
    infer->add_option("--timeout-ms", endpoint.timeout_ms, "Per-request timeout")
        ->capture_default_str();
    infer->add_option("--retries", endpoint.retries, "Retries after the first attempt")
        ->capture_default_str();
    infer->add_option("--backoff-ms", endpoint.backoff_ms, "Initial retry delay, doubled per retry")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        config.out_dir = out_dir;
        config.lenient = lenient;
        config.split_spec = parse_split(split_text, config.seed);
        endpoint.parallelism = config.parallelism;

        if (app.got_subcommand(build)) {
            const auto report =
                accforge::cmd_build_pairs(bases_path, events_path, triple_count, config);
            std::cout << "triples: " << report.triples << "\n"
                      << "pairs: " << report.pairs << " (add " << report.add_pairs << ", delete "
                      << report.delete_pairs << ", replace " << report.replace_pairs << ")\n"
                      << "wav files: " << report.wav_files << "\n"
                      << "clipped samples: " << report.clipped_samples << "\n"
                      << "manifest: " << report.manifest_path.string() << "\n";
        } else if (app.got_subcommand(derive)) {
            std::filesystem::create_directories(config.out_dir);
            const auto report =
                accforge::cmd_derive_acc(pairs_path, config.out_dir / "pairs_acc.jsonl");
            std::cout << "rows: " << report.rows << "\n"
                      << "derived: " << report.derived << "\n"
                      << "skipped: " << report.skipped << "\n"
                      << "manifest: " << report.manifest_path.string() << "\n";
        } else if (app.got_subcommand(emit)) {
            const auto report = accforge::cmd_emit_manifests(pairs_path, config);
            std::cout << "ac samples: " << report.ac_samples << "\n"
                      << "adc samples: " << report.adc_samples << "\n"
                      << "acc samples: " << report.acc_samples << " (skipped "
                      << report.acc_skipped << ")\n";
            for (const auto& file : report.files) std::cout << file.string() << "\n";
        } else if (app.got_subcommand(evaluate)) {
            std::optional<std::filesystem::path> external;
            if (!external_path.empty()) external = external_path;
            const auto report = accforge::cmd_evaluate(predictions_path, references_path,
                                                       external, config.out_dir);
            std::cout << report.table << "report: " << report.table_path.string() << ", "
                      << report.json_path.string() << "\n";
        } else if (app.got_subcommand(score)) {
            const auto report = accforge::cmd_score_labels(labels_path);
            std::cout << "accuracy: " << report.formatted() << " (" << report.correct << "/"
                      << report.total << ")\n";
        } else if (app.got_subcommand(infer)) {
            if (endpoint.url.empty()) {
                accforge::raise(accforge::ErrorCode::InvalidArgument,
                                "--endpoint is required for infer");
            }
            const auto samples = accforge::read_samples(samples_path);
            const accforge::InferenceClient client(endpoint);
            const auto rows = client.run(samples, audio_root);
            std::filesystem::create_directories(config.out_dir);
            const auto out_path = config.out_dir / "predictions.jsonl";
            accforge::write_prediction_rows(out_path, rows);
            size_t failed = 0;
            for (const auto& row : rows) {
                if (!row.ok()) ++failed;
            }
            std::cout << "ok: " << rows.size() - failed << ", failed: " << failed << "\n"
                      << "predictions: " << out_path.string() << "\n";
            if (failed > 0) return 4;
        }
    } catch (const accforge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
