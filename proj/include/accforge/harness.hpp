#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "accforge/commonality.hpp"
#include "accforge/corpus.hpp"
#include "accforge/edit_synth.hpp"
#include "accforge/manifest.hpp"
#include "accforge/metrics.hpp"

namespace accforge {

// Everything the pipeline subcommands share. Precedence (flags over env over
// config file over these defaults) is handled by the CLI layer.
struct RunConfig {
    uint64_t seed = 0;
    std::filesystem::path out_dir;
    size_t parallelism = 1;
    uint32_t sample_rate = 16000;
    double snr_min = -5.0;
    double snr_max = 15.0;
    SplitSpec split_spec;
    bool lenient = false;
    std::string ac_prompt = kDefaultAcPrompt;
    std::string adc_prompt = kDefaultAdcPrompt;
    std::string acc_prompt = kDefaultAccPrompt;
};

struct BuildPairsReport {
    size_t triples = 0;
    size_t pairs = 0;
    size_t add_pairs = 0;
    size_t delete_pairs = 0;
    size_t replace_pairs = 0;
    size_t wav_files = 0;
    size_t clipped_samples = 0;
    std::filesystem::path manifest_path;
};

// corpus -> edit_synth end to end: sample triples, render the six pairs per
// triple (parallel across triples with derived seeds, reassembled in triple
// order so the manifest bytes never depend on scheduling), write pairs.jsonl.
inline BuildPairsReport cmd_build_pairs(const std::filesystem::path& bases_path,
                                        const std::filesystem::path& events_path,
                                        size_t triple_count, const RunConfig& config) {
    const BaseCorpus bases = load_base_corpus(bases_path, config.lenient);
    const EventLibrary events = load_event_library(events_path, config.lenient);

    std::filesystem::create_directories(config.out_dir);
    const std::vector<Triple> triples =
        sample_triples(bases.records, events.records, config.seed, triple_count);

    EditSynthesizer synth({config.out_dir, config.sample_rate, config.snr_min, config.snr_max});

    std::vector<std::vector<EditPair>> per_triple(triples.size());
    std::atomic<size_t> next{0};
    std::atomic<size_t> clipped{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= triples.size()) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            try {
                SynthStats stats;
                per_triple[i] =
                    synth.synthesize_six(triples[i], derive_seed(config.seed, i), &stats);
                clipped.fetch_add(stats.clipped_samples);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const size_t thread_count = std::max<size_t>(1, std::min(config.parallelism, triples.size()));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<EditPair> pairs;
    pairs.reserve(triples.size() * 6);
    for (auto& six : per_triple) {
        for (auto& pair : six) pairs.push_back(std::move(pair));
    }

    BuildPairsReport report;
    report.triples = triples.size();
    report.pairs = pairs.size();
    for (const auto& pair : pairs) {
        switch (pair.op) {
            case EditOp::Add: ++report.add_pairs; break;
            case EditOp::Delete: ++report.delete_pairs; break;
            case EditOp::Replace: ++report.replace_pairs; break;
        }
    }
    report.clipped_samples = clipped.load();
    for ([[maybe_unused]] const auto& entry :
         std::filesystem::directory_iterator(config.out_dir / "mixes")) {
        ++report.wav_files;
    }
    report.manifest_path = config.out_dir / "pairs.jsonl";
    write_pair_manifest(report.manifest_path, pairs);
    return report;
}

struct DeriveAccReport {
    size_t rows = 0;
    size_t derived = 0;
    size_t skipped = 0;
    std::filesystem::path manifest_path;
};

// Adds the ACC commonality to every pair row; rows whose Replace overlap is
// too short are flagged (commonality: null), never dropped.
inline DeriveAccReport cmd_derive_acc(const std::filesystem::path& pairs_path,
                                      const std::filesystem::path& out_path) {
    std::vector<EditPair> pairs = read_pair_manifest(pairs_path);
    DeriveAccReport report;
    report.rows = pairs.size();
    for (auto& pair : pairs) {
        if (auto common = derive_commonality(pair)) {
            pair.commonality_state = CommonalityState::Derived;
            pair.commonality = std::move(*common);
            ++report.derived;
        } else {
            pair.commonality_state = CommonalityState::Skipped;
            pair.commonality.clear();
            ++report.skipped;
        }
    }
    std::filesystem::create_directories(out_path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : out_path.parent_path());
    write_pair_manifest(out_path, pairs);
    report.manifest_path = out_path;
    return report;
}

struct EmitManifestsReport {
    size_t ac_samples = 0;
    size_t adc_samples = 0;
    size_t acc_samples = 0;
    size_t acc_skipped = 0;
    std::vector<std::filesystem::path> files;
};

// Emits AC/ADC/ACC instruction samples from a pair manifest and writes the
// nine {task}_{split}.jsonl files. AC samples come from the distinct bases
// (rendered base audio + pre-edit caption). Commonalities are derived here
// when the manifest has not been through derive-acc yet.
inline EmitManifestsReport cmd_emit_manifests(const std::filesystem::path& pairs_path,
                                              const RunConfig& config) {
    std::vector<EditPair> pairs = read_pair_manifest(pairs_path);

    std::vector<std::optional<std::string>> commonalities;
    commonalities.reserve(pairs.size());
    for (const auto& pair : pairs) {
        if (pair.commonality_state == CommonalityState::Derived) {
            commonalities.emplace_back(pair.commonality);
        } else if (pair.commonality_state == CommonalityState::Skipped) {
            commonalities.emplace_back(std::nullopt);
        } else {
            commonalities.push_back(derive_commonality(pair));
        }
    }

    std::vector<CaptionedBase> bases;
    {
        std::unordered_set<std::string> seen;
        for (const auto& pair : pairs) {
            if (pair.op != EditOp::Add) continue;
            if (!seen.insert(pair.provenance.base_id).second) continue;
            bases.push_back(
                {pair.provenance.base_id, pair.before_audio, pair.before_caption});
        }
    }

    const auto ac = emit_ac_samples(bases, config.ac_prompt);
    const auto adc = emit_adc_samples(pairs, config.adc_prompt);
    const auto acc = emit_acc_samples(pairs, commonalities, config.acc_prompt);

    EmitManifestsReport report;
    report.ac_samples = ac.size();
    report.adc_samples = adc.size();
    report.acc_samples = acc.samples.size();
    report.acc_skipped = acc.skipped;

    std::filesystem::create_directories(config.out_dir);
    auto write_split = [&](const char* task, const SplitResult& result) {
        const std::array<std::pair<const char*, const std::vector<InstructionSample>*>, 3>
            parts{{{"train", &result.train}, {"val", &result.validation}, {"test", &result.test}}};
        for (const auto& [name, samples] : parts) {
            const auto path =
                config.out_dir / (std::string(task) + "_" + name + ".jsonl");
            write_samples(path, *samples);
            report.files.push_back(path);
        }
    };
    write_split("ac", split(ac, config.split_spec));
    write_split("adc", split(adc, config.split_spec));
    write_split("acc", split(acc.samples, config.split_spec));
    return report;
}

// --- evaluation -----------------------------------------------------------

inline std::vector<EvalInstance> load_eval_instances(const std::filesystem::path& predictions_path,
                                                     const std::filesystem::path& references_path) {
    JsonlFile preds = read_jsonl(predictions_path);
    std::unordered_map<std::string, std::string> candidate_by_id;
    for (size_t i = 0; i < preds.records.size(); ++i) {
        const std::string id =
            require_string(preds.records[i], "id", predictions_path, preds.line_numbers[i]);
        const std::string candidate = require_string(preds.records[i], "candidate",
                                                     predictions_path, preds.line_numbers[i]);
        if (!candidate_by_id.emplace(id, candidate).second) {
            raise(ErrorCode::DuplicateId, predictions_path.filename().string() + ":" +
                                              std::to_string(preds.line_numbers[i]) +
                                              ": duplicate prediction id \"" + id + "\"");
        }
    }

    JsonlFile refs = read_jsonl(references_path);
    std::vector<EvalInstance> instances;
    std::vector<std::string> missing;
    std::unordered_set<std::string> ref_ids;
    for (size_t i = 0; i < refs.records.size(); ++i) {
        EvalInstance inst;
        inst.id = require_string(refs.records[i], "id", references_path, refs.line_numbers[i]);
        if (!ref_ids.insert(inst.id).second) {
            raise(ErrorCode::DuplicateId, references_path.filename().string() + ":" +
                                              std::to_string(refs.line_numbers[i]) +
                                              ": duplicate reference id \"" + inst.id + "\"");
        }
        auto list = refs.records[i].find("references");
        if (list == refs.records[i].end() || !list->is_array() || list->empty()) {
            raise(ErrorCode::MissingField,
                  references_path.filename().string() + ":" +
                      std::to_string(refs.line_numbers[i]) + ": missing references array");
        }
        for (const auto& r : *list) inst.references.push_back(r.get<std::string>());
        auto it = candidate_by_id.find(inst.id);
        if (it == candidate_by_id.end()) {
            missing.push_back(inst.id);
            continue;
        }
        inst.candidate = it->second;
        instances.push_back(std::move(inst));
    }
    std::vector<std::string> extra;
    for (const auto& [id, _] : candidate_by_id) {
        if (!ref_ids.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::sort(missing.begin(), missing.end());
        std::sort(extra.begin(), extra.end());
        std::string detail;
        if (!missing.empty()) {
            detail += "no prediction for:";
            for (const auto& id : missing) detail += " " + id;
        }
        if (!extra.empty()) {
            if (!detail.empty()) detail += "; ";
            detail += "prediction without reference:";
            for (const auto& id : extra) detail += " " + id;
        }
        raise(ErrorCode::MissingPrediction, detail);
    }
    return instances;
}

inline ExternalScores load_external_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        raise(ErrorCode::ParseError, path.string() + ": not a JSON object");
    }
    ExternalScores scores;
    if (j.contains("spice") && !j["spice"].is_null()) scores.spice = j["spice"].get<double>();
    if (j.contains("fense") && !j["fense"].is_null()) scores.fense = j["fense"].get<double>();
    return scores;
}

struct EvaluateReport {
    MetricReport metrics;
    std::string table;
    std::filesystem::path json_path;
    std::filesystem::path table_path;
};

inline EvaluateReport cmd_evaluate(const std::filesystem::path& predictions_path,
                                   const std::filesystem::path& references_path,
                                   const std::optional<std::filesystem::path>& external_path,
                                   const std::filesystem::path& out_dir) {
    const auto instances = load_eval_instances(predictions_path, references_path);
    ExternalScores external;
    if (external_path) external = load_external_scores(*external_path);

    EvaluateReport out;
    out.metrics = evaluate_corpus(instances, external);
    out.table = render_report_table(out.metrics);

    std::filesystem::create_directories(out_dir);
    out.table_path = out_dir / "report.txt";
    out.json_path = out_dir / "report.json";
    {
        std::ofstream f(out.table_path, std::ios::binary | std::ios::trunc);
        f << out.table;
    }
    {
        std::ofstream f(out.json_path, std::ios::binary | std::ios::trunc);
        f << report_to_json(out.metrics).dump(2) << '\n';
    }
    return out;
}

// --- downstream label scoring ----------------------------------------------

struct LabelInstance {
    std::string id;
    std::string predicted_label;
    std::string true_label;
};

namespace harness_detail {

inline std::string fold_label(const std::string& label) {
    size_t begin = 0;
    size_t end = label.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(label[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(label[end - 1]))) --end;
    std::string folded;
    folded.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
        folded.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(label[i]))));
    }
    return folded;
}

}  // namespace harness_detail

struct AccuracyReport {
    size_t correct = 0;
    size_t total = 0;

    [[nodiscard]] double percent() const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / total;
    }
    // Two-decimal percent, e.g. "72.07%".
    [[nodiscard]] std::string formatted() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f%%", percent());
        return buf;
    }
};

inline AccuracyReport score_labels(const std::vector<LabelInstance>& labels) {
    if (labels.empty()) raise(ErrorCode::EmptyInput, "no label rows to score");
    AccuracyReport report;
    report.total = labels.size();
    for (const auto& label : labels) {
        if (harness_detail::fold_label(label.predicted_label) ==
            harness_detail::fold_label(label.true_label)) {
            ++report.correct;
        }
    }
    return report;
}

inline std::vector<LabelInstance> read_labels(const std::filesystem::path& path) {
    JsonlFile file = read_jsonl(path);
    std::vector<LabelInstance> labels;
    labels.reserve(file.records.size());
    for (size_t i = 0; i < file.records.size(); ++i) {
        labels.push_back(
            {require_string(file.records[i], "id", path, file.line_numbers[i]),
             require_string(file.records[i], "predicted_label", path, file.line_numbers[i]),
             require_string(file.records[i], "true_label", path, file.line_numbers[i])});
    }
    return labels;
}

inline AccuracyReport cmd_score_labels(const std::filesystem::path& labels_path) {
    return score_labels(read_labels(labels_path));
}

}  // namespace accforge
