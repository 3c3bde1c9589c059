#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "accforge/corpus.hpp"
#include "accforge/edit_synth.hpp"
#include "accforge/errors.hpp"
#include "accforge/jsonl.hpp"
#include "accforge/random.hpp"

namespace accforge {

enum class Task { AC, ADC, ACC };

inline std::string_view to_string(Task task) {
    switch (task) {
        case Task::AC: return "AC";
        case Task::ADC: return "ADC";
        case Task::ACC: return "ACC";
    }
    return "?";
}

inline Task parse_task(std::string_view s) {
    if (s == "AC") return Task::AC;
    if (s == "ADC") return Task::ADC;
    if (s == "ACC") return Task::ACC;
    raise(ErrorCode::InvalidRecord, "unknown task \"" + std::string(s) + "\"");
}

// Default prompts; overridable from the CLI/config, never baked into data.
inline constexpr const char* kDefaultAcPrompt = "Describe the audio.";
inline constexpr const char* kDefaultAdcPrompt =
    "Listen to the two audio clips and describe their difference.";
inline constexpr const char* kDefaultAccPrompt =
    "Listen to the two audio clips and describe what they have in common.";

// One training/eval record. AC carries one audio reference, ADC/ACC two
// (before, after). base_id is the grouping key for leakage-free splits.
struct InstructionSample {
    Task task = Task::AC;
    std::vector<std::string> audio_refs;
    std::string prompt;
    std::string target;

    // meta
    std::string sample_id;  // pair id, or the base id for AC
    std::optional<std::string> op;
    std::string base_id;
    std::string split;  // empty until assigned
};

struct SplitSpec {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
    uint64_t seed = 0;
};

inline void validate(const SplitSpec& spec) {
    if (spec.train < 0 || spec.validation < 0 || spec.test < 0 ||
        std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
        raise(ErrorCode::InvalidArgument, "split ratios must be non-negative and sum to 1");
    }
}

inline std::vector<InstructionSample> emit_ac_samples(const std::vector<CaptionedBase>& bases,
                                                      const std::string& prompt_template) {
    std::vector<InstructionSample> samples;
    samples.reserve(bases.size());
    for (const auto& base : bases) {
        InstructionSample s;
        s.task = Task::AC;
        s.audio_refs = {base.audio_path.generic_string()};
        s.prompt = prompt_template;
        s.target = base.caption;
        s.sample_id = base.id;
        s.base_id = base.id;
        samples.push_back(std::move(s));
    }
    return samples;
}

inline std::vector<InstructionSample> emit_adc_samples(const std::vector<EditPair>& pairs,
                                                       const std::string& prompt_template) {
    std::vector<InstructionSample> samples;
    samples.reserve(pairs.size());
    for (const auto& pair : pairs) {
        InstructionSample s;
        s.task = Task::ADC;
        s.audio_refs = {pair.before_audio, pair.after_audio};
        s.prompt = prompt_template;
        s.target = pair.instruction;
        s.sample_id = pair.id;
        s.op = std::string(to_string(pair.op));
        s.base_id = pair.provenance.base_id;
        samples.push_back(std::move(s));
    }
    return samples;
}

struct AccEmission {
    std::vector<InstructionSample> samples;
    size_t skipped = 0;
};

// commonalities align 1:1 with pairs; nullopt marks a pair dropped from ACC.
inline AccEmission emit_acc_samples(const std::vector<EditPair>& pairs,
                                    const std::vector<std::optional<std::string>>& commonalities,
                                    const std::string& prompt_template) {
    if (pairs.size() != commonalities.size()) {
        raise(ErrorCode::MisalignedInputs,
              std::to_string(pairs.size()) + " pairs vs " +
                  std::to_string(commonalities.size()) + " commonalities");
    }
    AccEmission out;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (!commonalities[i]) {
            ++out.skipped;
            continue;
        }
        InstructionSample s;
        s.task = Task::ACC;
        s.audio_refs = {pairs[i].before_audio, pairs[i].after_audio};
        s.prompt = prompt_template;
        s.target = *commonalities[i];
        s.sample_id = pairs[i].id;
        s.op = std::string(to_string(pairs[i].op));
        s.base_id = pairs[i].provenance.base_id;
        out.samples.push_back(std::move(s));
    }
    return out;
}

struct SplitResult {
    std::vector<InstructionSample> train;
    std::vector<InstructionSample> validation;
    std::vector<InstructionSample> test;
};

// Group-aware split: every sample sharing a base_id lands in one split, so a
// base's audio never leaks between train and test. The assignment is a pure
// function of (distinct base_id set, seed) - the ids are sorted, shuffled by
// the seed, and partitioned floor-first with remainders going to the largest
// fractional parts - so different task manifests over the same bases agree.
inline SplitResult split(const std::vector<InstructionSample>& samples, const SplitSpec& spec) {
    validate(spec);

    std::vector<std::string> groups;
    {
        std::unordered_map<std::string, bool> seen;
        for (const auto& s : samples) {
            if (!seen.emplace(s.base_id, true).second) continue;
            groups.push_back(s.base_id);
        }
    }
    std::sort(groups.begin(), groups.end());
    std::mt19937_64 rng(spec.seed);
    for (size_t i = groups.size(); i > 1; --i) {
        std::swap(groups[i - 1], groups[draw_index(rng, i)]);
    }

    const double g = static_cast<double>(groups.size());
    const std::array<double, 3> ratios{spec.train, spec.validation, spec.test};
    std::array<size_t, 3> counts{};
    std::array<double, 3> fractional{};
    size_t assigned = 0;
    for (size_t i = 0; i < 3; ++i) {
        const double exact = ratios[i] * g;
        counts[i] = static_cast<size_t>(std::floor(exact + 1e-9));
        fractional[i] = exact - std::floor(exact + 1e-9);
        assigned += counts[i];
    }
    std::array<size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return fractional[a] != fractional[b] ? fractional[a] > fractional[b] : a < b;
    });
    for (size_t k = 0; assigned < groups.size(); ++k, ++assigned) ++counts[order[k % 3]];

    std::unordered_map<std::string, const char*> assignment;
    size_t cursor = 0;
    const std::array<const char*, 3> names{"train", "val", "test"};
    for (size_t i = 0; i < 3; ++i) {
        for (size_t k = 0; k < counts[i]; ++k) assignment[groups[cursor++]] = names[i];
    }

    SplitResult result;
    for (const auto& sample : samples) {
        InstructionSample copy = sample;
        const char* name = assignment.at(sample.base_id);
        copy.split = name;
        if (name == names[0]) result.train.push_back(std::move(copy));
        else if (name == names[1]) result.validation.push_back(std::move(copy));
        else result.test.push_back(std::move(copy));
    }
    return result;
}

inline json to_json(const InstructionSample& sample) {
    json meta{{"pair_id", sample.sample_id}, {"base_id", sample.base_id}};
    if (sample.op) meta["op"] = *sample.op;
    if (!sample.split.empty()) meta["split"] = sample.split;
    return json{{"task", std::string(to_string(sample.task))},
                {"audios", sample.audio_refs},
                {"prompt", sample.prompt},
                {"target", sample.target},
                {"meta", meta}};
}

inline InstructionSample sample_from_json(const json& j, const std::filesystem::path& path,
                                          size_t line_number) {
    InstructionSample s;
    s.task = parse_task(require_string(j, "task", path, line_number));
    auto audios = j.find("audios");
    if (audios == j.end() || !audios->is_array()) {
        raise(ErrorCode::MissingField, path.filename().string() + ":" +
                                           std::to_string(line_number) + ": missing audios");
    }
    for (const auto& a : *audios) s.audio_refs.push_back(a.get<std::string>());
    s.prompt = require_string(j, "prompt", path, line_number);
    s.target = require_string(j, "target", path, line_number);
    if (auto meta = j.find("meta"); meta != j.end() && meta->is_object()) {
        s.sample_id = meta->value("pair_id", std::string{});
        s.base_id = meta->value("base_id", std::string{});
        if (meta->contains("op") && !(*meta)["op"].is_null()) {
            s.op = (*meta)["op"].get<std::string>();
        }
        s.split = meta->value("split", std::string{});
    }

    const size_t expected_refs = s.task == Task::AC ? 1 : 2;
    if (s.audio_refs.size() != expected_refs) {
        raise(ErrorCode::InvalidRecord,
              path.filename().string() + ":" + std::to_string(line_number) + ": " +
                  std::string(to_string(s.task)) + " sample needs " +
                  std::to_string(expected_refs) + " audio refs");
    }
    if (s.target.empty()) {
        raise(ErrorCode::InvalidRecord, path.filename().string() + ":" +
                                            std::to_string(line_number) + ": empty target");
    }
    return s;
}

inline void write_samples(const std::filesystem::path& path,
                          const std::vector<InstructionSample>& samples) {
    std::vector<json> rows;
    rows.reserve(samples.size());
    for (const auto& sample : samples) rows.push_back(to_json(sample));
    write_jsonl(path, rows);
}

inline std::vector<InstructionSample> read_samples(const std::filesystem::path& path) {
    JsonlFile file = read_jsonl(path);
    std::vector<InstructionSample> samples;
    samples.reserve(file.records.size());
    for (size_t i = 0; i < file.records.size(); ++i) {
        samples.push_back(sample_from_json(file.records[i], path, file.line_numbers[i]));
    }
    return samples;
}

}  // namespace accforge
