#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "accforge/audio.hpp"
#include "accforge/corpus.hpp"
#include "accforge/errors.hpp"
#include "accforge/jsonl.hpp"
#include "accforge/random.hpp"

namespace accforge {

enum class EditOp { Add, Delete, Replace };

inline std::string_view to_string(EditOp op) {
    switch (op) {
        case EditOp::Add: return "add";
        case EditOp::Delete: return "delete";
        case EditOp::Replace: return "replace";
    }
    return "?";
}

inline EditOp parse_edit_op(std::string_view s) {
    if (s == "add") return EditOp::Add;
    if (s == "delete") return EditOp::Delete;
    if (s == "replace") return EditOp::Replace;
    raise(ErrorCode::InvalidRecord, "unknown edit op \"" + std::string(s) + "\"");
}

// Everything needed to re-render both sides of a pair bit-exactly: the
// source ids, the drawn mix parameters, and the per-triple seed that drew
// them. event_b is the event the instruction acts on; event_c plus the
// second parameter set exist only for Replace.
struct Provenance {
    std::string base_id;
    std::string event_b_id;
    std::optional<std::string> event_c_id;
    double offset_seconds = 0.0;
    double snr_db = 0.0;
    std::optional<double> offset2_seconds;
    std::optional<double> snr2_db;
    uint64_t seed = 0;
};

enum class CommonalityState { NotDerived, Derived, Skipped };

struct EditPair {
    std::string id;
    EditOp op = EditOp::Add;
    std::string before_audio;  // relative to the dataset directory
    std::string after_audio;
    std::string before_caption;
    std::string after_caption;
    std::string instruction;
    Provenance provenance;

    // Filled in by the commonality stage; Skipped marks pairs excluded from
    // ACC emission without deleting the row.
    CommonalityState commonality_state = CommonalityState::NotDerived;
    std::string commonality;
};

// "add {b}", "delete {b}", "replace {b} with {c}".
inline std::string render_instruction(EditOp op, const SoundEvent& event_b,
                                      const SoundEvent* event_c = nullptr) {
    if (op == EditOp::Replace) {
        if (event_c == nullptr) {
            raise(ErrorCode::ArityMismatch, "replace instruction needs a second event");
        }
        return "replace " + event_b.description_phrase + " with " + event_c->description_phrase;
    }
    if (event_c != nullptr) {
        raise(ErrorCode::ArityMismatch, "add/delete instructions take exactly one event");
    }
    return (op == EditOp::Add ? "add " : "delete ") + event_b.description_phrase;
}

// "{base caption minus terminal period}, with {phrase}". Intentionally does
// not deduplicate an existing ", with" tail.
inline std::string render_mixed_caption(const std::string& base_caption,
                                        const SoundEvent& event) {
    std::string head = base_caption;
    while (!head.empty() && (head.back() == ' ' || head.back() == '.')) head.pop_back();
    return head + ", with " + event.description_phrase;
}

inline uint64_t fnv1a64(const std::vector<uint8_t>& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct SynthConfig {
    std::filesystem::path output_dir;
    uint32_t sample_rate = 16000;  // canonical pipeline rate
    double snr_min = -5.0;
    double snr_max = 15.0;
};

struct SynthStats {
    size_t wav_files_written = 0;
    size_t clipped_samples = 0;
};

// Renders the six editing pairs of one (A, B, C) triple. A+B and A+C are
// mixed once each and shared by the Add/Delete/Replace pairs that reference
// them. Rendering is a pure function of (triple, seed, config); mixes land
// in {output_dir}/mixes/{content-hash}.wav so identical audio dedupes.
class EditSynthesizer {
public:
    explicit EditSynthesizer(SynthConfig config) : config_(std::move(config)) {
        std::filesystem::create_directories(config_.output_dir / "mixes");
    }

    std::vector<EditPair> synthesize_six(const Triple& triple, uint64_t seed,
                                         SynthStats* stats = nullptr) {
        try {
            return synthesize_impl(triple, seed, stats);
        } catch (const Error& e) {
            throw Error(e.code(), "triple " + triple_tag(triple) + ": " + e.message());
        }
    }

    [[nodiscard]] const SynthConfig& config() const { return config_; }

private:
    static std::string triple_tag(const Triple& triple) {
        return triple.base.id + ":" + triple.event_b.id + ":" + triple.event_c.id;
    }

    AudioClip load_canonical(const std::filesystem::path& path) const {
        return resample(load_wav(path), config_.sample_rate);
    }

    // Encode, content-hash, and write (once) under mixes/. Returns the
    // manifest-relative path.
    std::string store(const AudioClip& clip, SynthStats* stats) const {
        const EncodedWav encoded = encode_wav_pcm16(clip);
        char name[32];
        std::snprintf(name, sizeof(name), "%016llx.wav",
                      static_cast<unsigned long long>(fnv1a64(encoded.bytes)));
        const std::string relative = std::string("mixes/") + name;
        const std::filesystem::path target = config_.output_dir / relative;
        if (!std::filesystem::exists(target)) {
            // Temp-then-rename so concurrent writers of the same content race
            // benignly.
            const std::filesystem::path tmp =
                target.string() + "." + std::to_string(splitmix64(
                    reinterpret_cast<uintptr_t>(&clip) ^ fnv1a64(encoded.bytes))) + ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) raise(ErrorCode::IoError, "cannot write " + tmp.string());
                out.write(reinterpret_cast<const char*>(encoded.bytes.data()),
                          static_cast<std::streamsize>(encoded.bytes.size()));
                if (!out) raise(ErrorCode::IoError, "write failed: " + tmp.string());
            }
            std::filesystem::rename(tmp, target);
            if (stats != nullptr) ++stats->wav_files_written;
        }
        if (stats != nullptr) stats->clipped_samples += encoded.clipped_samples;
        return relative;
    }

    std::vector<EditPair> synthesize_impl(const Triple& triple, uint64_t seed,
                                          SynthStats* stats) const {
        const AudioClip base = load_canonical(triple.base.audio_path);
        const AudioClip event_b = load_canonical(triple.event_b.audio_path);
        const AudioClip event_c = load_canonical(triple.event_c.audio_path);

        // Fixed draw order: SNR then offset, B before C.
        std::mt19937_64 rng(seed);
        const double snr_b = draw_uniform(rng, config_.snr_min, config_.snr_max);
        const double off_b = draw_uniform(
            rng, 0.0, std::max(0.0, base.duration_seconds() - event_b.duration_seconds()));
        const double snr_c = draw_uniform(rng, config_.snr_min, config_.snr_max);
        const double off_c = draw_uniform(
            rng, 0.0, std::max(0.0, base.duration_seconds() - event_c.duration_seconds()));

        const MixParams params_b{off_b, snr_b, gain_for_snr(base, event_b, snr_b)};
        const MixParams params_c{off_c, snr_c, gain_for_snr(base, event_c, snr_c)};
        const AudioClip mixed_b = mix(base, event_b, params_b);
        const AudioClip mixed_c = mix(base, event_c, params_c);

        const std::string path_a = store(base, stats);
        const std::string path_ab = store(mixed_b, stats);
        const std::string path_ac = store(mixed_c, stats);

        const std::string caption_a = triple.base.caption;
        const std::string caption_ab = render_mixed_caption(caption_a, triple.event_b);
        const std::string caption_ac = render_mixed_caption(caption_a, triple.event_c);

        const std::string tag = triple_tag(triple);
        auto pair_id = [&tag](EditOp op, int k) {
            return tag + ":" + std::string(to_string(op)) + ":" + std::to_string(k);
        };

        Provenance prov_b{triple.base.id, triple.event_b.id, std::nullopt,
                          off_b,          snr_b,             std::nullopt,
                          std::nullopt,   seed};
        Provenance prov_c{triple.base.id, triple.event_c.id, std::nullopt,
                          off_c,          snr_c,             std::nullopt,
                          std::nullopt,   seed};
        Provenance prov_bc = prov_b;
        prov_bc.event_c_id = triple.event_c.id;
        prov_bc.offset2_seconds = off_c;
        prov_bc.snr2_db = snr_c;
        Provenance prov_cb = prov_c;
        prov_cb.event_c_id = triple.event_b.id;
        prov_cb.offset2_seconds = off_b;
        prov_cb.snr2_db = snr_b;

        std::vector<EditPair> pairs;
        pairs.reserve(6);
        pairs.push_back({pair_id(EditOp::Add, 0), EditOp::Add, path_a, path_ab, caption_a,
                         caption_ab, render_instruction(EditOp::Add, triple.event_b), prov_b});
        pairs.push_back({pair_id(EditOp::Add, 1), EditOp::Add, path_a, path_ac, caption_a,
                         caption_ac, render_instruction(EditOp::Add, triple.event_c), prov_c});
        pairs.push_back({pair_id(EditOp::Delete, 0), EditOp::Delete, path_ab, path_a, caption_ab,
                         caption_a, render_instruction(EditOp::Delete, triple.event_b), prov_b});
        pairs.push_back({pair_id(EditOp::Delete, 1), EditOp::Delete, path_ac, path_a, caption_ac,
                         caption_a, render_instruction(EditOp::Delete, triple.event_c), prov_c});
        pairs.push_back({pair_id(EditOp::Replace, 0), EditOp::Replace, path_ab, path_ac,
                         caption_ab, caption_ac,
                         render_instruction(EditOp::Replace, triple.event_b, &triple.event_c),
                         prov_bc});
        pairs.push_back({pair_id(EditOp::Replace, 1), EditOp::Replace, path_ac, path_ab,
                         caption_ac, caption_ab,
                         render_instruction(EditOp::Replace, triple.event_c, &triple.event_b),
                         prov_cb});

        for (const auto& pair : pairs) {
            if (pair.before_caption == pair.after_caption) {
                raise(ErrorCode::InvalidRecord,
                      "pair " + pair.id + ": identical pre/post captions");
            }
        }
        return pairs;
    }

    SynthConfig config_;
};

// --- pair manifest (line-delimited JSON) ---

inline json to_json(const Provenance& p) {
    json j{{"base_id", p.base_id},
           {"event_b_id", p.event_b_id},
           {"event_c_id", p.event_c_id ? json(*p.event_c_id) : json(nullptr)},
           {"offset_seconds", p.offset_seconds},
           {"snr_db", p.snr_db},
           {"offset2_seconds", p.offset2_seconds ? json(*p.offset2_seconds) : json(nullptr)},
           {"snr2_db", p.snr2_db ? json(*p.snr2_db) : json(nullptr)},
           {"seed", p.seed}};
    return j;
}

inline json to_json(const EditPair& pair) {
    json j{{"id", pair.id},
           {"op", std::string(to_string(pair.op))},
           {"before_audio", pair.before_audio},
           {"after_audio", pair.after_audio},
           {"before_caption", pair.before_caption},
           {"after_caption", pair.after_caption},
           {"instruction", pair.instruction},
           {"provenance", to_json(pair.provenance)}};
    if (pair.commonality_state == CommonalityState::Derived) {
        j["commonality"] = pair.commonality;
    } else if (pair.commonality_state == CommonalityState::Skipped) {
        j["commonality"] = nullptr;
    }
    return j;
}

inline EditPair pair_from_json(const json& j, const std::filesystem::path& path,
                               size_t line_number) {
    EditPair pair;
    pair.id = require_string(j, "id", path, line_number);
    pair.op = parse_edit_op(require_string(j, "op", path, line_number));
    pair.before_audio = require_string(j, "before_audio", path, line_number);
    pair.after_audio = require_string(j, "after_audio", path, line_number);
    pair.before_caption = require_string(j, "before_caption", path, line_number);
    pair.after_caption = require_string(j, "after_caption", path, line_number);
    pair.instruction = require_string(j, "instruction", path, line_number);

    auto prov = j.find("provenance");
    if (prov == j.end() || !prov->is_object()) {
        raise(ErrorCode::MissingField, path.filename().string() + ":" +
                                           std::to_string(line_number) + ": missing provenance");
    }
    Provenance& p = pair.provenance;
    p.base_id = require_string(*prov, "base_id", path, line_number);
    p.event_b_id = require_string(*prov, "event_b_id", path, line_number);
    if (prov->contains("event_c_id") && !(*prov)["event_c_id"].is_null()) {
        p.event_c_id = (*prov)["event_c_id"].get<std::string>();
    }
    p.offset_seconds = prov->value("offset_seconds", 0.0);
    p.snr_db = prov->value("snr_db", 0.0);
    if (prov->contains("offset2_seconds") && !(*prov)["offset2_seconds"].is_null()) {
        p.offset2_seconds = (*prov)["offset2_seconds"].get<double>();
    }
    if (prov->contains("snr2_db") && !(*prov)["snr2_db"].is_null()) {
        p.snr2_db = (*prov)["snr2_db"].get<double>();
    }
    p.seed = prov->value("seed", uint64_t{0});

    if (auto it = j.find("commonality"); it != j.end()) {
        if (it->is_null()) {
            pair.commonality_state = CommonalityState::Skipped;
        } else {
            pair.commonality_state = CommonalityState::Derived;
            pair.commonality = it->get<std::string>();
        }
    }
    return pair;
}

inline void write_pair_manifest(const std::filesystem::path& path,
                                const std::vector<EditPair>& pairs) {
    std::vector<json> rows;
    rows.reserve(pairs.size());
    for (const auto& pair : pairs) rows.push_back(to_json(pair));
    write_jsonl(path, rows);
}

inline std::vector<EditPair> read_pair_manifest(const std::filesystem::path& path) {
    JsonlFile file = read_jsonl(path);
    std::vector<EditPair> pairs;
    pairs.reserve(file.records.size());
    for (size_t i = 0; i < file.records.size(); ++i) {
        pairs.push_back(pair_from_json(file.records[i], path, file.line_numbers[i]));
    }
    return pairs;
}

}  // namespace accforge
