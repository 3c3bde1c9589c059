#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "accforge/errors.hpp"
#include "accforge/jsonl.hpp"
#include "accforge/random.hpp"
#include "accforge/text.hpp"

namespace accforge {

// The eight event categories of the taxonomy; anything else is rejected.
enum class EventCategory {
    NaturalSounds,
    Transportation,
    IndoorActivities,
    OutdoorActivities,
    Animals,
    Speech,
    Music,
    HumanSounds,
};

inline constexpr std::array<std::string_view, 8> kEventCategoryNames = {
    "NaturalSounds",    "Transportation", "IndoorActivities", "OutdoorActivities",
    "Animals",          "Speech",         "Music",            "HumanSounds",
};

inline std::optional<EventCategory> parse_event_category(std::string_view name) {
    for (size_t i = 0; i < kEventCategoryNames.size(); ++i) {
        if (kEventCategoryNames[i] == name) return static_cast<EventCategory>(i);
    }
    return std::nullopt;
}

inline std::string_view to_string(EventCategory category) {
    return kEventCategoryNames[static_cast<size_t>(category)];
}

struct CaptionedBase {
    std::string id;
    std::filesystem::path audio_path;  // resolved against the manifest directory
    std::string caption;
};

struct SoundEvent {
    std::string id;
    EventCategory category = EventCategory::NaturalSounds;
    std::string label;               // sound-type name, e.g. "bird song"
    std::filesystem::path audio_path;
    std::string description_phrase;  // template-ready noun phrase
};

// One (A, B, C) sampling unit; B and C always carry distinct labels.
struct Triple {
    CaptionedBase base;
    SoundEvent event_b;
    SoundEvent event_c;
};

struct BaseCorpus {
    std::vector<CaptionedBase> records;
    std::vector<LineIssue> issues;  // populated only in lenient mode
};

struct EventLibrary {
    std::vector<SoundEvent> records;
    std::vector<LineIssue> issues;
};

namespace corpus_detail {

inline std::filesystem::path resolve(const std::filesystem::path& manifest,
                                     const std::string& audio_path) {
    std::filesystem::path p(audio_path);
    return p.is_absolute() ? p : manifest.parent_path() / p;
}

}  // namespace corpus_detail

// Line-delimited JSON with fields id, audio_path, caption. Strict mode throws
// at the first malformed record; lenient mode records the issue and keeps
// going, so records + issues account for every non-blank input line.
inline BaseCorpus load_base_corpus(const std::filesystem::path& manifest_path,
                                   bool lenient = false) {
    JsonlFile file = read_jsonl(manifest_path, lenient);
    BaseCorpus corpus;
    corpus.issues = std::move(file.issues);
    std::unordered_set<std::string> seen_ids;
    for (size_t i = 0; i < file.records.size(); ++i) {
        const size_t line = file.line_numbers[i];
        try {
            CaptionedBase base;
            base.id = require_string(file.records[i], "id", manifest_path, line);
            base.audio_path = corpus_detail::resolve(
                manifest_path, require_string(file.records[i], "audio_path", manifest_path, line));
            base.caption = require_string(file.records[i], "caption", manifest_path, line);
            if (normalize_caption(base.caption).empty()) {
                raise(ErrorCode::InvalidRecord,
                      manifest_path.filename().string() + ":" + std::to_string(line) +
                          ": caption has no tokens");
            }
            if (!seen_ids.insert(base.id).second) {
                raise(ErrorCode::DuplicateId,
                      manifest_path.filename().string() + ":" + std::to_string(line) +
                          ": duplicate id \"" + base.id + "\"");
            }
            corpus.records.push_back(std::move(base));
        } catch (const Error& e) {
            if (!lenient) throw;
            corpus.issues.push_back({line, e.what()});
        }
    }
    return corpus;
}

// Event taxonomy: id, category, label, audio_path, description_phrase.
// Categories outside the eight-way enumeration are rejected by name and line.
inline EventLibrary load_event_library(const std::filesystem::path& taxonomy_path,
                                       bool lenient = false) {
    JsonlFile file = read_jsonl(taxonomy_path, lenient);
    EventLibrary library;
    library.issues = std::move(file.issues);
    std::unordered_set<std::string> seen_ids;
    for (size_t i = 0; i < file.records.size(); ++i) {
        const size_t line = file.line_numbers[i];
        try {
            SoundEvent event;
            event.id = require_string(file.records[i], "id", taxonomy_path, line);
            const std::string category =
                require_string(file.records[i], "category", taxonomy_path, line);
            const auto parsed = parse_event_category(category);
            if (!parsed) {
                raise(ErrorCode::UnknownCategory,
                      taxonomy_path.filename().string() + ":" + std::to_string(line) +
                          ": unknown category \"" + category + "\"");
            }
            event.category = *parsed;
            event.label = require_string(file.records[i], "label", taxonomy_path, line);
            event.audio_path = corpus_detail::resolve(
                taxonomy_path, require_string(file.records[i], "audio_path", taxonomy_path, line));
            event.description_phrase =
                require_string(file.records[i], "description_phrase", taxonomy_path, line);
            if (event.label.empty() || event.description_phrase.empty()) {
                raise(ErrorCode::InvalidRecord,
                      taxonomy_path.filename().string() + ":" + std::to_string(line) +
                          ": empty label or description_phrase");
            }
            if (!seen_ids.insert(event.id).second) {
                raise(ErrorCode::DuplicateId,
                      taxonomy_path.filename().string() + ":" + std::to_string(line) +
                          ": duplicate id \"" + event.id + "\"");
            }
            library.records.push_back(std::move(event));
        } catch (const Error& e) {
            if (!lenient) throw;
            library.issues.push_back({line, e.what()});
        }
    }
    return library;
}

inline size_t distinct_label_count(const std::vector<SoundEvent>& events) {
    std::unordered_set<std::string> labels;
    for (const auto& event : events) labels.insert(event.label);
    return labels.size();
}

// Draws `count` (base, B, C) triples: base uniform over records, events
// uniform over labels then clips within the label, with B and C forced onto
// distinct labels. Pure function of (bases, events, seed, count).
inline std::vector<Triple> sample_triples(const std::vector<CaptionedBase>& bases,
                                          const std::vector<SoundEvent>& events,
                                          uint64_t seed, size_t count) {
    if (bases.empty()) raise(ErrorCode::EmptyCorpus, "no base records to sample from");

    // Group event indices by label in first-appearance order.
    std::vector<std::pair<std::string, std::vector<size_t>>> by_label;
    std::unordered_map<std::string, size_t> label_slot;
    for (size_t i = 0; i < events.size(); ++i) {
        auto [it, inserted] = label_slot.try_emplace(events[i].label, by_label.size());
        if (inserted) by_label.push_back({events[i].label, {}});
        by_label[it->second].second.push_back(i);
    }
    if (by_label.size() < 2) {
        raise(ErrorCode::InsufficientEvents,
              "need events with at least 2 distinct labels, have " +
                  std::to_string(by_label.size()));
    }

    std::mt19937_64 rng(seed);
    std::vector<Triple> triples;
    triples.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        const size_t base_idx = draw_index(rng, bases.size());
        const size_t label_b = draw_index(rng, by_label.size());
        size_t label_c = draw_index(rng, by_label.size() - 1);
        if (label_c >= label_b) ++label_c;
        const auto& clips_b = by_label[label_b].second;
        const auto& clips_c = by_label[label_c].second;
        const size_t event_b = clips_b[draw_index(rng, clips_b.size())];
        const size_t event_c = clips_c[draw_index(rng, clips_c.size())];
        triples.push_back({bases[base_idx], events[event_b], events[event_c]});
    }
    return triples;
}

}  // namespace accforge
