#pragma once

// Shared test fixtures: temp dirs, deterministic audio generators, and a
// small on-disk corpus (WAVs + manifests) the pipeline tests run against.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "accforge/audio.hpp"
#include "accforge/corpus.hpp"
#include "accforge/jsonl.hpp"
#include "accforge/metrics.hpp"
#include "accforge/random.hpp"

namespace fx {

class TempDir {
  public:
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "accforge-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (mkdtemp(buf.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed for " + tmpl);
        }
        path_ = buf.data();
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline accforge::AudioClip tone(uint32_t rate, double seconds, double freq, double amp,
                                std::string id = {}) {
    accforge::AudioClip clip;
    clip.sample_rate = rate;
    clip.source_id = std::move(id);
    const auto n = static_cast<size_t>(seconds * rate);
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        clip.samples[i] = static_cast<float>(
            amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
    }
    return clip;
}

inline accforge::AudioClip noise(uint32_t rate, size_t count, uint64_t seed, double amp) {
    accforge::AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.resize(count);
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < count; ++i) {
        clip.samples[i] = static_cast<float>(accforge::draw_uniform(rng, -amp, amp));
    }
    return clip;
}

inline const std::vector<std::string>& caption_subjects() {
    static const std::vector<std::string> v = {"man",    "woman",  "child", "dog",
                                               "crowd",  "engine", "stream", "bell"};
    return v;
}

inline const std::vector<std::string>& caption_verbs() {
    static const std::vector<std::string> v = {"speaks",  "laughs",  "hums",    "whistles",
                                               "claps",   "rumbles", "murmurs", "sings"};
    return v;
}

inline const std::vector<std::string>& caption_places() {
    static const std::vector<std::string> v = {
        "large room",  "quiet street", "busy market", "open field",
        "small kitchen", "long hallway", "city park",  "train station"};
    return v;
}

inline std::string base_caption(size_t i) {
    const auto& s = caption_subjects();
    const auto& v = caption_verbs();
    const auto& p = caption_places();
    return "A " + s[i % s.size()] + " " + v[(i / s.size()) % v.size()] + " in a " +
           p[(i * 3 + 1) % p.size()] + ".";
}

struct EventKind {
    const char* label;
    const char* phrase;
    const char* category;
};

inline const std::vector<EventKind>& event_kinds() {
    static const std::vector<EventKind> v = {
        {"dog bark", "a dog barking", "Animals"},
        {"rain", "rain falling", "NaturalSounds"},
        {"car horn", "a car horn honking", "Transportation"},
        {"piano", "a piano melody", "Music"},
        {"door slam", "a door slamming", "IndoorActivities"},
        {"footsteps", "footsteps approaching", "HumanSounds"},
        {"bird song", "a bird singing", "OutdoorActivities"},
        {"chatter", "people chattering", "Speech"},
        {"phone ring", "a phone ringing", "IndoorActivities"},
        {"wind", "wind blowing", "NaturalSounds"},
    };
    return v;
}

struct CorpusFixture {
    std::filesystem::path bases_manifest;
    std::filesystem::path events_manifest;
    size_t base_count = 0;
    size_t event_count = 0;
};

// Writes `n_bases` captioned base WAVs (1.0-1.75 s) and `n_events` event WAVs
// (0.3-0.7 s, always shorter than any base) plus their jsonl manifests.
inline CorpusFixture write_corpus(const std::filesystem::path& dir, size_t n_bases,
                                  size_t n_events, uint32_t rate = 16000) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "audio");

    CorpusFixture fixture;
    fixture.base_count = n_bases;
    fixture.event_count = n_events;

    std::vector<accforge::json> base_rows;
    for (size_t i = 0; i < n_bases; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "base_%03zu", i);
        const std::string rel = std::string("audio/") + name + ".wav";
        const double seconds = 1.0 + 0.25 * static_cast<double>(i % 4);
        const auto clip = i % 2 == 0
                              ? tone(rate, seconds, 150.0 + 17.0 * static_cast<double>(i), 0.35)
                              : noise(rate, static_cast<size_t>(seconds * rate), 1000 + i, 0.3);
        accforge::save_wav(clip, dir / rel);
        base_rows.push_back(
            {{"id", name}, {"audio_path", rel}, {"caption", base_caption(i)}});
    }
    fixture.bases_manifest = dir / "bases.jsonl";
    accforge::write_jsonl(fixture.bases_manifest, base_rows);

    std::vector<accforge::json> event_rows;
    const auto& kinds = event_kinds();
    for (size_t i = 0; i < n_events; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "event_%03zu", i);
        const std::string rel = std::string("audio/") + name + ".wav";
        const double seconds = 0.3 + 0.2 * static_cast<double>(i % 3);
        const auto clip =
            i % 2 == 0
                ? tone(rate, seconds, 400.0 + 29.0 * static_cast<double>(i), 0.3)
                : noise(rate, static_cast<size_t>(seconds * rate), 2000 + i, 0.25);
        accforge::save_wav(clip, dir / rel);
        const EventKind& kind = kinds[i % kinds.size()];
        event_rows.push_back({{"id", name},
                              {"category", kind.category},
                              {"label", kind.label},
                              {"audio_path", rel},
                              {"description_phrase", kind.phrase}});
    }
    fixture.events_manifest = dir / "events.jsonl";
    accforge::write_jsonl(fixture.events_manifest, event_rows);
    return fixture;
}

inline const std::vector<std::string>& eval_vocab() {
    static const std::vector<std::string> v = {"a",    "man",  "dog",   "walks", "rain",
                                               "falls", "the",  "loud",  "bird",  "sings",
                                               "wind",  "blows"};
    return v;
}

// Small random evaluation corpus: 2-4 instances, 1-3 references each,
// captions of 1-8 tokens over a 12-word vocabulary.
inline std::vector<accforge::EvalInstance> random_eval_corpus(uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& vocab = eval_vocab();
    auto sentence = [&](size_t max_len) {
        const size_t len = 1 + accforge::draw_index(rng, max_len);
        std::string out;
        for (size_t i = 0; i < len; ++i) {
            if (!out.empty()) out += ' ';
            out += vocab[accforge::draw_index(rng, vocab.size())];
        }
        return out;
    };

    const size_t n = 2 + accforge::draw_index(rng, 3);
    std::vector<accforge::EvalInstance> instances(n);
    for (size_t i = 0; i < n; ++i) {
        instances[i].id = "inst_" + std::to_string(i);
        instances[i].candidate = sentence(8);
        const size_t refs = 1 + accforge::draw_index(rng, 3);
        for (size_t r = 0; r < refs; ++r) {
            instances[i].references.push_back(sentence(8));
        }
    }
    return instances;
}

// Random caption of up to `max_tokens` tokens, sometimes capitalized and
// period-terminated, for commonality property tests.
inline std::string random_caption(std::mt19937_64& rng, size_t max_tokens = 12) {
    const auto& vocab = eval_vocab();
    const size_t len = 1 + accforge::draw_index(rng, max_tokens);
    std::string out;
    for (size_t i = 0; i < len; ++i) {
        if (!out.empty()) out += ' ';
        out += vocab[accforge::draw_index(rng, vocab.size())];
    }
    if (accforge::draw_index(rng, 2) == 0) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
        out += '.';
    }
    return out;
}

}  // namespace fx
