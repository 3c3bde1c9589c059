#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "accforge/errors.hpp"
#include "accforge/text.hpp"

namespace accforge {

struct EvalInstance {
    std::string id;
    std::string candidate;  // may be empty; scored, not rejected
    std::vector<std::string> references;
};

struct ExternalScores {
    std::optional<double> spice;
    std::optional<double> fense;
};

// Per-instance diagnostics for the metrics that are naturally per-instance.
struct InstanceScores {
    std::string id;
    double rouge_l = 0.0;
    double meteor = 0.0;
    double cider_d = 0.0;
};

// Table-1 column order; the report always carries exactly this key set.
inline constexpr std::array<const char*, 10> kReportColumns = {
    "bleu_1", "bleu_2", "bleu_3", "bleu_4", "fense",
    "spice",  "spider", "cider_d", "meteor", "rouge_l",
};

struct MetricReport {
    std::map<std::string, double> scores;  // keys from kReportColumns; absent = not computed
    std::vector<InstanceScores> instances;

    [[nodiscard]] std::optional<double> get(const std::string& name) const {
        auto it = scores.find(name);
        if (it == scores.end()) return std::nullopt;
        return it->second;
    }
};

// Shared with the dataset side so dataset text and metric text agree on
// tokenization.
inline TokenSeq tokenize(std::string_view text) { return normalize_caption(text); }

namespace metrics_detail {

using Tokens = std::vector<std::string>;

struct Cooked {
    Tokens candidate;
    std::vector<Tokens> references;
};

inline std::vector<Cooked> cook(const std::vector<EvalInstance>& instances) {
    std::vector<Cooked> cooked(instances.size());
    for (size_t i = 0; i < instances.size(); ++i) {
        cooked[i].candidate = tokenize(instances[i].candidate).tokens;
        for (const auto& ref : instances[i].references) {
            cooked[i].references.push_back(tokenize(ref).tokens);
        }
        if (cooked[i].references.empty()) {
            raise(ErrorCode::InvalidRecord,
                  "instance \"" + instances[i].id + "\" has no references");
        }
    }
    return cooked;
}

// n-gram keyed by tokens joined with an unprintable separator.
inline void count_ngrams(const Tokens& tokens, size_t n,
                         std::unordered_map<std::string, size_t>& out) {
    if (tokens.size() < n) return;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (size_t k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++out[key];
    }
}

// --- METEOR chunk minimization ------------------------------------------
//
// A maximum exact-match matching between candidate and reference tokens has
// m = sum_w min(count_c(w), count_r(w)) pairs; the chunk count depends on
// which occurrences get paired. chunks = m - (number of adjacent pairs), so
// we search for the matching with the most adjacencies. The search is exact
// up to a node budget (never reached on caption-length inputs with sane
// duplication); past the budget a greedy left-to-right alignment stands in.
class ChunkMinimizer {
public:
    ChunkMinimizer(const Tokens& cand, const Tokens& ref) : cand_(cand) {
        for (size_t j = 0; j < ref.size(); ++j) ref_positions_[ref[j]].push_back(j);
        need_by_word_.reserve(cand.size());
        std::unordered_map<std::string, size_t> cand_counts;
        for (const auto& w : cand) ++cand_counts[w];
        for (auto& [word, positions] : ref_positions_) {
            auto it = cand_counts.find(word);
            const size_t quota =
                it == cand_counts.end() ? 0 : std::min(it->second, positions.size());
            quota_[word] = quota;
            total_need_ += quota;
        }
        for (const auto& w : cand) {
            auto it = quota_.find(w);
            need_by_word_.push_back(it == quota_.end() ? nullptr : &it->second);
        }
        // remaining occurrences of cand[i]'s word at positions >= i
        remaining_.assign(cand.size() + 1, {});
        std::unordered_map<std::string, size_t> tail_counts;
        for (size_t i = cand.size(); i-- > 0;) {
            ++tail_counts[cand[i]];
            remaining_[i] = tail_counts[cand[i]];
        }
    }

    [[nodiscard]] size_t matches() const { return total_need_; }

    // Minimal chunk count over all maximum matchings.
    size_t min_chunks() {
        if (total_need_ == 0) return 0;
        for (auto& [word, positions] : ref_positions_) {
            used_[word].assign(positions.size(), false);
        }
        best_adjacencies_ = 0;
        nodes_ = 0;
        budget_exceeded_ = false;
        dfs(0, kNoPrev, 0, total_need_);
        if (budget_exceeded_) return greedy_chunks();
        return total_need_ - best_adjacencies_;
    }

private:
    static constexpr size_t kNoPrev = static_cast<size_t>(-1);
    static constexpr size_t kNodeBudget = 1u << 20;

    void dfs(size_t i, size_t prev_ref, size_t adjacencies, size_t need_left) {
        if (budget_exceeded_) return;
        if (adjacencies + need_left <= best_adjacencies_ && need_left > 0) return;
        if (need_left == 0 || i == cand_.size()) {
            best_adjacencies_ = std::max(best_adjacencies_, adjacencies);
            return;
        }
        if (++nodes_ > kNodeBudget) {
            budget_exceeded_ = true;
            return;
        }

        const std::string& word = cand_[i];
        size_t* need = need_by_word_[i];
        if (need != nullptr && *need > 0) {
            auto& positions = ref_positions_[word];
            auto& used = used_[word];
            // Adjacent continuation first so good alignments are found early.
            std::vector<size_t> order;
            order.reserve(positions.size());
            for (size_t k = 0; k < positions.size(); ++k) {
                if (!used[k] && prev_ref != kNoPrev && positions[k] == prev_ref + 1) {
                    order.push_back(k);
                }
            }
            for (size_t k = 0; k < positions.size(); ++k) {
                if (!used[k] && !(prev_ref != kNoPrev && positions[k] == prev_ref + 1)) {
                    order.push_back(k);
                }
            }
            for (size_t k : order) {
                const bool adjacent = prev_ref != kNoPrev && positions[k] == prev_ref + 1;
                used[k] = true;
                --*need;
                dfs(i + 1, positions[k], adjacencies + (adjacent ? 1 : 0), need_left - 1);
                ++*need;
                used[k] = false;
            }
            // Skipping this occurrence is only legal if the quota can still be
            // met from later occurrences of the same word.
            if (remaining_[i] - 1 >= *need) {
                dfs(i + 1, kNoPrev, adjacencies, need_left);
            }
        } else {
            dfs(i + 1, kNoPrev, adjacencies, need_left);
        }
    }

    size_t greedy_chunks() {
        for (auto& [word, positions] : ref_positions_) {
            used_[word].assign(positions.size(), false);
        }
        std::unordered_map<std::string, size_t> need = quota_;
        size_t chunks = 0;
        size_t prev_ref = kNoPrev;
        bool prev_matched = false;
        for (size_t i = 0; i < cand_.size(); ++i) {
            auto it = need.find(cand_[i]);
            if (it == need.end() || it->second == 0) {
                prev_matched = false;
                continue;
            }
            auto& positions = ref_positions_[cand_[i]];
            auto& used = used_[cand_[i]];
            size_t chosen = kNoPrev;
            if (prev_matched) {
                for (size_t k = 0; k < positions.size(); ++k) {
                    if (!used[k] && positions[k] == prev_ref + 1) {
                        chosen = k;
                        break;
                    }
                }
            }
            if (chosen == kNoPrev) {
                for (size_t k = 0; k < positions.size(); ++k) {
                    if (!used[k]) {
                        chosen = k;
                        break;
                    }
                }
            }
            const bool adjacent = prev_matched && positions[chosen] == prev_ref + 1;
            if (!adjacent) ++chunks;
            used[chosen] = true;
            --it->second;
            prev_ref = positions[chosen];
            prev_matched = true;
        }
        return chunks;
    }

    const Tokens& cand_;
    std::unordered_map<std::string, std::vector<size_t>> ref_positions_;
    std::unordered_map<std::string, size_t> quota_;
    std::unordered_map<std::string, std::vector<bool>> used_;
    std::vector<size_t*> need_by_word_;
    std::vector<size_t> remaining_;
    size_t total_need_ = 0;
    size_t best_adjacencies_ = 0;
    size_t nodes_ = 0;
    bool budget_exceeded_ = false;
};

}  // namespace metrics_detail

// Corpus-level BLEU-1..4 with clipped n-gram precision, geometric mean and
// brevity penalty; no smoothing, so a zero precision zeroes every order that
// includes it. Reference length r uses the per-instance closest reference
// (ties to the shorter one).
inline std::array<double, 4> bleu(const std::vector<EvalInstance>& instances) {
    using namespace metrics_detail;
    const auto cooked = cook(instances);

    std::array<double, 4> matched{};
    std::array<double, 4> total{};
    double candidate_len = 0.0;
    double reference_len = 0.0;

    for (const auto& inst : cooked) {
        const size_t c = inst.candidate.size();
        size_t closest = inst.references[0].size();
        for (const auto& ref : inst.references) {
            const auto diff = [&](size_t len) {
                return len > c ? len - c : c - len;
            };
            if (diff(ref.size()) < diff(closest) ||
                (diff(ref.size()) == diff(closest) && ref.size() < closest)) {
                closest = ref.size();
            }
        }
        candidate_len += static_cast<double>(c);
        reference_len += static_cast<double>(closest);

        for (size_t n = 1; n <= 4; ++n) {
            if (c >= n) total[n - 1] += static_cast<double>(c - n + 1);
            std::unordered_map<std::string, size_t> cand_counts;
            count_ngrams(inst.candidate, n, cand_counts);
            if (cand_counts.empty()) continue;
            std::unordered_map<std::string, size_t> max_ref_counts;
            for (const auto& ref : inst.references) {
                std::unordered_map<std::string, size_t> ref_counts;
                count_ngrams(ref, n, ref_counts);
                for (const auto& [gram, count] : ref_counts) {
                    auto& slot = max_ref_counts[gram];
                    slot = std::max(slot, count);
                }
            }
            for (const auto& [gram, count] : cand_counts) {
                auto it = max_ref_counts.find(gram);
                if (it != max_ref_counts.end()) {
                    matched[n - 1] += static_cast<double>(std::min(count, it->second));
                }
            }
        }
    }

    const double bp = candidate_len == 0.0
                          ? 0.0
                          : std::min(1.0, std::exp(1.0 - reference_len / candidate_len));
    std::array<double, 4> scores{};
    double log_sum = 0.0;
    bool zero = false;
    for (size_t n = 1; n <= 4; ++n) {
        const double p = total[n - 1] > 0.0 ? matched[n - 1] / total[n - 1] : 0.0;
        if (p <= 0.0) zero = true;
        if (!zero) log_sum += std::log(p);
        scores[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n));
    }
    return scores;
}

// ROUGE-L: LCS F-measure with beta = 1.2, best reference per instance,
// averaged over the corpus.
inline double rouge_l(const std::vector<EvalInstance>& instances,
                      std::vector<double>* per_instance = nullptr) {
    using namespace metrics_detail;
    const auto cooked = cook(instances);
    constexpr double beta = 1.2;

    double sum = 0.0;
    for (const auto& inst : cooked) {
        double best = 0.0;
        for (const auto& ref : inst.references) {
            const size_t lcs = longest_common_subsequence_length(inst.candidate, ref);
            if (lcs == 0 || inst.candidate.empty() || ref.empty()) continue;
            const double precision = static_cast<double>(lcs) / inst.candidate.size();
            const double recall = static_cast<double>(lcs) / ref.size();
            const double denom = recall + beta * beta * precision;
            best = std::max(best, (1.0 + beta * beta) * recall * precision / denom);
        }
        if (per_instance != nullptr) per_instance->push_back(best);
        sum += best;
    }
    return instances.empty() ? 0.0 : sum / static_cast<double>(instances.size());
}

// METEOR, exact-match variant: unigram alignment without stemming or
// synonymy. Fmean = 10PR/(R+9P), fragmentation penalty 0.5*(chunks/m)^3,
// best reference per instance, corpus mean.
inline double meteor_lite(const std::vector<EvalInstance>& instances,
                          std::vector<double>* per_instance = nullptr) {
    using namespace metrics_detail;
    const auto cooked = cook(instances);

    double sum = 0.0;
    for (const auto& inst : cooked) {
        double best = 0.0;
        for (const auto& ref : inst.references) {
            ChunkMinimizer aligner(inst.candidate, ref);
            const size_t m = aligner.matches();
            if (m == 0) continue;
            const size_t chunks = aligner.min_chunks();
            const double precision = static_cast<double>(m) / inst.candidate.size();
            const double recall = static_cast<double>(m) / ref.size();
            const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
            const double frag = static_cast<double>(chunks) / static_cast<double>(m);
            const double penalty = 0.5 * frag * frag * frag;
            best = std::max(best, fmean * (1.0 - penalty));
        }
        if (per_instance != nullptr) per_instance->push_back(best);
        sum += best;
    }
    return instances.empty() ? 0.0 : sum / static_cast<double>(instances.size());
}

// CIDEr-D: TF-IDF n-gram cosine consensus (n = 1..4) with clipped candidate
// counts and a Gaussian length penalty (sigma = 6), averaged over references
// and n, scaled by 10. IDF is log(N) - log(max(1, df)) with df counted over
// reference sets, as in the reference implementation. Needs >= 2 instances
// for a meaningful IDF.
inline double cider_d(const std::vector<EvalInstance>& instances,
                      std::vector<double>* per_instance = nullptr) {
    using namespace metrics_detail;
    if (instances.size() < 2) {
        raise(ErrorCode::CorpusTooSmall,
              "CIDEr-D needs at least 2 instances, got " + std::to_string(instances.size()));
    }
    const auto cooked = cook(instances);
    constexpr double sigma = 6.0;
    constexpr size_t max_n = 4;

    std::unordered_map<std::string, double> document_frequency;
    for (const auto& inst : cooked) {
        std::unordered_map<std::string, size_t> seen;
        for (const auto& ref : inst.references) {
            for (size_t n = 1; n <= max_n; ++n) count_ngrams(ref, n, seen);
        }
        for (const auto& [gram, count] : seen) document_frequency[gram] += 1.0;
    }
    const double log_corpus = std::log(static_cast<double>(cooked.size()));

    struct Vec {
        std::array<std::unordered_map<std::string, double>, max_n> weights;
        std::array<double, max_n> norm{};
    };
    auto vectorize = [&](const Tokens& tokens) {
        Vec vec;
        for (size_t n = 1; n <= max_n; ++n) {
            std::unordered_map<std::string, size_t> counts;
            count_ngrams(tokens, n, counts);
            double norm_sq = 0.0;
            for (const auto& [gram, count] : counts) {
                auto df_it = document_frequency.find(gram);
                const double df = df_it == document_frequency.end() ? 0.0 : df_it->second;
                const double idf = log_corpus - std::log(std::max(1.0, df));
                const double w = static_cast<double>(count) * idf;
                vec.weights[n - 1][gram] = w;
                norm_sq += w * w;
            }
            vec.norm[n - 1] = std::sqrt(norm_sq);
        }
        return vec;
    };

    double sum = 0.0;
    for (const auto& inst : cooked) {
        const Vec cand = vectorize(inst.candidate);
        std::array<double, max_n> acc{};
        for (const auto& ref : inst.references) {
            const Vec rv = vectorize(ref);
            const double delta = static_cast<double>(inst.candidate.size()) -
                                 static_cast<double>(ref.size());
            const double length_penalty = std::exp(-delta * delta / (2.0 * sigma * sigma));
            for (size_t n = 0; n < max_n; ++n) {
                double dot = 0.0;
                for (const auto& [gram, w] : cand.weights[n]) {
                    auto it = rv.weights[n].find(gram);
                    if (it != rv.weights[n].end()) {
                        dot += std::min(w, it->second) * it->second;
                    }
                }
                if (cand.norm[n] != 0.0 && rv.norm[n] != 0.0) {
                    dot /= cand.norm[n] * rv.norm[n];
                }
                acc[n] += dot * length_penalty;
            }
        }
        double score = 0.0;
        for (size_t n = 0; n < max_n; ++n) score += acc[n];
        score /= static_cast<double>(max_n) * static_cast<double>(inst.references.size());
        score *= 10.0;
        if (per_instance != nullptr) per_instance->push_back(score);
        sum += score;
    }
    return sum / static_cast<double>(cooked.size());
}

// SPIDEr is the arithmetic mean of CIDEr-D and SPICE; SPICE arrives as an
// externally supplied corpus score.
inline double spider(std::optional<double> cider_score, std::optional<double> spice_score) {
    if (!cider_score || !spice_score) {
        raise(ErrorCode::MissingComponent, "spider needs both cider_d and spice");
    }
    return (*cider_score + *spice_score) / 2.0;
}

// Runs every internal metric, merges externally supplied corpus scores and
// derives SPIDEr when SPICE is available. Keys follow kReportColumns; a
// metric with no value is simply absent from the map, never zero.
inline MetricReport evaluate_corpus(const std::vector<EvalInstance>& instances,
                                    const ExternalScores& external = {}) {
    if (instances.empty()) raise(ErrorCode::EmptyCorpus, "no instances to evaluate");

    MetricReport report;
    auto run = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw Error(e.code(), std::string(name) + ": " + e.message());
        }
    };

    const auto bleu_scores = run("bleu", [&] { return bleu(instances); });
    for (size_t n = 0; n < 4; ++n) {
        report.scores["bleu_" + std::to_string(n + 1)] = bleu_scores[n];
    }

    std::vector<double> rouge_per, meteor_per, cider_per;
    report.scores["rouge_l"] = run("rouge_l", [&] { return rouge_l(instances, &rouge_per); });
    report.scores["meteor"] = run("meteor", [&] { return meteor_lite(instances, &meteor_per); });
    report.scores["cider_d"] = run("cider_d", [&] { return cider_d(instances, &cider_per); });

    if (external.spice) report.scores["spice"] = *external.spice;
    if (external.fense) report.scores["fense"] = *external.fense;
    if (external.spice) {
        report.scores["spider"] = spider(report.scores["cider_d"], *external.spice);
    }

    report.instances.resize(instances.size());
    for (size_t i = 0; i < instances.size(); ++i) {
        report.instances[i] =
            InstanceScores{instances[i].id, rouge_per[i], meteor_per[i], cider_per[i]};
    }
    return report;
}

// Aligned two-row table in Table-1 column order; metrics without a value
// print "-".
inline std::string render_report_table(const MetricReport& report) {
    std::string header, values;
    for (const char* column : kReportColumns) {
        std::string value = "-";
        if (auto score = report.get(column)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", *score);
            value = buf;
        }
        const size_t width = std::max(std::string(column).size(), value.size());
        if (!header.empty()) {
            header += "  ";
            values += "  ";
        }
        header += column + std::string(width - std::string(column).size(), ' ');
        values += value + std::string(width - value.size(), ' ');
    }
    return header + "\n" + values + "\n";
}

inline nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json metrics;
    for (const char* column : kReportColumns) {
        auto score = report.get(column);
        metrics[column] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
    }
    nlohmann::json instances = nlohmann::json::array();
    for (const auto& inst : report.instances) {
        instances.push_back({{"id", inst.id},
                             {"rouge_l", inst.rouge_l},
                             {"meteor", inst.meteor},
                             {"cider_d", inst.cider_d}});
    }
    return nlohmann::json{
        {"metrics", metrics},
        {"notes", {{"meteor", "exact-match variant (no stemming or synonym matching)"}}},
        {"instances", instances}};
}

}  // namespace accforge
