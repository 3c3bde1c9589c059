#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace accforge {

// Word tokens plus, per token, the [begin, end) character span it came from
// in the original text. Spans let callers recover original-cased substrings.
struct TokenSeq {
    std::vector<std::string> tokens;
    std::vector<std::pair<size_t, size_t>> spans;

    [[nodiscard]] size_t size() const { return tokens.size(); }
    [[nodiscard]] bool empty() const { return tokens.empty(); }
};

namespace detail {

inline bool is_stripped_punct(char c) {
    switch (c) {
        case '.': case ',': case '!': case '?':
        case ';': case ':': case '"': case '(': case ')':
            return true;
        default:
            return false;
    }
}

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

// Lowercases (ASCII), strips . , ! ? ; : " ( ) and splits on whitespace.
// Apostrophes and hyphens stay inside tokens. Tokens that were pure
// punctuation vanish. Shared by the dataset-side caption handling and the
// metric tokenizer so both sides agree on what a "word" is.
inline TokenSeq normalize_caption(std::string_view text) {
    TokenSeq seq;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && detail::is_space(text[i])) ++i;
        if (i >= text.size()) break;
        const size_t word_begin = i;
        while (i < text.size() && !detail::is_space(text[i])) ++i;
        const size_t word_end = i;

        std::string token;
        size_t span_begin = std::string::npos;
        size_t span_end = word_begin;
        for (size_t k = word_begin; k < word_end; ++k) {
            const char c = text[k];
            if (detail::is_stripped_punct(c)) continue;
            token.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
            if (span_begin == std::string::npos) span_begin = k;
            span_end = k + 1;
        }
        if (!token.empty()) {
            seq.tokens.push_back(std::move(token));
            seq.spans.emplace_back(span_begin, span_end);
        }
    }
    return seq;
}

struct CommonRun {
    size_t start_a = 0;
    size_t start_b = 0;
    size_t length = 0;
};

// Longest contiguous token run present in both sequences (word-level longest
// common substring). Ties break toward the smallest start_a, then start_b.
inline CommonRun longest_common_word_substring(const TokenSeq& a, const TokenSeq& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    CommonRun best;
    if (n == 0 || m == 0) return best;

    // run[j] = length of the common run ending at a[i], b[j].
    std::vector<size_t> run(m, 0);
    std::vector<size_t> prev(m, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            if (a.tokens[i] == b.tokens[j]) {
                run[j] = 1 + (i > 0 && j > 0 ? prev[j - 1] : 0);
                if (run[j] > best.length) {
                    best.length = run[j];
                    best.start_a = i + 1 - run[j];
                    best.start_b = j + 1 - run[j];
                }
            } else {
                run[j] = 0;
            }
        }
        std::swap(run, prev);
    }
    return best;
}

// Longest common subsequence length (non-contiguous), used by ROUGE-L.
inline size_t longest_common_subsequence_length(const std::vector<std::string>& a,
                                                const std::vector<std::string>& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    if (n == 0 || m == 0) return 0;
    std::vector<size_t> row(m + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        size_t diag = 0;  // row[j-1] from the previous iteration of i
        for (size_t j = 1; j <= m; ++j) {
            const size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return row[m];
}

}  // namespace accforge
