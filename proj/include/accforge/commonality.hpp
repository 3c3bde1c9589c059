#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "accforge/edit_synth.hpp"
#include "accforge/text.hpp"

namespace accforge {

// Tokens that should not dangle at either end of a Replace commonality
// ("A man speaks, with a" reads as a fragment; "A man speaks" does not).
inline constexpr std::array<std::string_view, 6> kConnectiveTokens = {
    "with", "a", "an", "and", "the", "of",
};

// Replace overlaps shorter than this (after trimming) are degenerate
// training targets and are skipped.
inline constexpr size_t kMinReplaceCommonalityTokens = 3;

namespace commonality_detail {

inline bool is_connective(const std::string& token) {
    for (std::string_view c : kConnectiveTokens) {
        if (token == c) return true;
    }
    return false;
}

}  // namespace commonality_detail

// The ACC target for one edit pair. Add keeps the pre-edit caption, Delete
// keeps the post-edit caption, Replace extracts the longest common word-level
// run of the two captions (original casing restored via token spans, dangling
// connectives trimmed from both ends). Returns nullopt when a Replace overlap
// is too short to be a usable target; the pair should be skipped, not failed.
inline std::optional<std::string> derive_commonality(const EditPair& pair) {
    switch (pair.op) {
        case EditOp::Add:
            return pair.before_caption;
        case EditOp::Delete:
            return pair.after_caption;
        case EditOp::Replace:
            break;
    }

    const TokenSeq before = normalize_caption(pair.before_caption);
    const TokenSeq after = normalize_caption(pair.after_caption);
    const CommonRun run = longest_common_word_substring(before, after);

    size_t start = run.start_a;
    size_t length = run.length;
    while (length > 0 && commonality_detail::is_connective(before.tokens[start])) {
        ++start;
        --length;
    }
    while (length > 0 &&
           commonality_detail::is_connective(before.tokens[start + length - 1])) {
        --length;
    }
    if (length < kMinReplaceCommonalityTokens) return std::nullopt;

    const size_t char_begin = before.spans[start].first;
    const size_t char_end = before.spans[start + length - 1].second;
    return pair.before_caption.substr(char_begin, char_end - char_begin);
}

}  // namespace accforge
