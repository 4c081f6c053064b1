#pragma once

// The fourteen instruction prompts and seeded prompt selection.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/rng.hpp"

namespace mtct {

struct PromptTemplate {
    int id = 0;
    std::string_view pattern;
    bool uses_source_lang = false;
};

inline constexpr std::string_view kSlotSource = "[SRC]";
inline constexpr std::string_view kSlotSourceLang = "[L1]";
inline constexpr std::string_view kSlotTargetLang = "[L2]";

namespace detail {

inline constexpr std::array<std::string_view, 14> kPromptPatterns = {
    "Given the following source text in [L1]: [SRC], a good [L2] translation is:",
    "If the original version says [SRC] then the [L2] version should say:",
    "What is the [L2] translation of the sentence: [SRC]?",
    "[L1]: [SRC] = [L2]:",
    "[SRC] translates into [L2] as:",
    "How do you say [SRC] in [L2]?",
    "[SRC] = [L2]:",
    "Translate this from [L1] into [L2]: [SRC]",
    "Translate this into [L2]: [SRC]",
    "Given the following passage: [SRC], a good [L2] translation is:",
    "[L1]: [SRC] translates into [L2] as:",
    "If the [L1] version says: [SRC]; then the [L2] version should say:",
    "What is the [L2] translation of: [SRC]?",
    "What is the [L2] translation of the [L1] sentence: [SRC]?",
};

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

inline void replace_all(std::string &s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

} // namespace detail

inline const std::vector<PromptTemplate> &prompt_bank() {
    static const std::vector<PromptTemplate> bank = [] {
        std::vector<PromptTemplate> out;
        int id = 1;
        for (std::string_view p : detail::kPromptPatterns)
            out.push_back({id++, p, p.find(kSlotSourceLang) != std::string_view::npos});
        return out;
    }();
    return bank;
}

/// Looks up a template by its 1-based id.
inline const PromptTemplate &prompt_by_id(int id) {
    const auto &bank = prompt_bank();
    if (id < 1 || id > static_cast<int>(bank.size()))
        throw MalformedRow("prompt id " + std::to_string(id) + " outside 1.." + std::to_string(bank.size()));
    return bank[static_cast<std::size_t>(id - 1)];
}

/// Substitutes [SRC], [L1], and [L2]. The source text is inserted last so that
/// bracketed text inside it is never mistaken for a slot.
inline std::string render_prompt(const PromptTemplate &tmpl, const TranslationDirection &direction,
                                 std::string_view src_text,
                                 const LanguageRegistry &registry = LanguageRegistry::standard()) {
    if (src_text.empty())
        throw MalformedRow("empty source text for prompt " + std::to_string(tmpl.id));
    const auto tgt_name = registry.display_name(direction.tgt);
    if (!tgt_name)
        throw MissingSlotValue("no display name for target language '" + direction.tgt.str() + "'");
    std::string out(tmpl.pattern);
    if (tmpl.uses_source_lang) {
        const auto src_name = registry.display_name(direction.src);
        if (!src_name)
            throw MissingSlotValue("no display name for source language '" + direction.src.str() + "'");
        detail::replace_all(out, kSlotSourceLang, *src_name);
    }
    detail::replace_all(out, kSlotTargetLang, *tgt_name);
    const auto pos = out.find(kSlotSource);
    out.replace(pos, kSlotSource.size(), src_text);
    return out;
}

/// Deterministic in (seed, index) and uniform over the bank.
inline const PromptTemplate &pick_prompt(std::uint64_t seed, std::uint64_t index) {
    const CounterRng rng(seed, "prompt");
    return prompt_bank()[static_cast<std::size_t>(rng.below(index, prompt_bank().size()))];
}

inline ordered_json prompt_bank_json() {
    ordered_json arr = ordered_json::array();
    for (const auto &p : prompt_bank()) {
        ordered_json j;
        j["id"] = p.id;
        j["pattern"] = std::string(p.pattern);
        j["uses_source_lang"] = p.uses_source_lang;
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace mtct
