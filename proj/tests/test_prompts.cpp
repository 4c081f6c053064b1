#include <gtest/gtest.h>

#include <map>

#include "mtct/prompts.hpp"

using namespace mtct;

TEST(PromptBank, FourteenPrompts) {
    const auto &bank = prompt_bank();
    ASSERT_EQ(bank.size(), 14u);
    for (std::size_t i = 0; i < bank.size(); ++i)
        EXPECT_EQ(bank[i].id, static_cast<int>(i + 1));
}

TEST(PromptBank, VerbatimRows) {
    const auto &bank = prompt_bank();
    EXPECT_EQ(bank[3].pattern, "[L1]: [SRC] = [L2]:");
    EXPECT_EQ(bank[7].pattern, "Translate this from [L1] into [L2]: [SRC]");
    EXPECT_EQ(bank[8].pattern, "Translate this into [L2]: [SRC]");
}

TEST(PromptBank, SlotInvariants) {
    for (const auto &p : prompt_bank()) {
        EXPECT_EQ(detail::count_occurrences(p.pattern, "[SRC]"), 1u) << p.id;
        EXPECT_GE(detail::count_occurrences(p.pattern, "[L2]"), 1u) << p.id;
        EXPECT_EQ(p.uses_source_lang, p.pattern.find("[L1]") != std::string_view::npos) << p.id;
    }
}

TEST(PromptBank, SourceLanguageRows) {
    std::vector<int> ids;
    for (const auto &p : prompt_bank())
        if (p.uses_source_lang)
            ids.push_back(p.id);
    EXPECT_EQ(ids, (std::vector<int>{1, 4, 8, 11, 12, 14}));
}

TEST(PromptBank, JsonExport) {
    const auto j = prompt_bank_json();
    ASSERT_EQ(j.size(), 14u);
    EXPECT_EQ(j[0]["id"], 1);
    EXPECT_EQ(j[3]["pattern"], "[L1]: [SRC] = [L2]:");
    EXPECT_EQ(j[3]["uses_source_lang"], true);
}

TEST(RenderPrompt, TargetOnlyPrompt) {
    EXPECT_EQ(render_prompt(prompt_by_id(9), {"en"_lang, "de"_lang}, "Hello."), "Translate this into German: Hello.");
}

TEST(RenderPrompt, ChineseSource) {
    const auto out = render_prompt(prompt_by_id(9), {"zh"_lang, "en"_lang}, "你好");
    EXPECT_NE(out.find("English"), std::string::npos);
    EXPECT_NE(out.find("你好"), std::string::npos);
    EXPECT_EQ(out.find('['), std::string::npos);
}

TEST(RenderPrompt, BothLanguages) {
    EXPECT_EQ(render_prompt(prompt_by_id(8), {"fr"_lang, "de"_lang}, "Bonjour"),
              "Translate this from French into German: Bonjour");
}

TEST(RenderPrompt, NoSlotLeftInAnyPrompt) {
    for (const auto &p : prompt_bank()) {
        const auto out = render_prompt(p, {"uk"_lang, "cs"_lang}, "text");
        EXPECT_EQ(out.find("[SRC]"), std::string::npos);
        EXPECT_EQ(out.find("[L1]"), std::string::npos);
        EXPECT_EQ(out.find("[L2]"), std::string::npos);
    }
}

TEST(RenderPrompt, SourceTextWithSlotMarkersIsLiteral) {
    const std::string src = "see [L2] and [L1] and [SRC]";
    for (const auto &p : prompt_bank()) {
        const auto out = render_prompt(p, {"en"_lang, "de"_lang}, src);
        EXPECT_NE(out.find(src), std::string::npos) << p.id;
    }
}

TEST(RenderPrompt, UnregisteredLanguage) {
    EXPECT_THROW(render_prompt(prompt_by_id(1), {"sw"_lang, "de"_lang}, "x"), MissingSlotValue);
    EXPECT_THROW(render_prompt(prompt_by_id(9), {"en"_lang, "sw"_lang}, "x"), MissingSlotValue);
    // Prompt 9 has no [L1], so an unknown source language is fine.
    EXPECT_NO_THROW(render_prompt(prompt_by_id(9), {"sw"_lang, "de"_lang}, "x"));
}

TEST(RenderPrompt, ContainsSourceAndIsInjective) {
    const TranslationDirection d{"en"_lang, "ro"_lang};
    const std::vector<std::string> sources = {"a", "b", "ab", "a b", "b a", "Hello, world."};
    for (const auto &p : prompt_bank()) {
        std::set<std::string> seen;
        for (const auto &s : sources) {
            const auto out = render_prompt(p, d, s);
            EXPECT_GE(out.size(), s.size());
            EXPECT_NE(out.find(s), std::string::npos);
            seen.insert(out);
        }
        EXPECT_EQ(seen.size(), sources.size());
    }
}

TEST(PickPrompt, Deterministic) {
    for (std::uint64_t i = 0; i < 100; ++i)
        EXPECT_EQ(pick_prompt(42, i).id, pick_prompt(42, i).id);
}

TEST(PickPrompt, RoughlyUniform) {
    std::map<int, int> freq;
    for (std::uint64_t i = 0; i < 14000; ++i)
        ++freq[pick_prompt(42, i).id];
    ASSERT_EQ(freq.size(), 14u);
    double chi2 = 0;
    for (const auto &[id, n] : freq) {
        EXPECT_GE(n, 850) << id;
        EXPECT_LE(n, 1150) << id;
        chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
    }
    // 13 degrees of freedom; 0.999 quantile is about 34.5.
    EXPECT_LT(chi2, 34.5);
}

TEST(PickPrompt, SeedsDiffer) {
    bool differ = false;
    for (std::uint64_t i = 0; i < 100 && !differ; ++i)
        differ = pick_prompt(42, i).id != pick_prompt(43, i).id;
    EXPECT_TRUE(differ);
}
