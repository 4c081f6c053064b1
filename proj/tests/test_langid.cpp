#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include "mtct/langid.hpp"

using namespace mtct;

namespace {

std::vector<std::string> lines_of(const std::string &path) {
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.push_back(line);
    return out;
}

std::string data(const std::string &rel) { return std::string(MTCT_DATA_DIR) + "/" + rel; }

LanguageProfile trained(const char *lang) {
    return train_profile(LanguageCode(lang), lines_of(data(std::string("langid/") + lang + ".train.txt")));
}

const std::vector<LanguageProfile> &shipped() {
    static const auto p = load_profiles(data("profiles"));
    return p;
}

} // namespace

TEST(Profile, CharacteristicTrigramsScoreHigher) {
    const auto de = trained("de");
    EXPECT_GT(de.logprob("sch"), de.logprob("zzz"));
}

TEST(Profile, InsufficientText) {
    EXPECT_THROW(train_profile("de"_lang, {std::string(100, 'a')}), InsufficientText);
}

TEST(Profile, RetrainingIsByteIdentical) { EXPECT_EQ(trained("fr").to_bytes(), trained("fr").to_bytes()); }

TEST(Profile, JsonRoundTrip) {
    const auto p = trained("en");
    EXPECT_EQ(LanguageProfile::from_json(nlohmann::json::parse(p.to_bytes())).to_bytes(), p.to_bytes());
}

TEST(Detector, GermanSentence) {
    const LanguageDetector det({trained("en"), trained("de"), trained("fr")});
    EXPECT_EQ(det.detect("Der Hund läuft schnell über die Straße.").top, "de"_lang);
}

TEST(Detector, EmptyText) {
    const LanguageDetector det({trained("en"), trained("de")});
    EXPECT_THROW(det.detect(""), EmptyText);
    EXPECT_THROW(det.detect("  123 ?!"), EmptyText);
}

TEST(Detector, NeedsTwoProfiles) {
    EXPECT_THROW(LanguageDetector({trained("en")}), NoProfiles);
    EXPECT_THROW(LanguageDetector({trained("en"), trained("en")}), NoProfiles);
}

TEST(Detector, PosteriorSumsToOne) {
    const LanguageDetector det(shipped());
    for (const char *t : {"Hello there, how are you?", "Добрый день", "こんにちは、元気ですか", "a"}) {
        const auto r = det.detect(t);
        const double s = std::accumulate(r.ranked.begin(), r.ranked.end(), 0.0,
                                         [](double acc, const auto &p) { return acc + p.second; });
        EXPECT_NEAR(s, 1.0, 1e-9) << t;
        EXPECT_EQ(r.ranked.size(), shipped().size());
    }
}

TEST(Detector, ProfileOrderDoesNotMatter) {
    auto profiles = shipped();
    const LanguageDetector a(profiles);
    std::reverse(profiles.begin(), profiles.end());
    const LanguageDetector b(profiles);
    for (const char *t : {"Das ist ein Test.", "Ceci est un test.", "Це тест.", "यह एक परीक्षा है।"}) {
        const auto ra = a.detect(t), rb = b.detect(t);
        EXPECT_EQ(ra.top, rb.top);
        for (std::size_t i = 0; i < ra.ranked.size(); ++i)
            EXPECT_DOUBLE_EQ(ra.ranked[i].second, rb.ranked[i].second);
    }
}

TEST(Detector, ScriptShortCircuit) {
    const LanguageDetector det(shipped());
    const auto r = det.detect("한국어 문장입니다");
    EXPECT_EQ(r.top, "ko"_lang);
    EXPECT_DOUBLE_EQ(r.ranked.front().second, 1.0);
    EXPECT_EQ(det.detect("これは日本語の文です").top, "ja"_lang);
    EXPECT_EQ(det.detect("这是一个中文句子").top, "zh"_lang);
    EXPECT_EQ(det.detect("هذه جملة عربية").top, "ar"_lang);
}

TEST(Detector, ShippedProfilesCoverEvaluationLanguages) {
    const LanguageDetector det(shipped());
    for (const char *c : {"en", "cs", "de", "fr", "zh", "ru", "ro", "uk", "hi", "ja", "ko", "nl", "ar", "it"})
        EXPECT_TRUE(det.covers(LanguageCode(c))) << c;
}

TEST(Detector, HeldOutAccuracy) {
    const LanguageDetector det(shipped());
    for (const auto &p : det.profiles()) {
        const auto lines = lines_of(data("langid/" + p.lang().str() + ".heldout.txt"));
        ASSERT_FALSE(lines.empty());
        std::size_t ok = 0;
        for (const auto &l : lines)
            ok += det.detect(l).top == p.lang();
        EXPECT_GE(static_cast<double>(ok) / static_cast<double>(lines.size()), 0.95) << p.lang().str();
    }
}

TEST(LoadProfiles, MissingDirectory) { EXPECT_THROW(load_profiles("/nonexistent/dir"), UnreadableFile); }
