#include <gtest/gtest.h>

#include <random>

#include "mtct/mockmt.hpp"
#include "oracles.hpp"

using namespace mtct;

namespace {

std::string data(const std::string &rel) { return std::string(MTCT_DATA_DIR) + "/" + rel; }

const LanguageDetector &detector() {
    static const LanguageDetector d(load_profiles(data("profiles")));
    return d;
}

const MultiParallel &fixture() {
    static const auto mp = MultiParallel::load_file(data("multiparallel/fixture.jsonl"));
    return mp;
}

std::string random_sentence(std::mt19937 &g, bool with_unicode) {
    static const std::vector<std::string> ascii = {"a",  "b",  "c",  "the", "cat", "1",  "2",   ".",  ",", "-",
                                                   "!",  "?",  "'",  "\"",  "(",   ")",  "3.5", "1,000", "&amp;",
                                                   "&lt;", "x-y", "a.b", "dog."};
    static const std::vector<std::string> uni = {"“", "”", "«", "»", "—", "。", "，", "€", "¿", "ä", "Straße", "über"};
    std::uniform_int_distribution<int> len(0, 12), coin(0, 3);
    std::string s;
    const int n = len(g);
    for (int i = 0; i < n; ++i) {
        const auto &pool = with_unicode && coin(g) == 0 ? uni : ascii;
        if (coin(g) != 0)
            s += ' ';
        s += pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(g)];
    }
    return s;
}

std::vector<std::string> random_words(std::mt19937 &g, int max_len) {
    static const std::vector<std::string> v = {"a", "b", "c", "d", "e"};
    std::uniform_int_distribution<int> len(0, max_len), pick(0, 4);
    std::vector<std::string> out(static_cast<std::size_t>(len(g)));
    for (auto &w : out)
        w = v[static_cast<std::size_t>(pick(g))];
    return out;
}

TokenizedSentence ts(std::vector<std::string> t) { return {std::move(t), TokenizerId::Intl13a}; }

} // namespace

TEST(Tokenizer, HelloWorld) {
    EXPECT_EQ(tokenize_13a("Hello, world!"), (std::vector<std::string>{"Hello", ",", "world", "!"}));
}

TEST(Tokenizer, NumbersKeepSeparators) {
    EXPECT_EQ(tokenize_13a("It costs 1,000.50 today."),
              (std::vector<std::string>{"It", "costs", "1,000.50", "today", "."}));
}

TEST(Tokenizer, MatchesRegexOracle) {
    std::mt19937 g(11);
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_sentence(g, i % 2 == 1);
        EXPECT_EQ(tokenize_13a(s), oracle::tokenize_13a(s)) << s;
    }
}

TEST(Tokenizer, CharLevelForCjk) {
    EXPECT_EQ(tokenizer_for("zh"_lang), TokenizerId::CharLevel);
    EXPECT_EQ(tokenizer_for("ko"_lang), TokenizerId::CharLevel);
    EXPECT_EQ(tokenizer_for("de"_lang), TokenizerId::Intl13a);
    EXPECT_EQ(tokenize_chars("你好 世界"), (std::vector<std::string>{"你", "好", "世", "界"}));
}

TEST(Bleu, ClipsRepeatedUnigrams) {
    const auto s = bleu_stats({"the", "the", "the"}, {"the", "the"});
    EXPECT_EQ(s.matches[0], 2u);
    EXPECT_EQ(s.totals[0], 3u);
}

TEST(Bleu, EdgeCases) {
    const std::vector<std::string> ref = {"the", "cat", "sat", "on", "the", "mat"};
    EXPECT_DOUBLE_EQ(corpus_bleu({ts({})}, {ts(ref)}), 0.0);
    EXPECT_DOUBLE_EQ(sentence_bleu(ts({}), ts(ref)), 0.0);
    EXPECT_NEAR(corpus_bleu({ts(ref)}, {ts(ref)}), 100.0, 1e-9);
    EXPECT_NEAR(sentence_bleu(ts(ref), ts(ref)), 100.0, 1e-9);
    EXPECT_LT(sentence_bleu(ts({"x", "y", "z", "w"}), ts(ref)), 5.0);
    EXPECT_THROW(corpus_bleu({ts(ref)}, {}), LengthMismatch);
}

TEST(Bleu, CorpusMatchesOracle) {
    std::mt19937 g(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TokenizedSentence> h, r;
        std::vector<oracle::Tokens> oh, orf;
        const int n = std::uniform_int_distribution<int>(1, 8)(g);
        for (int i = 0; i < n; ++i) {
            oh.push_back(random_words(g, 12));
            orf.push_back(random_words(g, 12));
            h.push_back(ts(oh.back()));
            r.push_back(ts(orf.back()));
        }
        EXPECT_NEAR(corpus_bleu(h, r), oracle::corpus_bleu(oh, orf), 1e-9);
    }
}

TEST(Bleu, SentenceMatchesOracle) {
    std::mt19937 g(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto h = random_words(g, 10), r = random_words(g, 10);
        EXPECT_NEAR(sentence_bleu(ts(h), ts(r)), oracle::sentence_bleu(h, r), 1e-9);
    }
}

TEST(Bleu, PermutationInvariant) {
    std::mt19937 g(9);
    std::vector<TokenizedSentence> h, r;
    for (int i = 0; i < 20; ++i) {
        h.push_back(ts(random_words(g, 10)));
        r.push_back(ts(random_words(g, 10)));
    }
    const double base = corpus_bleu(h, r);
    std::vector<std::size_t> idx(h.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), g);
    std::vector<TokenizedSentence> h2, r2;
    for (auto i : idx) {
        h2.push_back(h[i]);
        r2.push_back(r[i]);
    }
    EXPECT_NEAR(corpus_bleu(h2, r2), base, 1e-9);
}

TEST(Bleu, BrevityPenaltyIsMonotone) {
    const std::vector<std::string> ref = {"a", "b", "c", "d", "e", "a", "b", "c", "d", "e"};
    double prev = 0;
    for (std::size_t k = 4; k <= ref.size(); ++k) {
        const std::vector<std::string> hyp(ref.begin(), ref.begin() + static_cast<long>(k));
        const double b = corpus_bleu({ts(hyp)}, {ts(ref)});
        EXPECT_GE(b, prev);
        prev = b;
    }
}

TEST(Chrf, SmallExample) {
    EXPECT_NEAR(chrf({"abcd"}, {"abce"}), 100.0 * (0.75 + 2.0 / 3 + 0.5) / 4, 1e-9);
    EXPECT_NEAR(chrf({"abcd"}, {"abce"}), oracle::chrf({"abcd"}, {"abce"}), 1e-9);
}

TEST(Chrf, EdgeCases) {
    EXPECT_NEAR(chrf({"Hello world"}, {"Hello world"}), 100.0, 1e-9);
    EXPECT_DOUBLE_EQ(chrf({""}, {"Hello"}), 0.0);
    EXPECT_NEAR(chrf({"Hello world"}, {"Helloworld"}), 100.0, 1e-9);
    EXPECT_THROW(chrf({"a"}, {}), LengthMismatch);
}

TEST(Chrf, MatchesOracle) {
    std::mt19937 g(13);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> h, r;
        const int n = std::uniform_int_distribution<int>(1, 5)(g);
        for (int i = 0; i < n; ++i) {
            h.push_back(random_sentence(g, true));
            r.push_back(random_sentence(g, true));
        }
        EXPECT_NEAR(chrf(h, r), oracle::chrf(h, r), 1e-9);
    }
}

TEST(SourceCopy, Threshold) {
    const std::string src = "The weather is very nice today, so we are going to the park.";
    EXPECT_TRUE(is_source_copy(src, src, "en"_lang));
    EXPECT_FALSE(is_source_copy("Das Wetter ist heute sehr schön.", src, "en"_lang));
    std::mt19937 g(17);
    for (int trial = 0; trial < 500; ++trial) {
        auto h = random_words(g, 12), r = random_words(g, 12);
        std::string hs, rs;
        for (auto &w : h)
            hs += w + " ";
        for (auto &w : r)
            rs += w + " ";
        EXPECT_EQ(is_source_copy(hs, rs, "en"_lang), oracle::sentence_bleu(h, r) > 80.0) << hs << "|" << rs;
    }
}

TEST(Length, Boundaries) {
    EXPECT_EQ(check_length("a b c d", "a b", "de"_lang).verdict, LengthVerdict::Ok);
    EXPECT_EQ(check_length("a b c d e", "a b", "de"_lang).verdict, LengthVerdict::Over);
    EXPECT_EQ(check_length("a b", "a b c d", "de"_lang).verdict, LengthVerdict::Ok);
    EXPECT_EQ(check_length("a", "a b c d", "de"_lang).verdict, LengthVerdict::Under);
    EXPECT_EQ(check_length("", "a b", "de"_lang).verdict, LengthVerdict::Under);
    EXPECT_EQ(check_length("a", "", "de"_lang).verdict, LengthVerdict::NoReference);
    EXPECT_EQ(check_length("你好你好", "你好", "zh"_lang).verdict, LengthVerdict::Ok);
    EXPECT_EQ(check_length("你好你好你", "你好", "zh"_lang).verdict, LengthVerdict::Over);
    EXPECT_DOUBLE_EQ(check_length("a b c", "a b", "fr"_lang).ratio, 1.5);
}

TEST(Length, MatchesOracle) {
    std::mt19937 g(19);
    for (int trial = 0; trial < 500; ++trial) {
        const auto o = random_sentence(g, true), r = random_sentence(g, true);
        for (const char *lang : {"en", "zh"}) {
            const auto c = check_length(o, r, LanguageCode(lang));
            if (c.verdict == LengthVerdict::NoReference)
                continue;
            EXPECT_EQ(c.verdict != LengthVerdict::Ok, oracle::length_violates(o, r, lang)) << o << "|" << r;
        }
    }
}

TEST(OffTarget, ThreeFrenchOutOfTen) {
    std::vector<Prediction> preds;
    int k = 0;
    for (const auto &row : fixture().rows()) {
        if (k == 10)
            break;
        const bool french = k < 3;
        preds.push_back({"p" + std::to_string(k), {"en"_lang, "de"_lang}, row.at(french ? "fr"_lang : "de"_lang), {}});
        ++k;
    }
    const auto r = ot_ratio(preds, detector());
    EXPECT_NEAR(r.at({"en"_lang, "de"_lang}), 0.3, 1e-12);
}

TEST(OffTarget, EmptyOutputIsOffTarget) {
    EXPECT_TRUE(check_off_target("", "de"_lang, detector()).off_target);
    EXPECT_FALSE(check_off_target("", "de"_lang, detector()).detected.has_value());
}

TEST(Ratios, MissingLookups) {
    const std::vector<Prediction> preds = {{"x", {"en"_lang, "de"_lang}, "Hallo", {}}};
    EXPECT_THROW(sc_ratio(preds, {}), MissingSource);
    EXPECT_THROW(oug_ratio(preds, {}), MissingReference);
}

namespace {

std::vector<TrainingRecord> fixture_records(std::size_t n) {
    std::vector<TrainingRecord> out;
    for (const char *d : {"en-de", "zh-en", "de-fr"}) {
        const auto recs = build_inference_set(corpus_from_multiparallel(fixture(), parse_direction(d), n), 42);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

} // namespace

TEST(Evaluate, PerfectPredictions) {
    const auto recs = fixture_records(20);
    std::vector<Prediction> preds;
    for (const auto &r : recs)
        preds.push_back({r.id, r.direction, r.raw_target, {}});
    const auto rep = evaluate(preds, recs, detector());
    ASSERT_EQ(rep.per_direction.size(), 3u);
    for (const auto &[d, m] : rep.per_direction) {
        EXPECT_EQ(m.n, 20u);
        EXPECT_NEAR(m.bleu, 100.0, 1e-9) << d.str();
        EXPECT_NEAR(m.chrf, 100.0, 1e-9) << d.str();
        EXPECT_DOUBLE_EQ(m.ot_ratio, 0.0) << d.str();
        EXPECT_DOUBLE_EQ(m.sc_ratio, 0.0) << d.str();
        EXPECT_DOUBLE_EQ(m.oug_ratio, 0.0) << d.str();
        EXPECT_FALSE(m.prefix_compliance_rate.has_value());
    }
    EXPECT_FALSE(rep.has_empty_direction());
    EXPECT_EQ(rep.macro.n, 60u);
}

TEST(Evaluate, SourceCopies) {
    const auto recs = fixture_records(10);
    std::vector<Prediction> preds;
    for (const auto &r : recs)
        preds.push_back({r.id, r.direction, r.src_text, {}});
    const auto rep = evaluate(preds, recs, detector());
    for (const auto &[d, m] : rep.per_direction) {
        EXPECT_DOUBLE_EQ(m.sc_ratio, 1.0) << d.str();
        EXPECT_DOUBLE_EQ(m.ot_ratio, 1.0) << d.str();
    }
}

TEST(Evaluate, EmptyDirection) {
    const auto recs = fixture_records(5);
    std::vector<Prediction> preds;
    for (const auto &r : recs)
        if (r.direction.str() != "zh-en")
            preds.push_back({r.id, r.direction, r.raw_target, {}});
    EXPECT_TRUE(evaluate(preds, recs, detector()).has_empty_direction());
}

TEST(Evaluate, UnresolvedId) {
    const auto recs = fixture_records(2);
    EXPECT_THROW(evaluate({{"nope", {"en"_lang, "de"_lang}, "x", {}}}, recs, detector()), UnresolvedId);
}

TEST(Evaluate, StrippingCommutesWithScoring) {
    const auto recs = fixture_records(24);
    const ErrorSpec spec{0.1, 0.05, 0.05, 0.05, 42};
    for (const auto &mode : {TemplateMode::trigger(2, 3), TemplateMode::hard(HardTemplateVariant::Tect4)}) {
        const auto raw = simulate(recs, fixture(), spec, mode).predictions;
        std::vector<Prediction> stripped;
        for (const auto &p : raw) {
            auto s = strip_for_mode(p.output, mode, p.direction);
            stripped.push_back({p.id, p.direction, s.text, s.compliance});
        }
        const auto a = evaluate(raw, recs, detector(), {mode, mode});
        const auto b = evaluate(stripped, recs, detector(), {TemplateMode::plain(), mode});
        for (const auto &[d, m] : a.per_direction) {
            const auto &n = b.per_direction.at(d);
            EXPECT_DOUBLE_EQ(m.bleu, n.bleu);
            EXPECT_DOUBLE_EQ(m.chrf, n.chrf);
            EXPECT_DOUBLE_EQ(m.ot_ratio, n.ot_ratio);
            EXPECT_DOUBLE_EQ(m.sc_ratio, n.sc_ratio);
            EXPECT_DOUBLE_EQ(m.oug_ratio, n.oug_ratio);
            ASSERT_TRUE(m.prefix_compliance_rate.has_value());
            EXPECT_DOUBLE_EQ(*m.prefix_compliance_rate, 1.0);
            EXPECT_EQ(m.prefix_compliance_rate, n.prefix_compliance_rate);
        }
    }
}

TEST(Evaluate, ModeMismatch) {
    const auto recs = fixture_records(3);
    std::vector<Prediction> preds;
    for (const auto &r : recs)
        preds.push_back({r.id, r.direction, r.raw_target, {}});
    const auto act = TemplateMode::trigger(1, 1);
    EXPECT_THROW(evaluate(preds, recs, detector(), {TemplateMode::plain(), act}), ModeMismatch);
    EXPECT_THROW(evaluate(preds, recs, detector(), {act, TemplateMode::plain()}), ModeMismatch);
    for (auto &p : preds)
        p.compliance = Compliance::Exact;
    EXPECT_NO_THROW(evaluate(preds, recs, detector(), {TemplateMode::plain(), act}));
    EXPECT_THROW(evaluate(preds, recs, detector(), {act, act}), ModeMismatch);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
    const auto recs = fixture_records(400);
    const auto preds = simulate(recs, fixture(), {0.1, 0.1, 0.1, 0.1, 7}).predictions;
    EvalOptions one, four;
    one.threads = 1;
    four.threads = 4;
    EXPECT_EQ(report_to_json(evaluate(preds, recs, detector(), one)).dump(),
              report_to_json(evaluate(preds, recs, detector(), four)).dump());
}

TEST(Evaluate, ReportJsonShape) {
    const auto recs = fixture_records(3);
    std::vector<Prediction> preds;
    for (const auto &r : recs)
        preds.push_back({r.id, r.direction, r.raw_target, {}});
    const auto j = report_to_json(evaluate(preds, recs, detector()));
    EXPECT_TRUE(j.contains("per_direction"));
    EXPECT_TRUE(j["per_direction"].contains("en-de"));
    EXPECT_TRUE(j["macro"]["prefix_compliance_rate"].is_null());
    EXPECT_EQ(j["settings"]["sc_threshold"], 80.0);
}
