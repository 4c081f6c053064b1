#include <gtest/gtest.h>

#include "mtct/mockmt.hpp"
#include "oracles.hpp"

using namespace mtct;

namespace {

std::string data(const std::string &rel) { return std::string(MTCT_DATA_DIR) + "/" + rel; }

const MultiParallel &fixture() {
    static const auto mp = MultiParallel::load_file(data("multiparallel/fixture.jsonl"));
    return mp;
}

std::vector<TrainingRecord> records(std::size_t n) {
    std::vector<TrainingRecord> out;
    for (const auto &d : evaluation_directions()) {
        const auto r = build_inference_set(corpus_from_multiparallel(fixture(), d, n), 42);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

} // namespace

TEST(Fixture, CoversAllLanguages) {
    ASSERT_EQ(fixture().size(), 24u);
    for (const auto &row : fixture().rows())
        EXPECT_EQ(row.size(), 14u);
}

TEST(Fixture, CorpusCyclesRows) {
    const auto c = corpus_from_multiparallel(fixture(), {"en"_lang, "de"_lang}, 30);
    ASSERT_EQ(c.size(), 30u);
    EXPECT_EQ(c.examples()[0].src_text, c.examples()[24].src_text);
    EXPECT_EQ(c.examples()[0].id, "ende-1");
    EXPECT_THROW(corpus_from_multiparallel(fixture(), {"en"_lang, "sw"_lang}, 3), EmptyCorpus);
}

TEST(Simulate, AllZeroSpecReturnsReferences) {
    const auto recs = records(10);
    const auto sim = simulate(recs, fixture(), {});
    ASSERT_EQ(sim.predictions.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(sim.predictions[i].output, recs[i].raw_target);
        EXPECT_EQ(sim.labels[i].injected, InjectedError::Clean);
    }
}

TEST(Simulate, AlwaysSourceCopy) {
    const auto recs = records(10);
    ErrorSpec spec;
    spec.p_sc = 1.0;
    const auto sim = simulate(recs, fixture(), spec);
    std::unordered_map<std::string, std::string> sources;
    for (const auto &r : recs)
        sources[r.id] = r.src_text;
    for (const auto &[d, v] : sc_ratio(sim.predictions, sources))
        EXPECT_DOUBLE_EQ(v, 1.0) << d.str();
}

TEST(Simulate, Deterministic) {
    const auto recs = records(15);
    const ErrorSpec spec{0.2, 0.2, 0.2, 0.2, 42};
    const auto a = simulate(recs, fixture(), spec);
    const auto b = simulate(recs, fixture(), spec);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(a.predictions[i].output, b.predictions[i].output);
        EXPECT_EQ(a.labels[i].injected, b.labels[i].injected);
    }
    auto other = spec;
    other.seed = 43;
    const auto c = simulate(recs, fixture(), other);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < recs.size(); ++i)
        differ += a.predictions[i].output != c.predictions[i].output;
    EXPECT_GT(differ, 0u);
}

TEST(Simulate, OffTargetLanguageAvoidsSourceAndTarget) {
    const auto recs = records(24);
    ErrorSpec spec;
    spec.p_ot = 1.0;
    const auto sim = simulate(recs, fixture(), spec);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto &l = sim.labels[i];
        ASSERT_TRUE(l.ot_lang.has_value());
        EXPECT_NE(*l.ot_lang, recs[i].direction.src);
        EXPECT_NE(*l.ot_lang, recs[i].direction.tgt);
        const auto *row = fixture().find(recs[i].id, recs[i].direction.src, recs[i].src_text);
        ASSERT_NE(row, nullptr);
        EXPECT_EQ(sim.predictions[i].output, row->at(*l.ot_lang));
    }
}

TEST(Simulate, TemplatePrefixed) {
    const auto recs = records(3);
    const auto mode = TemplateMode::trigger(1, 1);
    const auto sim = simulate(recs, fixture(), {}, mode);
    for (std::size_t i = 0; i < recs.size(); ++i)
        EXPECT_EQ(sim.predictions[i].output, apply_template(recs[i].raw_target, mode, recs[i].direction));
}

TEST(Simulate, RejectsBadSpec) {
    const auto recs = records(1);
    EXPECT_THROW(simulate(recs, fixture(), {0.6, 0.6, 0, 0, 42}), InvalidSpec);
    EXPECT_THROW(simulate(recs, fixture(), {-0.1, 0, 0, 0, 42}), InvalidSpec);
}

TEST(Simulate, MissingMultiparallelRow) {
    TrainingRecord r;
    r.id = "zz-1";
    r.direction = {"en"_lang, "de"_lang};
    r.src_text = "not in the fixture";
    r.raw_target = "nicht da";
    ErrorSpec spec;
    spec.p_ot = 1.0;
    EXPECT_THROW(simulate({r}, fixture(), spec), MissingMultiparallel);
}

TEST(LengthErrors, OverAndUnderViolateBounds) {
    for (const auto &row : fixture().rows()) {
        for (const auto &[lang, text] : row) {
            const auto code = lang.str();
            const auto o = over_generate(text, lang);
            EXPECT_GT(oracle::length(o, code), 2 * oracle::length(text, code)) << text;
            const auto u = under_generate(text, lang);
            EXPECT_LT(2 * oracle::length(u, code), oracle::length(text, code)) << text;
        }
    }
}

TEST(LengthErrors, UnderKeepsFortyPercent) {
    EXPECT_EQ(under_generate("a b c d e f g h i j", "en"_lang), "a b c d");
    EXPECT_EQ(under_generate("一二三四五", "zh"_lang), "一二");
    EXPECT_EQ(over_generate("a b", "en"_lang), "a b a b a");
}

TEST(Labels, JsonRoundTrip) {
    const GroundTruthLabel l{"x", InjectedError::Ot, "fr"_lang};
    const auto back = label_from_json(label_to_json(l));
    EXPECT_EQ(back.id, "x");
    EXPECT_EQ(back.injected, InjectedError::Ot);
    EXPECT_EQ(back.ot_lang, "fr"_lang);
}

TEST(Labels, PrimaryLabelPrecedence) {
    SentenceDiagnosis d;
    d.source_copy = true;
    d.off_target = true;
    EXPECT_EQ(primary_label(d), InjectedError::Sc);
    d.source_copy = false;
    EXPECT_EQ(primary_label(d), InjectedError::Ot);
    d.off_target = false;
    d.length.verdict = LengthVerdict::Over;
    EXPECT_EQ(primary_label(d), InjectedError::OugOver);
    d.length.verdict = LengthVerdict::Under;
    EXPECT_EQ(primary_label(d), InjectedError::OugUnder);
    d.length.verdict = LengthVerdict::Ok;
    EXPECT_EQ(primary_label(d), InjectedError::Clean);
}
