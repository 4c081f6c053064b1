#pragma once

// Surface metrics (BLEU, chrF) and the translation error ratios.
//
// Tokenization follows the 13a rules, applied to codepoints:
//   1. pad with spaces each of  { | } ~ [ \ ] ^ _ ` space ! " # $ % & ( ) * + : ; < = > ? @ /
//      and, as the international extension, every non-ASCII punctuation or symbol codepoint
//   2. X[.,]  -> "X [.,] "  when X is not an ASCII digit
//   3. [.,]X  -> " [.,] X"  when X is not an ASCII digit
//   4. D-     -> "D - "     when D is an ASCII digit
//   5. split on whitespace
// Each of steps 2-4 is one left-to-right pass over non-overlapping matches.
// zh, ja and ko use one token per non-space codepoint instead.
//
// Error classes, all computed on stripped output:
//   off-target   detected top language != expected target (undetectable text counts)
//   source copy  sentence BLEU against the source, source-language tokenizer, > 80
//   over/under   length ratio to the reference > 2 or < 0.5; references of length 0 are
//                excluded and counted separately
// The classes are independent; a sentence can carry several.

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/datagen.hpp"
#include "mtct/jsonl.hpp"
#include "mtct/langid.hpp"
#include "mtct/templates.hpp"
#include "mtct/unicode.hpp"

namespace mtct {

enum class TokenizerId { Intl13a, CharLevel };

inline std::string_view tokenizer_name(TokenizerId t) { return t == TokenizerId::CharLevel ? "char_level" : "intl13a_style"; }

inline TokenizerId tokenizer_for(LanguageCode lang) {
    const auto v = lang.view();
    return (v == "zh" || v == "ja" || v == "ko") ? TokenizerId::CharLevel : TokenizerId::Intl13a;
}

struct TokenizedSentence {
    std::vector<std::string> tokens;
    TokenizerId tokenizer_id = TokenizerId::Intl13a;
};

namespace metrics_detail {

inline bool ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool pad_13a(char32_t c) {
    if (c < 0x80)
        return (c >= 0x7B && c <= 0x7E) || (c >= 0x5B && c <= 0x60) || (c >= 0x20 && c <= 0x26) ||
               (c >= 0x28 && c <= 0x2B) || (c >= 0x3A && c <= 0x40) || c == 0x2F;
    return unicode::is_punct_or_symbol(c);
}

inline bool split_space(char32_t c) { return unicode::is_space(c) || (c >= 0x1C && c <= 0x1F); }

inline void replace_all(std::string &s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

} // namespace metrics_detail

inline std::vector<std::string> tokenize_13a(std::string_view text) {
    using namespace metrics_detail;
    std::string line(text);
    replace_all(line, "<skipped>", "");
    replace_all(line, "-\n", "");
    replace_all(line, "\n", " ");
    if (line.find('&') != std::string::npos) {
        replace_all(line, "&quot;", "\"");
        replace_all(line, "&amp;", "&");
        replace_all(line, "&lt;", "<");
        replace_all(line, "&gt;", ">");
    }

    std::vector<char32_t> a{U' '};
    for (char32_t c : unicode::decode(line)) {
        if (pad_13a(c)) {
            a.push_back(U' ');
            a.push_back(c);
            a.push_back(U' ');
        } else {
            a.push_back(c);
        }
    }
    a.push_back(U' ');

    auto is_pc = [](char32_t c) { return c == U'.' || c == U','; };
    std::vector<char32_t> b;
    b.reserve(a.size() * 2);
    for (std::size_t i = 0; i < a.size();) {
        if (i + 1 < a.size() && !ascii_digit(a[i]) && is_pc(a[i + 1])) {
            b.insert(b.end(), {a[i], U' ', a[i + 1], U' '});
            i += 2;
        } else {
            b.push_back(a[i++]);
        }
    }
    std::vector<char32_t> c;
    c.reserve(b.size() * 2);
    for (std::size_t i = 0; i < b.size();) {
        if (i + 1 < b.size() && is_pc(b[i]) && !ascii_digit(b[i + 1])) {
            c.insert(c.end(), {U' ', b[i], U' ', b[i + 1]});
            i += 2;
        } else {
            c.push_back(b[i++]);
        }
    }
    std::vector<char32_t> d;
    d.reserve(c.size() * 2);
    for (std::size_t i = 0; i < c.size();) {
        if (i + 1 < c.size() && ascii_digit(c[i]) && c[i + 1] == U'-') {
            d.insert(d.end(), {c[i], U' ', U'-', U' '});
            i += 2;
        } else {
            d.push_back(c[i++]);
        }
    }

    std::vector<std::string> out;
    std::string cur;
    for (char32_t ch : d) {
        if (split_space(ch)) {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        } else {
            unicode::append(cur, ch);
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

inline std::vector<std::string> tokenize_chars(std::string_view text) {
    std::vector<std::string> out;
    for (char32_t c : unicode::decode(text)) {
        if (unicode::is_space(c))
            continue;
        std::string s;
        unicode::append(s, c);
        out.push_back(std::move(s));
    }
    return out;
}

inline TokenizedSentence tokenize(std::string_view text, TokenizerId id) {
    return {id == TokenizerId::CharLevel ? tokenize_chars(text) : tokenize_13a(text), id};
}

// ---------------------------------------------------------------------------
// BLEU

inline constexpr int kBleuOrder = 4;

struct BleuStats {
    std::array<std::uint64_t, kBleuOrder> matches{};
    std::array<std::uint64_t, kBleuOrder> totals{};
    std::uint64_t hyp_len = 0;
    std::uint64_t ref_len = 0;

    BleuStats &operator+=(const BleuStats &o) {
        for (int n = 0; n < kBleuOrder; ++n) {
            matches[n] += o.matches[n];
            totals[n] += o.totals[n];
        }
        hyp_len += o.hyp_len;
        ref_len += o.ref_len;
        return *this;
    }
};

namespace metrics_detail {

inline std::unordered_map<std::string, std::uint64_t> ngram_counts(const std::vector<std::string> &tokens, int n) {
    std::unordered_map<std::string, std::uint64_t> out;
    if (tokens.size() < static_cast<std::size_t>(n))
        return out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key += ' ';
            key += tokens[i + static_cast<std::size_t>(k)];
        }
        ++out[key];
    }
    return out;
}

inline double brevity_penalty(std::uint64_t hyp_len, std::uint64_t ref_len) {
    if (hyp_len == 0)
        return 0.0;
    if (hyp_len >= ref_len)
        return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

} // namespace metrics_detail

/// Clipped n-gram matches and totals for one sentence pair.
inline BleuStats bleu_stats(const std::vector<std::string> &hyp, const std::vector<std::string> &ref) {
    BleuStats s;
    s.hyp_len = hyp.size();
    s.ref_len = ref.size();
    for (int n = 1; n <= kBleuOrder; ++n) {
        const auto h = metrics_detail::ngram_counts(hyp, n);
        const auto r = metrics_detail::ngram_counts(ref, n);
        for (const auto &[g, c] : h) {
            s.totals[n - 1] += c;
            auto it = r.find(g);
            if (it != r.end())
                s.matches[n - 1] += std::min(c, it->second);
        }
    }
    return s;
}

/// Corpus-level score: no smoothing, so any zero numerator gives 0.
inline double bleu_from_stats(const BleuStats &s) {
    double log_sum = 0;
    for (int n = 0; n < kBleuOrder; ++n) {
        if (s.matches[n] == 0)
            return 0.0;
        log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
    }
    return 100.0 * metrics_detail::brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / kBleuOrder);
}

/// Sentence-level score. Orders with no hypothesis n-grams are dropped (effective
/// order). A zero match count at order n >= 2 is replaced by 1 / (2^k * total),
/// k counting the zero orders so far; a zero unigram count gives 0.
inline double sentence_bleu_from_stats(const BleuStats &s) {
    if (s.hyp_len == 0 || s.matches[0] == 0)
        return 0.0;
    double log_sum = 0;
    double decay = 1.0;
    int order = 0;
    for (int n = 0; n < kBleuOrder; ++n) {
        if (s.totals[n] == 0)
            break;
        order = n + 1;
        double p;
        if (s.matches[n] == 0) {
            decay *= 2.0;
            p = 1.0 / (decay * static_cast<double>(s.totals[n]));
        } else {
            p = static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
        }
        log_sum += std::log(p);
    }
    return 100.0 * metrics_detail::brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / order);
}

inline double corpus_bleu(const std::vector<TokenizedSentence> &hyps, const std::vector<TokenizedSentence> &refs) {
    if (hyps.size() != refs.size() || hyps.empty())
        throw LengthMismatch(std::to_string(hyps.size()) + " hypotheses vs " + std::to_string(refs.size()) +
                             " references");
    BleuStats total;
    for (std::size_t i = 0; i < hyps.size(); ++i)
        total += bleu_stats(hyps[i].tokens, refs[i].tokens);
    return bleu_from_stats(total);
}

inline double sentence_bleu(const TokenizedSentence &hyp, const TokenizedSentence &ref) {
    return sentence_bleu_from_stats(bleu_stats(hyp.tokens, ref.tokens));
}

// ---------------------------------------------------------------------------
// chrF

inline constexpr int kChrfOrder = 6;
inline constexpr double kChrfBeta = 2.0;

struct ChrfStats {
    /// Per order: hypothesis n-grams, reference n-grams, matches.
    std::array<std::array<std::uint64_t, 3>, kChrfOrder> counts{};

    ChrfStats &operator+=(const ChrfStats &o) {
        for (int n = 0; n < kChrfOrder; ++n)
            for (int k = 0; k < 3; ++k)
                counts[n][k] += o.counts[n][k];
        return *this;
    }
};

namespace metrics_detail {

inline std::vector<char32_t> strip_spaces(std::string_view s) {
    std::vector<char32_t> out;
    for (char32_t c : unicode::decode(s))
        if (!unicode::is_space(c))
            out.push_back(c);
    return out;
}

inline std::unordered_map<std::u32string, std::uint64_t> char_ngrams(const std::vector<char32_t> &cps, int n) {
    std::unordered_map<std::u32string, std::uint64_t> out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i)
        ++out[std::u32string(cps.begin() + static_cast<std::ptrdiff_t>(i),
                             cps.begin() + static_cast<std::ptrdiff_t>(i) + n)];
    return out;
}

} // namespace metrics_detail

inline ChrfStats chrf_stats(std::string_view hyp, std::string_view ref) {
    ChrfStats s;
    const auto h = metrics_detail::strip_spaces(hyp);
    const auto r = metrics_detail::strip_spaces(ref);
    for (int n = 1; n <= kChrfOrder; ++n) {
        const auto hg = metrics_detail::char_ngrams(h, n);
        const auto rg = metrics_detail::char_ngrams(r, n);
        auto &row = s.counts[n - 1];
        for (const auto &[g, c] : hg) {
            row[0] += c;
            auto it = rg.find(g);
            if (it != rg.end())
                row[2] += std::min(c, it->second);
        }
        for (const auto &[g, c] : rg)
            row[1] += c;
    }
    return s;
}

/// Precision and recall are averaged over the orders where both sides have
/// n-grams, then combined as F-beta.
inline double chrf_from_stats(const ChrfStats &s) {
    double prec = 0, rec = 0;
    int order = 0;
    for (const auto &row : s.counts) {
        if (row[0] == 0 || row[1] == 0)
            continue;
        prec += static_cast<double>(row[2]) / static_cast<double>(row[0]);
        rec += static_cast<double>(row[2]) / static_cast<double>(row[1]);
        ++order;
    }
    if (order == 0)
        return 0.0;
    prec /= order;
    rec /= order;
    if (prec + rec == 0)
        return 0.0;
    const double b2 = kChrfBeta * kChrfBeta;
    return 100.0 * (1 + b2) * prec * rec / (b2 * prec + rec);
}

inline double chrf(const std::vector<std::string> &hyps, const std::vector<std::string> &refs) {
    if (hyps.size() != refs.size() || hyps.empty())
        throw LengthMismatch(std::to_string(hyps.size()) + " hypotheses vs " + std::to_string(refs.size()) +
                             " references");
    ChrfStats total;
    for (std::size_t i = 0; i < hyps.size(); ++i)
        total += chrf_stats(hyps[i], refs[i]);
    return chrf_from_stats(total);
}

// ---------------------------------------------------------------------------
// Error classes

inline constexpr double kSourceCopyThreshold = 80.0;
inline constexpr double kOverGenerationRatio = 2.0;
inline constexpr double kUnderGenerationRatio = 0.5;

enum class LengthUnit { WhitespaceTokens, Codepoints };

inline std::string_view length_unit_name(LengthUnit u) {
    return u == LengthUnit::Codepoints ? "codepoints" : "whitespace_tokens";
}

/// zh and ja are written without spaces; everything else is measured in words.
inline LengthUnit length_unit_for(LanguageCode lang) {
    const auto v = lang.view();
    return (v == "zh" || v == "ja") ? LengthUnit::Codepoints : LengthUnit::WhitespaceTokens;
}

inline std::size_t text_length(std::string_view text, LengthUnit unit) {
    return unit == LengthUnit::Codepoints ? unicode::count_non_space(text) : unicode::split_whitespace(text).size();
}

inline double source_copy_score(std::string_view output, std::string_view source, LanguageCode source_lang) {
    const auto tok = tokenizer_for(source_lang);
    return sentence_bleu(tokenize(output, tok), tokenize(source, tok));
}

inline bool is_source_copy(std::string_view output, std::string_view source, LanguageCode source_lang) {
    return source_copy_score(output, source, source_lang) > kSourceCopyThreshold;
}

enum class LengthVerdict { Ok, Over, Under, NoReference };

struct LengthCheck {
    LengthVerdict verdict = LengthVerdict::Ok;
    double ratio = 0;
};

inline LengthCheck check_length(std::string_view output, std::string_view reference, LanguageCode target) {
    const auto unit = length_unit_for(target);
    const auto ref_len = text_length(reference, unit);
    if (ref_len == 0)
        return {LengthVerdict::NoReference, 0};
    const double ratio = static_cast<double>(text_length(output, unit)) / static_cast<double>(ref_len);
    if (ratio > kOverGenerationRatio)
        return {LengthVerdict::Over, ratio};
    if (ratio < kUnderGenerationRatio)
        return {LengthVerdict::Under, ratio};
    return {LengthVerdict::Ok, ratio};
}

struct OffTargetCheck {
    bool off_target = true;
    std::optional<LanguageCode> detected;
};

inline OffTargetCheck check_off_target(std::string_view output, LanguageCode target, const LanguageDetector &detector) {
    try {
        const auto r = detector.detect(output);
        return {r.top != target, r.top};
    } catch (const EmptyText &) {
        return {true, std::nullopt};
    }
}

struct Prediction {
    std::string id;
    TranslationDirection direction;
    std::string output;
    /// Present when the output was already stripped upstream.
    std::optional<Compliance> compliance;
};

inline ordered_json prediction_to_json(const Prediction &p) {
    ordered_json j;
    j["id"] = p.id;
    j["src_lang"] = p.direction.src.str();
    j["tgt_lang"] = p.direction.tgt.str();
    j["output"] = p.output;
    if (p.compliance)
        j["compliance"] = std::string(compliance_name(*p.compliance));
    return j;
}

inline Prediction prediction_from_json(const ordered_json &j) {
    Prediction p;
    p.id = j.at("id").get<std::string>();
    p.direction = {LanguageCode(j.at("src_lang").get<std::string>()), LanguageCode(j.at("tgt_lang").get<std::string>())};
    p.output = j.at("output").get<std::string>();
    if (j.contains("compliance")) {
        p.compliance = parse_compliance(j.at("compliance").get<std::string>());
        if (!p.compliance)
            throw MalformedRow("unknown compliance '" + j.at("compliance").get<std::string>() + "'");
    }
    return p;
}

inline std::vector<Prediction> read_predictions(std::istream &in, const std::string &name = "predictions") {
    std::vector<Prediction> out;
    jsonl::for_each(in, name, [&](const ordered_json &j, std::size_t) { out.push_back(prediction_from_json(j)); });
    return out;
}

inline std::vector<Prediction> read_predictions_file(const std::string &path) {
    std::vector<Prediction> out;
    jsonl::for_each_file(path, [&](const ordered_json &j, std::size_t) { out.push_back(prediction_from_json(j)); });
    return out;
}

inline void write_predictions(std::ostream &out, const std::vector<Prediction> &preds) {
    for (const auto &p : preds)
        out << jsonl::dump_line(prediction_to_json(p));
}

using DirectionRatios = std::map<TranslationDirection, double>;

namespace metrics_detail {

template <typename Flag> DirectionRatios ratio_by_direction(const std::vector<Prediction> &preds, Flag &&flag) {
    std::map<TranslationDirection, std::pair<std::size_t, std::size_t>> acc;
    for (const auto &p : preds) {
        auto f = flag(p);
        if (!f)
            continue;
        auto &[hits, n] = acc[p.direction];
        hits += *f ? 1 : 0;
        ++n;
    }
    DirectionRatios out;
    for (const auto &[d, hn] : acc)
        out[d] = hn.second == 0 ? 0.0 : static_cast<double>(hn.first) / static_cast<double>(hn.second);
    return out;
}

} // namespace metrics_detail

inline DirectionRatios ot_ratio(const std::vector<Prediction> &preds, const LanguageDetector &detector) {
    for (const auto &p : preds)
        if (!detector.covers(p.direction.tgt))
            throw NoProfiles("no profile for target language " + p.direction.tgt.str());
    return metrics_detail::ratio_by_direction(preds, [&](const Prediction &p) -> std::optional<bool> {
        return check_off_target(p.output, p.direction.tgt, detector).off_target;
    });
}

/// sources: prediction id → source text.
inline DirectionRatios sc_ratio(const std::vector<Prediction> &preds,
                                const std::unordered_map<std::string, std::string> &sources) {
    return metrics_detail::ratio_by_direction(preds, [&](const Prediction &p) -> std::optional<bool> {
        auto it = sources.find(p.id);
        if (it == sources.end())
            throw MissingSource(p.id);
        return is_source_copy(p.output, it->second, p.direction.src);
    });
}

/// references: prediction id → reference text. Empty references are skipped.
inline DirectionRatios oug_ratio(const std::vector<Prediction> &preds,
                                 const std::unordered_map<std::string, std::string> &references) {
    return metrics_detail::ratio_by_direction(preds, [&](const Prediction &p) -> std::optional<bool> {
        auto it = references.find(p.id);
        if (it == references.end())
            throw MissingReference(p.id);
        const auto c = check_length(p.output, it->second, p.direction.tgt);
        if (c.verdict == LengthVerdict::NoReference)
            return std::nullopt;
        return c.verdict != LengthVerdict::Ok;
    });
}

// ---------------------------------------------------------------------------
// Evaluation

struct SentenceDiagnosis {
    std::string id;
    TranslationDirection direction;
    std::string clean_output;
    std::optional<Compliance> compliance;
    bool off_target = false;
    std::optional<LanguageCode> detected;
    bool source_copy = false;
    double source_bleu = 0;
    LengthCheck length;
};

struct DirectionMetrics {
    std::size_t n = 0;
    double bleu = 0;
    double chrf = 0;
    double ot_ratio = 0;
    double sc_ratio = 0;
    double oug_ratio = 0;
    std::optional<double> prefix_compliance_rate;
    std::size_t over = 0;
    std::size_t under = 0;
    std::size_t oug_excluded = 0;
    std::map<Compliance, std::size_t> compliance_counts;
};

struct EvalReport {
    std::map<TranslationDirection, DirectionMetrics> per_direction;
    /// Unweighted means over directions with n > 0; n is the total.
    DirectionMetrics macro;
    TemplateMode mode;
    std::vector<SentenceDiagnosis> sentences;

    bool has_empty_direction() const {
        return std::any_of(per_direction.begin(), per_direction.end(), [](const auto &kv) { return kv.second.n == 0; });
    }
};

struct EvalOptions {
    TemplateMode mode;
    /// Mode declared by the dataset manifest, if one was supplied.
    std::optional<TemplateMode> dataset_mode;
    unsigned threads = 0;
    const LanguageRegistry *registry = &LanguageRegistry::standard();
};

inline SentenceDiagnosis diagnose(const Prediction &pred, const TrainingRecord &record, const TemplateMode &mode,
                                  const LanguageDetector &detector, const LanguageRegistry &registry) {
    SentenceDiagnosis d;
    d.id = pred.id;
    d.direction = record.direction;
    if (mode.kind != TemplateKind::Plain) {
        auto s = strip_for_mode(pred.output, mode, record.direction, registry);
        d.clean_output = std::move(s.text);
        d.compliance = s.compliance;
    } else {
        d.clean_output = pred.output;
        d.compliance = pred.compliance;
    }
    const auto ot = check_off_target(d.clean_output, record.direction.tgt, detector);
    d.off_target = ot.off_target;
    d.detected = ot.detected;
    if (record.src_text.empty())
        throw MissingSource(pred.id);
    d.source_bleu = source_copy_score(d.clean_output, record.src_text, record.direction.src);
    d.source_copy = d.source_bleu > kSourceCopyThreshold;
    d.length = check_length(d.clean_output, record.raw_target, record.direction.tgt);
    return d;
}

/// Scores predictions against the dataset they were produced from.
inline EvalReport evaluate(const std::vector<Prediction> &preds, const std::vector<TrainingRecord> &dataset,
                           const LanguageDetector &detector, const EvalOptions &opts = {}) {
    const bool pre_stripped =
        !preds.empty() && std::all_of(preds.begin(), preds.end(), [](const Prediction &p) { return p.compliance.has_value(); });
    // Plain scoring of already-stripped predictions is compatible with any dataset mode.
    if (opts.dataset_mode && *opts.dataset_mode != opts.mode && !(opts.mode.kind == TemplateKind::Plain && pre_stripped))
        throw ModeMismatch("evaluating with mode " + opts.mode.str() + " but the dataset was built with " +
                           opts.dataset_mode->str());
    std::unordered_map<std::string, const TrainingRecord *> by_id;
    EvalReport report;
    report.mode = opts.mode;
    for (const auto &r : dataset) {
        by_id[r.id] = &r;
        report.per_direction.try_emplace(r.direction);
    }
    std::vector<const TrainingRecord *> resolved(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto it = by_id.find(preds[i].id);
        if (it == by_id.end())
            throw UnresolvedId(preds[i].id);
        if (it->second->direction != preds[i].direction)
            throw UnresolvedId(preds[i].id + " is " + preds[i].direction.str() + " in predictions but " +
                               it->second->direction.str() + " in the dataset");
        if (opts.mode.kind != TemplateKind::Plain && preds[i].compliance)
            throw ModeMismatch(preds[i].id + " was already stripped; evaluate it with mode plain");
        if (!detector.covers(preds[i].direction.tgt))
            throw NoProfiles("no profile for target language " + preds[i].direction.tgt.str());
        resolved[i] = it->second;
    }

    report.sentences.resize(preds.size());
    const unsigned hw = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, preds.size() / 256)));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            report.sentences[i] = diagnose(preds[i], *resolved[i], opts.mode, detector, *opts.registry);
    };
    if (workers <= 1) {
        work(0, preds.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (preds.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    work(std::min(preds.size(), w * chunk), std::min(preds.size(), (w + 1) * chunk));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto &t : pool)
            t.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    struct Acc {
        BleuStats bleu;
        ChrfStats chrf;
        std::size_t ot = 0, sc = 0, oug_n = 0, compliant = 0, with_compliance = 0;
    };
    std::map<TranslationDirection, Acc> acc;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto &s = report.sentences[i];
        const auto &rec = *resolved[i];
        auto &a = acc[s.direction];
        auto &m = report.per_direction[s.direction];
        const auto tok = tokenizer_for(rec.direction.tgt);
        a.bleu += bleu_stats(tokenize(s.clean_output, tok).tokens, tokenize(rec.raw_target, tok).tokens);
        a.chrf += chrf_stats(s.clean_output, rec.raw_target);
        a.ot += s.off_target;
        a.sc += s.source_copy;
        switch (s.length.verdict) {
        case LengthVerdict::Over: ++m.over; ++a.oug_n; break;
        case LengthVerdict::Under: ++m.under; ++a.oug_n; break;
        case LengthVerdict::Ok: ++a.oug_n; break;
        case LengthVerdict::NoReference: ++m.oug_excluded; break;
        }
        if (s.compliance) {
            ++a.with_compliance;
            ++m.compliance_counts[*s.compliance];
            a.compliant += *s.compliance == Compliance::Exact;
        }
        ++m.n;
    }

    std::size_t live = 0, with_prefix = 0;
    double prefix_sum = 0;
    for (auto &[d, m] : report.per_direction) {
        if (m.n == 0)
            continue;
        const auto &a = acc[d];
        const double n = static_cast<double>(m.n);
        m.bleu = bleu_from_stats(a.bleu);
        m.chrf = chrf_from_stats(a.chrf);
        m.ot_ratio = static_cast<double>(a.ot) / n;
        m.sc_ratio = static_cast<double>(a.sc) / n;
        m.oug_ratio = a.oug_n == 0 ? 0.0 : static_cast<double>(m.over + m.under) / static_cast<double>(a.oug_n);
        if (a.with_compliance > 0) {
            m.prefix_compliance_rate = static_cast<double>(a.compliant) / static_cast<double>(a.with_compliance);
            prefix_sum += *m.prefix_compliance_rate;
            ++with_prefix;
        }
        ++live;
        report.macro.n += m.n;
        report.macro.bleu += m.bleu;
        report.macro.chrf += m.chrf;
        report.macro.ot_ratio += m.ot_ratio;
        report.macro.sc_ratio += m.sc_ratio;
        report.macro.oug_ratio += m.oug_ratio;
        report.macro.over += m.over;
        report.macro.under += m.under;
        report.macro.oug_excluded += m.oug_excluded;
        for (const auto &[c, k] : m.compliance_counts)
            report.macro.compliance_counts[c] += k;
    }
    if (live > 0) {
        const double l = static_cast<double>(live);
        report.macro.bleu /= l;
        report.macro.chrf /= l;
        report.macro.ot_ratio /= l;
        report.macro.sc_ratio /= l;
        report.macro.oug_ratio /= l;
    }
    if (with_prefix > 0)
        report.macro.prefix_compliance_rate = prefix_sum / static_cast<double>(with_prefix);
    return report;
}

// ---------------------------------------------------------------------------
// Report output

inline ordered_json metrics_to_json(const DirectionMetrics &m) {
    ordered_json j;
    j["n"] = m.n;
    j["bleu"] = m.bleu;
    j["chrf"] = m.chrf;
    j["ot_ratio"] = m.ot_ratio;
    j["sc_ratio"] = m.sc_ratio;
    j["oug_ratio"] = m.oug_ratio;
    j["prefix_compliance_rate"] = m.prefix_compliance_rate ? ordered_json(*m.prefix_compliance_rate) : ordered_json();
    j["over"] = m.over;
    j["under"] = m.under;
    j["oug_excluded"] = m.oug_excluded;
    ordered_json cc = ordered_json::object();
    for (const auto &[c, k] : m.compliance_counts)
        cc[std::string(compliance_name(c))] = k;
    j["compliance"] = cc;
    return j;
}

inline ordered_json report_to_json(const EvalReport &r) {
    ordered_json j;
    ordered_json per = ordered_json::object();
    for (const auto &[d, m] : r.per_direction)
        per[d.str()] = metrics_to_json(m);
    j["per_direction"] = per;
    j["macro"] = metrics_to_json(r.macro);
    ordered_json settings;
    settings["mode"] = r.mode.str();
    settings["macro_average"] = "unweighted over directions with n > 0";
    settings["bleu_tokenizer"] = "intl13a_style; char_level for zh, ja, ko";
    settings["sc_threshold"] = kSourceCopyThreshold;
    settings["sc_comparison"] = "sentence BLEU > threshold, source-language tokenizer";
    settings["oug_bounds"] = {kUnderGenerationRatio, kOverGenerationRatio};
    settings["oug_length_unit"] = "codepoints for zh, ja; whitespace tokens otherwise";
    settings["chrf"] = "char order 6, beta 2, whitespace removed";
    j["settings"] = settings;
    return j;
}

inline std::string report_table(const EvalReport &r) {
    std::ostringstream os;
    auto pct = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << 100.0 * v;
        return s.str();
    };
    auto num = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << v;
        return s.str();
    };
    auto row = [&](const std::string &name, const DirectionMetrics &m) {
        os << std::left << std::setw(10) << name << std::right << std::setw(7) << m.n << std::setw(9) << num(m.bleu)
           << std::setw(9) << num(m.chrf) << std::setw(9) << pct(m.ot_ratio) << std::setw(9) << pct(m.sc_ratio)
           << std::setw(9) << pct(m.oug_ratio) << std::setw(10)
           << (m.prefix_compliance_rate ? pct(*m.prefix_compliance_rate) : std::string("-")) << '\n';
    };
    os << std::left << std::setw(10) << "direction" << std::right << std::setw(7) << "n" << std::setw(9) << "bleu"
       << std::setw(9) << "chrf" << std::setw(9) << "OT%" << std::setw(9) << "SC%" << std::setw(9) << "OUG%"
       << std::setw(10) << "prefix%" << '\n';
    for (const auto &[d, m] : r.per_direction)
        row(d.str(), m);
    row("macro", r.macro);
    return os.str();
}

} // namespace mtct
