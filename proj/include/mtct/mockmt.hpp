#pragma once

// Seeded pseudo-translator with injected errors, used as ground truth for the
// error-ratio metrics.
//
// Per record a single categorical draw picks: clean (the reference), OT (the
// same sentence in another language), SC (the source verbatim), over-generation
// (reference twice plus one more unit), or under-generation (the first
// floor(0.4 * len) units of the reference). In template modes the expected
// template is prepended to every output.

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/datagen.hpp"
#include "mtct/jsonl.hpp"
#include "mtct/metrics.hpp"
#include "mtct/rng.hpp"
#include "mtct/templates.hpp"

namespace mtct {

inline constexpr double kUnderGenerationFactor = 0.4;

struct ErrorSpec {
    double p_ot = 0;
    double p_sc = 0;
    double p_oug_over = 0;
    double p_oug_under = 0;
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        for (double p : {p_ot, p_sc, p_oug_over, p_oug_under})
            if (!(p >= 0 && p <= 1))
                throw InvalidSpec("error probabilities must lie in [0, 1]");
        if (p_ot + p_sc + p_oug_over + p_oug_under > 1 + 1e-12)
            throw InvalidSpec("error probabilities sum to more than 1");
    }
};

enum class InjectedError { Clean, Ot, Sc, OugOver, OugUnder };

inline std::string_view injected_name(InjectedError e) {
    switch (e) {
    case InjectedError::Clean: return "clean";
    case InjectedError::Ot: return "ot";
    case InjectedError::Sc: return "sc";
    case InjectedError::OugOver: return "oug_over";
    case InjectedError::OugUnder: return "oug_under";
    }
    return "clean";
}

inline InjectedError parse_injected(std::string_view s) {
    for (auto e : {InjectedError::Clean, InjectedError::Ot, InjectedError::Sc, InjectedError::OugOver,
                   InjectedError::OugUnder})
        if (injected_name(e) == s)
            return e;
    throw MalformedRow("unknown injected label '" + std::string(s) + "'");
}

struct GroundTruthLabel {
    std::string id;
    InjectedError injected = InjectedError::Clean;
    std::optional<LanguageCode> ot_lang;
};

inline ordered_json label_to_json(const GroundTruthLabel &l) {
    ordered_json j;
    j["id"] = l.id;
    j["injected"] = std::string(injected_name(l.injected));
    if (l.ot_lang)
        j["ot_lang"] = l.ot_lang->str();
    return j;
}

inline GroundTruthLabel label_from_json(const ordered_json &j) {
    GroundTruthLabel l;
    l.id = j.at("id").get<std::string>();
    l.injected = parse_injected(j.at("injected").get<std::string>());
    if (j.contains("ot_lang") && j["ot_lang"].is_string())
        l.ot_lang = LanguageCode(j["ot_lang"].get<std::string>());
    return l;
}

/// Sentences aligned across languages. Rows are found by id, or failing that
/// by (language, text) so corpora exported from the fixture resolve too.
class MultiParallel {
  public:
    using Row = std::map<LanguageCode, std::string>;

    void add(std::string id, Row row) {
        const std::size_t idx = rows_.size();
        for (const auto &[lang, text] : row)
            by_text_.try_emplace(lang.str() + '\t' + text, idx);
        if (!by_id_.try_emplace(id, idx).second)
            throw DuplicateId("multiparallel id " + id);
        ids_.push_back(std::move(id));
        rows_.push_back(std::move(row));
    }

    const Row *find(const std::string &id, LanguageCode src_lang, const std::string &src_text) const {
        if (auto it = by_id_.find(id); it != by_id_.end())
            return &rows_[it->second];
        if (auto it = by_text_.find(src_lang.str() + '\t' + src_text); it != by_text_.end())
            return &rows_[it->second];
        return nullptr;
    }

    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<Row> &rows() const noexcept { return rows_; }
    const std::vector<std::string> &ids() const noexcept { return ids_; }

    static MultiParallel load(std::istream &in, const std::string &name = "multiparallel") {
        MultiParallel mp;
        jsonl::for_each(in, name, [&](const ordered_json &j, std::size_t) {
            Row row;
            for (const auto &[lang, text] : j.at("texts").items())
                row[LanguageCode(lang)] = unicode::nfc(text.get<std::string>());
            mp.add(j.at("id").get<std::string>(), std::move(row));
        });
        return mp;
    }

    static MultiParallel load_file(const std::string &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw UnreadableFile(path);
        return load(in, path);
    }

  private:
    std::vector<std::string> ids_;
    std::vector<Row> rows_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_text_;
};

/// A corpus for one direction cycling through the fixture rows that cover both languages.
inline Corpus corpus_from_multiparallel(const MultiParallel &mp, const TranslationDirection &direction, std::size_t n) {
    std::vector<const MultiParallel::Row *> usable;
    for (const auto &row : mp.rows())
        if (row.count(direction.src) && row.count(direction.tgt))
            usable.push_back(&row);
    if (usable.empty())
        throw EmptyCorpus("multiparallel fixture has no rows for " + direction.str());
    std::vector<ParallelExample> examples;
    examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &row = *usable[i % usable.size()];
        examples.push_back({default_example_id(direction, i + 1), direction, row.at(direction.src), row.at(direction.tgt)});
    }
    return Corpus(direction, std::move(examples), CorpusMeta{"multiparallel", std::nullopt, "synthetic fixture", 0});
}

namespace mockmt_detail {

inline std::vector<std::string> units(std::string_view text, LengthUnit unit) {
    if (unit == LengthUnit::Codepoints)
        return tokenize_chars(text);
    return unicode::split_whitespace(text);
}

inline std::string join_units(const std::vector<std::string> &u, std::size_t count, LengthUnit unit) {
    std::string out;
    for (std::size_t i = 0; i < count && i < u.size(); ++i) {
        if (i > 0 && unit == LengthUnit::WhitespaceTokens)
            out += ' ';
        out += u[i];
    }
    return out;
}

} // namespace mockmt_detail

inline std::string over_generate(std::string_view reference, LanguageCode target) {
    const auto unit = length_unit_for(target);
    const auto u = mockmt_detail::units(reference, unit);
    const std::string sep = unit == LengthUnit::WhitespaceTokens ? " " : "";
    std::string out = std::string(reference) + sep + std::string(reference);
    if (!u.empty())
        out += sep + u.front();
    return out;
}

inline std::string under_generate(std::string_view reference, LanguageCode target) {
    const auto unit = length_unit_for(target);
    const auto u = mockmt_detail::units(reference, unit);
    const auto keep = static_cast<std::size_t>(std::floor(kUnderGenerationFactor * static_cast<double>(u.size())));
    return mockmt_detail::join_units(u, keep, unit);
}

struct SimulationResult {
    std::vector<Prediction> predictions;
    std::vector<GroundTruthLabel> labels;
};

/// OT draws choose uniformly among the row's languages other than the target
/// and the source, so OT and SC injections stay distinguishable.
inline SimulationResult simulate(const std::vector<TrainingRecord> &inference_set, const MultiParallel &multiparallel,
                                 const ErrorSpec &spec, const TemplateMode &mode = TemplateMode::plain(),
                                 const LanguageRegistry &registry = LanguageRegistry::standard()) {
    spec.validate();
    const CounterRng behavior(spec.seed, "mockmt:behavior");
    const CounterRng language(spec.seed, "mockmt:ot_lang");
    SimulationResult out;
    out.predictions.reserve(inference_set.size());
    out.labels.reserve(inference_set.size());
    const double c_ot = spec.p_ot;
    const double c_sc = c_ot + spec.p_sc;
    const double c_over = c_sc + spec.p_oug_over;
    const double c_under = c_over + spec.p_oug_under;

    for (std::size_t i = 0; i < inference_set.size(); ++i) {
        const auto &rec = inference_set[i];
        const double u = behavior.uniform(i);
        GroundTruthLabel label{rec.id, InjectedError::Clean, std::nullopt};
        std::string body;
        if (u < c_ot) {
            label.injected = InjectedError::Ot;
            const auto *row = multiparallel.find(rec.id, rec.direction.src, rec.src_text);
            std::vector<LanguageCode> alternatives;
            if (row)
                for (const auto &[lang, text] : *row)
                    if (lang != rec.direction.tgt && lang != rec.direction.src)
                        alternatives.push_back(lang);
            if (alternatives.empty())
                throw MissingMultiparallel("no off-target alternative for " + rec.id);
            const auto pick = alternatives[static_cast<std::size_t>(language.below(i, alternatives.size()))];
            label.ot_lang = pick;
            body = row->at(pick);
        } else if (u < c_sc) {
            label.injected = InjectedError::Sc;
            body = rec.src_text;
        } else if (u < c_over) {
            label.injected = InjectedError::OugOver;
            body = over_generate(rec.raw_target, rec.direction.tgt);
        } else if (u < c_under) {
            label.injected = InjectedError::OugUnder;
            body = under_generate(rec.raw_target, rec.direction.tgt);
        } else {
            body = rec.raw_target;
        }
        out.predictions.push_back({rec.id, rec.direction, apply_template(body, mode, rec.direction, registry), std::nullopt});
        out.labels.push_back(std::move(label));
    }
    return out;
}

/// Collapses a diagnosis to one label. Source copies are also off-target, so
/// SC is checked first; OT comes before length since text in another language
/// is often length-violating as well.
inline InjectedError primary_label(const SentenceDiagnosis &d) {
    if (d.source_copy)
        return InjectedError::Sc;
    if (d.off_target)
        return InjectedError::Ot;
    if (d.length.verdict == LengthVerdict::Over)
        return InjectedError::OugOver;
    if (d.length.verdict == LengthVerdict::Under)
        return InjectedError::OugUnder;
    return InjectedError::Clean;
}

/// Fraction of sentences whose primary label matches the injected one.
inline double label_agreement(const std::vector<GroundTruthLabel> &labels, const std::vector<SentenceDiagnosis> &diag) {
    std::unordered_map<std::string, InjectedError> want;
    for (const auto &l : labels)
        want[l.id] = l.injected;
    if (diag.empty())
        return 0.0;
    std::size_t agree = 0;
    for (const auto &d : diag) {
        auto it = want.find(d.id);
        if (it == want.end())
            throw UnresolvedId("no injected label for " + d.id);
        agree += primary_label(d) == it->second;
    }
    return static_cast<double>(agree) / static_cast<double>(diag.size());
}

} // namespace mtct
