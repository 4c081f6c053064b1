#pragma once

// Instruction-tuning dataset assembly.
//
// Each record pairs a randomly chosen prompt rendered around the source text
// with a constrained target z = [template, y]. Per-direction subsampling, prompt
// choice, and the final global order are all drawn from counter-based streams
// under a per-split sub-seed, so output bytes depend only on inputs and seed.

#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/jsonl.hpp"
#include "mtct/prompts.hpp"
#include "mtct/rng.hpp"
#include "mtct/templates.hpp"
#include "mtct/version.hpp"

namespace mtct {

inline constexpr std::size_t kDefaultCap = 2000;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr double kEvalRatio = 0.1;

enum class Split { Train, Validation, Test };

inline std::string_view split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "train";
}

inline Split parse_split(std::string_view s) {
    if (s == "train")
        return Split::Train;
    if (s == "validation")
        return Split::Validation;
    if (s == "test")
        return Split::Test;
    throw InvalidSpec("unknown split '" + std::string(s) + "'");
}

struct TrainingRecord {
    std::string id;
    TranslationDirection direction;
    int prompt_id = 0;
    std::string input;
    std::string target;
    std::string raw_target;
    std::vector<std::string> prefix_tokens;
    std::string src_text;

    bool operator==(const TrainingRecord &) const = default;
};

/// Keys in contract order; src_text is appended so evaluation can check source copies.
inline ordered_json record_to_json(const TrainingRecord &r) {
    ordered_json j;
    j["id"] = r.id;
    j["src_lang"] = r.direction.src.str();
    j["tgt_lang"] = r.direction.tgt.str();
    j["prompt_id"] = r.prompt_id;
    j["input"] = r.input;
    j["target"] = r.target;
    j["raw_target"] = r.raw_target;
    j["prefix_tokens"] = r.prefix_tokens;
    j["src_text"] = r.src_text;
    return j;
}

inline TrainingRecord record_from_json(const ordered_json &j) {
    TrainingRecord r;
    r.id = j.at("id").get<std::string>();
    r.direction = {LanguageCode(j.at("src_lang").get<std::string>()), LanguageCode(j.at("tgt_lang").get<std::string>())};
    r.prompt_id = j.value("prompt_id", 0);
    r.input = j.value("input", std::string());
    r.target = j.value("target", std::string());
    r.raw_target = j.at("raw_target").get<std::string>();
    if (j.contains("prefix_tokens"))
        r.prefix_tokens = j.at("prefix_tokens").get<std::vector<std::string>>();
    r.src_text = j.value("src_text", std::string());
    return r;
}

inline std::vector<TrainingRecord> read_records(std::istream &in, const std::string &name = "records") {
    std::vector<TrainingRecord> out;
    jsonl::for_each(in, name, [&](const ordered_json &j, std::size_t) { out.push_back(record_from_json(j)); });
    return out;
}

inline std::vector<TrainingRecord> read_records_file(const std::string &path) {
    std::vector<TrainingRecord> out;
    jsonl::for_each_file(path, [&](const ordered_json &j, std::size_t) { out.push_back(record_from_json(j)); });
    return out;
}

inline void write_records(std::ostream &out, const std::vector<TrainingRecord> &records) {
    for (const auto &r : records)
        out << jsonl::dump_line(record_to_json(r));
}

struct DatasetManifest {
    TemplateMode mode;
    std::optional<TriggerScheme> scheme;
    Split split = Split::Train;
    std::uint64_t rng_seed = kDefaultSeed;
    std::size_t cap = kDefaultCap;
    double eval_ratio = kEvalRatio;
    /// Keyed by "src-tgt", in first-appearance order.
    std::vector<std::pair<TranslationDirection, std::size_t>> per_direction;
    std::size_t total = 0;
    std::string created_with = tool_version();
};

inline ordered_json manifest_to_json(const DatasetManifest &m) {
    ordered_json j;
    j["mode"] = m.mode.str();
    if (m.mode.kind == TemplateKind::Hard) {
        j["variant"] = "TECT" + std::to_string(static_cast<int>(m.mode.variant));
        j["hard_prefix_pattern"] = std::string(hard_template_pattern(m.mode.variant));
    }
    if (m.scheme)
        j["scheme"] = scheme_to_json(*m.scheme);
    j["split"] = std::string(split_name(m.split));
    j["rng_seed"] = m.rng_seed;
    j["cap"] = m.cap;
    j["eval_ratio"] = m.eval_ratio;
    ordered_json counts = ordered_json::object();
    for (const auto &[d, n] : m.per_direction)
        counts[d.str()] = n;
    j["per_direction"] = counts;
    j["total"] = m.total;
    j["created_with"] = m.created_with;
    return j;
}

inline DatasetManifest dataset_manifest_from_json(const ordered_json &j) {
    DatasetManifest m;
    m.mode = TemplateMode::parse(j.at("mode").get<std::string>());
    if (j.contains("scheme"))
        m.scheme = scheme_from_json(j.at("scheme"));
    m.split = parse_split(j.value("split", std::string("train")));
    m.rng_seed = j.value("rng_seed", kDefaultSeed);
    m.cap = j.value("cap", kDefaultCap);
    m.eval_ratio = j.value("eval_ratio", kEvalRatio);
    if (j.contains("per_direction"))
        for (const auto &[k, v] : j.at("per_direction").items())
            m.per_direction.emplace_back(parse_direction(k), v.get<std::size_t>());
    m.total = j.value("total", std::size_t{0});
    m.created_with = j.value("created_with", tool_version());
    return m;
}

struct Dataset {
    std::vector<TrainingRecord> records;
    DatasetManifest manifest;

    std::string jsonl_bytes() const {
        std::ostringstream os;
        write_records(os, records);
        return os.str();
    }
};

/// Trigger scheme covering every target of the given corpora, targets sorted by code.
inline TriggerScheme scheme_for_corpora(const std::vector<Corpus> &corpora, int n_common, int n_specific) {
    std::set<LanguageCode> targets;
    for (const auto &c : corpora)
        targets.insert(c.direction().tgt);
    return TriggerScheme(n_common, n_specific, std::vector<LanguageCode>(targets.begin(), targets.end()));
}

inline TrainingRecord make_record(const ParallelExample &ex, const PromptTemplate &prompt, const TemplateMode &mode,
                                  const std::optional<TriggerScheme> &scheme, const LanguageRegistry &registry) {
    TrainingRecord r;
    r.id = ex.id;
    r.direction = ex.direction;
    r.prompt_id = prompt.id;
    r.input = render_prompt(prompt, ex.direction, ex.src_text, registry);
    r.raw_target = ex.tgt_text;
    r.src_text = ex.src_text;
    switch (mode.kind) {
    case TemplateKind::Plain:
        r.target = ex.tgt_text;
        break;
    case TemplateKind::Hard:
        r.target = build_hard_prefix(mode.variant, ex.direction, registry) + " " + ex.tgt_text;
        break;
    case TemplateKind::Trigger:
        r.prefix_tokens = build_trigger_sequence(*scheme, ex.direction);
        r.target = join_tokens(r.prefix_tokens) + " " + ex.tgt_text;
        break;
    }
    return r;
}

/// Builds one split. Corpora sharing a direction are concatenated; each direction
/// keeps at most `cap` examples, chosen by a seeded shuffle when it has more.
inline Dataset build_dataset(const std::vector<Corpus> &corpora, const TemplateMode &mode, std::size_t cap,
                             std::uint64_t seed, Split split = Split::Train,
                             const LanguageRegistry &registry = LanguageRegistry::standard()) {
    if (corpora.empty())
        throw EmptyCorpus("no corpora given");
    if (cap < 1)
        throw InvalidSpec("cap must be at least 1");

    std::vector<TranslationDirection> order;
    std::map<TranslationDirection, std::vector<const ParallelExample *>> groups;
    for (const auto &c : corpora) {
        if (c.empty())
            throw EmptyCorpus("corpus for " + c.direction().str() + (c.meta().source.empty() ? "" : " (" + c.meta().source + ")"));
        auto [it, inserted] = groups.try_emplace(c.direction());
        if (inserted)
            order.push_back(c.direction());
        for (const auto &ex : c.examples())
            it->second.push_back(&ex);
    }

    std::optional<TriggerScheme> scheme;
    if (mode.kind == TemplateKind::Trigger)
        scheme = scheme_for_corpora(corpora, mode.n_common, mode.n_specific);

    const CounterRng split_rng(seed, "split:" + std::string(split_name(split)));

    Dataset ds;
    ds.manifest.mode = mode;
    ds.manifest.scheme = scheme;
    ds.manifest.split = split;
    ds.manifest.rng_seed = seed;
    ds.manifest.cap = cap;

    std::vector<const ParallelExample *> selected;
    std::unordered_set<std::string> ids;
    for (const auto &d : order) {
        auto &group = groups[d];
        if (group.size() > cap) {
            seeded_shuffle(group, split_rng.derive("subsample:" + d.str()));
            group.resize(cap);
        }
        for (const auto *ex : group)
            if (!ids.insert(ex->id).second)
                throw DuplicateId("example id '" + ex->id + "' appears in more than one corpus");
        selected.insert(selected.end(), group.begin(), group.end());
        ds.manifest.per_direction.emplace_back(d, group.size());
    }

    const std::uint64_t prompt_seed = split_rng.derive("prompt").key();
    ds.records.reserve(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i)
        ds.records.push_back(make_record(*selected[i], pick_prompt(prompt_seed, i), mode, scheme, registry));

    seeded_shuffle(ds.records, split_rng.derive("order"));
    ds.manifest.total = ds.records.size();
    return ds;
}

/// Inference records keep corpus order and carry no constrained target.
inline std::vector<TrainingRecord> build_inference_set(const Corpus &corpus, std::uint64_t seed,
                                                       const LanguageRegistry &registry = LanguageRegistry::standard()) {
    if (corpus.empty())
        throw EmptyCorpus("inference corpus for " + corpus.direction().str());
    const std::uint64_t prompt_seed = CounterRng(seed, "split:test").derive("prompt:" + corpus.direction().str()).key();
    std::vector<TrainingRecord> out;
    out.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto &ex = corpus.examples()[i];
        TrainingRecord r;
        r.id = ex.id;
        r.direction = ex.direction;
        const auto &prompt = pick_prompt(prompt_seed, i);
        r.prompt_id = prompt.id;
        r.input = render_prompt(prompt, ex.direction, ex.src_text, registry);
        r.raw_target = ex.tgt_text;
        r.src_text = ex.src_text;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace mtct
