#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mtct/datagen.hpp"
#include "mtct/langid.hpp"
#include "mtct/metrics.hpp"
#include "mtct/mockmt.hpp"
#include "mtct/templates.hpp"
#include "mtct/version.hpp"

#ifndef MTCT_DEFAULT_PROFILES
#define MTCT_DEFAULT_PROFILES "data/profiles"
#endif

namespace fs = std::filesystem;
using mtct::ordered_json;

namespace {

// Flat keys apply to the selected subcommand; an object keyed by a subcommand
// name applies only to that subcommand. Underscores in keys match dashes in flags.
class JsonConfig : public CLI::Config {
  public:
    explicit JsonConfig(const CLI::App *root) : root_(root) {}

    std::string to_config(const CLI::App *app, bool default_also, bool, std::string) const override {
        ordered_json j = ordered_json::object();
        for (const CLI::Option *opt : app->get_options()) {
            if (!opt->get_configurable() || opt->get_lnames().empty())
                continue;
            auto res = opt->results();
            if (res.empty() && default_also && !opt->get_default_str().empty())
                res.push_back(opt->get_default_str());
            if (res.empty())
                continue;
            j[opt->get_lnames().front()] = res.size() == 1 ? ordered_json(res.front()) : ordered_json(res);
        }
        return j.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream &in) const override {
        ordered_json j;
        try {
            j = ordered_json::parse(in);
        } catch (const nlohmann::json::exception &e) {
            throw mtct::MalformedRow(std::string("config: ") + e.what());
        }
        if (!j.is_object())
            throw mtct::MalformedRow("config: expected a JSON object");
        std::vector<std::string> selected;
        for (const CLI::App *sub : root_->get_subcommands())
            selected.push_back(sub->get_name());

        std::vector<CLI::ConfigItem> items;
        auto emit = [&](const std::string &sub, std::string key, const ordered_json &v) {
            if (v.is_null())
                return;
            for (char &c : key)
                if (c == '_')
                    c = '-';
            CLI::ConfigItem item;
            item.parents = {sub};
            item.name = key;
            auto scalar = [](const ordered_json &x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
            if (v.is_array())
                for (const auto &x : v)
                    item.inputs.push_back(scalar(x));
            else
                item.inputs.push_back(scalar(v));
            items.push_back(std::move(item));
        };
        for (const auto &[k, v] : j.items()) {
            if (v.is_object()) {
                if (std::find(selected.begin(), selected.end(), k) != selected.end())
                    for (const auto &[k2, v2] : v.items())
                        emit(k, k2, v2);
            } else {
                for (const auto &s : selected)
                    emit(s, k, v);
            }
        }
        return items;
    }

  private:
    const CLI::App *root_;
};

ordered_json echo_config(const CLI::App &sub) {
    ordered_json j;
    j["subcommand"] = sub.get_name();
    for (const CLI::Option *opt : sub.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help")
            continue;
        const auto &name = opt->get_lnames().front();
        if (opt->get_type_size() == 0) {
            j[name] = opt->count() > 0;
            continue;
        }
        auto res = opt->results();
        if (res.empty()) {
            j[name] = opt->get_default_str().empty() ? ordered_json() : ordered_json(opt->get_default_str());
        } else if (opt->get_expected_max() > 1) {
            j[name] = res;
        } else {
            j[name] = res.front();
        }
    }
    return j;
}

void write_file(const std::string &path, const std::string &bytes) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw mtct::UnwritableFile(path);
    out << bytes;
    out.flush();
    if (!out)
        throw mtct::UnwritableFile(path);
}

std::string manifest_path(const std::string &out) {
    fs::path p(out);
    if (p.extension() == ".jsonl" || p.extension() == ".tsv" || p.extension() == ".json")
        p.replace_extension(".manifest.json");
    else
        p += ".manifest.json";
    return p.string();
}

std::string sibling_path(const std::string &out, const std::string &suffix) {
    fs::path p(out);
    if (p.has_extension())
        p.replace_extension(suffix);
    else
        p += suffix;
    return p.string();
}

void write_manifest(const std::string &out, ordered_json body) {
    write_file(manifest_path(out), body.dump(2) + "\n");
}

std::optional<ordered_json> read_manifest_of(const std::string &path) {
    const auto m = manifest_path(path);
    if (!fs::exists(m))
        return std::nullopt;
    return mtct::jsonl::read_json_file(m);
}

std::vector<std::string> split_list(const std::vector<std::string> &items) {
    std::vector<std::string> out;
    for (const auto &item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!mtct::unicode::trim(part).empty())
                out.push_back(mtct::unicode::trim(part));
    }
    return out;
}

std::string bytes_of(const std::function<void(std::ostream &)> &fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

mtct::CorpusFormat format_for(const std::string &path, const std::string &format) {
    if (format != "auto")
        return mtct::parse_corpus_format(format);
    return fs::path(path).extension() == ".jsonl" ? mtct::CorpusFormat::Jsonl : mtct::CorpusFormat::Tsv;
}

// Options shared by the two commands that read parallel corpora.
struct CorpusArgs {
    std::vector<std::string> pairs;
    std::vector<std::string> corpus;
    std::string corpus_dir;
    std::string multiparallel;
    std::size_t mp_size = mtct::kDefaultCap;
    std::string format = "auto";
    bool strict = false;

    void add_to(CLI::App *sub) {
        sub->add_option("--pairs", pairs, "Translation directions, comma separated (e.g. en-de,en-cs)")
            ->delimiter(',');
        sub->add_option("--corpus", corpus, "Corpus file for one direction, as <src-tgt>=<path>; repeatable");
        sub->add_option("--corpus-dir", corpus_dir, "Directory holding <src-tgt>.tsv or <src-tgt>.jsonl per direction");
        sub->add_option("--multiparallel", multiparallel,
                        "Multiparallel fixture used for directions with no corpus file");
        sub->add_option("--mp-size", mp_size, "Examples per direction drawn from the multiparallel fixture");
        sub->add_option("--format", format, "Corpus format")->check(CLI::IsMember({"auto", "tsv", "jsonl"}));
        sub->add_flag("--strict", strict, "Fail on malformed corpus rows instead of dropping them");
    }

    std::vector<mtct::Corpus> load(ordered_json &inputs) const {
        std::vector<mtct::TranslationDirection> order;
        std::map<mtct::TranslationDirection, std::string> files;
        for (const auto &p : split_list(pairs)) {
            auto d = mtct::parse_direction(p);
            if (std::find(order.begin(), order.end(), d) == order.end())
                order.push_back(d);
        }
        for (const auto &spec : corpus) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw mtct::InvalidSpec("--corpus expects <src-tgt>=<path>, got '" + spec + "'");
            auto d = mtct::parse_direction(spec.substr(0, eq));
            files[d] = spec.substr(eq + 1);
            if (std::find(order.begin(), order.end(), d) == order.end())
                order.push_back(d);
        }
        if (order.empty())
            throw mtct::InvalidSpec("no directions given; use --pairs or --corpus");
        mtct::validate_direction_set(order);

        std::optional<mtct::MultiParallel> mp;
        std::vector<mtct::Corpus> out;
        inputs = ordered_json::array();
        for (const auto &d : order) {
            std::string path;
            if (auto it = files.find(d); it != files.end()) {
                path = it->second;
            } else if (!corpus_dir.empty()) {
                for (const char *ext : {".tsv", ".jsonl"}) {
                    auto candidate = (fs::path(corpus_dir) / (d.str() + ext)).string();
                    if (fs::exists(candidate)) {
                        path = candidate;
                        break;
                    }
                }
            }
            ordered_json info;
            info["direction"] = d.str();
            if (!path.empty()) {
                auto c = mtct::load_corpus(path, format_for(path, format), d, mtct::LoadOptions{strict});
                info["path"] = path;
                info["examples"] = c.size();
                info["dropped_rows"] = c.meta().dropped_rows;
                out.push_back(std::move(c));
            } else if (!multiparallel.empty()) {
                if (!mp)
                    mp = mtct::MultiParallel::load_file(multiparallel);
                out.push_back(mtct::corpus_from_multiparallel(*mp, d, mp_size));
                info["multiparallel"] = multiparallel;
                info["examples"] = mp_size;
            } else {
                throw mtct::UnreadableFile("no corpus found for " + d.str());
            }
            inputs.push_back(info);
        }
        return out;
    }
};

ordered_json per_direction_json(const std::vector<mtct::TrainingRecord> &records) {
    std::vector<std::pair<mtct::TranslationDirection, std::size_t>> counts;
    for (const auto &r : records) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto &kv) { return kv.first == r.direction; });
        if (it == counts.end())
            counts.emplace_back(r.direction, 1);
        else
            ++it->second;
    }
    ordered_json j = ordered_json::object();
    for (const auto &[d, n] : counts)
        j[d.str()] = n;
    return j;
}

void print_counts(const std::string &what, std::size_t total, const ordered_json &per, const std::string &path) {
    std::cout << "wrote " << total << ' ' << what << " to " << path << '\n';
    for (const auto &[d, n] : per.items())
        std::cout << "  " << d << ": " << n.get<std::size_t>() << '\n';
}

std::optional<mtct::TemplateMode> parse_optional_mode(const std::string &s) {
    if (s.empty())
        return std::nullopt;
    return mtct::TemplateMode::parse(s);
}

// ---------------------------------------------------------------------------

struct BuildData {
    CorpusArgs corpora;
    std::string mode = "act:1,1";
    std::size_t cap = mtct::kDefaultCap;
    std::uint64_t seed = mtct::kDefaultSeed;
    std::string split = "train";
    std::string out;
    std::string vocab_out;

    void add_to(CLI::App *sub) {
        corpora.add_to(sub);
        sub->add_option("--mode", mode, "Template mode: plain, tect:<1-5>, or act:<common>,<specific>");
        sub->add_option("--cap", cap, "Maximum examples per direction")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--split", split, "Split name")->check(CLI::IsMember({"train", "validation", "test"}));
        sub->add_option("--out", out, "Output JSONL path")->required();
        sub->add_option("--vocab-out", vocab_out, "Vocabulary manifest path for act modes (default <out>.vocab.json)");
    }

    void run(const CLI::App &sub) const {
        ordered_json inputs;
        const auto cs = corpora.load(inputs);
        const auto ds = mtct::build_dataset(cs, mtct::TemplateMode::parse(mode), cap, seed, mtct::parse_split(split));
        write_file(out, ds.jsonl_bytes());
        auto m = mtct::manifest_to_json(ds.manifest);
        m["records"] = out;
        m["inputs"] = inputs;
        if (ds.manifest.scheme) {
            const auto vpath = vocab_out.empty() ? sibling_path(out, ".vocab.json") : vocab_out;
            write_file(vpath, mtct::manifest_bytes(mtct::build_manifest(*ds.manifest.scheme)));
            m["vocab_manifest"] = vpath;
        }
        m["config"] = echo_config(sub);
        write_manifest(out, m);
        print_counts("records", ds.records.size(), m["per_direction"], out);
    }
};

struct BuildInference {
    CorpusArgs corpora;
    std::string mode = "act:1,1";
    std::uint64_t seed = mtct::kDefaultSeed;
    std::string out;

    void add_to(CLI::App *sub) {
        corpora.add_to(sub);
        sub->add_option("--mode", mode, "Template mode the model was trained with");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--out", out, "Output JSONL path")->required();
    }

    void run(const CLI::App &sub) const {
        ordered_json inputs;
        const auto cs = corpora.load(inputs);
        const auto tm = mtct::TemplateMode::parse(mode);
        std::vector<mtct::TrainingRecord> records;
        for (const auto &c : cs) {
            auto part = mtct::build_inference_set(c, seed);
            records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        std::unordered_set<std::string> ids;
        for (const auto &r : records)
            if (!ids.insert(r.id).second)
                throw mtct::DuplicateId("example id '" + r.id + "' appears in more than one corpus");
        write_file(out, bytes_of([&](std::ostream &os) { mtct::write_records(os, records); }));
        ordered_json m;
        m["mode"] = tm.str();
        if (tm.kind == mtct::TemplateKind::Trigger)
            m["scheme"] = mtct::scheme_to_json(mtct::scheme_for_corpora(cs, tm.n_common, tm.n_specific));
        m["split"] = "test";
        m["rng_seed"] = seed;
        m["per_direction"] = per_direction_json(records);
        m["total"] = records.size();
        m["created_with"] = mtct::tool_version();
        m["records"] = out;
        m["inputs"] = inputs;
        m["config"] = echo_config(sub);
        write_manifest(out, m);
        print_counts("inference records", records.size(), m["per_direction"], out);
    }
};

struct MpExport {
    std::string multiparallel;
    std::string pair;
    std::size_t n = mtct::kDefaultCap;
    std::string format = "tsv";
    std::string out;

    void add_to(CLI::App *sub) {
        sub->add_option("--multiparallel", multiparallel, "Multiparallel fixture JSONL")->required();
        sub->add_option("--pair", pair, "Direction, e.g. en-de")->required();
        sub->add_option("--n", n, "Number of examples")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"tsv", "jsonl"}));
        sub->add_option("--out", out, "Output corpus path")->required();
    }

    void run(const CLI::App &sub) const {
        const auto mp = mtct::MultiParallel::load_file(multiparallel);
        const auto c = mtct::corpus_from_multiparallel(mp, mtct::parse_direction(pair), n);
        write_file(out, bytes_of([&](std::ostream &os) { mtct::write_corpus(os, c, mtct::parse_corpus_format(format)); }));
        ordered_json m;
        m["direction"] = c.direction().str();
        m["examples"] = c.size();
        m["fixture_rows"] = mp.size();
        m["created_with"] = mtct::tool_version();
        m["config"] = echo_config(sub);
        write_manifest(out, m);
        std::cout << "wrote " << c.size() << " examples to " << out << '\n';
    }
};

struct Simulate {
    std::string inference;
    std::string multiparallel;
    double p_ot = 0, p_sc = 0, p_over = 0, p_under = 0;
    std::uint64_t seed = mtct::kDefaultSeed;
    std::string mode;
    std::string out;
    std::string labels;

    void add_to(CLI::App *sub) {
        sub->add_option("--in,--inference", inference, "Inference set JSONL")->required();
        sub->add_option("--multiparallel", multiparallel, "Multiparallel fixture JSONL")->required();
        sub->add_option("--p-ot", p_ot, "Off-target probability")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--p-sc", p_sc, "Source-copy probability")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--p-over", p_over, "Over-generation probability")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--p-under", p_under, "Under-generation probability")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--mode", mode, "Template mode to emit (default: the inference manifest's mode, else plain)");
        sub->add_option("--out", out, "Predictions JSONL path")->required();
        sub->add_option("--labels", labels, "Ground-truth label JSONL path (default <out>.labels.jsonl)");
    }

    void run(const CLI::App &sub) const {
        const auto records = mtct::read_records_file(inference);
        const auto mp = mtct::MultiParallel::load_file(multiparallel);
        auto tm = parse_optional_mode(mode);
        if (!tm) {
            const auto im = read_manifest_of(inference);
            tm = im && im->contains("mode") ? mtct::TemplateMode::parse((*im)["mode"].get<std::string>())
                                            : mtct::TemplateMode::plain();
        }
        const mtct::ErrorSpec spec{p_ot, p_sc, p_over, p_under, seed};
        const auto res = mtct::simulate(records, mp, spec, *tm);
        const auto lpath = labels.empty() ? sibling_path(out, ".labels.jsonl") : labels;
        write_file(out, bytes_of([&](std::ostream &os) { mtct::write_predictions(os, res.predictions); }));
        write_file(lpath, bytes_of([&](std::ostream &os) {
                       for (const auto &l : res.labels)
                           os << mtct::jsonl::dump_line(mtct::label_to_json(l));
                   }));
        std::map<mtct::InjectedError, std::size_t> hist;
        for (const auto &l : res.labels)
            ++hist[l.injected];
        ordered_json injected = ordered_json::object();
        for (const auto &[e, k] : hist)
            injected[std::string(mtct::injected_name(e))] = k;
        ordered_json m;
        m["mode"] = tm->str();
        m["rng_seed"] = seed;
        m["error_spec"] = {{"p_ot", p_ot}, {"p_sc", p_sc}, {"p_oug_over", p_over}, {"p_oug_under", p_under}};
        m["inference"] = inference;
        m["labels"] = lpath;
        m["total"] = res.predictions.size();
        m["injected"] = injected;
        m["created_with"] = mtct::tool_version();
        m["config"] = echo_config(sub);
        write_manifest(out, m);
        std::cout << "wrote " << res.predictions.size() << " predictions to " << out << " and labels to " << lpath
                  << '\n';
        for (const auto &[k, v] : injected.items())
            std::cout << "  " << k << ": " << v.get<std::size_t>() << '\n';
    }
};

struct Strip {
    std::string in;
    std::string mode;
    std::string out;

    void add_to(CLI::App *sub) {
        sub->add_option("--in", in, "Raw predictions JSONL")->required();
        sub->add_option("--mode", mode, "Template mode (default: the predictions manifest's mode)");
        sub->add_option("--out", out, "Stripped predictions JSONL")->required();
    }

    void run(const CLI::App &sub) const {
        auto preds = mtct::read_predictions_file(in);
        auto tm = parse_optional_mode(mode);
        if (!tm) {
            const auto im = read_manifest_of(in);
            if (!im || !im->contains("mode"))
                throw mtct::InvalidSpec("no --mode given and " + manifest_path(in) + " does not declare one");
            tm = mtct::TemplateMode::parse((*im)["mode"].get<std::string>());
        }
        std::map<mtct::TranslationDirection, std::map<mtct::Compliance, std::size_t>> hist;
        std::map<mtct::Compliance, std::size_t> total;
        for (auto &p : preds) {
            if (p.compliance)
                throw mtct::ModeMismatch(p.id + " was already stripped");
            if (tm->kind == mtct::TemplateKind::Plain)
                continue;
            auto s = mtct::strip_for_mode(p.output, *tm, p.direction);
            p.output = std::move(s.text);
            p.compliance = s.compliance;
            ++hist[p.direction][s.compliance];
            ++total[s.compliance];
        }
        write_file(out, bytes_of([&](std::ostream &os) { mtct::write_predictions(os, preds); }));

        const std::vector<mtct::Compliance> kinds = {mtct::Compliance::Exact, mtct::Compliance::WrongDirection,
                                                     mtct::Compliance::Partial, mtct::Compliance::Absent};
        ordered_json per = ordered_json::object();
        for (const auto &[d, h] : hist) {
            ordered_json row = ordered_json::object();
            for (auto k : kinds)
                row[std::string(mtct::compliance_name(k))] = h.count(k) ? h.at(k) : 0;
            per[d.str()] = row;
        }
        ordered_json tot = ordered_json::object();
        for (auto k : kinds)
            tot[std::string(mtct::compliance_name(k))] = total.count(k) ? total.at(k) : 0;

        ordered_json m;
        m["mode"] = tm->str();
        m["source"] = in;
        m["total"] = preds.size();
        m["compliance"] = tot;
        m["per_direction"] = per;
        m["created_with"] = mtct::tool_version();
        m["config"] = echo_config(sub);
        write_manifest(out, m);

        std::cout << "mode " << tm->str() << ", " << preds.size() << " predictions\n";
        std::cout << std::left << std::setw(10) << "direction";
        for (auto k : kinds)
            std::cout << std::right << std::setw(16) << mtct::compliance_name(k);
        std::cout << '\n';
        auto line = [&](const std::string &name, const std::map<mtct::Compliance, std::size_t> &h) {
            std::cout << std::left << std::setw(10) << name;
            for (auto k : kinds)
                std::cout << std::right << std::setw(16) << (h.count(k) ? h.at(k) : 0);
            std::cout << '\n';
        };
        for (const auto &[d, h] : hist)
            line(d.str(), h);
        line("all", total);
    }
};

struct Evaluate {
    std::string preds;
    std::string dataset;
    std::string manifest;
    std::string profiles = MTCT_DEFAULT_PROFILES;
    std::string mode;
    unsigned threads = 0;
    std::string json_out;
    std::string details;

    void add_to(CLI::App *sub) {
        sub->add_option("--preds", preds, "Predictions JSONL")->required();
        sub->add_option("--dataset", dataset, "Dataset or inference-set JSONL the predictions came from")->required();
        sub->add_option("--manifest", manifest, "Dataset manifest (default: the dataset's .manifest.json if present)");
        sub->add_option("--profiles", profiles, "Directory of language profiles");
        sub->add_option("--mode", mode,
                        "Template mode to strip (default: plain for stripped predictions, else the dataset's mode)");
        sub->add_option("--threads", threads, "Worker threads, 0 for hardware concurrency");
        sub->add_option("--json", json_out, "Write the report as JSON");
        sub->add_option("--details", details, "Write per-sentence diagnoses as JSONL");
    }

    int run(const CLI::App &sub) const {
        const auto ps = mtct::read_predictions_file(preds);
        const auto records = mtct::read_records_file(dataset);
        std::optional<ordered_json> dm;
        if (!manifest.empty())
            dm = mtct::jsonl::read_json_file(manifest);
        else
            dm = read_manifest_of(dataset);
        std::optional<mtct::TemplateMode> dataset_mode;
        if (dm && dm->contains("mode"))
            dataset_mode = mtct::TemplateMode::parse((*dm)["mode"].get<std::string>());

        const bool pre_stripped = !ps.empty() && std::all_of(ps.begin(), ps.end(), [](const auto &p) {
            return p.compliance.has_value();
        });
        auto tm = parse_optional_mode(mode);
        if (!tm)
            tm = pre_stripped ? mtct::TemplateMode::plain() : dataset_mode.value_or(mtct::TemplateMode::plain());

        const mtct::LanguageDetector detector(mtct::load_profiles(profiles));
        mtct::EvalOptions opts;
        opts.mode = *tm;
        opts.dataset_mode = dataset_mode;
        opts.threads = threads;
        const auto report = mtct::evaluate(ps, records, detector, opts);

        std::cout << mtct::report_table(report);
        if (!json_out.empty()) {
            auto j = mtct::report_to_json(report);
            j["config"] = echo_config(sub);
            j["created_with"] = mtct::tool_version();
            write_file(json_out, j.dump(2) + "\n");
        }
        if (!details.empty()) {
            write_file(details, bytes_of([&](std::ostream &os) {
                           for (const auto &s : report.sentences) {
                               ordered_json j;
                               j["id"] = s.id;
                               j["direction"] = s.direction.str();
                               j["output"] = s.clean_output;
                               j["compliance"] = s.compliance ? ordered_json(std::string(mtct::compliance_name(*s.compliance)))
                                                              : ordered_json();
                               j["detected"] = s.detected ? ordered_json(s.detected->str()) : ordered_json();
                               j["off_target"] = s.off_target;
                               j["source_bleu"] = s.source_bleu;
                               j["source_copy"] = s.source_copy;
                               j["length_ratio"] = s.length.ratio;
                               j["length"] = s.length.verdict == mtct::LengthVerdict::Over    ? "over"
                                             : s.length.verdict == mtct::LengthVerdict::Under ? "under"
                                             : s.length.verdict == mtct::LengthVerdict::Ok    ? "ok"
                                                                                              : "no_reference";
                               os << mtct::jsonl::dump_line(j);
                           }
                       }));
            ordered_json m;
            m["report_mode"] = report.mode.str();
            m["sentences"] = report.sentences.size();
            m["created_with"] = mtct::tool_version();
            m["config"] = echo_config(sub);
            write_manifest(details, m);
        }
        if (report.has_empty_direction()) {
            std::cerr << "error: at least one direction in the dataset has no predictions\n";
            return 1;
        }
        return 0;
    }
};

struct LangidTrain {
    std::string lang;
    std::vector<std::string> inputs;
    std::string out;
    double alpha = mtct::kDefaultAlpha;
    std::string source;

    void add_to(CLI::App *sub) {
        sub->add_option("--lang", lang, "Language code")->required();
        sub->add_option("--input", inputs, "Training text files, one sentence per line")->required();
        sub->add_option("--out", out, "Profile JSON path")->required();
        sub->add_option("--alpha", alpha, "Additive smoothing constant")->check(CLI::PositiveNumber);
        sub->add_option("--source", source, "JSON file describing where the training text came from");
    }

    void run(const CLI::App &sub) const {
        const mtct::LanguageCode code(lang);
        std::vector<std::string> texts;
        for (const auto &path : inputs) {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw mtct::UnreadableFile(path);
            std::string line;
            while (std::getline(in, line)) {
                mtct::detail::strip_cr(line);
                if (!mtct::unicode::trim(line).empty())
                    texts.push_back(line);
            }
        }
        ordered_json src;
        if (!source.empty()) {
            auto s = mtct::jsonl::read_json_file(source);
            src["description"] = s.value("source_url", std::string());
            if (s.contains("source_sha256"))
                src["sha256"] = s["source_sha256"];
            if (s.contains("languages") && s["languages"].contains(lang))
                src["files"] = s["languages"][lang];
        }
        src["inputs"] = inputs;
        const auto profile = mtct::train_profile(code, texts, alpha, src);
        write_file(out, profile.to_bytes());
        ordered_json m;
        m["lang"] = lang;
        m["training_chars"] = profile.training_chars();
        m["created_with"] = mtct::tool_version();
        m["config"] = echo_config(sub);
        write_manifest(out, m);
        std::cout << "trained " << lang << " on " << profile.training_chars() << " characters, wrote " << out << '\n';
    }
};

struct LangidDetect {
    std::string profiles = MTCT_DEFAULT_PROFILES;
    std::vector<std::string> texts;
    std::size_t top = 3;

    void add_to(CLI::App *sub) {
        sub->add_option("--profiles", profiles, "Directory of language profiles");
        sub->add_option("--text", texts, "Text to identify; repeatable. Reads lines from stdin when absent");
        sub->add_option("--top", top, "Candidates to print per text")->check(CLI::PositiveNumber);
    }

    int run() const {
        const mtct::LanguageDetector detector(mtct::load_profiles(profiles));
        auto one = [&](const std::string &t) {
            try {
                const auto r = detector.detect(t);
                std::cout << r.top.str();
                for (std::size_t i = 0; i < std::min(top, r.ranked.size()); ++i)
                    std::cout << '\t' << r.ranked[i].first.str() << ':' << std::fixed << std::setprecision(4)
                              << r.ranked[i].second;
                std::cout << '\n';
                return true;
            } catch (const mtct::EmptyText &) {
                std::cout << "-\n";
                return false;
            }
        };
        bool all = true;
        if (!texts.empty()) {
            for (const auto &t : texts)
                all = one(t) && all;
        } else {
            std::string line;
            while (std::getline(std::cin, line))
                all = one(line) && all;
        }
        return all ? 0 : 1;
    }
};

struct Manifest {
    std::vector<std::string> targets;
    std::string dataset_manifest;
    int common = 1;
    int specific = 1;
    std::string out;

    void add_to(CLI::App *sub) {
        sub->add_option("--targets", targets, "Target languages, comma separated")->delimiter(',');
        sub->add_option("--dataset-manifest", dataset_manifest, "Take the scheme from a dataset manifest instead");
        sub->add_option("--common", common, "Common trigger tokens")->check(CLI::PositiveNumber);
        sub->add_option("--specific", specific, "Language-specific trigger tokens")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Write the vocabulary manifest here instead of standard output");
    }

    void run() const {
        std::optional<mtct::TriggerScheme> scheme;
        if (!dataset_manifest.empty()) {
            const auto j = mtct::jsonl::read_json_file(dataset_manifest);
            if (!j.contains("scheme"))
                throw mtct::InvalidScheme(dataset_manifest + " has no trigger scheme");
            scheme = mtct::scheme_from_json(j["scheme"]);
        } else {
            std::set<mtct::LanguageCode> ts;
            for (const auto &t : split_list(targets))
                ts.insert(mtct::LanguageCode(t));
            scheme = mtct::TriggerScheme(common, specific, std::vector<mtct::LanguageCode>(ts.begin(), ts.end()));
        }
        const auto bytes = mtct::manifest_bytes(mtct::build_manifest(*scheme));
        if (out.empty()) {
            std::cout << bytes;
        } else {
            write_file(out, bytes);
            std::cout << "wrote " << scheme->distinct_tokens() << " special tokens to " << out << '\n';
        }
    }
};

int exit_code_for(const mtct::Error &e) { return e.category() == mtct::ErrorCategory::Io ? 2 : 1; }

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Constrained-template datasets and translation error diagnostics", "mtct"};
    app.set_version_flag("--version", mtct::tool_version());
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>(&app));
    app.set_config("--config", "", "JSON file with option values; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    BuildData build_data;
    BuildInference build_inference;
    MpExport mp_export;
    Simulate simulate;
    Strip strip;
    Evaluate evaluate;
    LangidTrain langid_train;
    LangidDetect langid_detect;
    Manifest manifest;

    auto *s_build = app.add_subcommand("build-data", "Build an instruction-tuning dataset");
    build_data.add_to(s_build);
    auto *s_inf = app.add_subcommand("build-inference", "Build an inference set without targets");
    build_inference.add_to(s_inf);
    auto *s_mp = app.add_subcommand("mp-export", "Export one direction of the multiparallel fixture as a corpus");
    mp_export.add_to(s_mp);
    auto *s_sim = app.add_subcommand("simulate", "Produce mock predictions with injected errors");
    simulate.add_to(s_sim);
    auto *s_strip = app.add_subcommand("strip", "Remove template prefixes from predictions");
    strip.add_to(s_strip);
    auto *s_eval = app.add_subcommand("evaluate", "Score predictions and report error ratios");
    evaluate.add_to(s_eval);
    auto *s_ltrain = app.add_subcommand("langid-train", "Train a character n-gram language profile");
    langid_train.add_to(s_ltrain);
    auto *s_ldetect = app.add_subcommand("langid-detect", "Identify the language of text");
    langid_detect.add_to(s_ldetect);
    auto *s_manifest = app.add_subcommand("manifest", "Print the special-token manifest for a trigger scheme");
    manifest.add_to(s_manifest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const mtct::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }

    try {
        if (s_build->parsed())
            build_data.run(*s_build);
        else if (s_inf->parsed())
            build_inference.run(*s_inf);
        else if (s_mp->parsed())
            mp_export.run(*s_mp);
        else if (s_sim->parsed())
            simulate.run(*s_sim);
        else if (s_strip->parsed())
            strip.run(*s_strip);
        else if (s_eval->parsed())
            return evaluate.run(*s_eval);
        else if (s_ltrain->parsed())
            langid_train.run(*s_ltrain);
        else if (s_ldetect->parsed())
            return langid_detect.run();
        else if (s_manifest->parsed())
            manifest.run();
    } catch (const mtct::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
