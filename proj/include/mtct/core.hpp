#pragma once

// Language codes, translation directions, and parallel-corpus I/O.

#include <algorithm>
#include <array>
#include <compare>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mtct/error.hpp"
#include "mtct/unicode.hpp"

namespace mtct {

using ordered_json = nlohmann::ordered_json;

/// ISO-639-1 code: exactly two lowercase ASCII letters.
class LanguageCode {
  public:
    LanguageCode() = default;

    explicit LanguageCode(std::string_view code) {
        if (!valid(code))
            throw InvalidLanguageCode("'" + std::string(code) + "' is not two lowercase ASCII letters");
        code_ = {code[0], code[1]};
    }

    static bool valid(std::string_view code) noexcept {
        return code.size() == 2 && code[0] >= 'a' && code[0] <= 'z' && code[1] >= 'a' && code[1] <= 'z';
    }

    std::string str() const { return std::string(code_.data(), 2); }
    std::string_view view() const noexcept { return std::string_view(code_.data(), 2); }

    auto operator<=>(const LanguageCode &) const = default;
    bool operator==(const LanguageCode &) const = default;

  private:
    std::array<char, 2> code_{'x', 'x'};
};

inline LanguageCode operator""_lang(const char *s, std::size_t n) { return LanguageCode(std::string_view(s, n)); }

/// Code → English exonym. Display names are unique within a registry.
class LanguageRegistry {
  public:
    void add(LanguageCode code, std::string display_name) {
        if (display_name.empty())
            throw InvalidLanguageCode("empty display name for " + code.str());
        for (const auto &[c, name] : names_)
            if (name == display_name && c != code)
                throw InvalidLanguageCode("display name '" + display_name + "' already used by " + c.str());
        names_[code] = std::move(display_name);
    }

    std::optional<std::string> display_name(LanguageCode code) const {
        auto it = names_.find(code);
        if (it == names_.end())
            return std::nullopt;
        return it->second;
    }

    bool contains(LanguageCode code) const { return names_.count(code) != 0; }
    const std::map<LanguageCode, std::string> &entries() const noexcept { return names_; }

    /// en, cs, de, fr, zh, ru, ro, uk, hi plus ja, ko, nl, ar, it.
    static const LanguageRegistry &standard() {
        static const LanguageRegistry reg = [] {
            LanguageRegistry r;
            const std::pair<const char *, const char *> rows[] = {
                {"en", "English"}, {"cs", "Czech"},   {"de", "German"},   {"fr", "French"},  {"zh", "Chinese"},
                {"ru", "Russian"}, {"ro", "Romanian"}, {"uk", "Ukrainian"}, {"hi", "Hindi"},  {"ja", "Japanese"},
                {"ko", "Korean"},  {"nl", "Dutch"},   {"ar", "Arabic"},   {"it", "Italian"},
            };
            for (const auto &[code, name] : rows)
                r.add(LanguageCode(code), name);
            return r;
        }();
        return reg;
    }

  private:
    std::map<LanguageCode, std::string> names_;
};

struct TranslationDirection {
    LanguageCode src;
    LanguageCode tgt;

    bool degenerate() const noexcept { return src == tgt; }
    std::string str() const { return src.str() + "-" + tgt.str(); }

    auto operator<=>(const TranslationDirection &) const = default;
    bool operator==(const TranslationDirection &) const = default;
};

/// Parses "en-de" (or "en2de"); rejects src == tgt.
inline TranslationDirection parse_direction(std::string_view s) {
    std::size_t sep = s.find('-');
    std::size_t skip = 1;
    if (sep == std::string_view::npos) {
        sep = s.find('2');
        if (sep == std::string_view::npos)
            throw InvalidLanguageCode("direction '" + std::string(s) + "' is not of the form src-tgt");
    }
    TranslationDirection d{LanguageCode(s.substr(0, sep)), LanguageCode(s.substr(sep + skip))};
    if (d.degenerate())
        throw DegenerateDirection(d.str());
    return d;
}

/// The twenty evaluation directions: X→EN and EN→X for cs, de, zh, uk, ru, ro, hi, fr; plus DE↔FR and CS↔UK.
inline std::vector<TranslationDirection> evaluation_directions() {
    std::vector<TranslationDirection> out;
    for (const char *x : {"cs", "de", "zh", "uk", "ru", "ro", "hi", "fr"}) {
        out.push_back({"en"_lang, LanguageCode(x)});
        out.push_back({LanguageCode(x), "en"_lang});
    }
    out.push_back({"de"_lang, "fr"_lang});
    out.push_back({"fr"_lang, "de"_lang});
    out.push_back({"cs"_lang, "uk"_lang});
    out.push_back({"uk"_lang, "cs"_lang});
    return out;
}

struct DirectionSummary {
    std::set<LanguageCode> sources;
    std::set<LanguageCode> targets;
};

inline DirectionSummary validate_direction_set(const std::vector<TranslationDirection> &directions) {
    if (directions.empty())
        throw DegenerateDirection("empty direction list");
    DirectionSummary out;
    for (const auto &d : directions) {
        if (d.degenerate())
            throw DegenerateDirection(d.str());
        out.sources.insert(d.src);
        out.targets.insert(d.tgt);
    }
    return out;
}

struct ParallelExample {
    std::string id;
    TranslationDirection direction;
    std::string src_text;
    std::string tgt_text;

    bool operator==(const ParallelExample &) const = default;
};

struct CorpusMeta {
    std::string source;
    std::optional<double> similarity_threshold;
    std::string notes;
    std::size_t dropped_rows = 0;

    bool operator==(const CorpusMeta &) const = default;
};

class Corpus {
  public:
    Corpus() = default;
    Corpus(TranslationDirection direction, std::vector<ParallelExample> examples, CorpusMeta meta = {})
        : direction_(direction), examples_(std::move(examples)), meta_(std::move(meta)) {
        std::unordered_set<std::string> seen;
        for (const auto &ex : examples_) {
            if (!seen.insert(ex.id).second)
                throw DuplicateId(ex.id);
            if (ex.direction != direction_)
                throw MalformedRow("example " + ex.id + " has direction " + ex.direction.str() + ", corpus is " +
                                   direction_.str());
        }
    }

    const TranslationDirection &direction() const noexcept { return direction_; }
    const std::vector<ParallelExample> &examples() const noexcept { return examples_; }
    const CorpusMeta &meta() const noexcept { return meta_; }
    CorpusMeta &meta() noexcept { return meta_; }
    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }

    bool operator==(const Corpus &o) const { return direction_ == o.direction_ && examples_ == o.examples_; }

  private:
    TranslationDirection direction_;
    std::vector<ParallelExample> examples_;
    CorpusMeta meta_;
};

enum class CorpusFormat { Tsv, Jsonl };

inline CorpusFormat parse_corpus_format(std::string_view s) {
    if (s == "tsv")
        return CorpusFormat::Tsv;
    if (s == "jsonl")
        return CorpusFormat::Jsonl;
    throw MalformedRow("unknown corpus format '" + std::string(s) + "'");
}

inline std::string default_example_id(const TranslationDirection &d, std::size_t ordinal) {
    return d.src.str() + d.tgt.str() + "-" + std::to_string(ordinal);
}

namespace detail {

inline std::string clean_text(std::string_view raw) { return unicode::nfc(unicode::trim(raw)); }

inline void strip_cr(std::string &line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

} // namespace detail

struct LoadOptions {
    bool strict = false;
};

/// Reads a TSV or JSONL parallel corpus. Text is trimmed and NFC-normalized.
/// Rows with an empty side after trimming are dropped (counted in meta().dropped_rows)
/// unless strict, in which case they raise MalformedRow with the line number.
inline Corpus load_corpus(std::istream &in, CorpusFormat format, TranslationDirection direction,
                          LoadOptions opts = {}, std::string source_name = {}) {
    if (direction.degenerate())
        throw DegenerateDirection(direction.str());
    std::vector<ParallelExample> examples;
    std::unordered_set<std::string> seen;
    CorpusMeta meta;
    meta.source = std::move(source_name);

    std::string line;
    std::size_t lineno = 0;
    auto where = [&] { return (meta.source.empty() ? std::string("line ") : meta.source + ":") + std::to_string(lineno); };

    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        std::string id, src, tgt;
        if (format == CorpusFormat::Tsv) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                if (line.empty() && !opts.strict)
                    continue;
                if (opts.strict)
                    throw MalformedRow(where() + ": expected at least 2 tab-separated columns");
                ++meta.dropped_rows;
                continue;
            }
            const auto tab2 = line.find('\t', tab + 1);
            src = line.substr(0, tab);
            tgt = line.substr(tab + 1, tab2 == std::string::npos ? std::string::npos : tab2 - tab - 1);
        } else {
            if (unicode::trim(line).empty())
                continue;
            ordered_json row;
            try {
                row = ordered_json::parse(line);
            } catch (const nlohmann::json::exception &e) {
                if (opts.strict)
                    throw MalformedRow(where() + ": " + e.what());
                ++meta.dropped_rows;
                continue;
            }
            const bool ok = row.is_object() && row.contains("src_text") && row["src_text"].is_string() &&
                            row.contains("tgt_text") && row["tgt_text"].is_string();
            if (!ok) {
                if (opts.strict)
                    throw MalformedRow(where() + ": missing src_text/tgt_text");
                ++meta.dropped_rows;
                continue;
            }
            if (opts.strict) {
                for (const char *key : {"src_lang", "tgt_lang"}) {
                    if (!row.contains(key))
                        continue;
                    const auto want = key[0] == 's' ? direction.src : direction.tgt;
                    if (!row[key].is_string() || row[key].get<std::string>() != want.str())
                        throw MalformedRow(where() + ": " + key + " does not match direction " + direction.str());
                }
            }
            src = row["src_text"].get<std::string>();
            tgt = row["tgt_text"].get<std::string>();
            if (row.contains("id") && row["id"].is_string())
                id = row["id"].get<std::string>();
        }

        src = detail::clean_text(src);
        tgt = detail::clean_text(tgt);
        if (src.empty() || tgt.empty()) {
            if (opts.strict)
                throw MalformedRow(where() + ": empty source or target text");
            ++meta.dropped_rows;
            continue;
        }
        if (id.empty())
            id = default_example_id(direction, examples.size() + 1);
        if (!seen.insert(id).second) {
            if (opts.strict)
                throw DuplicateId(where() + ": " + id);
            ++meta.dropped_rows;
            continue;
        }
        examples.push_back({std::move(id), direction, std::move(src), std::move(tgt)});
    }
    return Corpus(direction, std::move(examples), std::move(meta));
}

inline Corpus load_corpus(const std::string &path, CorpusFormat format, TranslationDirection direction,
                          LoadOptions opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile(path);
    return load_corpus(in, format, direction, opts, path);
}

inline ordered_json example_to_json(const ParallelExample &ex) {
    ordered_json j;
    j["id"] = ex.id;
    j["src_lang"] = ex.direction.src.str();
    j["tgt_lang"] = ex.direction.tgt.str();
    j["src_text"] = ex.src_text;
    j["tgt_text"] = ex.tgt_text;
    return j;
}

/// TSV cannot carry ids, tabs, or newlines; ids are regenerated on load, so only
/// corpora with default ids round-trip through TSV.
inline void write_corpus(std::ostream &out, const Corpus &corpus, CorpusFormat format) {
    for (const auto &ex : corpus.examples()) {
        if (format == CorpusFormat::Tsv) {
            for (const std::string *t : {&ex.src_text, &ex.tgt_text})
                if (t->find_first_of("\t\n\r") != std::string::npos)
                    throw MalformedRow(ex.id + ": text contains a tab or newline, not representable as TSV");
            out << ex.src_text << '\t' << ex.tgt_text << '\n';
        } else {
            out << example_to_json(ex).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        }
    }
}

} // namespace mtct

template <> struct std::hash<mtct::LanguageCode> {
    std::size_t operator()(const mtct::LanguageCode &c) const noexcept { return std::hash<std::string_view>{}(c.view()); }
};

template <> struct std::hash<mtct::TranslationDirection> {
    std::size_t operator()(const mtct::TranslationDirection &d) const noexcept {
        return std::hash<mtct::LanguageCode>{}(d.src) * 31 + std::hash<mtct::LanguageCode>{}(d.tgt);
    }
};
