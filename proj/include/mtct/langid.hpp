#pragma once

// Character n-gram language identification.
//
// Text is NFC-normalized and lowercased; digits collapse to '0' and every other
// non-word codepoint collapses to a single space, which also pads the ends.
// Profiles hold 1-, 2- and 3-gram counts with additive smoothing. Detection
// first restricts candidates by Unicode script, then scores every n-gram of
// the text under each candidate and returns the naive-Bayes posterior with a
// uniform prior. No sampling is involved, so results are deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/jsonl.hpp"
#include "mtct/unicode.hpp"

namespace mtct {

inline constexpr int kMaxGram = 3;
inline constexpr double kDefaultAlpha = 0.5;
inline constexpr std::size_t kMinTrainingChars = 10000;
inline constexpr std::string_view kProfileVersion = "mtct-langid-1";
/// A script must cover at least this share of a profile's letters to count as one of its scripts.
inline constexpr double kScriptShare = 0.10;

namespace langid_detail {

inline std::vector<char32_t> normalize(std::string_view text) {
    std::vector<char32_t> out;
    out.push_back(U' ');
    for (char32_t c : unicode::decode(unicode::nfc(text))) {
        char32_t m;
        if (unicode::is_word_char(c))
            m = unicode::to_lower(c);
        else if (unicode::is_digit(c))
            m = U'0';
        else
            m = U' ';
        if (m == U' ' && out.back() == U' ')
            continue;
        out.push_back(m);
    }
    if (out.back() != U' ')
        out.push_back(U' ');
    return out;
}

inline std::uint64_t gram_key(const char32_t *p, int n) {
    std::uint64_t k = 0;
    for (int i = 0; i < n; ++i)
        k = (k << 21) | (static_cast<std::uint64_t>(p[i]) & 0x1FFFFF);
    return k;
}

template <typename Fn> void for_each_gram(const std::vector<char32_t> &seq, Fn &&fn) {
    for (int n = 1; n <= kMaxGram; ++n) {
        if (seq.size() < static_cast<std::size_t>(n))
            break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= seq.size(); ++i) {
            const char32_t *p = seq.data() + i;
            bool all_space = true;
            for (int k = 0; k < n; ++k)
                all_space = all_space && p[k] == U' ';
            if (!all_space)
                fn(p, n);
        }
    }
}

inline std::map<unicode::Script, std::size_t> script_counts(std::string_view text) {
    std::map<unicode::Script, std::size_t> out;
    for (char32_t c : unicode::decode(text)) {
        if (!unicode::is_letter(c))
            continue;
        const auto s = unicode::script_of(c);
        if (s != unicode::Script::None)
            ++out[s];
    }
    return out;
}

inline std::optional<unicode::Script> parse_script(std::string_view name) {
    using unicode::Script;
    for (auto s : {Script::Latin, Script::Han, Script::Kana, Script::Hangul, Script::Cyrillic, Script::Devanagari,
                   Script::Arabic, Script::Other})
        if (unicode::script_name(s) == name)
            return s;
    return std::nullopt;
}

} // namespace langid_detail

class LanguageProfile {
  public:
    LanguageProfile(LanguageCode lang, std::map<std::string, std::uint64_t> counts, std::size_t training_chars,
                    std::set<unicode::Script> scripts, double alpha = kDefaultAlpha, ordered_json source = {})
        : lang_(lang), counts_(std::move(counts)), training_chars_(training_chars), scripts_(std::move(scripts)),
          alpha_(alpha), source_(std::move(source)) {
        std::array<double, kMaxGram + 1> totals{};
        std::array<double, kMaxGram + 1> vocab{};
        for (const auto &[gram, c] : counts_) {
            const auto cps = unicode::decode(gram);
            const auto n = static_cast<int>(cps.size());
            if (n < 1 || n > kMaxGram)
                throw MalformedRow("profile " + lang_.str() + ": gram of length " + std::to_string(n));
            totals[n] += static_cast<double>(c);
            vocab[n] += 1;
        }
        for (int n = 1; n <= kMaxGram; ++n) {
            const double denom = totals[n] + alpha_ * (vocab[n] + 1);
            unseen_[n] = std::log(alpha_ / denom);
            denom_[n] = denom;
        }
        logprobs_.reserve(counts_.size());
        for (const auto &[gram, c] : counts_) {
            const auto cps = unicode::decode(gram);
            const auto n = static_cast<int>(cps.size());
            logprobs_[langid_detail::gram_key(cps.data(), n)] = std::log((static_cast<double>(c) + alpha_) / denom_[n]);
        }
    }

    LanguageCode lang() const noexcept { return lang_; }
    std::size_t training_chars() const noexcept { return training_chars_; }
    double alpha() const noexcept { return alpha_; }
    const std::set<unicode::Script> &scripts() const noexcept { return scripts_; }
    const std::map<std::string, std::uint64_t> &counts() const noexcept { return counts_; }
    const ordered_json &source() const noexcept { return source_; }

    /// Smoothed log-probability of one gram of length n.
    double logprob(const char32_t *p, int n) const {
        auto it = logprobs_.find(langid_detail::gram_key(p, n));
        return it == logprobs_.end() ? unseen_[n] : it->second;
    }

    double logprob(std::string_view gram) const {
        const auto cps = unicode::decode(gram);
        return logprob(cps.data(), static_cast<int>(cps.size()));
    }

    double unseen_logprob(int n) const { return unseen_[n]; }

    /// Probability mass assigned to seen grams at level n (strictly below 1).
    double seen_mass(int n) const {
        double s = 0;
        for (const auto &[gram, c] : counts_)
            if (static_cast<int>(unicode::decode(gram).size()) == n)
                s += (static_cast<double>(c) + alpha_) / denom_[n];
        return s;
    }

    double score(const std::vector<char32_t> &normalized) const {
        double s = 0;
        langid_detail::for_each_gram(normalized, [&](const char32_t *p, int n) { s += logprob(p, n); });
        return s;
    }

    /// Keys serialize sorted, so bytes are stable across runs.
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = std::string(kProfileVersion);
        j["lang"] = lang_.str();
        j["n"] = kMaxGram;
        j["alpha"] = alpha_;
        j["training_chars"] = training_chars_;
        j["scripts"] = nlohmann::json::array();
        for (auto s : scripts_)
            j["scripts"].push_back(std::string(unicode::script_name(s)));
        if (!source_.is_null())
            j["source"] = nlohmann::json::parse(source_.dump());
        j["grams"] = counts_;
        return j;
    }

    std::string to_bytes() const {
        return to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }

    static LanguageProfile from_json(const nlohmann::json &j) {
        if (j.value("version", std::string(kProfileVersion)) != kProfileVersion)
            throw MalformedRow("unsupported profile version " + j.value("version", std::string()));
        if (j.value("n", kMaxGram) != kMaxGram)
            throw MalformedRow("profile n-gram order must be " + std::to_string(kMaxGram));
        std::map<std::string, std::uint64_t> counts;
        for (const auto &[k, v] : j.at("grams").items())
            counts[k] = v.get<std::uint64_t>();
        std::set<unicode::Script> scripts;
        if (j.contains("scripts"))
            for (const auto &s : j.at("scripts"))
                if (auto parsed = langid_detail::parse_script(s.get<std::string>()))
                    scripts.insert(*parsed);
        return LanguageProfile(LanguageCode(j.at("lang").get<std::string>()), std::move(counts),
                               j.at("training_chars").get<std::size_t>(), std::move(scripts),
                               j.value("alpha", kDefaultAlpha),
                               j.contains("source") ? ordered_json::parse(j.at("source").dump()) : ordered_json());
    }

  private:
    LanguageCode lang_;
    std::map<std::string, std::uint64_t> counts_;
    std::size_t training_chars_;
    std::set<unicode::Script> scripts_;
    double alpha_;
    ordered_json source_;
    std::array<double, kMaxGram + 1> unseen_{};
    std::array<double, kMaxGram + 1> denom_{};
    std::unordered_map<std::uint64_t, double> logprobs_;
};

inline LanguageProfile train_profile(LanguageCode lang, const std::vector<std::string> &texts,
                                     double alpha = kDefaultAlpha, ordered_json source = {}) {
    std::size_t chars = 0;
    std::map<unicode::Script, std::size_t> scripts;
    std::size_t letters = 0;
    std::map<std::string, std::uint64_t> counts;
    for (const auto &t : texts) {
        chars += unicode::decode(t).size();
        for (const auto &[s, c] : langid_detail::script_counts(t)) {
            scripts[s] += c;
            letters += c;
        }
        const auto seq = langid_detail::normalize(t);
        langid_detail::for_each_gram(seq, [&](const char32_t *p, int n) {
            std::string g;
            for (int k = 0; k < n; ++k)
                unicode::append(g, p[k]);
            ++counts[g];
        });
    }
    if (chars < kMinTrainingChars)
        throw InsufficientText(lang.str() + ": " + std::to_string(chars) + " characters, need at least " +
                               std::to_string(kMinTrainingChars));
    std::set<unicode::Script> profile_scripts;
    for (const auto &[s, c] : scripts)
        if (static_cast<double>(c) >= kScriptShare * static_cast<double>(letters))
            profile_scripts.insert(s);
    return LanguageProfile(lang, std::move(counts), chars, std::move(profile_scripts), alpha, std::move(source));
}

struct DetectionResult {
    std::vector<std::pair<LanguageCode, double>> ranked;
    LanguageCode top;
};

class LanguageDetector {
  public:
    explicit LanguageDetector(std::vector<LanguageProfile> profiles) : profiles_(std::move(profiles)) {
        if (profiles_.size() < 2)
            throw NoProfiles("need at least 2 language profiles, have " + std::to_string(profiles_.size()));
        std::sort(profiles_.begin(), profiles_.end(),
                  [](const LanguageProfile &a, const LanguageProfile &b) { return a.lang() < b.lang(); });
        for (std::size_t i = 1; i < profiles_.size(); ++i)
            if (profiles_[i].lang() == profiles_[i - 1].lang())
                throw NoProfiles("duplicate profile for " + profiles_[i].lang().str());
    }

    const std::vector<LanguageProfile> &profiles() const noexcept { return profiles_; }

    bool covers(LanguageCode lang) const {
        return std::any_of(profiles_.begin(), profiles_.end(), [&](const auto &p) { return p.lang() == lang; });
    }

    DetectionResult detect(std::string_view text) const {
        const auto scripts = langid_detail::script_counts(text);
        std::size_t letters = 0;
        for (const auto &[s, c] : scripts)
            letters += c;
        if (letters == 0)
            throw EmptyText("no letters to identify");

        std::vector<char> candidate(profiles_.size(), 1);
        const auto dominant =
            std::max_element(scripts.begin(), scripts.end(), [](auto &a, auto &b) { return a.second < b.second; })->first;
        auto restrict_to = [&](unicode::Script s) {
            std::vector<char> next(profiles_.size(), 0);
            bool any = false;
            for (std::size_t i = 0; i < profiles_.size(); ++i)
                if (candidate[i] && profiles_[i].scripts().count(s)) {
                    next[i] = 1;
                    any = true;
                }
            if (any)
                candidate = std::move(next);
        };
        restrict_to(dominant);
        auto kana = scripts.find(unicode::Script::Kana);
        if (kana != scripts.end() && static_cast<double>(kana->second) >= kScriptShare * static_cast<double>(letters))
            restrict_to(unicode::Script::Kana);

        const auto seq = langid_detail::normalize(text);
        std::vector<double> logp(profiles_.size(), -std::numeric_limits<double>::infinity());
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < profiles_.size(); ++i) {
            if (!candidate[i])
                continue;
            logp[i] = profiles_[i].score(seq);
            best = std::max(best, logp[i]);
        }
        double z = 0;
        for (std::size_t i = 0; i < profiles_.size(); ++i)
            if (candidate[i])
                z += std::exp(logp[i] - best);

        DetectionResult out;
        out.ranked.reserve(profiles_.size());
        for (std::size_t i = 0; i < profiles_.size(); ++i)
            out.ranked.emplace_back(profiles_[i].lang(), candidate[i] ? std::exp(logp[i] - best) / z : 0.0);
        std::stable_sort(out.ranked.begin(), out.ranked.end(),
                         [](const auto &a, const auto &b) { return a.second > b.second; });
        out.top = out.ranked.front().first;
        return out;
    }

  private:
    std::vector<LanguageProfile> profiles_;
};

inline DetectionResult detect(std::string_view text, const std::vector<LanguageProfile> &profiles) {
    return LanguageDetector(profiles).detect(text);
}

inline LanguageProfile load_profile(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile(path);
    try {
        return LanguageProfile::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw MalformedRow(path + ": " + e.what());
    }
}

/// Loads every *.json profile in a directory, in filename order, skipping *.manifest.json.
inline std::vector<LanguageProfile> load_profiles(const std::string &dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw UnreadableFile(dir + " is not a directory");
    std::vector<std::string> files;
    for (const auto &entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().stem().extension() != ".manifest")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<LanguageProfile> out;
    for (const auto &f : files)
        out.push_back(load_profile(f));
    return out;
}

} // namespace mtct
