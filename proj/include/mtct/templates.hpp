#pragma once

// Target-side constrained templates.
//
// Hard templates prepend a human-readable task prefix ("translate from French
// to German:") to the reference. Trigger schemes prepend a sequence of special
// tokens: n_common tokens shared by every direction, then n_specific tokens
// shared only by directions with the same target language. In both cases the
// template and the reference are joined by a single ASCII space.

#include <algorithm>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtct/core.hpp"
#include "mtct/prompts.hpp"
#include "mtct/version.hpp"

namespace mtct {

enum class HardTemplateVariant { Tect1 = 1, Tect2, Tect3, Tect4, Tect5 };

inline constexpr std::array<HardTemplateVariant, 5> kHardTemplateVariants = {
    HardTemplateVariant::Tect1, HardTemplateVariant::Tect2, HardTemplateVariant::Tect3, HardTemplateVariant::Tect4,
    HardTemplateVariant::Tect5};

inline std::string_view hard_template_pattern(HardTemplateVariant v) {
    switch (v) {
    case HardTemplateVariant::Tect1: return "translate from [L1] to [L2]:";
    case HardTemplateVariant::Tect2: return "translate to [L2]:";
    case HardTemplateVariant::Tect3: return "translate from [L1]:";
    case HardTemplateVariant::Tect4: return "from [L1] to [L2]:";
    case HardTemplateVariant::Tect5: return "[L2]:";
    }
    return "";
}

inline HardTemplateVariant hard_template_variant(int n) {
    if (n < 1 || n > 5)
        throw InvalidScheme("hard template variant must be 1..5, got " + std::to_string(n));
    return static_cast<HardTemplateVariant>(n);
}

namespace detail {

inline std::string render_language_slots(std::string_view pattern, std::string_view l1, std::string_view l2) {
    std::string out(pattern);
    replace_all(out, kSlotSourceLang, l1);
    replace_all(out, kSlotTargetLang, l2);
    return out;
}

inline std::string display_name_or_throw(const LanguageRegistry &registry, LanguageCode code) {
    auto name = registry.display_name(code);
    if (!name)
        throw MissingSlotValue("no display name for '" + code.str() + "'");
    return *name;
}

} // namespace detail

inline std::string build_hard_prefix(HardTemplateVariant variant, const TranslationDirection &direction,
                                     const LanguageRegistry &registry = LanguageRegistry::standard()) {
    return detail::render_language_slots(hard_template_pattern(variant),
                                         detail::display_name_or_throw(registry, direction.src),
                                         detail::display_name_or_throw(registry, direction.tgt));
}

// ---------------------------------------------------------------------------
// Trigger schemes

inline constexpr std::string_view kTokenFormatV1 = "v1";

inline std::string common_trigger_token(int index) { return "<act_c_" + std::to_string(index) + ">"; }

inline std::string specific_trigger_token(LanguageCode target, int index) {
    return "<act_t_" + target.str() + "_" + std::to_string(index) + ">";
}

/// A trigger token parsed back from text.
struct TriggerToken {
    bool common = false;
    std::optional<LanguageCode> target;
    int index = 0;

    bool operator==(const TriggerToken &) const = default;
};

/// Parses one v1 token ("<act_c_3>", "<act_t_de_0>"); nullopt for anything else.
inline std::optional<TriggerToken> parse_trigger_token(std::string_view tok) {
    auto parse_index = [](std::string_view digits) -> std::optional<int> {
        if (digits.empty() || digits.size() > 6)
            return std::nullopt;
        int v = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc() || p != digits.data() + digits.size())
            return std::nullopt;
        return v;
    };
    if (tok.size() < 8 || tok.substr(0, 5) != "<act_" || tok.back() != '>')
        return std::nullopt;
    auto body = tok.substr(5, tok.size() - 6);
    if (body.substr(0, 2) == "c_") {
        auto idx = parse_index(body.substr(2));
        if (!idx)
            return std::nullopt;
        return TriggerToken{true, std::nullopt, *idx};
    }
    if (body.substr(0, 2) == "t_" && body.size() >= 6 && body[4] == '_' && LanguageCode::valid(body.substr(2, 2))) {
        auto idx = parse_index(body.substr(5));
        if (!idx)
            return std::nullopt;
        return TriggerToken{false, LanguageCode(body.substr(2, 2)), *idx};
    }
    return std::nullopt;
}

class TriggerScheme {
  public:
    TriggerScheme(int n_common, int n_specific, std::vector<LanguageCode> targets,
                  std::string token_format = std::string(kTokenFormatV1))
        : n_common_(n_common), n_specific_(n_specific), targets_(std::move(targets)),
          token_format_(std::move(token_format)) {
        if (n_common_ < 1 || n_specific_ < 1)
            throw InvalidScheme("trigger counts must be positive, got " + std::to_string(n_common_) + "," +
                                std::to_string(n_specific_));
        if (token_format_ != kTokenFormatV1)
            throw InvalidScheme("unsupported token format '" + token_format_ + "'");
        for (std::size_t i = 0; i < targets_.size(); ++i)
            for (std::size_t j = i + 1; j < targets_.size(); ++j)
                if (targets_[i] == targets_[j])
                    throw InvalidScheme("duplicate target " + targets_[i].str());
    }

    int n_common() const noexcept { return n_common_; }
    int n_specific() const noexcept { return n_specific_; }
    const std::vector<LanguageCode> &targets() const noexcept { return targets_; }
    const std::string &token_format() const noexcept { return token_format_; }

    bool has_target(LanguageCode code) const {
        return std::find(targets_.begin(), targets_.end(), code) != targets_.end();
    }

    std::size_t sequence_length() const noexcept { return static_cast<std::size_t>(n_common_ + n_specific_); }
    std::size_t distinct_tokens() const noexcept {
        return static_cast<std::size_t>(n_common_) + static_cast<std::size_t>(n_specific_) * targets_.size();
    }

    bool operator==(const TriggerScheme &) const = default;

  private:
    int n_common_;
    int n_specific_;
    std::vector<LanguageCode> targets_;
    std::string token_format_;
};

/// Trigger counts swept in the ablation grid.
inline const std::vector<std::pair<int, int>> &trigger_count_grid() {
    static const std::vector<std::pair<int, int>> grid = {{1, 1}, {1, 3}, {1, 6}, {1, 9}, {2, 6},
                                                          {3, 3}, {3, 9}, {6, 6}, {9, 9}};
    return grid;
}

/// Common tokens first, then the target-specific tokens.
inline std::vector<std::string> build_trigger_sequence(const TriggerScheme &scheme,
                                                       const TranslationDirection &direction) {
    if (!scheme.has_target(direction.tgt))
        throw UnknownTarget("target '" + direction.tgt.str() + "' not in trigger scheme");
    std::vector<std::string> out;
    out.reserve(scheme.sequence_length());
    for (int i = 0; i < scheme.n_common(); ++i)
        out.push_back(common_trigger_token(i));
    for (int j = 0; j < scheme.n_specific(); ++j)
        out.push_back(specific_trigger_token(direction.tgt, j));
    return out;
}

inline std::string join_tokens(const std::vector<std::string> &tokens) {
    std::string out;
    for (const auto &t : tokens) {
        if (!out.empty())
            out += ' ';
        out += t;
    }
    return out;
}

struct VocabManifest {
    std::vector<std::string> special_tokens;
    TriggerScheme scheme;
    std::string created_with;

    bool operator==(const VocabManifest &) const = default;
};

inline VocabManifest build_manifest(const TriggerScheme &scheme) {
    if (scheme.targets().empty())
        throw InvalidScheme("trigger scheme has no targets");
    std::vector<std::string> tokens;
    tokens.reserve(scheme.distinct_tokens());
    for (int i = 0; i < scheme.n_common(); ++i)
        tokens.push_back(common_trigger_token(i));
    for (const auto &t : scheme.targets())
        for (int j = 0; j < scheme.n_specific(); ++j)
            tokens.push_back(specific_trigger_token(t, j));
    return {std::move(tokens), scheme, tool_version()};
}

inline ordered_json scheme_to_json(const TriggerScheme &scheme) {
    ordered_json j;
    j["common"] = scheme.n_common();
    j["specific"] = scheme.n_specific();
    j["targets"] = ordered_json::array();
    for (const auto &t : scheme.targets())
        j["targets"].push_back(t.str());
    return j;
}

inline TriggerScheme scheme_from_json(const ordered_json &j) {
    std::vector<LanguageCode> targets;
    for (const auto &t : j.at("targets"))
        targets.emplace_back(t.get<std::string>());
    return TriggerScheme(j.at("common").get<int>(), j.at("specific").get<int>(), std::move(targets));
}

inline ordered_json manifest_to_json(const VocabManifest &m) {
    ordered_json j;
    j["special_tokens"] = m.special_tokens;
    j["scheme"] = scheme_to_json(m.scheme);
    j["created_with"] = m.created_with;
    return j;
}

inline VocabManifest manifest_from_json(const ordered_json &j) {
    VocabManifest m{j.at("special_tokens").get<std::vector<std::string>>(), scheme_from_json(j.at("scheme")),
                    j.at("created_with").get<std::string>()};
    return m;
}

/// Compact single-line serialization, newline-terminated.
inline std::string manifest_bytes(const VocabManifest &m) { return manifest_to_json(m).dump() + "\n"; }

// ---------------------------------------------------------------------------
// Template modes

enum class TemplateKind { Plain, Hard, Trigger };

struct TemplateMode {
    TemplateKind kind = TemplateKind::Plain;
    HardTemplateVariant variant = HardTemplateVariant::Tect1;
    int n_common = 1;
    int n_specific = 1;

    static TemplateMode plain() { return {}; }
    static TemplateMode hard(HardTemplateVariant v) { return {TemplateKind::Hard, v, 1, 1}; }
    static TemplateMode trigger(int c, int s) { return {TemplateKind::Trigger, HardTemplateVariant::Tect1, c, s}; }

    /// "plain", "tect:<1-5>", or "act:<common>,<specific>".
    static TemplateMode parse(std::string_view s) {
        auto to_int = [&](std::string_view digits) {
            int v = 0;
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
            if (digits.empty() || ec != std::errc() || p != digits.data() + digits.size())
                throw InvalidScheme("bad mode '" + std::string(s) + "'");
            return v;
        };
        if (s == "plain")
            return plain();
        if (s.substr(0, 5) == "tect:")
            return hard(hard_template_variant(to_int(s.substr(5))));
        if (s.substr(0, 4) == "act:") {
            auto rest = s.substr(4);
            auto comma = rest.find(',');
            if (comma == std::string_view::npos)
                throw InvalidScheme("bad mode '" + std::string(s) + "', expected act:<common>,<specific>");
            const int c = to_int(rest.substr(0, comma));
            const int sp = to_int(rest.substr(comma + 1));
            if (c < 1 || sp < 1)
                throw InvalidScheme("trigger counts must be positive in '" + std::string(s) + "'");
            return trigger(c, sp);
        }
        throw InvalidScheme("bad mode '" + std::string(s) + "', expected plain, tect:N, or act:C,S");
    }

    std::string str() const {
        switch (kind) {
        case TemplateKind::Plain: return "plain";
        case TemplateKind::Hard: return "tect:" + std::to_string(static_cast<int>(variant));
        case TemplateKind::Trigger: return "act:" + std::to_string(n_common) + "," + std::to_string(n_specific);
        }
        return "plain";
    }

    bool operator==(const TemplateMode &) const = default;
};

// ---------------------------------------------------------------------------
// Decode-time stripping

enum class Compliance { Exact, WrongDirection, Absent, Partial };

inline std::string_view compliance_name(Compliance c) {
    switch (c) {
    case Compliance::Exact: return "exact";
    case Compliance::WrongDirection: return "wrong_direction";
    case Compliance::Absent: return "absent";
    case Compliance::Partial: return "partial";
    }
    return "absent";
}

inline std::optional<Compliance> parse_compliance(std::string_view s) {
    for (auto c : {Compliance::Exact, Compliance::WrongDirection, Compliance::Absent, Compliance::Partial})
        if (compliance_name(c) == s)
            return c;
    return std::nullopt;
}

struct StripResult {
    std::string text;
    Compliance compliance = Compliance::Absent;

    bool operator==(const StripResult &) const = default;
};

namespace detail {

inline bool ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline std::size_t skip_space(std::string_view s, std::size_t pos) {
    while (pos < s.size()) {
        if (ascii_space(s[pos])) {
            ++pos;
            continue;
        }
        // U+00A0, U+3000 and friends.
        auto cps = unicode::decode(s.substr(pos, std::min<std::size_t>(4, s.size() - pos)));
        if (cps.empty() || !unicode::is_space(cps.front()))
            break;
        std::string enc;
        unicode::append(enc, cps.front());
        pos += enc.size();
    }
    return pos;
}

} // namespace detail

/// Removes a leading trigger sequence.
///
/// All leading v1 trigger tokens (space-separated or glued) are collected.
/// None: absent, text unchanged. Exactly the expected sequence: exact. Any
/// target-specific token for another target: wrong_direction. Otherwise (a
/// strict subset, reordering, or repeats of expected tokens): partial. Every
/// outcome except absent removes the collected tokens and the whitespace after them.
inline StripResult strip_prefix(std::string_view output, const TriggerScheme &scheme,
                                const TranslationDirection &direction) {
    const auto expected = build_trigger_sequence(scheme, direction);
    std::vector<std::string> found;
    std::vector<TriggerToken> parsed;
    std::size_t pos = detail::skip_space(output, 0);
    for (;;) {
        if (output.substr(pos, 5) != "<act_")
            break;
        const auto close = output.find('>', pos);
        if (close == std::string_view::npos)
            break;
        const auto tok = output.substr(pos, close - pos + 1);
        auto t = parse_trigger_token(tok);
        if (!t)
            break;
        found.emplace_back(tok);
        parsed.push_back(*t);
        pos = detail::skip_space(output, close + 1);
    }
    if (found.empty())
        return {std::string(output), Compliance::Absent};
    std::string rest(output.substr(pos));
    if (found == expected)
        return {std::move(rest), Compliance::Exact};
    for (const auto &t : parsed)
        if (!t.common && t.target != direction.tgt)
            return {std::move(rest), Compliance::WrongDirection};
    return {std::move(rest), Compliance::Partial};
}

/// Removes a leading hard prefix.
///
/// The expected prefix gives exact. The same variant rendered for any other
/// pair of registered languages gives wrong_direction (longest match wins).
/// A proper word-prefix of the expected prefix gives partial. Otherwise absent.
inline StripResult strip_prefix(std::string_view output, HardTemplateVariant variant,
                                const TranslationDirection &direction,
                                const LanguageRegistry &registry = LanguageRegistry::standard()) {
    const std::string expected = build_hard_prefix(variant, direction, registry);
    const std::size_t start = detail::skip_space(output, 0);
    const std::string_view body = output.substr(start);
    auto cut = [&](std::size_t len) { return std::string(output.substr(detail::skip_space(output, start + len))); };

    if (body.substr(0, expected.size()) == expected)
        return {cut(expected.size()), Compliance::Exact};

    const std::string_view pattern = hard_template_pattern(variant);
    const bool has_l1 = pattern.find(kSlotSourceLang) != std::string_view::npos;
    const bool has_l2 = pattern.find(kSlotTargetLang) != std::string_view::npos;
    std::size_t best = 0;
    for (const auto &[c1, n1] : registry.entries()) {
        for (const auto &[c2, n2] : registry.entries()) {
            if (!has_l1 && c1 != direction.src)
                continue;
            if (!has_l2 && c2 != direction.tgt)
                continue;
            const std::string cand = detail::render_language_slots(pattern, n1, n2);
            if (cand != expected && cand.size() > best && body.substr(0, cand.size()) == cand)
                best = cand.size();
        }
    }
    if (best > 0)
        return {cut(best), Compliance::WrongDirection};

    // Proper word prefixes of the expected prefix, longest first.
    std::vector<std::size_t> word_ends;
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (expected[i] == ' ')
            word_ends.push_back(i);
    for (auto it = word_ends.rbegin(); it != word_ends.rend(); ++it) {
        const std::size_t len = *it;
        if (body.substr(0, len) == std::string_view(expected).substr(0, len) &&
            (body.size() == len || detail::ascii_space(body[len])))
            return {cut(len), Compliance::Partial};
    }
    return {std::string(output), Compliance::Absent};
}

/// Strips according to a mode. Trigger stripping only needs the expected
/// sequence, so the scheme is built with the direction's target alone.
inline StripResult strip_for_mode(std::string_view output, const TemplateMode &mode,
                                  const TranslationDirection &direction,
                                  const LanguageRegistry &registry = LanguageRegistry::standard()) {
    switch (mode.kind) {
    case TemplateKind::Plain:
        return {std::string(output), Compliance::Absent};
    case TemplateKind::Hard:
        return strip_prefix(output, mode.variant, direction, registry);
    case TemplateKind::Trigger:
        return strip_prefix(output, TriggerScheme(mode.n_common, mode.n_specific, {direction.tgt}), direction);
    }
    return {std::string(output), Compliance::Absent};
}

/// The constrained target z = [template, y].
inline std::string apply_template(std::string_view raw_target, const TemplateMode &mode,
                                  const TranslationDirection &direction,
                                  const LanguageRegistry &registry = LanguageRegistry::standard()) {
    switch (mode.kind) {
    case TemplateKind::Plain:
        return std::string(raw_target);
    case TemplateKind::Hard:
        return build_hard_prefix(mode.variant, direction, registry) + " " + std::string(raw_target);
    case TemplateKind::Trigger:
        return join_tokens(build_trigger_sequence(TriggerScheme(mode.n_common, mode.n_specific, {direction.tgt}),
                                                  direction)) +
               " " + std::string(raw_target);
    }
    return std::string(raw_target);
}

} // namespace mtct
