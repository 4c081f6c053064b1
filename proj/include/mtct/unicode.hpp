#pragma once

// UTF-8 helpers over ICU: NFC normalization, codepoint classes, script lookup.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

namespace mtct::unicode {

inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    const auto *p = reinterpret_cast<const uint8_t *>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
    }
    return out;
}

inline void append(std::string &out, char32_t cp) {
    char buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t *>(buf), n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
    if (error) {
        out += "\xEF\xBF\xBD";
        return;
    }
    out.append(buf, static_cast<std::size_t>(n));
}

inline std::string encode(const std::vector<char32_t> &cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps)
        append(out, c);
    return out;
}

inline std::string nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2 *norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status))
        return std::string(s);
    icu::UnicodeString in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    if (norm->isNormalized(in, status) && U_SUCCESS(status))
        return std::string(s);
    status = U_ZERO_ERROR;
    icu::UnicodeString normalized = norm->normalize(in, status);
    if (U_FAILURE(status))
        return std::string(s);
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
inline bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }

/// Letters plus combining marks, so Devanagari vowel signs and viramas stay inside words.
inline bool is_word_char(char32_t c) {
    const auto cp = static_cast<UChar32>(c);
    if (u_hasBinaryProperty(cp, UCHAR_ALPHABETIC))
        return true;
    const auto gc = u_charType(cp);
    return gc == U_NON_SPACING_MARK || gc == U_COMBINING_SPACING_MARK;
}

inline bool is_letter(char32_t c) { return u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_ALPHABETIC); }

inline bool is_punct_or_symbol(char32_t c) {
    const auto gc = U_GET_GC_MASK(static_cast<UChar32>(c));
    return (gc & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

inline char32_t to_lower(char32_t c) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))); }

enum class Script { Latin, Han, Kana, Hangul, Cyrillic, Devanagari, Arabic, Other, None };

inline Script script_of(char32_t c) {
    UErrorCode status = U_ZERO_ERROR;
    const UScriptCode code = uscript_getScript(static_cast<UChar32>(c), &status);
    if (U_FAILURE(status))
        return Script::Other;
    switch (code) {
    case USCRIPT_LATIN:
        return Script::Latin;
    case USCRIPT_HAN:
        return Script::Han;
    case USCRIPT_HIRAGANA:
    case USCRIPT_KATAKANA:
        return Script::Kana;
    case USCRIPT_HANGUL:
        return Script::Hangul;
    case USCRIPT_CYRILLIC:
        return Script::Cyrillic;
    case USCRIPT_DEVANAGARI:
        return Script::Devanagari;
    case USCRIPT_ARABIC:
        return Script::Arabic;
    case USCRIPT_COMMON:
    case USCRIPT_INHERITED:
        return Script::None;
    default:
        return Script::Other;
    }
}

inline std::string_view script_name(Script s) {
    switch (s) {
    case Script::Latin: return "Latin";
    case Script::Han: return "Han";
    case Script::Kana: return "Kana";
    case Script::Hangul: return "Hangul";
    case Script::Cyrillic: return "Cyrillic";
    case Script::Devanagari: return "Devanagari";
    case Script::Arabic: return "Arabic";
    case Script::Other: return "Other";
    case Script::None: return "None";
    }
    return "Other";
}

/// Strips Unicode whitespace from both ends.
inline std::string trim(std::string_view s) {
    const auto cps = decode(s);
    std::size_t b = 0, e = cps.size();
    while (b < e && is_space(cps[b]))
        ++b;
    while (e > b && is_space(cps[e - 1]))
        --e;
    if (b == 0 && e == cps.size())
        return std::string(s);
    return encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(b),
                                        cps.begin() + static_cast<std::ptrdiff_t>(e)));
}

/// Splits on runs of Unicode whitespace.
inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char32_t c : decode(s)) {
        if (is_space(c)) {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        } else {
            append(cur, c);
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

inline std::size_t count_non_space(std::string_view s) {
    std::size_t n = 0;
    for (char32_t c : decode(s))
        n += is_space(c) ? 0 : 1;
    return n;
}

} // namespace mtct::unicode
