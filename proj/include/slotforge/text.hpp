#pragma once
// Small ASCII text helpers.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

namespace slotforge {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

// Replaces everything except letters, digits, apostrophes and spaces with a space.
inline std::string strip_punctuation(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '\'' && c != ' ') c = ' ';
    }
    return out;
}

// True when [begin, end) is not glued to an adjacent alphanumeric character.
inline bool is_word_boundary(std::string_view s, std::size_t begin, std::size_t end) {
    const bool left = begin == 0 || !std::isalnum(static_cast<unsigned char>(s[begin - 1]));
    const bool right = end >= s.size() || !std::isalnum(static_cast<unsigned char>(s[end]));
    return left && right;
}

}  // namespace slotforge
