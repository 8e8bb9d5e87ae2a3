#include "slotforge/phonetics.hpp"

#include <cctype>
#include <initializer_list>
#include <sstream>

namespace slotforge {

namespace {

// Rule set of Lawrence Philips' Double Metaphone, primary output only.
class PrimaryEncoder {
public:
    explicit PrimaryEncoder(std::string_view word) {
        for (char c : word) {
            const auto uc = static_cast<unsigned char>(c);
            if (std::isalpha(uc)) word_.push_back(static_cast<char>(std::toupper(uc)));
        }
        length_ = static_cast<int>(word_.size());
        last_ = length_ - 1;
        // Padding so look-ahead past the end sees spaces.
        word_.append(5, ' ');
        slavo_germanic_ = word_.find('W') != std::string::npos || word_.find('K') != std::string::npos ||
                          word_.find("CZ") != std::string::npos || word_.find("WITZ") != std::string::npos;
    }

    std::string encode() {
        if (length_ == 0) return {};
        int current = 0;
        if (at(0, 2, {"GN", "KN", "PN", "WR", "PS"})) current += 1;
        if (get(0) == 'X') {
            add("S");
            current += 1;
        }
        while (current < length_) {
            current = step(current);
        }
        return out_;
    }

private:
    char get(int pos) const {
        if (pos < 0 || pos >= static_cast<int>(word_.size())) return '\0';
        return word_[static_cast<std::size_t>(pos)];
    }

    bool vowel(int pos) const {
        if (pos < 0 || pos >= length_) return false;
        switch (get(pos)) {
            case 'A': case 'E': case 'I': case 'O': case 'U': case 'Y': return true;
            default: return false;
        }
    }

    bool at(int start, int len, std::initializer_list<std::string_view> options) const {
        if (start < 0) return false;
        if (start + len > static_cast<int>(word_.size())) return false;
        const std::string_view piece(word_.data() + start, static_cast<std::size_t>(len));
        for (auto opt : options) {
            if (piece == opt) return true;
        }
        return false;
    }

    void add(std::string_view s) { out_.append(s); }

    int step(int current);
    int encode_c(int current);
    int encode_g(int current);
    int encode_j(int current);
    int encode_s(int current);

    std::string word_;
    std::string out_;
    int length_ = 0;
    int last_ = -1;
    bool slavo_germanic_ = false;
};

int PrimaryEncoder::step(int current) {
    switch (get(current)) {
        case 'A': case 'E': case 'I': case 'O': case 'U': case 'Y':
            if (current == 0) add("A");
            return current + 1;
        case 'B':
            add("P");
            return get(current + 1) == 'B' ? current + 2 : current + 1;
        case 'C':
            return encode_c(current);
        case 'D':
            if (at(current, 2, {"DG"})) {
                if (at(current + 2, 1, {"I", "E", "Y"})) {
                    add("J");
                    return current + 3;
                }
                add("TK");
                return current + 2;
            }
            add("T");
            return at(current, 2, {"DT", "DD"}) ? current + 2 : current + 1;
        case 'F':
            add("F");
            return get(current + 1) == 'F' ? current + 2 : current + 1;
        case 'G':
            return encode_g(current);
        case 'H':
            if ((current == 0 || vowel(current - 1)) && vowel(current + 1)) {
                add("H");
                return current + 2;
            }
            return current + 1;
        case 'J':
            return encode_j(current);
        case 'K':
            add("K");
            return get(current + 1) == 'K' ? current + 2 : current + 1;
        case 'L':
            add("L");
            return get(current + 1) == 'L' ? current + 2 : current + 1;
        case 'M':
            add("M");
            if ((at(current - 1, 3, {"UMB"}) && (current + 1 == last_ || at(current + 2, 2, {"ER"}))) ||
                get(current + 1) == 'M') {
                return current + 2;
            }
            return current + 1;
        case 'N':
            add("N");
            return get(current + 1) == 'N' ? current + 2 : current + 1;
        case 'P':
            if (get(current + 1) == 'H') {
                add("F");
                return current + 2;
            }
            add("P");
            return at(current + 1, 1, {"P", "B"}) ? current + 2 : current + 1;
        case 'Q':
            add("K");
            return get(current + 1) == 'Q' ? current + 2 : current + 1;
        case 'R':
            // French final -ier: silent in the primary code.
            if (!(current == last_ && !slavo_germanic_ && at(current - 2, 2, {"IE"}) &&
                  !at(current - 4, 2, {"ME", "MA"}))) {
                add("R");
            }
            return get(current + 1) == 'R' ? current + 2 : current + 1;
        case 'S':
            return encode_s(current);
        case 'T':
            if (at(current, 4, {"TION"})) {
                add("X");
                return current + 3;
            }
            if (at(current, 3, {"TIA", "TCH"})) {
                add("X");
                return current + 3;
            }
            if (at(current, 2, {"TH"}) || at(current, 3, {"TTH"})) {
                if (at(current + 2, 2, {"OM", "AM"}) || at(0, 4, {"VAN ", "VON "}) || at(0, 3, {"SCH"})) {
                    add("T");
                } else {
                    add("0");
                }
                return current + 2;
            }
            add("T");
            return at(current + 1, 1, {"T", "D"}) ? current + 2 : current + 1;
        case 'V':
            add("F");
            return get(current + 1) == 'V' ? current + 2 : current + 1;
        case 'W':
            if (at(current, 2, {"WR"})) {
                add("R");
                return current + 2;
            }
            if (current == 0 && (vowel(current + 1) || at(current, 2, {"WH"}))) add("A");
            if ((current == last_ && vowel(current - 1)) ||
                at(current - 1, 5, {"EWSKI", "EWSKY", "OWSKI", "OWSKY"}) || at(0, 3, {"SCH"})) {
                return current + 1;
            }
            if (at(current, 4, {"WICZ", "WITZ"})) {
                add("TS");
                return current + 4;
            }
            return current + 1;
        case 'X':
            if (!(current == last_ && (at(current - 3, 3, {"IAU", "EAU"}) || at(current - 2, 2, {"AU", "OU"})))) {
                add("KS");
            }
            return at(current + 1, 1, {"C", "X"}) ? current + 2 : current + 1;
        case 'Z':
            if (get(current + 1) == 'H') {
                add("J");
                return current + 2;
            }
            add("S");
            return get(current + 1) == 'Z' ? current + 2 : current + 1;
        default:
            return current + 1;
    }
}

int PrimaryEncoder::encode_c(int current) {
    // Germanic -ach- as in "bacher".
    if (current > 1 && !vowel(current - 2) && at(current - 1, 3, {"ACH"}) && get(current + 2) != 'I' &&
        (get(current + 2) != 'E' || at(current - 2, 6, {"BACHER", "MACHER"}))) {
        add("K");
        return current + 2;
    }
    if (current == 0 && at(current, 6, {"CAESAR"})) {
        add("S");
        return current + 2;
    }
    if (at(current, 4, {"CHIA"})) {
        add("K");
        return current + 2;
    }
    if (at(current, 2, {"CH"})) {
        if (current > 0 && at(current, 4, {"CHAE"})) {
            add("K");
            return current + 2;
        }
        // Greek roots: "chemistry", "chorus".
        if (current == 0 &&
            (at(current + 1, 5, {"HARAC", "HARIS"}) || at(current + 1, 3, {"HOR", "HYM", "HIA", "HEM"})) &&
            !at(0, 5, {"CHORE"})) {
            add("K");
            return current + 2;
        }
        if (at(0, 4, {"VAN ", "VON "}) || at(0, 3, {"SCH"}) ||
            at(current - 2, 6, {"ORCHES", "ARCHIT", "ORCHID"}) || at(current + 2, 1, {"T", "S"}) ||
            ((at(current - 1, 1, {"A", "O", "U", "E"}) || current == 0) &&
             at(current + 2, 1, {"L", "R", "N", "M", "B", "H", "F", "V", "W", " "}))) {
            add("K");
        } else if (current > 0) {
            add(at(0, 2, {"MC"}) ? "K" : "X");
        } else {
            add("X");
        }
        return current + 2;
    }
    if (at(current, 2, {"CZ"}) && !at(current - 2, 4, {"WICZ"})) {
        add("S");
        return current + 2;
    }
    if (at(current + 1, 3, {"CIA"})) {
        add("X");
        return current + 3;
    }
    if (at(current, 2, {"CC"}) && !(current == 1 && get(0) == 'M')) {
        if (at(current + 2, 1, {"I", "E", "H"}) && !at(current + 2, 2, {"HU"})) {
            if ((current == 1 && get(current - 1) == 'A') || at(current - 1, 5, {"UCCEE", "UCCES"})) {
                add("KS");
            } else {
                add("X");
            }
            return current + 3;
        }
        add("K");
        return current + 2;
    }
    if (at(current, 2, {"CK", "CG", "CQ"})) {
        add("K");
        return current + 2;
    }
    if (at(current, 2, {"CI", "CE", "CY"})) {
        add("S");
        return current + 2;
    }
    add("K");
    if (at(current + 1, 2, {" C", " Q", " G"})) return current + 3;
    if (at(current + 1, 1, {"C", "K", "Q"}) && !at(current + 1, 2, {"CE", "CI"})) return current + 2;
    return current + 1;
}

int PrimaryEncoder::encode_g(int current) {
    if (get(current + 1) == 'H') {
        if (current > 0 && !vowel(current - 1)) {
            add("K");
            return current + 2;
        }
        if (current == 0) {
            add(get(current + 2) == 'I' ? "J" : "K");
            return current + 2;
        }
        // Parker's rule: "hugh", "bough".
        if ((current > 1 && at(current - 2, 1, {"B", "H", "D"})) ||
            (current > 2 && at(current - 3, 1, {"B", "H", "D"})) ||
            (current > 3 && at(current - 4, 1, {"B", "H"}))) {
            return current + 2;
        }
        if (current > 2 && get(current - 1) == 'U' && at(current - 3, 1, {"C", "G", "L", "R", "T"})) {
            add("F");
        } else if (current > 0 && get(current - 1) != 'I') {
            add("K");
        }
        return current + 2;
    }
    if (get(current + 1) == 'N') {
        if (current == 1 && vowel(0) && !slavo_germanic_) {
            add("KN");
        } else if (!at(current + 2, 2, {"EY"}) && get(current + 1) != 'Y' && !slavo_germanic_) {
            add("N");
        } else {
            add("KN");
        }
        return current + 2;
    }
    if (at(current + 1, 2, {"LI"}) && !slavo_germanic_) {
        add("KL");
        return current + 2;
    }
    if (current == 0 &&
        (get(current + 1) == 'Y' ||
         at(current + 1, 2, {"ES", "EP", "EB", "EL", "EY", "IB", "IL", "IN", "IE", "EI", "ER"}))) {
        add("K");
        return current + 2;
    }
    if ((at(current + 1, 2, {"ER"}) || get(current + 1) == 'Y') && !at(0, 6, {"DANGER", "RANGER", "MANGER"}) &&
        !at(current - 1, 1, {"E", "I"}) && !at(current - 1, 3, {"RGY", "OGY"})) {
        add("K");
        return current + 2;
    }
    if (at(current + 1, 1, {"E", "I", "Y"}) || at(current - 1, 4, {"AGGI", "OGGI"})) {
        if (at(0, 4, {"VAN ", "VON "}) || at(0, 3, {"SCH"}) || at(current + 1, 2, {"ET"})) {
            add("K");
        } else {
            add("J");
        }
        return current + 2;
    }
    add("K");
    return get(current + 1) == 'G' ? current + 2 : current + 1;
}

int PrimaryEncoder::encode_j(int current) {
    if (at(current, 4, {"JOSE"}) || at(0, 4, {"SAN "})) {
        if ((current == 0 && get(current + 4) == ' ') || at(0, 4, {"SAN "})) {
            add("H");
        } else {
            add("J");
        }
        return current + 1;
    }
    if (current == 0 && !at(current, 4, {"JOSE"})) {
        add("J");
    } else if (vowel(current - 1) && !slavo_germanic_ && (get(current + 1) == 'A' || get(current + 1) == 'O')) {
        add("J");
    } else if (current == last_) {
        add("J");
    } else if (!at(current + 1, 1, {"L", "T", "K", "S", "N", "M", "B", "Z"}) &&
               !at(current - 1, 1, {"S", "K", "L"})) {
        add("J");
    }
    return get(current + 1) == 'J' ? current + 2 : current + 1;
}

int PrimaryEncoder::encode_s(int current) {
    if (at(current - 1, 3, {"ISL", "YSL"})) return current + 1;
    if (current == 0 && at(current, 5, {"SUGAR"})) {
        add("X");
        return current + 1;
    }
    if (at(current, 2, {"SH"})) {
        add(at(current + 1, 4, {"HEIM", "HOEK", "HOLM", "HOLZ"}) ? "S" : "X");
        return current + 2;
    }
    if (at(current, 3, {"SIO", "SIA"}) || at(current, 4, {"SIAN"})) {
        add("S");
        return current + 3;
    }
    if ((current == 0 && at(current + 1, 1, {"M", "N", "L", "W"})) || at(current + 1, 1, {"Z"})) {
        add("S");
        return at(current + 1, 1, {"Z"}) ? current + 2 : current + 1;
    }
    if (at(current, 2, {"SC"})) {
        if (get(current + 2) == 'H') {
            if (at(current + 3, 2, {"OO", "ER", "EN", "UY", "ED", "EM"})) {
                add(at(current + 3, 2, {"ER", "EN"}) ? "X" : "SK");
                return current + 3;
            }
            add("X");
            return current + 3;
        }
        add(at(current + 2, 1, {"I", "E", "Y"}) ? "S" : "SK");
        return current + 3;
    }
    // French final -ais / -ois: silent in the primary code.
    if (!(current == last_ && at(current - 2, 2, {"AI", "OI"}))) add("S");
    return at(current + 1, 1, {"S", "Z"}) ? current + 2 : current + 1;
}

}  // namespace

std::string metaphone_word(std::string_view word) { return PrimaryEncoder(word).encode(); }

std::string person_key(std::string_view full_name) {
    std::istringstream in{std::string(full_name)};
    std::string token;
    std::string key;
    while (in >> token) {
        auto code = metaphone_word(token);
        if (code.empty()) continue;
        if (!key.empty()) key.push_back(' ');
        key += code;
    }
    return key;
}

}  // namespace slotforge
