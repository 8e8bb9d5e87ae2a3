#pragma once
// Double Metaphone primary codes for person-name matching.

#include <string>
#include <string_view>

namespace slotforge {

// Primary Double Metaphone code of a single word, uppercase and not truncated.
// Non-letters are ignored; an empty or letter-free word yields "".
std::string metaphone_word(std::string_view word);

// Space-separated per-word codes of a full name, e.g. "Steven Spielberg" -> "STFN SPLPRK".
// Words whose code is empty are dropped, so the key never has empty tokens.
std::string person_key(std::string_view full_name);

}  // namespace slotforge
