#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace odke::text {

// Lowercases ASCII, Latin-1 Supplement and Latin Extended-A letters; other
// code points pass through unchanged.
std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

// Trim ASCII whitespace (and NBSP) at both ends and collapse interior runs to one space.
std::string collapse_whitespace(std::string_view s);

// Lowercased word segmentation: maximal runs of ASCII alphanumerics or
// non-ASCII letters. Punctuation/symbol blocks (Latin-1 punctuation, General
// Punctuation, CJK punctuation) separate words.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace odke::text
