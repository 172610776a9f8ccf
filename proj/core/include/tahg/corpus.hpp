#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tahg {

// Raw node texts t_i aligned with node ids; empty strings are allowed.
struct TextCorpus {
  std::vector<std::string> texts;

  std::size_t size() const { return texts.size(); }
  const std::string& operator[](std::size_t i) const { return texts[i]; }
};

// Lower-cased word tokens: maximal runs of ASCII alphanumerics or non-ASCII
// bytes (so UTF-8 words stay whole); everything else separates.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace tahg
