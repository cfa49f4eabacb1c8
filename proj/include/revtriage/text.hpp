/*
 * Copyright 2026 The revtriage Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVTRIAGE_TEXT_HPP_
#define REVTRIAGE_TEXT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revtriage/unicode.hpp"

namespace revtriage {

// Splits text into tokens: maximal runs of non-CJK word characters, plus one
// token per CJK character. Everything else separates tokens and is dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string run;
  const auto flush = [&] {
    if (!run.empty()) tokens.push_back(std::move(run));
    run.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = unicode::decode_next(text, pos);
    if (unicode::is_cjk(cp)) {
      flush();
      std::string single;
      unicode::append_utf8(single, cp);
      tokens.push_back(std::move(single));
    } else if (unicode::is_word_char(cp)) {
      unicode::append_utf8(run, cp);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_run = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = unicode::decode_next(text, pos);
    if (unicode::is_cjk(cp)) {
      count += 1;
      in_run = false;
    } else if (unicode::is_word_char(cp)) {
      if (!in_run) ++count;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return count;
}

namespace detail {

inline bool is_cjk_token(std::string_view token) {
  std::size_t pos = 0;
  return !token.empty() && unicode::is_cjk(unicode::decode_next(token, pos)) &&
         pos == token.size();
}

}  // namespace detail

// Inverse of tokenize up to separators: tokenize(detokenize(t)) == t for any
// token sequence produced by tokenize. Adjacent CJK tokens are joined
// directly, all other neighbours with one space.
inline std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !(detail::is_cjk_token(tokens[i - 1]) &&
                   detail::is_cjk_token(tokens[i]))) {
      out.push_back(' ');
    }
    out += tokens[i];
  }
  return out;
}

}  // namespace revtriage

#endif  // REVTRIAGE_TEXT_HPP_
