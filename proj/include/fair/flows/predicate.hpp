// Copyright 2026 The fairkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fair/common/json.hpp"

namespace fair::flows {

// Boolean expressions over step outputs, used by quality_check steps.
//
//   expr    := and ("||" and)*
//   and     := unary ("&&" unary)*
//   unary   := "!" unary | "(" expr ")" | "present(" ref ")" | operand [cmp operand]
//   cmp     := "==" | "!=" | "<" | "<=" | ">" | ">="
//   operand := ref | number | 'text' | "text" | true | false | null
//   ref     := "$" name ("." segment)*
//
// An operand standing alone must evaluate to a boolean. Comparisons between
// values of different types are false (except !=), as is any comparison
// touching a missing reference.
class Predicate {
 public:
  using Lookup = std::function<const Json*(std::string_view ref)>;

  // ParseError naming the 1-based column.
  static Predicate parse(std::string_view text);

  [[nodiscard]] bool evaluate(const Lookup& lookup) const;
  // Every reference in source order, without duplicates.
  [[nodiscard]] const std::vector<std::string>& references() const noexcept { return refs_; }
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  std::vector<std::string> refs_;
};

}  // namespace fair::flows
