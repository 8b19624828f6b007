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

#include "fair/flows/predicate.hpp"

#include <algorithm>
#include <cctype>

#include "fair/common/error.hpp"

namespace fair::flows {

namespace {

struct Operand {
  bool is_ref = false;
  std::string ref;
  Json literal;
};

}  // namespace

struct Predicate::Node {
  enum class Kind { any, all, negate, present, compare, single } kind = Kind::single;
  std::vector<std::shared_ptr<const Node>> children;
  std::string op;
  Operand lhs;
  Operand rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Predicate::Node>;
using Node = Predicate::Node;

bool ref_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    auto n = parse_or();
    skip_ws();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

  std::vector<std::string> refs;

 private:
  [[noreturn]] void error(const std::string& why) const {
    fail(Errc::ParseError, "column " + std::to_string(pos_ + 1) + ": " + why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  bool eat(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  NodePtr parse_or() {
    auto first = parse_and();
    if (!lookahead("||")) return first;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::any;
    n->children.push_back(first);
    while (eat("||")) n->children.push_back(parse_and());
    return n;
  }

  NodePtr parse_and() {
    auto first = parse_unary();
    if (!lookahead("&&")) return first;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::all;
    n->children.push_back(first);
    while (eat("&&")) n->children.push_back(parse_unary());
    return n;
  }

  bool lookahead(std::string_view token) {
    skip_ws();
    return text_.substr(pos_, token.size()) == token;
  }

  NodePtr parse_unary() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '!' && text_.substr(pos_, 2) != "!=") {
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negate;
      n->children.push_back(parse_unary());
      return n;
    }
    if (eat("(")) {
      auto inner = parse_or();
      if (!eat(")")) error("expected ')'");
      return inner;
    }
    if (eat("present(")) {
      skip_ws();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::present;
      n->lhs = parse_operand();
      if (!n->lhs.is_ref) error("present() takes a reference");
      if (!eat(")")) error("expected ')'");
      return n;
    }
    auto n = std::make_shared<Node>();
    n->lhs = parse_operand();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (eat(op)) {
        n->kind = Node::Kind::compare;
        n->op = std::string(op);
        n->rhs = parse_operand();
        return n;
      }
    }
    n->kind = Node::Kind::single;
    return n;
  }

  Operand parse_operand() {
    skip_ws();
    if (pos_ >= text_.size()) error("expected an operand");
    Operand o;
    const char c = text_[pos_];
    if (c == '$') {
      const auto start = ++pos_;
      while (pos_ < text_.size() && ref_char(text_[pos_])) ++pos_;
      o.is_ref = true;
      o.ref = std::string(text_.substr(start, pos_ - start));
      if (o.ref.empty() || o.ref.front() == '.' || o.ref.back() == '.' || o.ref.find("..") != std::string::npos) {
        error("malformed reference");
      }
      if (std::find(refs.begin(), refs.end(), o.ref) == refs.end()) refs.push_back(o.ref);
      return o;
    }
    if (c == '\'' || c == '"') {
      const auto close = text_.find(c, pos_ + 1);
      if (close == std::string_view::npos) error("unterminated string");
      o.literal = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      return o;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c)) != 0) {
      const auto start = pos_;
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '.' || text_[pos_] == 'e' ||
              text_[pos_] == 'E')) {
        ++pos_;
      }
      const std::string num(text_.substr(start, pos_ - start));
      try {
        o.literal = Json::parse(num);
      } catch (const Json::exception&) {
        pos_ = start;
        error("malformed number '" + num + "'");
      }
      if (!o.literal.is_number()) error("malformed number '" + num + "'");
      return o;
    }
    for (const auto& [word, value] : {std::pair<std::string_view, Json>{"true", true}, {"false", false}, {"null", nullptr}}) {
      if (text_.substr(pos_, word.size()) == word &&
          (pos_ + word.size() == text_.size() || !ref_char(text_[pos_ + word.size()]))) {
        pos_ += word.size();
        o.literal = value;
        return o;
      }
    }
    error("expected an operand");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

const Json* value_of(const Operand& o, const Predicate::Lookup& lookup) {
  return o.is_ref ? lookup(o.ref) : &o.literal;
}

bool compare(const std::string& op, const Json* a, const Json* b) {
  if (a == nullptr || b == nullptr) return false;
  const bool numeric = a->is_number() && b->is_number();
  const bool same = numeric || a->type() == b->type();
  if (op == "==") return same && (numeric ? a->get<double>() == b->get<double>() : *a == *b);
  if (op == "!=") return !same || (numeric ? a->get<double>() != b->get<double>() : *a != *b);
  if (!same) return false;
  if (numeric) {
    const double x = a->get<double>();
    const double y = b->get<double>();
    if (op == "<") return x < y;
    if (op == "<=") return x <= y;
    if (op == ">") return x > y;
    return x >= y;
  }
  if (!a->is_string()) return false;
  const auto& x = a->get_ref<const std::string&>();
  const auto& y = b->get_ref<const std::string&>();
  if (op == "<") return x < y;
  if (op == "<=") return x <= y;
  if (op == ">") return x > y;
  return x >= y;
}

bool eval(const Node& n, const Predicate::Lookup& lookup) {
  switch (n.kind) {
    case Node::Kind::any:
      return std::any_of(n.children.begin(), n.children.end(), [&](const NodePtr& c) { return eval(*c, lookup); });
    case Node::Kind::all:
      return std::all_of(n.children.begin(), n.children.end(), [&](const NodePtr& c) { return eval(*c, lookup); });
    case Node::Kind::negate:
      return !eval(*n.children[0], lookup);
    case Node::Kind::present: {
      const Json* v = lookup(n.lhs.ref);
      return v != nullptr && !v->is_null();
    }
    case Node::Kind::compare:
      return compare(n.op, value_of(n.lhs, lookup), value_of(n.rhs, lookup));
    case Node::Kind::single: {
      const Json* v = value_of(n.lhs, lookup);
      if (v == nullptr) return false;
      if (!v->is_boolean()) {
        fail(Errc::QualityCheckFailed, (n.lhs.is_ref ? "$" + n.lhs.ref : v->dump()) + " is not a boolean");
      }
      return v->get<bool>();
    }
  }
  return false;
}

}  // namespace

Predicate Predicate::parse(std::string_view text) {
  Parser p(text);
  Predicate out;
  out.text_ = std::string(text);
  out.root_ = p.parse_all();
  out.refs_ = std::move(p.refs);
  return out;
}

bool Predicate::evaluate(const Lookup& lookup) const { return eval(*root_, lookup); }

}  // namespace fair::flows
