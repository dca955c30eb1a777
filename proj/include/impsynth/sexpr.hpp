#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "impsynth/error.hpp"

namespace impsynth {

/// Minimal s-expression: an atom or a list. `#` starts a line comment.
struct Sexpr {
  bool is_atom = true;
  std::string atom;
  std::vector<Sexpr> items;
  std::size_t position = 0;

  bool is_list() const { return !is_atom; }
  bool is(std::string_view a) const { return is_atom && atom == a; }
  /// List whose first element is the atom `head`.
  bool headed(std::string_view head) const { return is_list() && !items.empty() && items[0].is(head); }

  std::string str() const {
    if (is_atom) return atom;
    std::string out = "(";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ' ';
      out += items[i].str();
    }
    return out + ")";
  }

  static Sexpr make_atom(std::string a) {
    Sexpr s;
    s.atom = std::move(a);
    return s;
  }
  static Sexpr make_list(std::vector<Sexpr> xs) {
    Sexpr s;
    s.is_atom = false;
    s.items = std::move(xs);
    return s;
  }
};

namespace detail {
class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  Sexpr read() {
    skip();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    std::size_t start = pos_;
    char c = text_[pos_];
    if (c == ')') throw SyntaxError("unexpected ')'", pos_);
    if (c == '(') {
      ++pos_;
      Sexpr list;
      list.is_atom = false;
      list.position = start;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw SyntaxError("unclosed '('", start);
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')' && text_[pos_] != '#')
      ++pos_;
    Sexpr a = Sexpr::make_atom(std::string(text_.substr(start, pos_ - start)));
    a.position = start;
    return a;
  }

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }
  std::size_t position() const { return pos_; }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};
}  // namespace detail

/// Reads exactly one s-expression; trailing content is an error.
inline Sexpr parse_sexpr(std::string_view text) {
  detail::SexprReader r(text);
  Sexpr s = r.read();
  if (!r.at_end()) throw SyntaxError("trailing input after expression", r.position());
  return s;
}

}  // namespace impsynth
