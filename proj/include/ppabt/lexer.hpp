// Tokenizer shared by the formula, proposition and mission parsers.
#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ppabt/errors.hpp"

namespace ppabt::detail {

enum class TokenKind { Identifier, Integer, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_punct(char c) const { return kind == TokenKind::Punct && text.size() == 1 && text[0] == c; }
  bool is_ident(std::string_view word) const { return kind == TokenKind::Identifier && text == word; }

  std::string describe() const {
    if (kind == TokenKind::End) return "end of input";
    return "'" + text + "'";
  }
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Splits `text` into tokens. `#` starts a comment running to end of line when
// `hash_comments` is set. Newlines are whitespace.
inline std::vector<Token> tokenize(std::string_view text, bool hash_comments = false) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (hash_comments && c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.offset = i;
    tok.line = line;
    tok.column = col;
    std::size_t len = 1;
    if (is_ident_start(c)) {
      tok.kind = TokenKind::Identifier;
      while (i + len < text.size() && is_ident_char(text[i + len])) ++len;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = TokenKind::Integer;
      while (i + len < text.size() && std::isdigit(static_cast<unsigned char>(text[i + len]))) ++len;
    } else if (std::string_view("()|&!,=").find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Punct;
    } else {
      throw SyntaxError(i, line, col, "token", std::string("'") + c + "'");
    }
    tok.text = std::string(text.substr(i, len));
    advance(len);
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.offset = text.size();
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// Cursor over a token vector with the small set of helpers the recursive
// descent parsers need.
class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = pos_ + ahead;
    return k < tokens_.size() ? tokens_[k] : tokens_.back();
  }
  Token take() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokenKind::End; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw SyntaxError(t.offset, t.line, t.column, expected, t.describe());
  }

  void expect_punct(char c) {
    if (!peek().is_punct(c)) fail(std::string("'") + c + "'");
    take();
  }

  Token expect_identifier(const std::string& what = "identifier") {
    if (peek().kind != TokenKind::Identifier) fail(what);
    return take();
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace ppabt::detail
