#include "graphmark/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>

#include "graphmark/error.hpp"

namespace graphmark::lang {
namespace {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Dot,
  Assign,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint64_t magnitude = 0;  // Int
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token tok;
      tok.line = line_;
      tok.column = column_;
      if (pos_ >= text_.size()) {
        out.push_back(tok);
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          tok.text.push_back(advance());
        tok.kind = Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          tok.text.push_back(advance());
        tok.kind = Tok::Int;
        tok.magnitude = parse_magnitude(tok);
      } else {
        tok.kind = punct(tok);
      }
      out.push_back(std::move(tok));
    }
  }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  static std::uint64_t parse_magnitude(const Token& tok) {
    // Magnitudes up to 2^63 are accepted so that -9223372036854775808 lexes.
    constexpr std::uint64_t kMax = std::uint64_t{1} << 63;
    std::uint64_t v = 0;
    for (char d : tok.text) {
      const std::uint64_t digit = static_cast<std::uint64_t>(d - '0');
      if (v > (kMax - digit) / 10) throw SyntaxError("integer literal out of range", tok.line, tok.column);
      v = v * 10 + digit;
    }
    return v;
  }

  Tok punct(Token& tok) {
    const char c = advance();
    tok.text = std::string(1, c);
    auto follows = [&](char next) {
      if (pos_ < text_.size() && text_[pos_] == next) {
        tok.text.push_back(advance());
        return true;
      }
      return false;
    };
    switch (c) {
      case '(': return Tok::LParen;
      case ')': return Tok::RParen;
      case '{': return Tok::LBrace;
      case '}': return Tok::RBrace;
      case ',': return Tok::Comma;
      case ';': return Tok::Semi;
      case '.': return Tok::Dot;
      case '+': return Tok::Plus;
      case '-': return Tok::Minus;
      case '*': return Tok::Star;
      case '/': return Tok::Slash;
      case '%': return Tok::Percent;
      case '=': return follows('=') ? Tok::Eq : Tok::Assign;
      case '<': return follows('=') ? Tok::Le : Tok::Lt;
      case '>': return follows('=') ? Tok::Ge : Tok::Gt;
      case '!':
        if (follows('=')) return Tok::Ne;
        break;
      default: break;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", tok.line, tok.column);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

bool is_keyword(std::string_view word) {
  static constexpr std::string_view kKeywords[] = {"fn",    "global", "if",      "else",     "while",
                                                   "return", "print", "node",    "null",     "is_null",
                                                   "snapshot", "and", "or"};
  for (std::string_view k : kKeywords)
    if (k == word) return true;
  return false;
}

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 6;
  }
  return 0;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) {
      if (at_word("global")) {
        next();
        p.globals.push_back(identifier("global name"));
        expect(Tok::Semi, "';'");
      } else if (at_word("fn")) {
        p.functions.push_back(function());
      } else {
        fail("expected 'fn' or 'global'");
      }
    }
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(Tok kind, std::size_t ahead = 0) const { return peek(ahead).kind == kind; }
  bool at_word(std::string_view word, std::size_t ahead = 0) const {
    return at(Tok::Ident, ahead) && peek(ahead).text == word;
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(message + ", found " + found, t.line, t.column);
  }

  void expect(Tok kind, const char* what) {
    if (!at(kind)) fail(std::string("expected ") + what);
    next();
  }

  void expect_word(std::string_view word) {
    if (!at_word(word)) fail("expected '" + std::string(word) + "'");
    next();
  }

  std::string identifier(const char* what) {
    if (!at(Tok::Ident) || is_keyword(peek().text)) fail(std::string("expected ") + what);
    return next().text;
  }

  Field field() {
    if (at_word("left")) {
      next();
      return Field::Left;
    }
    if (at_word("right")) {
      next();
      return Field::Right;
    }
    if (at_word("data")) {
      next();
      return Field::Data;
    }
    fail("expected field name (left, right, data)");
  }

  Function function() {
    expect_word("fn");
    Function f;
    f.name = identifier("function name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      f.params.push_back(identifier("parameter name"));
      while (at(Tok::Comma)) {
        next();
        f.params.push_back(identifier("parameter name"));
      }
    }
    expect(Tok::RParen, "')'");
    f.body = block();
    return f;
  }

  std::vector<Stmt> block() {
    expect(Tok::LBrace, "'{'");
    std::vector<Stmt> body;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail("expected '}'");
      body.push_back(statement());
    }
    next();
    return body;
  }

  std::vector<Expr> arguments() {
    expect(Tok::LParen, "'('");
    std::vector<Expr> args;
    if (!at(Tok::RParen)) {
      args.push_back(expression());
      while (at(Tok::Comma)) {
        next();
        args.push_back(expression());
      }
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  Stmt statement() {
    if (at_word("if")) {
      next();
      expect(Tok::LParen, "'('");
      Expr cond = expression();
      expect(Tok::RParen, "')'");
      std::vector<Stmt> then_body = block();
      std::vector<Stmt> else_body;
      if (at_word("else")) {
        next();
        else_body = block();
      }
      return Stmt::if_else(std::move(cond), std::move(then_body), std::move(else_body));
    }
    if (at_word("while")) {
      next();
      expect(Tok::LParen, "'('");
      Expr cond = expression();
      expect(Tok::RParen, "')'");
      return Stmt::while_loop(std::move(cond), block());
    }
    if (at_word("print")) {
      next();
      expect(Tok::LParen, "'('");
      Expr value = expression();
      expect(Tok::RParen, "')'");
      expect(Tok::Semi, "';'");
      return Stmt::print(std::move(value));
    }
    if (at_word("return")) {
      next();
      Expr value = expression();
      expect(Tok::Semi, "';'");
      return Stmt::ret(std::move(value));
    }
    if (at_word("snapshot")) {
      next();
      expect(Tok::LParen, "'('");
      expect(Tok::RParen, "')'");
      expect(Tok::Semi, "';'");
      return Stmt::snapshot();
    }
    const std::string name = identifier("statement");
    if (at(Tok::Dot)) {
      next();
      const Field f = field();
      expect(Tok::Assign, "'='");
      Expr value = expression();
      expect(Tok::Semi, "';'");
      return Stmt::field_store(name, f, std::move(value));
    }
    if (at(Tok::LParen)) {
      std::vector<Expr> args = arguments();
      expect(Tok::Semi, "';'");
      return Stmt::call(name, std::move(args));
    }
    expect(Tok::Assign, "'=', '.' or '('");
    if (at_word("node") && at(Tok::LParen, 1) && at(Tok::RParen, 2)) {
      next();
      next();
      next();
      expect(Tok::Semi, "';'");
      return Stmt::alloc(name);
    }
    Expr value = expression();
    expect(Tok::Semi, "';'");
    return Stmt::assign(name, std::move(value));
  }

  std::optional<BinaryOp> binary_op() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Plus: return BinaryOp::Add;
      case Tok::Minus: return BinaryOp::Sub;
      case Tok::Star: return BinaryOp::Mul;
      case Tok::Slash: return BinaryOp::Div;
      case Tok::Percent: return BinaryOp::Mod;
      case Tok::Eq: return BinaryOp::Eq;
      case Tok::Ne: return BinaryOp::Ne;
      case Tok::Lt: return BinaryOp::Lt;
      case Tok::Le: return BinaryOp::Le;
      case Tok::Gt: return BinaryOp::Gt;
      case Tok::Ge: return BinaryOp::Ge;
      case Tok::Ident:
        if (t.text == "and") return BinaryOp::And;
        if (t.text == "or") return BinaryOp::Or;
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  Expr expression(int min_prec = 1) {
    Expr lhs = unary();
    while (true) {
      const std::optional<BinaryOp> op = binary_op();
      if (!op || precedence(*op) < min_prec) return lhs;
      next();
      Expr rhs = expression(precedence(*op) + 1);
      lhs = Expr::binary(*op, std::move(lhs), std::move(rhs));
    }
  }

  Expr unary() {
    if (at(Tok::Minus)) {
      next();
      if (at(Tok::Int)) {
        const Token& lit = next();
        if (lit.magnitude == (std::uint64_t{1} << 63)) return Expr::integer(std::numeric_limits<std::int64_t>::min());
        return Expr::integer(-static_cast<std::int64_t>(lit.magnitude));
      }
      return Expr::neg(unary());
    }
    return primary();
  }

  Expr primary() {
    if (at(Tok::Int)) {
      const Token& lit = next();
      if (lit.magnitude > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw SyntaxError("integer literal out of range", lit.line, lit.column);
      return Expr::integer(static_cast<std::int64_t>(lit.magnitude));
    }
    if (at(Tok::LParen)) {
      next();
      Expr inner = expression();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (at_word("null")) {
      next();
      return Expr::null();
    }
    if (at_word("is_null")) {
      next();
      expect(Tok::LParen, "'('");
      std::string name = identifier("variable");
      expect(Tok::RParen, "')'");
      return Expr::is_null(std::move(name));
    }
    std::string name = identifier("expression");
    if (at(Tok::Dot)) {
      next();
      return Expr::load(std::move(name), field());
    }
    if (at(Tok::LParen)) return Expr::call(std::move(name), arguments());
    return Expr::var(std::move(name));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Canonical printer

void print_expr(const Expr& e, int parent_prec, bool right_side, std::string& out);

bool is_atomic(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::NullLit:
    case Expr::Kind::Var:
    case Expr::Kind::FieldLoad:
    case Expr::Kind::Call:
    case Expr::Kind::IsNull: return true;
    default: return false;
  }
}

void print_args(const std::vector<Expr>& args, std::string& out) {
  out.push_back('(');
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ", ";
    print_expr(args[i], 0, false, out);
  }
  out.push_back(')');
}

void print_expr(const Expr& e, int parent_prec, bool right_side, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::IntLit: out += std::to_string(e.value); return;
    case Expr::Kind::NullLit: out += "null"; return;
    case Expr::Kind::Var: out += e.name; return;
    case Expr::Kind::FieldLoad:
      out += e.name;
      out.push_back('.');
      out += to_string(e.field);
      return;
    case Expr::Kind::IsNull:
      out += "is_null(";
      out += e.name;
      out.push_back(')');
      return;
    case Expr::Kind::Call:
      out += e.name;
      print_args(e.operands, out);
      return;
    case Expr::Kind::Neg: {
      out.push_back('-');
      const Expr& inner = e.operands[0];
      if (is_atomic(inner)) {
        print_expr(inner, 0, false, out);
      } else {
        out.push_back('(');
        print_expr(inner, 0, false, out);
        out.push_back(')');
      }
      return;
    }
    case Expr::Kind::Binary: {
      const int prec = precedence(e.op);
      const bool parens = prec < parent_prec || (prec == parent_prec && right_side);
      if (parens) out.push_back('(');
      print_expr(e.operands[0], prec, false, out);
      out.push_back(' ');
      out += to_string(e.op);
      out.push_back(' ');
      print_expr(e.operands[1], prec, true, out);
      if (parens) out.push_back(')');
      return;
    }
  }
}

void print_body(const std::vector<Stmt>& body, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Assign:
      out += s.name + " = ";
      print_expr(s.expr, 0, false, out);
      out += ";\n";
      return;
    case Stmt::Kind::Alloc: out += s.name + " = node();\n"; return;
    case Stmt::Kind::FieldStore:
      out += s.name;
      out.push_back('.');
      out += to_string(s.field);
      out += " = ";
      print_expr(s.expr, 0, false, out);
      out += ";\n";
      return;
    case Stmt::Kind::If:
      out += "if (";
      print_expr(s.expr, 0, false, out);
      out += ") {\n";
      print_body(s.body, depth + 1, out);
      out.append(static_cast<std::size_t>(depth) * 2, ' ');
      if (s.else_body.empty()) {
        out += "}\n";
        return;
      }
      out += "} else {\n";
      print_body(s.else_body, depth + 1, out);
      out.append(static_cast<std::size_t>(depth) * 2, ' ');
      out += "}\n";
      return;
    case Stmt::Kind::While:
      out += "while (";
      print_expr(s.expr, 0, false, out);
      out += ") {\n";
      print_body(s.body, depth + 1, out);
      out.append(static_cast<std::size_t>(depth) * 2, ' ');
      out += "}\n";
      return;
    case Stmt::Kind::CallStmt:
      out += s.name;
      print_args(s.args, out);
      out += ";\n";
      return;
    case Stmt::Kind::Return:
      out += "return ";
      print_expr(s.expr, 0, false, out);
      out += ";\n";
      return;
    case Stmt::Kind::Print:
      out += "print(";
      print_expr(s.expr, 0, false, out);
      out += ");\n";
      return;
    case Stmt::Kind::Snapshot: out += "snapshot();\n"; return;
  }
}

void print_body(const std::vector<Stmt>& body, int depth, std::string& out) {
  for (const Stmt& s : body) print_stmt(s, depth, out);
}

void print_function(const Function& f, std::string& out) {
  out += "fn " + f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i > 0) out += ", ";
    out += f.params[i];
  }
  out += ") {\n";
  print_body(f.body, 1, out);
  out += "}\n";
}

}  // namespace

Program parse_unchecked(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.program();
}

Program parse(std::string_view text) {
  Program p = parse_unchecked(text);
  validate(p);
  return p;
}

std::string serialize(const Expr& expr) {
  std::string out;
  print_expr(expr, 0, false, out);
  return out;
}

std::string serialize(const Function& function) {
  std::string out;
  print_function(function, out);
  return out;
}

std::string serialize(const Program& program) {
  std::string out;
  for (const std::string& g : program.globals) out += "global " + g + ";\n";
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (i > 0 || !program.globals.empty()) out.push_back('\n');
    print_function(program.functions[i], out);
  }
  return out;
}

std::size_t code_size(const Program& program) { return serialize(program).size(); }

}  // namespace graphmark::lang
