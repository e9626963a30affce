#include <cctype>

#include "aleph/frontend.hpp"
#include "sexpr.hpp"

namespace aleph {

namespace {

using sexpr::Node;

struct SyntaxError {
  std::string message;
  int line;
  int column;
};

[[noreturn]] void fail(const Node& at, std::string message) {
  throw SyntaxError{std::move(message), at.line, at.column};
}

// ---------------------------------------------------------------------------
// Text to s-expressions
// ---------------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Node read_all() {
    skip();
    if (at_end()) throw SyntaxError{"empty input", line_, column_};
    Node n = read();
    skip();
    if (!at_end()) throw SyntaxError{"unexpected text after the term", line_, column_};
    return n;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Node read() {
    Node n;
    n.line = line_;
    n.column = column_;
    char c = peek();
    if (c == ')') throw SyntaxError{"unbalanced ')'", line_, column_};
    if (c == '(') {
      advance();
      n.is_list = true;
      for (;;) {
        skip();
        if (at_end()) throw SyntaxError{"unbalanced '(': missing ')'", n.line, n.column};
        if (peek() == ')') {
          advance();
          return n;
        }
        n.items.push_back(read());
      }
    }
    if (c == '{') {
      while (!at_end() && peek() != '}') {
        n.atom += peek();
        advance();
      }
      if (at_end()) throw SyntaxError{"unterminated effect set: missing '}'", n.line, n.column};
      n.atom += '}';
      advance();
      return n;
    }
    while (!at_end()) {
      c = peek();
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';' || c == '{') break;
      n.atom += c;
      advance();
    }
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// ---------------------------------------------------------------------------
// S-expressions to terms
// ---------------------------------------------------------------------------

bool is_integer_token(const std::string& s) {
  std::size_t i = (s.size() > 1 && s[0] == '-') ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

bool is_identifier_token(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') return false;
  }
  return true;
}

class Builder {
 public:
  std::unordered_map<const void*, SourcePos> positions;

  TermPtr term(const Node& n) {
    TermPtr t = build(n);
    positions[t.get()] = SourcePos{n.line, n.column};
    return t;
  }

 private:
  template <class T>
  TermPtr make(T node) {
    return make_term(std::move(node));
  }

  const std::string& word(const Node& n, const char* what) {
    if (n.is_list) fail(n, std::string("expected ") + what + ", found a list");
    return n.atom;
  }

  VarName var(const Node& n) {
    const std::string& s = word(n, "a variable");
    if (!is_identifier_token(s)) fail(n, "expected a variable, found '" + s + "'");
    if (is_keyword(s)) fail(n, "keyword '" + s + "' cannot be used as a variable");
    return s;
  }

  Integer integer(const Node& n) {
    const std::string& s = word(n, "an integer");
    if (!is_integer_token(s)) fail(n, "expected an integer, found '" + s + "'");
    return Integer(s);
  }

  Effect effect(const Node& n) {
    const std::string& s = word(n, "an effect");
    auto e = parse_effect(s);
    if (!e) fail(n, "expected an effect (T, A or {P,N,R,W,IO}), found '" + s + "'");
    return *e;
  }

  void arity(const Node& n, std::size_t args, const char* shape) {
    if (n.items.size() != args + 1) {
      fail(n, "wrong number of arguments to " + n.items[0].atom + ": expected " + shape);
    }
  }

  Fun fun(const Node& n) {
    const std::string& k = n.items[0].atom;
    if (k == "fun") {
      arity(n, 6, "(fun x t DK FX FX t)");
      auto dk = parse_domain_kind(word(n.items[3], "a domain kind"));
      if (!dk) fail(n.items[3], "expected a domain kind (contra, inv, ge, le), found '" + n.items[3].atom + "'");
      return Lambda{var(n.items[1]), term(n.items[2]), *dk, effect(n.items[4]), effect(n.items[5]),
                    term(n.items[6])};
    }
    arity(n, 8, "(funall x t t x t FX FX t)");
    return AllQuant{var(n.items[1]), term(n.items[2]),   term(n.items[3]),   var(n.items[4]),
                    term(n.items[5]), effect(n.items[6]), effect(n.items[7]), term(n.items[8])};
  }

  SourceValue value(const Node& n) {
    if (!n.is_list || n.items.empty() || n.items[0].is_list) {
      fail(n, "expected a letrec value: (tuple (i x)...), a function or (new t x)");
    }
    const std::string& k = n.items[0].atom;
    if (k == "tuple") {
      TupleValue tv;
      for (std::size_t i = 1; i < n.items.size(); ++i) {
        const Node& e = n.items[i];
        if (!e.is_list || e.items.size() != 2) fail(e, "expected a tuple entry (i x)");
        tv.entries.emplace_back(integer(e.items[0]), var(e.items[1]));
      }
      return tv;
    }
    if (k == "fun" || k == "funall") return FunValue{fun(n)};
    if (k == "new") {
      arity(n, 2, "(new t x)");
      return PtrValue{term(n.items[1]), var(n.items[2])};
    }
    fail(n, "expected a letrec value: (tuple (i x)...), a function or (new t x)");
  }

  TermPtr atom_term(const Node& n) {
    const std::string& s = n.atom;
    if (s == "falses") return mk::falses();
    if (s == "anys") return mk::anys();
    if (s == "ints") return mk::ints();
    if (s == "tabs") return mk::tabs();
    if (s == "funs") return mk::funs();
    if (s == "ptrs") return mk::ptrs();
    if (s == "in") return mk::input();
    if (is_integer_token(s)) return mk::integer(Integer(s));
    if (is_keyword(s)) fail(n, "'" + s + "' must be written as (" + s + " ...)");
    if (!is_identifier_token(s)) fail(n, "unexpected token '" + s + "'");
    return mk::var(s);
  }

  TermPtr build(const Node& n) {
    if (!n.is_list) return atom_term(n);
    if (n.items.empty()) fail(n, "empty list");
    if (n.items[0].is_list) fail(n, "a form must start with a keyword");
    const std::string& k = n.items[0].atom;
    const auto& a = n.items;

    if (k == "uop") {
      arity(n, 2, "(uop OP t)");
      auto op = parse_unary_op(word(a[1], "a unary operator"));
      if (!op) fail(a[1], "unknown unary operator '" + a[1].atom + "'");
      return mk::uop(*op, term(a[2]));
    }
    if (k == "bop") {
      arity(n, 3, "(bop OP t t)");
      auto op = parse_binary_op(word(a[1], "a binary operator"));
      if (!op) fail(a[1], "unknown binary operator '" + a[1].atom + "'");
      return mk::bop(*op, term(a[2]), term(a[3]));
    }
    if (k == "cop") {
      arity(n, 3, "(cop OP t t)");
      auto op = parse_compare_op(word(a[1], "a comparison"));
      if (!op) fail(a[1], "unknown comparison '" + a[1].atom + "'");
      return mk::cop(*op, term(a[2]), term(a[3]));
    }
    if (k == "table") {
      std::vector<node::TableEntry> entries;
      for (std::size_t i = 1; i < a.size(); ++i) {
        const Node& e = a[i];
        if (!e.is_list || e.items.size() != 3) fail(e, "expected a table entry (x i t)");
        entries.push_back(node::TableEntry{var(e.items[0]), integer(e.items[1]), term(e.items[2])});
      }
      return mk::table(std::move(entries));
    }
    if (k == "arr") {
      arity(n, 3, "(arr t x t)");
      return mk::arr(term(a[1]), var(a[2]), term(a[3]));
    }
    if (k == "fun" || k == "funall") return mk::fun(fun(n));
    if (k == "len") {
      arity(n, 1, "(len t)");
      return mk::len(term(a[1]));
    }
    if (k == "appe") {
      arity(n, 2, "(appe t t)");
      return mk::appe(term(a[1]), term(a[2]));
    }
    if (k == "appf") {
      arity(n, 2, "(appf t t)");
      return mk::appf(term(a[1]), term(a[2]));
    }
    if (k == "from") {
      arity(n, 1, "(from t)");
      return mk::from(term(a[1]));
    }
    if (k == "new") {
      arity(n, 2, "(new t t)");
      return mk::ptr_new(term(a[1]), term(a[2]));
    }
    if (k == "read") {
      arity(n, 1, "(read t)");
      return mk::ptr_read(term(a[1]));
    }
    if (k == "write") {
      arity(n, 2, "(write t t)");
      return mk::ptr_write(term(a[1]), term(a[2]));
    }
    if (k == "ptrto") {
      arity(n, 1, "(ptrto t)");
      return mk::ptr_to(term(a[1]));
    }
    if (k == "out") {
      arity(n, 1, "(out t)");
      return mk::output(term(a[1]));
    }
    if (k == "unify") {
      arity(n, 2, "(unify t t)");
      return mk::unify(term(a[1]), term(a[2]));
    }
    if (k == "join") {
      arity(n, 2, "(join t t)");
      return mk::join(term(a[1]), term(a[2]));
    }
    if (k == "let") {
      arity(n, 3, "(let x t t)");
      return mk::let(var(a[1]), term(a[2]), term(a[3]));
    }
    if (k == "letrec") {
      arity(n, 2, "(letrec ((x v)...) t)");
      if (!a[1].is_list) fail(a[1], "expected a list of letrec bindings");
      std::vector<std::pair<VarName, SourceValue>> bindings;
      std::vector<const Node*> value_nodes;
      for (const Node& b : a[1].items) {
        if (!b.is_list || b.items.size() != 2) fail(b, "expected a letrec binding (x v)");
        bindings.emplace_back(var(b.items[0]), value(b.items[1]));
        value_nodes.push_back(&b.items[1]);
      }
      TermPtr t = mk::letrec(std::move(bindings), term(a[2]));
      const auto& built = t->as<node::Letrec>()->bindings;
      for (std::size_t i = 0; i < built.size(); ++i) {
        positions[&built[i].second] = SourcePos{value_nodes[i]->line, value_nodes[i]->column};
      }
      return t;
    }
    if (k == "if") {
      arity(n, 4, "(if x t t t)");
      return mk::if_(var(a[1]), term(a[2]), term(a[3]), term(a[4]));
    }
    if (k == "stage") {
      arity(n, 4, "(stage FX D t t)");
      auto d = parse_decidability(word(a[2], "a decidability"));
      if (!d) fail(a[2], "expected a decidability (T, F, D), found '" + a[2].atom + "'");
      return mk::stage(effect(a[1]), *d, term(a[3]), term(a[4]));
    }
    if (k == "fxthen") {
      arity(n, 2, "(fxthen FX t)");
      return mk::fxthen(effect(a[1]), term(a[2]));
    }
    fail(a[0], "unknown keyword '" + k + "'");
  }
};

}  // namespace

ParseResult parse(std::string_view text, CheckMode mode) {
  ParseResult r;
  try {
    Node root = Reader(text).read_all();
    Builder b;
    r.term = b.term(root);
    r.positions = std::move(b.positions);
  } catch (const SyntaxError& e) {
    r.term = nullptr;
    Diagnostic d;
    d.message = e.message;
    d.line = e.line;
    d.column = e.column;
    r.diagnostics.push_back(std::move(d));
    return r;
  }
  for (auto& d : well_formed_source(*r.term, mode)) {
    if (auto it = r.positions.find(d.where); it != r.positions.end()) {
      d.line = it->second.line;
      d.column = it->second.column;
    }
    r.diagnostics.push_back(std::move(d));
  }
  return r;
}

std::optional<std::vector<Integer>> parse_integer_list(std::string_view text) {
  std::vector<Integer> out;
  std::string item;
  auto flush = [&]() {
    if (item.empty()) return true;
    if (!is_integer_token(item)) return false;
    out.emplace_back(item);
    item.clear();
    return true;
  };
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!flush()) return std::nullopt;
    } else {
      item += c;
    }
  }
  if (!flush()) return std::nullopt;
  return out;
}

}  // namespace aleph
