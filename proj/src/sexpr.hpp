#pragma once

#include <string>
#include <vector>

namespace aleph::sexpr {

struct Node {
  bool is_list = false;
  std::string atom;
  std::vector<Node> items;
  int line = 0;
  int column = 0;

  static Node make_atom(std::string s) {
    Node n;
    n.atom = std::move(s);
    return n;
  }
  static Node make_list(std::vector<Node> items) {
    Node n;
    n.is_list = true;
    n.items = std::move(items);
    return n;
  }
};

inline void flat(const Node& n, std::string& out) {
  if (!n.is_list) {
    out += n.atom;
    return;
  }
  out += '(';
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    if (i) out += ' ';
    flat(n.items[i], out);
  }
  out += ')';
}

inline std::size_t flat_width(const Node& n, std::size_t limit) {
  if (!n.is_list) return n.atom.size();
  std::size_t w = 1 + (n.items.empty() ? 0 : n.items.size() - 1) + 1;
  for (const auto& i : n.items) {
    if (w > limit) return w;
    w += flat_width(i, limit);
  }
  return w;
}

// Lists that do not fit go one item per line after the keyword, indented
// two columns past the opening parenthesis.
inline void pretty(const Node& n, std::size_t indent, std::size_t width, std::string& out) {
  if (!n.is_list || indent + flat_width(n, width) <= width || n.items.size() < 2) {
    flat(n, out);
    return;
  }
  out += '(';
  std::size_t head_end = 1;
  // Keep short leading atoms on the first line: "(let x" or "(bop add".
  while (head_end < n.items.size() && !n.items[head_end].is_list && head_end < 3 &&
         !n.items[0].is_list) {
    ++head_end;
  }
  if (head_end == n.items.size()) head_end = 1;
  for (std::size_t i = 0; i < head_end; ++i) {
    if (i) out += ' ';
    pretty(n.items[i], indent + 1, width, out);
  }
  for (std::size_t i = head_end; i < n.items.size(); ++i) {
    out += '\n';
    out.append(indent + 2, ' ');
    pretty(n.items[i], indent + 2, width, out);
  }
  out += ')';
}

}  // namespace aleph::sexpr
