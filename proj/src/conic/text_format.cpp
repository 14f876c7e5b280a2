#include "vlcsee/conic/text_format.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace vlcsee::conic {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string expr_text(const AffineExpr& e) {
  std::string out = number(e.constant());
  for (const Term& t : e.terms()) {
    out += ' ';
    out += number(t.coeff);
    out += "*#";
    out += std::to_string(t.var);
  }
  return out;
}

const char* kind_keyword(ConeKind k) {
  switch (k) {
    case ConeKind::equality: return "eq";
    case ConeKind::nonnegative: return "ge";
    case ConeKind::exponential: return "exp";
    case ConeKind::psd: return "psd";
    case ConeKind::quadratic: return "quad";
  }
  return "?";
}

const char* shape_keyword(VarShape s) {
  switch (s) {
    case VarShape::scalar: return "scalar";
    case VarShape::vector: return "vector";
    case VarShape::symmetric: return "symmetric";
  }
  return "?";
}

double parse_double(const std::string& tok, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ParseError(line, "bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "bad integer '" + tok + "'");
  }
  return v;
}

AffineExpr parse_expr(const std::string& s, int line) {
  std::istringstream in(s);
  std::string tok;
  if (!(in >> tok)) throw ParseError(line, "empty expression");
  AffineExpr e(parse_double(tok, line));
  while (in >> tok) {
    const auto star = tok.find("*#");
    if (star == std::string::npos) throw ParseError(line, "expected coeff*#index, got '" + tok + "'");
    e.add_term(parse_int(tok.substr(star + 2), line), parse_double(tok.substr(0, star), line));
  }
  return e;
}

std::string unescape_label(const std::string& s) { return s == "-" ? std::string() : s; }
std::string escape_label(const std::string& s) {
  if (s.empty()) return "-";
  std::string out = s;
  for (char& c : out) {
    if (c == ' ' || c == ':' || c == ';' || c == '\n' || c == '\t') c = '_';
  }
  return out;
}

}  // namespace

std::string to_text(const ConicProgram& program) {
  std::ostringstream out;
  out << "# conic program: " << program.num_variables() << " variables, "
      << program.constraints().size() << " constraints\n";
  for (const VariableBlock& b : program.variables()) {
    out << "var " << shape_keyword(b.shape) << ' ' << escape_label(b.name) << ' ' << b.dim
        << "  # #" << b.offset << "..#" << (b.offset + b.size() - 1) << '\n';
  }
  out << "maximize : " << expr_text(program.objective()) << '\n';
  for (const Constraint& c : program.constraints()) {
    out << kind_keyword(c.kind) << ' ' << escape_label(c.label) << ' ' << c.dim << " :";
    for (std::size_t i = 0; i < c.exprs.size(); ++i) {
      out << (i == 0 ? " " : " ; ") << expr_text(c.exprs[i]);
    }
    out << '\n';
  }
  return out.str();
}

ConicProgram parse_program(const std::string& text) {
  ConicProgram program;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    // '#' also introduces variable references; only a leading '#' or "  #" starts a comment.
    std::string content = raw;
    if (hash == 0) continue;
    const auto comment = raw.find("  #");
    if (comment != std::string::npos) content = raw.substr(0, comment);
    std::istringstream head(content);
    std::string keyword;
    if (!(head >> keyword)) continue;

    if (keyword == "var") {
      std::string shape, name, dim;
      if (!(head >> shape >> name >> dim)) throw ParseError(line, "malformed var line");
      VariableBlock b;
      b.name = unescape_label(name);
      b.dim = parse_int(dim, line);
      if (shape == "scalar") b.shape = VarShape::scalar;
      else if (shape == "vector") b.shape = VarShape::vector;
      else if (shape == "symmetric") b.shape = VarShape::symmetric;
      else throw ParseError(line, "unknown variable shape '" + shape + "'");
      program.add_block(b);
      continue;
    }

    const auto colon = content.find(" :");
    if (colon == std::string::npos) throw ParseError(line, "missing ':'");
    std::string body = content.substr(colon + 2);

    if (keyword == "maximize") {
      program.maximize(parse_expr(body, line));
      continue;
    }

    std::string label, dim;
    if (!(head >> label >> dim)) throw ParseError(line, "malformed constraint header");
    Constraint c;
    c.label = unescape_label(label);
    c.dim = parse_int(dim, line);
    if (keyword == "eq") c.kind = ConeKind::equality;
    else if (keyword == "ge") c.kind = ConeKind::nonnegative;
    else if (keyword == "exp") c.kind = ConeKind::exponential;
    else if (keyword == "psd") c.kind = ConeKind::psd;
    else if (keyword == "quad") c.kind = ConeKind::quadratic;
    else throw ParseError(line, "unknown keyword '" + keyword + "'");

    std::size_t start = 0;
    while (true) {
      const auto sep = body.find(" ; ", start);
      c.exprs.push_back(parse_expr(body.substr(start, sep - start), line));
      if (sep == std::string::npos) break;
      start = sep + 3;
    }
    program.add_constraint(std::move(c));
  }
  program.validate();
  return program;
}

}  // namespace vlcsee::conic
