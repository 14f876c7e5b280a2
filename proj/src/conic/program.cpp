#include "vlcsee/conic/program.hpp"

#include <algorithm>
#include <stdexcept>

namespace vlcsee::conic {

AffineExpr AffineExpr::variable(int index, double coeff) {
  AffineExpr e;
  e.terms_.push_back({index, coeff});
  return e;
}

AffineExpr& AffineExpr::add_term(int var, double coeff) {
  terms_.push_back({var, coeff});
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  normalize();
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  for (const Term& t : other.terms_) terms_.push_back({t.var, -t.coeff});
  constant_ -= other.constant_;
  normalize();
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  for (Term& t : terms_) t.coeff *= s;
  constant_ *= s;
  normalize();
  return *this;
}

double AffineExpr::evaluate(const Vector& x) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coeff * x(t.var);
  return v;
}

void AffineExpr::normalize() {
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

int SymmetricVar::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  // row-major upper triangle: rows before i contribute dim + (dim-1) + ... entries
  return offset + i * dim - i * (i - 1) / 2 + (j - i);
}

AffineExpr SymmetricVar::inner(const Matrix& c) const {
  AffineExpr e;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double w = (i == j) ? c(i, i) : c(i, j) + c(j, i);
      if (w != 0.0) e.add_term(index(i, j), w);
    }
  }
  e.normalize();
  return e;
}

AffineExpr SymmetricVar::trace() const { return inner(Matrix::Identity(dim, dim)); }

ScalarVar ConicProgram::add_scalar(const std::string& name) {
  add_block({name, VarShape::scalar, 1, num_vars_});
  return ScalarVar{num_vars_ - 1};
}

VectorVar ConicProgram::add_vector(const std::string& name, int size) {
  const int offset = num_vars_;
  add_block({name, VarShape::vector, size, offset});
  return VectorVar{offset, size};
}

SymmetricVar ConicProgram::add_symmetric(const std::string& name, int dim) {
  const int offset = num_vars_;
  add_block({name, VarShape::symmetric, dim, offset});
  return SymmetricVar{offset, dim};
}

void ConicProgram::add_block(VariableBlock block) {
  block.offset = num_vars_;
  num_vars_ += block.size();
  blocks_.push_back(std::move(block));
}

void ConicProgram::maximize(AffineExpr objective) {
  objective.normalize();
  objective_ = std::move(objective);
}

void ConicProgram::add_constraint(Constraint c) {
  for (auto& e : c.exprs) e.normalize();
  constraints_.push_back(std::move(c));
}

void ConicProgram::add_equality(AffineExpr e, std::string label) {
  add_constraint({ConeKind::equality, std::move(label), 1, {std::move(e)}});
}

void ConicProgram::add_nonnegative(AffineExpr e, std::string label) {
  add_constraint({ConeKind::nonnegative, std::move(label), 1, {std::move(e)}});
}

void ConicProgram::add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs,
                                  std::string label) {
  add_nonnegative(rhs - lhs, std::move(label));
}

void ConicProgram::add_exponential(AffineExpr x, AffineExpr y, AffineExpr z, std::string label) {
  add_constraint(
      {ConeKind::exponential, std::move(label), 3, {std::move(x), std::move(y), std::move(z)}});
}

void ConicProgram::add_psd(int dim, std::vector<AffineExpr> upper, std::string label) {
  if (static_cast<int>(upper.size()) != dim * (dim + 1) / 2) {
    throw std::invalid_argument("psd constraint needs dim(dim+1)/2 entries");
  }
  add_constraint({ConeKind::psd, std::move(label), dim, std::move(upper)});
}

void ConicProgram::add_psd(const SymmetricVar& var, std::string label) {
  std::vector<AffineExpr> upper;
  for (int i = 0; i < var.dim; ++i) {
    for (int j = i; j < var.dim; ++j) upper.push_back(var(i, j));
  }
  add_psd(var.dim, std::move(upper), std::move(label));
}

void ConicProgram::add_quadratic(AffineExpr t, std::vector<AffineExpr> u, std::string label) {
  std::vector<AffineExpr> exprs;
  exprs.reserve(u.size() + 1);
  exprs.push_back(std::move(t));
  for (auto& e : u) exprs.push_back(std::move(e));
  const int dim = static_cast<int>(exprs.size());
  add_constraint({ConeKind::quadratic, std::move(label), dim, std::move(exprs)});
}

void ConicProgram::validate() const {
  auto check = [&](const AffineExpr& e, const std::string& where) {
    for (const Term& t : e.terms()) {
      if (t.var < 0 || t.var >= num_vars_) {
        throw std::invalid_argument("undeclared variable #" + std::to_string(t.var) + " in " +
                                    where);
      }
    }
  };
  check(objective_, "objective");
  for (const Constraint& c : constraints_) {
    for (const AffineExpr& e : c.exprs) check(e, c.label.empty() ? "constraint" : c.label);
  }
}

void add_log_epigraph(ConicProgram& program, const AffineExpr& r, const AffineExpr& p,
                      double coeff, std::string label) {
  program.add_exponential(r * (kLn2 / coeff), AffineExpr(1.0), p + AffineExpr(1.0),
                          std::move(label));
}

}  // namespace vlcsee::conic
