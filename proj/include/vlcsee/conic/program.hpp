#pragma once

#include <string>
#include <vector>

#include "vlcsee/types.hpp"

namespace vlcsee::conic {

struct Term {
  int var = 0;
  double coeff = 0.0;
  bool operator==(const Term&) const = default;
};

/// Sparse affine functional  sum_j coeff_j x[var_j] + constant.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by intent

  static AffineExpr variable(int index, double coeff = 1.0);

  AffineExpr& add_term(int var, double coeff);
  AffineExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs) { return lhs += rhs; }
  friend AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs) { return lhs -= rhs; }
  friend AffineExpr operator*(AffineExpr lhs, double s) { return lhs *= s; }
  friend AffineExpr operator*(double s, AffineExpr rhs) { return rhs *= s; }
  friend AffineExpr operator-(AffineExpr e) { return e *= -1.0; }

  double evaluate(const Vector& x) const;

  /// Sorts terms by variable, merges duplicates and drops exact zeros.
  void normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }

  bool operator==(const AffineExpr& other) const = default;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

enum class VarShape { scalar, vector, symmetric };

struct VariableBlock {
  std::string name;
  VarShape shape = VarShape::scalar;
  int dim = 1;     // vector length or matrix order
  int offset = 0;  // first flat index

  int size() const { return shape == VarShape::symmetric ? dim * (dim + 1) / 2 : dim; }
  bool operator==(const VariableBlock&) const = default;
};

struct ScalarVar {
  int index = 0;
  AffineExpr expr(double coeff = 1.0) const { return AffineExpr::variable(index, coeff); }
};

struct VectorVar {
  int offset = 0;
  int size = 0;
  int index(int i) const { return offset + i; }
  AffineExpr operator()(int i, double coeff = 1.0) const {
    return AffineExpr::variable(index(i), coeff);
  }
};

/// Symmetric matrix variable stored as its upper triangle, row-major.
struct SymmetricVar {
  int offset = 0;
  int dim = 0;
  int index(int i, int j) const;
  AffineExpr operator()(int i, int j, double coeff = 1.0) const {
    return AffineExpr::variable(index(i, j), coeff);
  }
  /// <C, X>_F for a symmetric coefficient matrix C.
  AffineExpr inner(const Matrix& c) const;
  AffineExpr trace() const;
};

enum class ConeKind {
  equality,     // e == 0
  nonnegative,  // e >= 0
  exponential,  // (x, y, z): y > 0, y exp(x / y) <= z
  psd,          // upper triangle of an m x m matrix, which must be PSD
  quadratic,    // (t, u_1..u_m): sum u_j^2 <= t
};

struct Constraint {
  ConeKind kind = ConeKind::nonnegative;
  std::string label;
  int dim = 1;  // matrix order for psd, otherwise exprs.size()
  std::vector<AffineExpr> exprs;
  bool operator==(const Constraint&) const = default;
};

/// Linear objective (maximised) over cone memberships of affine expressions.
class ConicProgram {
 public:
  ScalarVar add_scalar(const std::string& name);
  VectorVar add_vector(const std::string& name, int size);
  SymmetricVar add_symmetric(const std::string& name, int dim);

  void maximize(AffineExpr objective);

  void add_equality(AffineExpr e, std::string label = {});
  void add_nonnegative(AffineExpr e, std::string label = {});
  void add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string label = {});
  void add_exponential(AffineExpr x, AffineExpr y, AffineExpr z, std::string label = {});
  /// `upper` holds the m(m+1)/2 upper-triangle entries row by row.
  void add_psd(int dim, std::vector<AffineExpr> upper, std::string label = {});
  void add_psd(const SymmetricVar& var, std::string label = {});
  /// sum_j u_j^2 <= t. Equivalent to the Schur-complement LMI [[t, u^T], [u, I]] >= 0.
  void add_quadratic(AffineExpr t, std::vector<AffineExpr> u, std::string label = {});

  /// Pushes a constraint verbatim; used by the text parser.
  void add_constraint(Constraint c);
  void add_block(VariableBlock block);

  int num_variables() const { return num_vars_; }
  const std::vector<VariableBlock>& variables() const { return blocks_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const AffineExpr& objective() const { return objective_; }

  /// Throws std::invalid_argument if any expression references an undeclared variable.
  void validate() const;

  bool operator==(const ConicProgram& other) const = default;

 private:
  std::vector<VariableBlock> blocks_;
  std::vector<Constraint> constraints_;
  AffineExpr objective_;
  int num_vars_ = 0;
};

/// Appends r <= coeff * log2(1 + p) as (r ln2 / coeff, 1, 1 + p) in the exponential cone.
void add_log_epigraph(ConicProgram& program, const AffineExpr& r, const AffineExpr& p,
                      double coeff = 0.5, std::string label = {});

/// Solver-independent residual of one constraint at x (0 when satisfied).
double constraint_residual(const Constraint& c, const Vector& x);

struct FeasibilityReport {
  double max_residual = 0.0;
  std::string worst_label;
  bool ok(double tol) const { return max_residual <= tol; }
};

FeasibilityReport check_feasibility(const ConicProgram& program, const Vector& x);

}  // namespace vlcsee::conic
