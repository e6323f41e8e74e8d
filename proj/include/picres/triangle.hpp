#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace picres {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// PI labels the diagonal ratio log(I(i,J-i)/P(i,J-i)) in observation vectors.
enum class Source { P, I, PI };

char source_char(Source s);

struct Cell {
  int accident = 0;
  int development = 0;
  Source source = Source::P;
  bool operator==(const Cell& o) const {
    return accident == o.accident && development == o.development && source == o.source;
  }
  bool operator<(const Cell& o) const;
};

std::string to_string(const Cell& c);

struct RawCell {
  int accident;
  int development;
  Source source;
  double value;
};

// Dense (J+1)x(J+1) storage; cells with j > J-i are NaN.
class ClaimsTriangle {
 public:
  ClaimsTriangle() = default;
  ClaimsTriangle(int J, MatrixXd payments, MatrixXd incurred);

  int J() const { return J_; }
  bool observed(int i, int j) const { return i >= 0 && j >= 0 && i <= J_ && j <= J_ - i; }
  double P(int i, int j) const { return payments_(i, j); }
  double I(int i, int j) const { return incurred_(i, j); }
  const MatrixXd& payments() const { return payments_; }
  const MatrixXd& incurred() const { return incurred_; }
  std::vector<RawCell> cells() const;

 private:
  int J_ = 0;
  MatrixXd payments_;
  MatrixXd incurred_;
};

ClaimsTriangle validate_triangle(const std::vector<RawCell>& raw);
// Builds from the upper-left parts of two square matrices.
ClaimsTriangle make_triangle(const MatrixXd& payments, const MatrixXd& incurred);

struct LogDevelopmentRatios {
  int J = 0;
  MatrixXd xi;    // (J+1)x(J+1), observed for j <= J-i
  MatrixXd zeta;  // (J+1)xJ, log(I(i,j)/I(i,j+1)) for j <= J-i-1
};

LogDevelopmentRatios log_ratios(const ClaimsTriangle& tri);
MatrixXd cumulate_payments(const LogDevelopmentRatios& r);   // log P
// Recovers log I on observed cells from zeta and the diagonal log I(i,J-i).
MatrixXd cumulate_incurred(const LogDevelopmentRatios& r, const VectorXd& log_diag_incurred);

struct PermutationPlan {
  std::vector<Cell> from_cells;      // labels of the input ordering
  std::vector<Cell> cells;           // label of output position k
  std::vector<std::size_t> indices;  // input position feeding output k
  std::size_t total_len() const { return indices.size(); }
};

PermutationPlan make_plan(const std::vector<Cell>& from, const std::vector<Cell>& to);
PermutationPlan inverse_plan(const PermutationPlan& plan);
PermutationPlan identity_plan(const std::vector<Cell>& cells);
VectorXd apply_permutation(const VectorXd& v, const PermutationPlan& plan);
MatrixXd apply_permutation(const MatrixXd& S, const PermutationPlan& plan);
// Applying `first` then `second`.
PermutationPlan compose(const PermutationPlan& first, const PermutationPlan& second);

// Ratio cells of one accident year in canonical order: xi_0..xi_J then zeta_0..zeta_{J-1}.
std::vector<Cell> ratio_cells_canonical(int J, int accident);
// xi_0, then (xi_j, zeta_{j-1}) for j = 1..J.
std::vector<Cell> ratio_cells_interleaved(int J, int accident);
PermutationPlan interleaved_plan(int J, int accident);

// Observed cells of the whole triangle, accident-major (P cells then I cells per year).
std::vector<Cell> observed_cells_accident_major(int J);
// All P cells (accident-major), then all I cells.
std::vector<Cell> observed_cells_blocked(int J);
PermutationPlan blocked_plan(int J);
// Per accident year: unobserved cells first, then observed.
std::vector<Cell> unobserved_first_cells(int J, int accident);

struct AugmentationPartition {
  int J = 0;
  std::vector<Cell> observed_idx;
  std::vector<Cell> aux_payment_idx;
  std::vector<Cell> aux_incurred_idx;
};

AugmentationPartition partition_observed_aux(int J);

}  // namespace picres
