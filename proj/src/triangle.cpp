#include "picres/triangle.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "picres/errors.hpp"

namespace picres {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int source_rank(Source s) { return static_cast<int>(s); }
}  // namespace

char source_char(Source s) {
  switch (s) {
    case Source::P: return 'P';
    case Source::I: return 'I';
    case Source::PI: return 'D';
  }
  return '?';
}

bool Cell::operator<(const Cell& o) const {
  if (accident != o.accident) return accident < o.accident;
  if (development != o.development) return development < o.development;
  return source_rank(source) < source_rank(o.source);
}

std::string to_string(const Cell& c) {
  std::ostringstream os;
  os << "(" << c.accident << "," << c.development << "," << source_char(c.source) << ")";
  return os.str();
}

ClaimsTriangle::ClaimsTriangle(int J, MatrixXd payments, MatrixXd incurred)
    : J_(J), payments_(std::move(payments)), incurred_(std::move(incurred)) {}

std::vector<RawCell> ClaimsTriangle::cells() const {
  std::vector<RawCell> out;
  for (int i = 0; i <= J_; ++i)
    for (int j = 0; j <= J_ - i; ++j) out.push_back({i, j, Source::P, payments_(i, j)});
  for (int i = 0; i <= J_; ++i)
    for (int j = 0; j <= J_ - i; ++j) out.push_back({i, j, Source::I, incurred_(i, j)});
  return out;
}

ClaimsTriangle validate_triangle(const std::vector<RawCell>& raw) {
  if (raw.empty()) throw Error(ErrorKind::MissingCell, "no cells supplied");
  int maxP = -1, maxI = -1, maxAcc = -1;
  std::map<Cell, double> values;
  std::vector<std::string> bad_values, bad_shape;
  for (const auto& c : raw) {
    Cell key{c.accident, c.development, c.source};
    if (c.source == Source::PI || c.accident < 0 || c.development < 0) {
      bad_shape.push_back(to_string(key));
      continue;
    }
    if (!(c.value > 0.0) || !std::isfinite(c.value)) bad_values.push_back(to_string(key));
    if (values.count(key)) bad_shape.push_back("duplicate " + to_string(key));
    values[key] = c.value;
    int& m = c.source == Source::P ? maxP : maxI;
    m = std::max(m, c.development);
    maxAcc = std::max(maxAcc, c.accident);
  }
  if (!bad_shape.empty()) {
    std::string msg = "invalid cells:";
    for (const auto& s : bad_shape) msg += " " + s;
    throw Error(ErrorKind::ShapeMismatch, msg);
  }
  if (!bad_values.empty()) {
    std::string msg = "non-positive values at";
    for (const auto& s : bad_values) msg += " " + s;
    throw Error(ErrorKind::NonPositiveValue, msg);
  }
  if (maxP != maxI) {
    throw Error(ErrorKind::ShapeMismatch, "payment J=" + std::to_string(maxP) +
                                              " differs from incurred J=" + std::to_string(maxI));
  }
  const int J = maxP;
  if (maxAcc != J) {
    throw Error(ErrorKind::ShapeMismatch,
                "triangle must be square: " + std::to_string(maxAcc + 1) + " accident years vs " +
                    std::to_string(J + 1) + " development years");
  }
  std::vector<std::string> missing, outside;
  for (const auto& [key, v] : values)
    if (key.development > J - key.accident) outside.push_back(to_string(key));
  if (!outside.empty()) {
    std::string msg = "cells outside the upper-left triangle:";
    for (const auto& s : outside) msg += " " + s;
    throw Error(ErrorKind::ShapeMismatch, msg);
  }
  MatrixXd P = MatrixXd::Constant(J + 1, J + 1, kNaN);
  MatrixXd I = MatrixXd::Constant(J + 1, J + 1, kNaN);
  for (Source s : {Source::P, Source::I}) {
    for (int i = 0; i <= J; ++i) {
      for (int j = 0; j <= J - i; ++j) {
        auto it = values.find(Cell{i, j, s});
        if (it == values.end()) {
          missing.push_back(to_string(Cell{i, j, s}));
          continue;
        }
        (s == Source::P ? P : I)(i, j) = it->second;
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing cells:";
    for (const auto& s : missing) msg += " " + s;
    throw Error(ErrorKind::MissingCell, msg);
  }
  if (P(0, J) != I(0, J)) {
    std::ostringstream os;
    os.precision(17);
    os << "I(0," << J << ")=" << I(0, J) << " must equal P(0," << J << ")=" << P(0, J);
    throw Error(ErrorKind::TerminalMismatch, os.str());
  }
  return ClaimsTriangle(J, std::move(P), std::move(I));
}

ClaimsTriangle make_triangle(const MatrixXd& payments, const MatrixXd& incurred) {
  if (payments.rows() != payments.cols() || incurred.rows() != payments.rows() ||
      incurred.cols() != payments.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "payments and incurred must be equal square arrays");
  }
  const int J = static_cast<int>(payments.rows()) - 1;
  std::vector<RawCell> raw;
  for (int i = 0; i <= J; ++i)
    for (int j = 0; j <= J - i; ++j) {
      raw.push_back({i, j, Source::P, payments(i, j)});
      raw.push_back({i, j, Source::I, incurred(i, j)});
    }
  return validate_triangle(raw);
}

LogDevelopmentRatios log_ratios(const ClaimsTriangle& tri) {
  const int J = tri.J();
  LogDevelopmentRatios r;
  r.J = J;
  r.xi = MatrixXd::Constant(J + 1, J + 1, kNaN);
  r.zeta = MatrixXd::Constant(J + 1, std::max(J, 0), kNaN);
  for (int i = 0; i <= J; ++i) {
    for (int j = 0; j <= J - i; ++j) {
      r.xi(i, j) = j == 0 ? std::log(tri.P(i, 0)) : std::log(tri.P(i, j)) - std::log(tri.P(i, j - 1));
    }
    for (int j = 0; j <= J - i - 1; ++j) r.zeta(i, j) = std::log(tri.I(i, j)) - std::log(tri.I(i, j + 1));
  }
  return r;
}

MatrixXd cumulate_payments(const LogDevelopmentRatios& r) {
  const int J = r.J;
  MatrixXd out = MatrixXd::Constant(J + 1, J + 1, kNaN);
  for (int i = 0; i <= J; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= J - i; ++j) {
      acc += r.xi(i, j);
      out(i, j) = acc;
    }
  }
  return out;
}

MatrixXd cumulate_incurred(const LogDevelopmentRatios& r, const VectorXd& log_diag_incurred) {
  const int J = r.J;
  MatrixXd out = MatrixXd::Constant(J + 1, J + 1, kNaN);
  for (int i = 0; i <= J; ++i) {
    double acc = log_diag_incurred(i);
    out(i, J - i) = acc;
    for (int j = J - i - 1; j >= 0; --j) {
      acc += r.zeta(i, j);
      out(i, j) = acc;
    }
  }
  return out;
}

PermutationPlan make_plan(const std::vector<Cell>& from, const std::vector<Cell>& to) {
  if (from.size() != to.size())
    throw Error(ErrorKind::LengthMismatch, "plan orderings have different lengths");
  std::map<Cell, std::size_t> pos;
  for (std::size_t k = 0; k < from.size(); ++k) {
    if (!pos.emplace(from[k], k).second)
      throw Error(ErrorKind::LengthMismatch, "duplicate cell " + to_string(from[k]));
  }
  PermutationPlan plan;
  plan.from_cells = from;
  plan.cells = to;
  std::set<Cell> seen;
  for (const auto& c : to) {
    auto it = pos.find(c);
    if (it == pos.end() || !seen.insert(c).second)
      throw Error(ErrorKind::LengthMismatch, "cell " + to_string(c) + " not addressable once");
    plan.indices.push_back(it->second);
  }
  return plan;
}

PermutationPlan identity_plan(const std::vector<Cell>& cells) { return make_plan(cells, cells); }

PermutationPlan inverse_plan(const PermutationPlan& plan) {
  PermutationPlan inv;
  inv.from_cells = plan.cells;
  inv.cells = plan.from_cells;
  inv.indices.assign(plan.indices.size(), 0);
  for (std::size_t k = 0; k < plan.indices.size(); ++k) inv.indices[plan.indices[k]] = k;
  return inv;
}

PermutationPlan compose(const PermutationPlan& first, const PermutationPlan& second) {
  if (first.total_len() != second.total_len())
    throw Error(ErrorKind::LengthMismatch, "cannot compose plans of different length");
  PermutationPlan out;
  out.from_cells = first.from_cells;
  out.cells = second.cells;
  out.indices.resize(second.indices.size());
  for (std::size_t k = 0; k < second.indices.size(); ++k) out.indices[k] = first.indices[second.indices[k]];
  return out;
}

VectorXd apply_permutation(const VectorXd& v, const PermutationPlan& plan) {
  if (static_cast<std::size_t>(v.size()) != plan.total_len())
    throw Error(ErrorKind::LengthMismatch, "vector length " + std::to_string(v.size()) +
                                               " vs plan length " + std::to_string(plan.total_len()));
  VectorXd out(v.size());
  for (std::size_t k = 0; k < plan.indices.size(); ++k) out(k) = v(plan.indices[k]);
  return out;
}

MatrixXd apply_permutation(const MatrixXd& S, const PermutationPlan& plan) {
  if (static_cast<std::size_t>(S.rows()) != plan.total_len() || S.rows() != S.cols())
    throw Error(ErrorKind::LengthMismatch, "matrix shape does not match plan length");
  const auto n = static_cast<Eigen::Index>(plan.total_len());
  MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = S(plan.indices[a], plan.indices[b]);
  return out;
}

std::vector<Cell> ratio_cells_canonical(int J, int accident) {
  std::vector<Cell> out;
  for (int j = 0; j <= J; ++j) out.push_back({accident, j, Source::P});
  for (int j = 0; j < J; ++j) out.push_back({accident, j, Source::I});
  return out;
}

std::vector<Cell> ratio_cells_interleaved(int J, int accident) {
  std::vector<Cell> out{{accident, 0, Source::P}};
  for (int j = 1; j <= J; ++j) {
    out.push_back({accident, j, Source::P});
    out.push_back({accident, j - 1, Source::I});
  }
  return out;
}

PermutationPlan interleaved_plan(int J, int accident) {
  return make_plan(ratio_cells_canonical(J, accident), ratio_cells_interleaved(J, accident));
}

std::vector<Cell> observed_cells_accident_major(int J) {
  std::vector<Cell> out;
  for (int i = 0; i <= J; ++i) {
    for (int j = 0; j <= J - i; ++j) out.push_back({i, j, Source::P});
    for (int j = 0; j <= J - i; ++j) out.push_back({i, j, Source::I});
  }
  return out;
}

std::vector<Cell> observed_cells_blocked(int J) {
  std::vector<Cell> out;
  for (Source s : {Source::P, Source::I})
    for (int i = 0; i <= J; ++i)
      for (int j = 0; j <= J - i; ++j) out.push_back({i, j, s});
  return out;
}

PermutationPlan blocked_plan(int J) {
  return make_plan(observed_cells_accident_major(J), observed_cells_blocked(J));
}

std::vector<Cell> unobserved_first_cells(int J, int accident) {
  std::vector<Cell> out;
  for (int j = J - accident + 1; j <= J; ++j) out.push_back({accident, j, Source::P});
  for (int j = J - accident + 1; j <= J - 1; ++j) out.push_back({accident, j, Source::I});
  for (int j = 0; j <= J - accident; ++j) out.push_back({accident, j, Source::P});
  for (int j = 0; j <= std::min(J - accident, J - 1); ++j) out.push_back({accident, j, Source::I});
  return out;
}

AugmentationPartition partition_observed_aux(int J) {
  AugmentationPartition part;
  part.J = J;
  for (int i = 0; i <= J; ++i) {
    for (int j = 0; j <= J - i; ++j) part.observed_idx.push_back({i, j, Source::P});
    for (int j = J - i + 1; j <= J; ++j) part.aux_payment_idx.push_back({i, j, Source::P});
    for (int j = 0; j <= J - i; ++j) part.observed_idx.push_back({i, j, Source::I});
    for (int j = J - i + 1; j <= J - 1; ++j) part.aux_incurred_idx.push_back({i, j, Source::I});
  }
  return part;
}

}  // namespace picres
