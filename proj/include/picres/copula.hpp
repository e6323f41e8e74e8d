#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "picres/rng.hpp"

namespace picres {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Family { Clayton, Gumbel, Frank };

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct ArchimedeanParam {
  Family family = Family::Clayton;
  double rho = 0.0;
};

constexpr int kDefaultMaxCopulaDim = 32;

// Clayton rho=0 and Frank rho=0 are the independence copula.
bool is_independence(const ArchimedeanParam& p);
// Throws ParamOutOfDomain. Frank with rho < 0 is a copula only for d = 2.
void check_domain(const ArchimedeanParam& p, int d);

double copula_cdf(const VectorXd& u, const ArchimedeanParam& p);
double copula_logdensity(const VectorXd& u, const ArchimedeanParam& p, int max_dim = kDefaultMaxCopulaDim);

class MixtureCopula {
 public:
  MixtureCopula() = default;
  // Weights are normalized here; they must be nonnegative with positive sum.
  explicit MixtureCopula(std::vector<std::pair<double, ArchimedeanParam>> components);

  const std::vector<std::pair<double, ArchimedeanParam>>& components() const { return components_; }
  std::vector<std::pair<double, ArchimedeanParam>>& components() { return components_; }
  std::size_t size() const { return components_.size(); }
  bool is_independence() const;

 private:
  std::vector<std::pair<double, ArchimedeanParam>> components_;
};

MixtureCopula independence_copula();

double mixture_cdf(const VectorXd& u, const MixtureCopula& mix);
double mixture_logdensity(const VectorXd& u, const MixtureCopula& mix, int max_dim = kDefaultMaxCopulaDim);

struct TailDependence {
  double lower;
  double upper;
};

TailDependence tail_dependence(const ArchimedeanParam& p);

// n x d matrix of draws in (0,1).
MatrixXd copula_sample(const ArchimedeanParam& p, int d, int n, Rng& rng);
MatrixXd copula_sample(const MixtureCopula& mix, int d, int n, Rng& rng);
VectorXd copula_sample_one(const ArchimedeanParam& p, int d, Rng& rng);
VectorXd copula_sample_one(const MixtureCopula& mix, int d, Rng& rng);

// Kendall's tau from the generator: 1 + 4 * int_0^1 phi(t)/phi'(t) dt.
double kendall_tau_generator(const ArchimedeanParam& p, int nodes = 20000);

}  // namespace picres
