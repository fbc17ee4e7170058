#include "fica/preprocess.hpp"

#include "fica/errors.hpp"
#include "fica/kernels.hpp"

namespace fica {

Scenario scenario_from_int(int k) {
  switch (k) {
    case 1: return Scenario::s1;
    case 2: return Scenario::s2;
    case 3: return Scenario::s3;
    case 4: return Scenario::s4;
  }
  throw ValidationError("scenario must be 1, 2, 3, or 4");
}

StandardizedData preprocess(const DataMatrix& y, Scenario sc, const std::optional<Truth>& truth) {
  const int d = static_cast<int>(y.rows());
  const std::int64_t n = y.cols();
  if (d == 0 || n == 0) throw ValidationError("preprocess: empty data");

  const bool needs_truth = !empirical_centering(sc) || !empirical_whitening(sc);
  if (needs_truth) {
    if (!truth)
      throw ValidationError("preprocess: scenarios 1-3 require population mean and covariance");
    if (truth->mean.size() != d || truth->cov.rows() != d || truth->cov.cols() != d)
      throw ValidationError("preprocess: truth dimensions do not match data");
  }

  StandardizedData out;
  out.scenario = sc;

  if (empirical_centering(sc)) {
    out.center_used.resize(d);
    kernels::row_means(y.data(), d, n, out.center_used.data());
  } else {
    out.center_used = truth->mean;
  }

  if (empirical_whitening(sc)) {
    // The covariance estimate is always built around the population mean when
    // it is available (scenario 3) and around the sample mean otherwise
    // (scenario 4); this matches the centering choice.
    out.sphering = inv_sqrt(covariance(y, empirical_centering(sc)
                                              ? std::nullopt
                                              : std::optional<Vector>(truth->mean)));
  } else {
    out.sphering = inv_sqrt(truth->cov);
  }

  out.x = out.sphering * (y.colwise() - out.center_used);
  return out;
}

}  // namespace fica
