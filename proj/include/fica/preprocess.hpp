#pragma once

#include <optional>

#include "fica/linalg.hpp"

namespace fica {

// The four standardization pipelines. Centering and whitening are each either
// theoretical (population quantities supplied by the caller) or empirical
// (estimated from the sample):
//   1: theoretical centering, theoretical whitening   x = Cov(y)^{-1/2}(y - E[y])
//   2: empirical centering,  theoretical whitening    x = Cov(y)^{-1/2}(y - ybar)
//   3: theoretical centering, empirical whitening     x = Ctilde^{-1/2}(y - E[y]),
//      Ctilde = (1/N) sum (y - E[y])(y - E[y])^T
//   4: empirical centering,  empirical whitening      x = Chat^{-1/2}(y - ybar),
//      Chat = (1/N) sum (y - ybar)(y - ybar)^T
enum class Scenario : int { s1 = 1, s2 = 2, s3 = 3, s4 = 4 };

Scenario scenario_from_int(int k);
inline int scenario_id(Scenario sc) { return static_cast<int>(sc); }
inline bool empirical_centering(Scenario sc) { return sc == Scenario::s2 || sc == Scenario::s4; }
inline bool empirical_whitening(Scenario sc) { return sc == Scenario::s3 || sc == Scenario::s4; }

// Population moments of the observations, needed whenever a theoretical
// quantity participates (scenarios 1-3).
struct Truth {
  Vector mean;
  Matrix cov;
};

struct StandardizedData {
  DataMatrix x;       // d x N, centered and sphered
  Matrix sphering;    // the C^{-1/2} actually applied (symmetric root)
  Vector center_used; // the center actually subtracted
  Scenario scenario = Scenario::s1;
};

// truth is required for scenarios 1-3 (never silently replaced by empirical
// estimates); scenario 4 ignores it.
StandardizedData preprocess(const DataMatrix& y, Scenario sc,
                            const std::optional<Truth>& truth = std::nullopt);

}  // namespace fica
