#pragma once

// Memoized vertical integrals of the extension energy,
//   G_r(x) = int_0^r y^b |Delta_b u*(x, y)|^2 dy,
// per (snapshot, r). Readers share the lock; a miss computes outside the lock
// and inserts under the exclusive lock (first writer wins).

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/extension/extended_field.hpp"
#include "fracreg/extension/profile.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::local {

class ExtensionProvider {
 public:
  /// `levels` heights log-spaced on [depth r, r].
  explicit ExtensionProvider(extension::ProfilePtr profile, int levels = 41, double depth = 1e-4)
      : profile_(std::move(profile)), levels_(levels | 1), depth_(depth) {
    require(profile_ != nullptr, ErrorCode::DomainViolation, "provider needs a profile");
    require(levels_ >= 9 && depth_ > 0.0 && depth_ < 1.0, ErrorCode::QuadratureUnresolved,
            "provider needs >= 9 levels and 0 < depth < 1");
  }

  const extension::ExtensionProfile& profile() const { return *profile_; }
  double alpha() const { return profile_->alpha; }

  std::shared_ptr<const spectral::RealField> column(const spectral::SnapshotPtr& snap, double r) const {
    require(std::abs(snap->u.grid->box_length()) > 0.0 && r > 0.0, ErrorCode::DomainViolation,
            "column needs r > 0");
    const Key key{snap.get(), r};
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second.second;
    }
    auto value = std::make_shared<const spectral::RealField>(compute(*snap, r));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.emplace(key, std::make_pair(snap, value));
    return it->second.second;
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  using Key = std::pair<const spectral::Snapshot*, double>;

  spectral::RealField compute(const spectral::Snapshot& s, double r) const {
    const auto& g = s.grid();
    const double b = 3.0 - 2.0 * profile_->alpha;
    const double y_lo = depth_ * r;
    const double dt = std::log(r / y_lo) / (levels_ - 1);
    std::vector<double> ys(levels_);
    for (int k = 0; k < levels_; ++k) ys[k] = y_lo * std::exp(k * dt);
    ys.back() = r;

    // Integer |m|^2 per spectral index; psi is tabulated per distinct |m|^2.
    const std::size_t m = g.spectral_size();
    std::vector<int> msq(m);
    int msq_max = 0;
    for (std::size_t i = 0; i < m; ++i) {
      msq[i] = static_cast<int>(std::lround(g.k2(i) / (g.k0() * g.k0())));
      msq_max = std::max(msq_max, msq[i]);
    }

    std::vector<double> weights(levels_);
    for (int k = 0; k < levels_; ++k) {
      const double simpson = (k == 0 || k == levels_ - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      weights[k] = simpson * dt / 3.0 * std::pow(ys[k], b + 1.0);
    }

    std::vector<spectral::VectorReal> first_two(2);
    std::vector<spectral::RealField> level_density(levels_);
    parallel_for(static_cast<std::size_t>(levels_), [&](std::size_t k) {
      std::vector<double> table(msq_max + 1, 0.0);
      for (int q = 1; q <= msq_max; ++q) {
        const double kk = g.k0() * std::sqrt(static_cast<double>(q));
        table[q] = kk * kk * profile_->psi_at(kk * ys[k]);
      }
      spectral::VectorReal lap;
      for (int c = 0; c < 3; ++c) {
        spectral::SpectralField f(m);
        for (std::size_t i = 0; i < m; ++i) f[i] = s.u.u_hat[c][i] * table[msq[i]];
        lap[c] = g.inverse(f);
      }
      spectral::RealField dens(g.real_size());
      for (std::size_t i = 0; i < dens.size(); ++i)
        dens[i] = lap[0][i] * lap[0][i] + lap[1][i] * lap[1][i] + lap[2][i] * lap[2][i];
      level_density[k] = std::move(dens);
      if (k < 2) first_two[k] = std::move(lap);
    });

    spectral::RealField out(g.real_size(), 0.0);
    for (int k = 0; k < levels_; ++k)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * level_density[k][i];

    // (0, y_lo): Delta_b u* ~ P + Q y^{2 alpha - 2} fitted on the first two levels.
    const double c = 1.0 - b;
    const double y0 = ys[0], y1 = ys[1];
    const double den = std::pow(y1, c) - std::pow(y0, c);
    const double e1 = std::pow(y0, b + 1.0) / (b + 1.0);
    const double e2 = std::pow(y0, b + c + 1.0) / (b + c + 1.0);
    const double e3 = std::pow(y0, b + 2.0 * c + 1.0) / (b + 2.0 * c + 1.0);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (int comp = 0; comp < 3; ++comp) {
        const double l0 = first_two[0][comp][i], l1 = first_two[1][comp][i];
        const double Q = (l1 - l0) / den;
        const double P = l0 - Q * std::pow(y0, c);
        out[i] += P * P * e1 + 2.0 * P * Q * e2 + Q * Q * e3;
      }
    return out;
  }

  extension::ProfilePtr profile_;
  int levels_;
  double depth_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Key, std::pair<spectral::SnapshotPtr, std::shared_ptr<const spectral::RealField>>> cache_;
};

}  // namespace fracreg::local
