#include <doctest.h>

#include <cmath>
#include <random>

#include "hdist/chain.hpp"
#include "support.hpp"

using namespace hdist;
using hdist::testing::random_admissible_chain;

namespace {

const double L2 = std::log(2.0);
const double L4 = std::log(4.0);

ContractionChain koenigs_chain(double rho) {
  ContractionChain c;
  c.n_min = -5;
  c.spectrum = LyapunovSpectrum({L2}, {1});
  c.epsilon = 0.001;
  JetMap w(1, 1, 2);
  w.set(0, MultiIndex({1}), 0.5);
  w.set(0, MultiIndex({2}), 0.1);
  c.maps.assign(11, w);
  c.radii.assign(11, rho);
  return c;
}

}  // namespace

TEST_CASE("index extension policies") {
  CHECK(wrap_index(3, -2, 2, ExtensionPolicy::Constant) == 2);
  CHECK(wrap_index(-7, -2, 2, ExtensionPolicy::Constant) == -2);
  CHECK(wrap_index(3, -2, 2, ExtensionPolicy::Periodic) == -2);
  CHECK(wrap_index(-3, -2, 2, ExtensionPolicy::Periodic) == 2);
  CHECK(wrap_index(1, -2, 2, ExtensionPolicy::Reject) == 1);
  CHECK_THROWS_AS(wrap_index(3, -2, 2, ExtensionPolicy::Reject), InvalidArgument);
  for (auto p : {ExtensionPolicy::Constant, ExtensionPolicy::Periodic, ExtensionPolicy::Reject})
    CHECK(parse_extension_policy(to_string(p)) == p);
  CHECK_THROWS(parse_extension_policy("mirror"));
}

TEST_CASE("slow sequence validation") {
  SlowSequence s;
  s.n_min = 0;
  s.epsilon = 0.1;
  s.values = {1.0, std::exp(0.1), 1.0, std::exp(-0.05)};
  CHECK(validate_slow(s).pass);
  s.values.push_back(0.5);
  const SlowReport r = validate_slow(s);
  CHECK_FALSE(r.pass);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == 3);
  CHECK(r.worst_log_ratio == doctest::Approx(std::log(std::exp(-0.05) / 0.5)));
}

TEST_CASE("slow minorant is the largest slow sequence below the data") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(30);
    for (double& x : v) x = u(rng);
    const double eps = 0.05;
    const auto m = slow_minorant(v, eps);
    const auto cm = cyclic_slow_minorant(v, eps);
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
      double lin = v[i];
      double cyc = v[i];
      for (int j = 0; j < n; ++j) {
        lin = std::min(lin, v[j] * std::exp(eps * std::abs(i - j)));
        const int d = std::min(std::abs(i - j), n - std::abs(i - j));
        cyc = std::min(cyc, v[j] * std::exp(eps * d));
      }
      CHECK(m[i] == doctest::Approx(lin).epsilon(1e-12));
      CHECK(cm[i] == doctest::Approx(cyc).epsilon(1e-12));
    }
    SlowSequence s{0, m, eps, ExtensionPolicy::Constant};
    CHECK(validate_slow(s).pass);
    CHECK(std::abs(std::log(cm.front() / cm.back())) <= eps * (1 + 1e-12));
  }
}

TEST_CASE("chain accessors extend by policy") {
  ContractionChain c = koenigs_chain(0.004);
  CHECK(c.n_max() == 5);
  CHECK(c.theta() == doctest::Approx(std::exp(-L2 + 0.002)));
  CHECK(c.map(100) == c.maps.back());
  CHECK(extend(c, -100) == c.maps.front());
  c.policy = ExtensionPolicy::Reject;
  CHECK_THROWS_AS(c.map(6), InvalidArgument);
}

TEST_CASE("Koenigs chain validates on a small radius only") {
  // Lip W on |z| <= rho is 0.5 + 0.2 rho, against theta = e^{-log 2 + 0.002}.
  const double rho_max = (std::exp(-L2 + 0.002) - 0.5) / 0.2;
  CHECK(validate_chain(koenigs_chain(0.9 * rho_max)).pass());
  const ChainReport bad = validate_chain(koenigs_chain(1.5 * rho_max));
  CHECK_FALSE(bad.pass());
  CHECK_FALSE(bad.indices[0].lipschitz_ok);
  CHECK(bad.indices[0].lipschitz_sampled <= bad.indices[0].lipschitz_bound);
}

TEST_CASE("chain defects are reported") {
  std::mt19937_64 rng(17);
  const LyapunovSpectrum spec({L4, L2}, {1, 1});
  ContractionChain c = random_admissible_chain(rng, spec, -5, 5, 0.003);
  CHECK(validate_chain(c).pass());

  ContractionChain leak = c;
  leak.maps[2].set(0, MultiIndex({0, 1}), 1e-3);
  CHECK_FALSE(validate_chain(leak).indices[2].block_ok);

  ContractionChain band = c;
  band.maps[4].set(1, MultiIndex({0, 1}), 0.45);
  CHECK_FALSE(validate_chain(band).indices[4].singular_values_ok);

  ContractionChain jump = c;
  jump.radii[3] *= 0.5;
  CHECK_FALSE(validate_chain(jump).radii.pass);
}

TEST_CASE("random admissible chains validate") {
  std::mt19937_64 rng(99);
  const LyapunovSpectrum spec({L4, L2}, {1, 1});
  for (int i = 0; i < 5; ++i) {
    const ContractionChain c = random_admissible_chain(rng, spec, -20, 20, 0.0027);
    const ChainReport r = validate_chain(c, 128, i);
    CHECK(r.pass());
    for (const auto& ix : r.indices) CHECK(ix.lipschitz_sampled <= ix.lipschitz_bound * (1 + 1e-12));
  }
}

TEST_CASE("certified band radius keeps the map near its linear part") {
  std::mt19937_64 rng(23);
  const LyapunovSpectrum spec({L4, L2}, {1, 1});
  const ContractionChain c = random_admissible_chain(rng, spec, 0, 3, 0.003);
  const JetMap& k = c.maps[1];
  const double eps_prime = 0.01;
  const double r = certified_band_radius(k, eps_prime, 1.0);
  REQUIRE(r > 0.0);
  const auto sv = Eigen::JacobiSVD<CMatrix>(k.linear_part()).singularValues();
  const LipschitzRange lr = sampled_lipschitz(k, r, 400, 5);
  CHECK(lr.max_ratio <= sv(0) * std::exp(eps_prime) * (1 + 1e-12));
  CHECK(lr.min_ratio >= sv(1) * std::exp(-eps_prime) * (1 - 1e-12));
}

TEST_CASE("conjugating by the identity keeps the maps") {
  std::mt19937_64 rng(31);
  const LyapunovSpectrum spec({L4, L2}, {1, 1});
  const ContractionChain c = random_admissible_chain(rng, spec, -3, 3, 0.003);
  std::vector<JetMap> id(c.size() + 1, JetMap::identity(2, 3));
  const ContractionChain out = conjugate_chain(id, c, 0.001);
  REQUIRE(out.size() == c.size());
  for (int i = 0; i < c.size(); ++i) CHECK(max_coeff_difference(out.maps[i], c.maps[i]) < 1e-15);
  CHECK_THROWS_AS(conjugate_chain(std::vector<JetMap>(c.size(), JetMap::identity(2, 3)), c, 0.001),
                  DimensionMismatch);
}
