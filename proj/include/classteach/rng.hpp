#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace classteach {

// splitmix64 output scrambler (Steele, Lea & Flood 2014). Used for seed
// expansion and for deriving per-group / per-cell seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a sub-stream seed from a master seed. mix_seed(master, 0) is the
// master itself, so "stream 0" of any run continues the master stream.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt) {
  if (salt == 0) return master;
  std::uint64_t s = master ^ (0x9E3779B97F4A7C15ULL * salt);
  return splitmix64(s);
}

// xoshiro256** 1.0 (Blackman & Vigna 2018), seeded through splitmix64.
// All randomness in the library flows through this generator so that runs
// are reproducible across platforms and re-implementations:
//   - uniform doubles take the top 53 bits: (next() >> 11) * 2^-53
//   - normals use Box-Muller; one pair per two uniforms, u1 shifted into
//     (0,1]; vector fills consume both branches, a lone scalar draw only
//     the cosine branch
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) via the multiply-shift reduction.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // One standard normal draw; consumes two uniforms, keeps the cosine branch.
  double normal() {
    double z0, z1;
    normal_pair(z0, z1);
    return z0;
  }

  // Box-Muller pair. u1 is shifted into (0, 1] to keep the log finite.
  void normal_pair(double& z0, double& z1) {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    z0 = r * std::cos(theta);
    z1 = r * std::sin(theta);
  }

  // d iid standard normals, filled pairwise; an odd tail uses z0 only.
  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd v(d);
    Eigen::Index i = 0;
    while (i + 1 < d) {
      normal_pair(v[i], v[i + 1]);
      i += 2;
    }
    if (i < d) v[i] = normal();
    return v;
  }

  // Uniform direction on the unit sphere in R^d.
  Eigen::VectorXd unit_vector(Eigen::Index d) {
    for (;;) {
      Eigen::VectorXd v = normal_vector(d);
      const double n = v.norm();
      if (n > 1e-300) return v / n;
    }
  }

  // Uniform draw from the ball of the given radius: direction * radius*U^(1/d).
  Eigen::VectorXd ball_vector(Eigen::Index d, double radius) {
    Eigen::VectorXd dir = unit_vector(d);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(d));
    return r * dir;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace classteach
