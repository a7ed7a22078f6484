#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace bayesmc {

enum class Topology { Grid2D, Cube3D, RBM, Custom };

std::string_view to_string(Topology t);
Topology topology_from_string(std::string_view name);

/// Unordered site pair {i, j} with coupling J_ij. Stored with i < j.
struct Edge {
  std::size_t i;
  std::size_t j;
  double weight;
};

struct Neighbor {
  std::uint32_t site;
  double weight;
};

using Bits = std::vector<std::uint8_t>;

/// Pairwise binary energy model E(x) = -sum_{edges} J_ij x_i x_j - sum_i b_i x_i
/// with Boltzmann weight exp(-beta E(x)). Immutable after construction.
class BoltzmannModel {
 public:
  BoltzmannModel(std::size_t num_sites, std::vector<Edge> edges, std::vector<double> biases,
                 double beta, Topology topology = Topology::Custom, std::uint64_t seed = 0);

  std::size_t num_sites() const noexcept { return num_sites_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  double beta() const noexcept { return beta_; }
  Topology topology() const noexcept { return topology_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const double> biases() const noexcept { return biases_; }

  std::span<const Neighbor> neighbors(std::size_t site) const {
    return {adjacency_.data() + offsets_[site], adjacency_.data() + offsets_[site + 1]};
  }
  std::size_t degree(std::size_t site) const { return offsets_[site + 1] - offsets_[site]; }

  /// J_ij for the unordered pair; 0 when the pair is not coupled.
  double coupling(std::size_t i, std::size_t j) const;

  /// Same model at a different inverse temperature.
  BoltzmannModel with_beta(double beta) const;

 private:
  std::size_t num_sites_;
  std::vector<Edge> edges_;
  std::vector<double> biases_;
  double beta_;
  Topology topology_;
  std::uint64_t seed_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// Hamming-distance constraint: x is admissible iff popcount(x xor c) = n.
struct ConstraintSpec {
  Bits reference;
  std::size_t hamming_distance = 0;

  /// Reference state all-zeros, so n counts the ones.
  static ConstraintSpec ones_count(std::size_t num_sites, std::size_t n) {
    return {Bits(num_sites, 0), n};
  }
};

/// Binary state with cached energy and local fields h_i = sum_j J_ij x_j + b_i.
class BitState {
 public:
  BitState(const BoltzmannModel& model, Bits bits);

  std::size_t size() const noexcept { return bits_.size(); }
  const Bits& bits() const noexcept { return bits_; }
  std::uint8_t bit(std::size_t site) const { return bits_[site]; }
  double energy() const noexcept { return energy_; }
  std::span<const double> local_fields() const noexcept { return fields_; }
  double local_field(std::size_t site) const { return fields_[site]; }

  /// E(x with `site` flipped) - E(x). No range check.
  double flip_delta(std::size_t site) const {
    return (bits_[site] ? 1.0 : -1.0) * fields_[site];
  }

  /// Toggles `site`, updating energy and neighbour fields in O(degree).
  /// Re-anchors from scratch every kReanchorInterval flips.
  void flip(const BoltzmannModel& model, std::size_t site);

  /// Recomputes energy and local fields from scratch.
  void reanchor(const BoltzmannModel& model);

  static constexpr std::size_t kReanchorInterval = 10'000;

  friend bool operator==(const BitState& a, const BitState& b) { return a.bits_ == b.bits_; }

 private:
  Bits bits_;
  double energy_ = 0.0;
  std::vector<double> fields_;
  std::size_t flips_since_anchor_ = 0;
};

double energy(const BoltzmannModel& model, std::span<const std::uint8_t> bits);
std::vector<double> local_fields(const BoltzmannModel& model, std::span<const std::uint8_t> bits);
double delta_energy(const BoltzmannModel& model, const BitState& state, std::size_t site);
BitState apply_flip(BitState state, std::size_t site, const BoltzmannModel& model);

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
bool satisfies_constraint(std::span<const std::uint8_t> bits, const ConstraintSpec& spec);

/// Periodic width x height lattice, degree 4, uniform coupling and bias.
BoltzmannModel build_grid2d(std::size_t width, std::size_t height, double coupling, double bias,
                            double beta);
/// Periodic side^3 lattice, degree 6, J_ij drawn uniformly from {-1, +1}.
BoltzmannModel build_cube3d(std::size_t side, double beta, std::uint64_t seed);
/// Complete bipartite visible/hidden model with synthetic Gabor-filter weights.
/// Sites [0, num_visible) are visible, the rest hidden.
BoltzmannModel build_rbm(std::size_t num_visible, std::size_t num_hidden, double beta,
                         std::uint64_t seed);

nlohmann::json model_to_json(const BoltzmannModel& model);
BoltzmannModel model_from_json(const nlohmann::json& j);

}  // namespace bayesmc
