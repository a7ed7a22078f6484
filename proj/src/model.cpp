#include "bayesmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"
#include "bayesmc/rng.hpp"

namespace bayesmc {

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::Grid2D: return "grid2d";
    case Topology::Cube3D: return "cube3d";
    case Topology::RBM: return "rbm";
    case Topology::Custom: return "custom";
  }
  return "custom";
}

Topology topology_from_string(std::string_view name) {
  if (name == "grid2d") return Topology::Grid2D;
  if (name == "cube3d") return Topology::Cube3D;
  if (name == "rbm") return Topology::RBM;
  if (name == "custom") return Topology::Custom;
  throw UnsupportedTopology("unknown topology '" + std::string(name) + "'");
}

BoltzmannModel::BoltzmannModel(std::size_t num_sites, std::vector<Edge> edges,
                               std::vector<double> biases, double beta, Topology topology,
                               std::uint64_t seed)
    : num_sites_(num_sites),
      edges_(std::move(edges)),
      biases_(std::move(biases)),
      beta_(beta),
      topology_(topology),
      seed_(seed) {
  if (num_sites_ == 0) throw DimensionError("model must have at least one site");
  if (biases_.size() != num_sites_) {
    throw DimensionError("bias vector has length " + std::to_string(biases_.size()) +
                         ", expected " + std::to_string(num_sites_));
  }
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) {
    throw InvalidArgument("inverse temperature must be positive and finite");
  }

  std::vector<std::size_t> degree(num_sites_, 0);
  for (auto& e : edges_) {
    if (e.i >= num_sites_ || e.j >= num_sites_) throw DimensionError("edge index out of range");
    if (e.i == e.j) throw InvalidArgument("self-coupling on site " + std::to_string(e.i));
    if (!std::isfinite(e.weight)) throw InvalidArgument("non-finite coupling");
    if (e.i > e.j) std::swap(e.i, e.j);
    ++degree[e.i];
    ++degree[e.j];
  }
  for (double b : biases_) {
    if (!std::isfinite(b)) throw InvalidArgument("non-finite bias");
  }

  offsets_.assign(num_sites_ + 1, 0);
  for (std::size_t s = 0; s < num_sites_; ++s) offsets_[s + 1] = offsets_[s] + degree[s];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[cursor[e.i]++] = {static_cast<std::uint32_t>(e.j), e.weight};
    adjacency_[cursor[e.j]++] = {static_cast<std::uint32_t>(e.i), e.weight};
  }
  for (std::size_t s = 0; s < num_sites_; ++s) {
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[s]);
    auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[s + 1]);
    std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.site < b.site; });
    auto dup = std::adjacent_find(first, last, [](const Neighbor& a, const Neighbor& b) {
      return a.site == b.site;
    });
    if (dup != last) {
      throw InvalidArgument("duplicate coupling between sites " + std::to_string(s) + " and " +
                            std::to_string(dup->site));
    }
  }
}

double BoltzmannModel::coupling(std::size_t i, std::size_t j) const {
  if (i >= num_sites_ || j >= num_sites_) throw DimensionError("site index out of range");
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j,
                             [](const Neighbor& n, std::size_t s) { return n.site < s; });
  return (it != nb.end() && it->site == j) ? it->weight : 0.0;
}

BoltzmannModel BoltzmannModel::with_beta(double beta) const {
  return BoltzmannModel(num_sites_, edges_, biases_, beta, topology_, seed_);
}

// ---------------------------------------------------------------------------

double energy(const BoltzmannModel& model, std::span<const std::uint8_t> bits) {
  if (bits.size() != model.num_sites()) {
    throw DimensionError("state has length " + std::to_string(bits.size()) + ", model has " +
                         std::to_string(model.num_sites()) + " sites");
  }
  double pair = 0.0;
  for (const auto& e : model.edges()) {
    if (bits[e.i] && bits[e.j]) pair += e.weight;
  }
  double field = 0.0;
  auto b = model.biases();
  for (std::size_t s = 0; s < bits.size(); ++s) {
    if (bits[s]) field += b[s];
  }
  return -pair - field;
}

std::vector<double> local_fields(const BoltzmannModel& model, std::span<const std::uint8_t> bits) {
  if (bits.size() != model.num_sites()) throw DimensionError("state length mismatch");
  auto b = model.biases();
  std::vector<double> h(b.begin(), b.end());
  for (std::size_t s = 0; s < bits.size(); ++s) {
    if (!bits[s]) continue;
    for (const auto& nb : model.neighbors(s)) h[nb.site] += nb.weight;
  }
  return h;
}

BitState::BitState(const BoltzmannModel& model, Bits bits) : bits_(std::move(bits)) {
  for (auto& v : bits_) {
    if (v > 1) throw InvalidArgument("state entries must be 0 or 1");
  }
  reanchor(model);
}

void BitState::reanchor(const BoltzmannModel& model) {
  energy_ = bayesmc::energy(model, bits_);
  fields_ = bayesmc::local_fields(model, bits_);
  flips_since_anchor_ = 0;
}

void BitState::flip(const BoltzmannModel& model, std::size_t site) {
  energy_ += flip_delta(site);
  const double sign = bits_[site] ? -1.0 : 1.0;
  bits_[site] ^= 1U;
  for (const auto& nb : model.neighbors(site)) fields_[nb.site] += sign * nb.weight;
  if (++flips_since_anchor_ >= kReanchorInterval) reanchor(model);
}

double delta_energy(const BoltzmannModel& model, const BitState& state, std::size_t site) {
  if (state.size() != model.num_sites()) throw DimensionError("state length mismatch");
  if (site >= state.size()) throw DimensionError("site " + std::to_string(site) + " out of range");
  return state.flip_delta(site);
}

BitState apply_flip(BitState state, std::size_t site, const BoltzmannModel& model) {
  if (site >= state.size()) throw DimensionError("site " + std::to_string(site) + " out of range");
  state.flip(model, site);
  return state;
}

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DimensionError("hamming distance of unequal lengths");
  std::size_t d = 0;
  for (std::size_t s = 0; s < a.size(); ++s) d += (a[s] != b[s]);
  return d;
}

bool satisfies_constraint(std::span<const std::uint8_t> bits, const ConstraintSpec& spec) {
  return hamming_distance(bits, spec.reference) == spec.hamming_distance;
}

// ---------------------------------------------------------------------------

BoltzmannModel build_grid2d(std::size_t width, std::size_t height, double coupling, double bias,
                            double beta) {
  if (width < 3 || height < 3) {
    throw UnsupportedTopology("periodic grid needs width and height >= 3");
  }
  const std::size_t n = width * height;
  std::vector<Edge> edges;
  edges.reserve(2 * n);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t s = y * width + x;
      edges.push_back({s, y * width + (x + 1) % width, coupling});
      edges.push_back({s, ((y + 1) % height) * width + x, coupling});
    }
  }
  return BoltzmannModel(n, std::move(edges), std::vector<double>(n, bias), beta,
                        Topology::Grid2D);
}

BoltzmannModel build_cube3d(std::size_t side, double beta, std::uint64_t seed) {
  if (side < 3) throw UnsupportedTopology("periodic cube needs side >= 3");
  const std::size_t n = side * side * side;
  Rng rng(seed);
  auto index = [side](std::size_t x, std::size_t y, std::size_t z) {
    return (z * side + y) * side + x;
  };
  std::vector<Edge> edges;
  edges.reserve(3 * n);
  for (std::size_t z = 0; z < side; ++z) {
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        const std::size_t s = index(x, y, z);
        const std::size_t nbrs[3] = {index((x + 1) % side, y, z), index(x, (y + 1) % side, z),
                                     index(x, y, (z + 1) % side)};
        for (std::size_t t : nbrs) {
          edges.push_back({s, t, (rng.next_u64() >> 63) ? 1.0 : -1.0});
        }
      }
    }
  }
  return BoltzmannModel(n, std::move(edges), std::vector<double>(n, 0.0), beta, Topology::Cube3D,
                        seed);
}

BoltzmannModel build_rbm(std::size_t num_visible, std::size_t num_hidden, double beta,
                         std::uint64_t seed) {
  if (num_visible == 0 || num_hidden == 0) {
    throw InvalidArgument("RBM needs at least one visible and one hidden unit");
  }
  // Visible units are pixels on a side x side image (row-major); each hidden
  // unit is a Gabor filter centred on a random pixel.
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(num_visible))));
  const double scale = static_cast<double>(side) / 28.0;
  Rng rng(seed);

  std::vector<double> w(num_visible * num_hidden);
  for (std::size_t h = 0; h < num_hidden; ++h) {
    const double cx = static_cast<double>(rng.uniform_index(side));
    const double cy = static_cast<double>(rng.uniform_index(side));
    const double theta = std::numbers::pi * rng.uniform();
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const double sigma = std::max(0.75, scale * (2.0 + 3.0 * rng.uniform()));
    const double wavelength = 2.0 * sigma;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (std::size_t v = 0; v < num_visible; ++v) {
      const double dx = static_cast<double>(v % side) - cx;
      const double dy = static_cast<double>(v / side) - cy;
      const double u = ct * dx + st * dy;
      const double t = -st * dx + ct * dy;
      const double envelope = std::exp(-(u * u + t * t) / (2.0 * sigma * sigma));
      w[h * num_visible + v] =
          envelope * std::cos(2.0 * std::numbers::pi * u / wavelength + phase);
    }
  }

  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(w.size());
  const double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;

  std::vector<Edge> edges;
  edges.reserve(w.size());
  for (std::size_t v = 0; v < num_visible; ++v) {
    for (std::size_t h = 0; h < num_hidden; ++h) {
      edges.push_back({v, num_visible + h, w[h * num_visible + v] * inv_std});
    }
  }
  const std::size_t n = num_visible + num_hidden;
  return BoltzmannModel(n, std::move(edges), std::vector<double>(n, 0.0), beta, Topology::RBM,
                        seed);
}

// ---------------------------------------------------------------------------

nlohmann::json model_to_json(const BoltzmannModel& model) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : model.edges()) edges.push_back({e.i, e.j, e.weight});
  auto b = model.biases();
  return {{"topology", to_string(model.topology())},
          {"n_sites", model.num_sites()},
          {"beta", model.beta()},
          {"edges", std::move(edges)},
          {"biases", std::vector<double>(b.begin(), b.end())},
          {"seed", model.seed()}};
}

BoltzmannModel model_from_json(const nlohmann::json& j) {
  try {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw InvalidArgument("edge must be [i, j, J_ij]");
      edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
    }
    return BoltzmannModel(j.at("n_sites").get<std::size_t>(), std::move(edges),
                          j.at("biases").get<std::vector<double>>(), j.at("beta").get<double>(),
                          topology_from_string(j.at("topology").get<std::string>()),
                          j.value("seed", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("malformed model JSON: ") + ex.what());
  }
}

}  // namespace bayesmc
